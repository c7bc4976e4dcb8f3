#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "mae/types.hpp"

namespace mae {

inline constexpr int kModelFormatVersion = 1;

/// Versioned JSON document:
/// {"format":"modular-ae","version":1,"dim":D,"hidden":P,"num_modules":M,"lambda":x,
///  "modules":[{"A":[[...]],"B":[[...]]},...]}
/// Matrices are row-major nested arrays. Doubles are written in shortest
/// round-trip form, so load_model(save_model(m)) is exact.
nlohmann::json model_to_json(const ModularAEd& model);
ModularAEd model_from_json(const nlohmann::json& doc);

void save_model(const ModularAEd& model, std::ostream& out);
ModularAEd load_model(std::istream& in);

void save_model_file(const ModularAEd& model, const std::string& path);
ModularAEd load_model_file(const std::string& path);

}  // namespace mae
