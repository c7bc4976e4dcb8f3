#include "mae/model_io.hpp"

#include <fstream>
#include <iostream>

namespace mae {

namespace {

nlohmann::json matrix_to_json(const Mat<double>& m) {
  auto rows = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat<double> matrix_from_json(const nlohmann::json& rows, Index expected_rows, Index expected_cols,
                             const std::string& what) {
  if (!rows.is_array()) throw ParseError(what + " is not an array");
  if (static_cast<Index>(rows.size()) != expected_rows)
    throw ShapeError(what + " has " + std::to_string(rows.size()) + " rows, expected " +
                     std::to_string(expected_rows));
  Mat<double> m(expected_rows, expected_cols);
  for (Index r = 0; r < expected_rows; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array()) throw ParseError(what + " row " + std::to_string(r) + " is not an array");
    if (static_cast<Index>(row.size()) != expected_cols)
      throw ShapeError(what + " row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                       " columns, expected " + std::to_string(expected_cols));
    for (Index c = 0; c < expected_cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw ParseError(what + " entry (" + std::to_string(r) + "," + std::to_string(c) + ") is not a number");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

template <typename T>
T required(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key)) throw ParseError(std::string("model document missing \"") + key + "\"");
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model field \"") + key + "\" has wrong type: " + e.what());
  }
}

}  // namespace

nlohmann::json model_to_json(const ModularAEd& model) {
  validate(model);
  nlohmann::json doc;
  doc["format"] = "modular-ae";
  doc["version"] = kModelFormatVersion;
  doc["dim"] = model.dim();
  doc["hidden"] = model.hidden();
  doc["num_modules"] = model.num_modules();
  doc["lambda"] = model.lambda;
  auto modules = nlohmann::json::array();
  for (const auto& m : model.modules) modules.push_back({{"A", matrix_to_json(m.decoder)}, {"B", matrix_to_json(m.encoder)}});
  doc["modules"] = std::move(modules);
  return doc;
}

ModularAEd model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("model document is not a JSON object");
  if (required<std::string>(doc, "format") != "modular-ae") throw ParseError("model document has unknown format tag");
  const int version = required<int>(doc, "version");
  if (version != kModelFormatVersion)
    throw UnsupportedVersionError("unsupported model format version " + std::to_string(version));

  const auto dim = required<Index>(doc, "dim");
  const auto hidden = required<Index>(doc, "hidden");
  const auto num_modules = required<Index>(doc, "num_modules");
  if (dim < 1 || hidden < 1 || num_modules < 1) throw ShapeError("model dimensions must be positive");

  ModularAEd model;
  model.lambda = required<double>(doc, "lambda");
  if (!doc.contains("modules") || !doc["modules"].is_array()) throw ParseError("model document missing \"modules\" array");
  const auto& modules = doc["modules"];
  if (static_cast<Index>(modules.size()) != num_modules)
    throw ShapeError("num_modules = " + std::to_string(num_modules) + " but " + std::to_string(modules.size()) +
                     " modules present");
  for (std::size_t i = 0; i < modules.size(); ++i) {
    const auto& entry = modules[i];
    const std::string tag = "module " + std::to_string(i);
    if (!entry.is_object() || !entry.contains("A") || !entry.contains("B")) throw ParseError(tag + " lacks A or B");
    AEModuled m;
    m.decoder = matrix_from_json(entry["A"], dim, hidden, tag + " A");
    m.encoder = matrix_from_json(entry["B"], hidden, dim, tag + " B");
    model.modules.push_back(std::move(m));
  }
  validate(model);
  return model;
}

void save_model(const ModularAEd& model, std::ostream& out) {
  out << model_to_json(model).dump() << '\n';
  if (!out) throw Error("failed to write model document");
}

ModularAEd load_model(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed model document: ") + e.what());
  }
  return model_from_json(doc);
}

void save_model_file(const ModularAEd& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  save_model(model, out);
}

ModularAEd load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return load_model(in);
}

}  // namespace mae
