#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace mae {

/// Seedable generator with a fully specified output sequence.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the C++ standard.
/// The distributions are implemented here instead of using <random>'s, which are
/// implementation-defined:
///   uniform():      top 53 bits of one draw scaled by 2^-53, in [0, 1).
///   uniform_int(n): rejection sampling on one draw to remove modulo bias; n = 0 throws.
///   normal():       Box-Muller; each pair of uniforms yields two variates,
///                   the second is cached and returned on the next call.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t uniform_int(std::uint64_t n);

  double normal();

  /// In-place Fisher-Yates shuffle; draws uniform_int(i + 1) for i = n-1 down to 1.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Per-purpose seed: mix64(root ^ fnv1a64(tag) + index * golden-ratio constant).
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index = 0);

}  // namespace mae
