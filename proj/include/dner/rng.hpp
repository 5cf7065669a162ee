#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace dner {

// Deterministic random source. All randomness in the toolkit flows from one
// user-visible seed through named streams ("shuffle", "dropout", "init",
// "synth", "oov", ...), so a component keeps its random sequence even when
// unrelated components change how much randomness they draw.
//
// Draws are implemented by hand on top of the raw 64-bit engine output
// because the standard distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Stream derived from (seed, name); distinct names give independent streams.
  static Rng derive(std::uint64_t seed, std::string_view stream);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  // Fisher-Yates; pinned here so shuffles are reproducible across platforms.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t fnv1a64(std::string_view s);

}  // namespace dner
