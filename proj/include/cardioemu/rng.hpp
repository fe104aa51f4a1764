#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cardioemu {

// splitmix64 step; used for seed mixing and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic portable random stream. Raw bits come from std::mt19937_64
// (bit-reproducible across platforms per the standard); floating-point
// extraction is done by hand because the standard distributions are
// implementation-defined. Sub-streams for independent work items come from
// fork(stream), which mixes (root seed, stream index) through splitmix64, so
// forked streams are stable no matter how much the parent has consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : root_(seed), engine_(mix_seed(seed)) {}

  Rng fork(std::uint64_t stream) const {
    std::uint64_t s = root_ ^ (0x5851f42d4c957f2dull * (stream + 1));
    splitmix64(s);
    return Rng(s);
  }

  std::uint64_t next_u64() { return engine_(); }

  std::uint32_t next_u32() { return static_cast<std::uint32_t>(engine_() >> 32); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive integer range. Modulo bias is below 2^-32 for the spans used
  // here (hyperparameter grids, fold shuffles).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

  // Standard normal via Box-Muller; the spare value is cached so draws cost
  // one transcendental pair per two samples.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t root_seed() const { return root_; }

 private:
  static std::uint64_t mix_seed(std::uint64_t seed) {
    std::uint64_t s = seed;
    return splitmix64(s);
  }

  std::uint64_t root_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cardioemu
