#include "cardioemu/sobol_seq.hpp"

#include <bit>

#include "cardioemu/detail/sobol_directions.hpp"
#include "cardioemu/errors.hpp"
#include "cardioemu/rng.hpp"

namespace cardioemu {

namespace {

constexpr int kBits = 32;

std::uint32_t reverse_bits(std::uint32_t x) {
  x = (x << 16) | (x >> 16);
  x = ((x & 0x00ff00ffu) << 8) | ((x & 0xff00ff00u) >> 8);
  x = ((x & 0x0f0f0f0fu) << 4) | ((x & 0xf0f0f0f0u) >> 4);
  x = ((x & 0x33333333u) << 2) | ((x & 0xccccccccu) >> 2);
  x = ((x & 0x55555555u) << 1) | ((x & 0xaaaaaaaau) >> 1);
  return x;
}

// Laine-Karras style hash: acting in reversed-bit space it perturbs each bit
// using only earlier (more significant, once reversed back) bits, which makes
// the whole thing a valid nested uniform scramble.
std::uint32_t laine_karras(std::uint32_t x, std::uint32_t seed) {
  x += seed;
  x ^= x * 0x6c50b47cu;
  x ^= x * 0xb82f1e52u;
  x ^= x * 0xc7afe638u;
  x ^= x * 0x8d22f6e6u;
  return x;
}

std::uint32_t owen_scramble(std::uint32_t x, std::uint32_t seed) {
  return reverse_bits(laine_karras(reverse_bits(x), seed));
}

}  // namespace

SobolSequence::SobolSequence(int dim, std::uint64_t seed, bool scramble)
    : dim_(dim), scramble_(scramble) {
  if (dim < 1) throw ConfigError("sobol: dimension must be >= 1");
  if (dim > detail::kSobolTableDims) {
    throw ConfigError("sobol: dimension exceeds the direction-number table (" +
                      std::to_string(detail::kSobolTableDims) + ")");
  }
  directions_.assign(static_cast<std::size_t>(dim) * kBits, 0);
  for (int d = 0; d < dim; ++d) {
    std::uint32_t* v = directions_.data() + static_cast<std::size_t>(d) * kBits;
    if (d == 0) {
      // First dimension is the van der Corput sequence.
      for (int j = 0; j < kBits; ++j) v[j] = 1u << (kBits - 1 - j);
      continue;
    }
    const std::uint32_t poly = detail::kSobolPoly[d - 1];
    const int degree = 31 - std::countl_zero(poly);
    for (int j = 0; j < degree; ++j) {
      v[j] = detail::kSobolMinit[d - 1][j] << (kBits - 1 - j);
    }
    for (int j = degree; j < kBits; ++j) {
      std::uint32_t acc = v[j - degree] ^ (v[j - degree] >> degree);
      for (int k = 1; k < degree; ++k) {
        if ((poly >> (degree - k)) & 1u) acc ^= v[j - k];
      }
      v[j] = acc;
    }
  }

  value_seeds_.resize(static_cast<std::size_t>(dim));
  Rng rng(seed);
  for (int d = 0; d < dim; ++d) {
    value_seeds_[static_cast<std::size_t>(d)] = rng.next_u32();
  }
}

void SobolSequence::point(std::uint64_t index, double* out) const {
  for (int d = 0; d < dim_; ++d) {
    const std::uint32_t* v = directions_.data() + static_cast<std::size_t>(d) * kBits;
    std::uint32_t x = 0;
    std::uint64_t bits = index;
    int j = 0;
    while (bits != 0 && j < kBits) {
      if (bits & 1ull) x ^= v[j];
      bits >>= 1;
      ++j;
    }
    if (scramble_) {
      x = owen_scramble(x, value_seeds_[static_cast<std::size_t>(d)]);
    }
    out[d] = static_cast<double>(x) * 0x1.0p-32;
  }
}

Eigen::MatrixXd SobolSequence::generate(std::uint64_t n) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), dim_);
  std::vector<double> row(static_cast<std::size_t>(dim_));
  for (std::uint64_t i = 0; i < n; ++i) {
    point(i, row.data());
    for (int d = 0; d < dim_; ++d) out(static_cast<Eigen::Index>(i), d) = row[d];
  }
  return out;
}

}  // namespace cardioemu
