#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace cardioemu {

// 32-bit Sobol' low-discrepancy sequence with hash-based Owen scrambling.
// Points are randomly accessible by index; the seed controls the scrambling
// (and nothing else), so a fixed seed gives a reproducible stream.
class SobolSequence {
 public:
  SobolSequence(int dim, std::uint64_t seed, bool scramble = true);

  int dim() const { return dim_; }

  // Point for a given index into out[0..dim), each coordinate in [0, 1).
  void point(std::uint64_t index, double* out) const;

  // Rows 0..n-1 of the sequence.
  Eigen::MatrixXd generate(std::uint64_t n) const;

 private:
  int dim_;
  bool scramble_;
  std::vector<std::uint32_t> directions_;  // dim_ x 32, row-major
  std::vector<std::uint32_t> value_seeds_;
};

}  // namespace cardioemu
