#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace cardioemu {

struct ParameterEntry {
  std::string name;
  std::string unit;
  double lower = 0.0;
  double upper = 1.0;
};

// Ordered, named, bounded physical parameters. Defines the layout and affine
// [-1, 1] normalization of every theta vector in the pipeline.
class ParameterSpace {
 public:
  ParameterSpace() = default;
  explicit ParameterSpace(std::vector<ParameterEntry> entries);

  int size() const { return static_cast<int>(entries_.size()); }
  const ParameterEntry& entry(int i) const { return entries_[static_cast<std::size_t>(i)]; }
  const std::vector<ParameterEntry>& entries() const { return entries_; }

  // Index of a named entry; -1 if absent.
  int index_of(const std::string& name) const;
  bool contains(const std::string& name) const { return index_of(name) >= 0; }

  ParameterSpace subset(const std::vector<std::string>& names) const;

  Eigen::VectorXd lower() const;
  Eigen::VectorXd upper() const;
  Eigen::VectorXd midpoint() const;

  // Affine map into [-1, 1] per coordinate and back.
  Eigen::VectorXd normalize(const Eigen::Ref<const Eigen::VectorXd>& theta) const;
  Eigen::VectorXd denormalize(const Eigen::Ref<const Eigen::VectorXd>& unit) const;

  void check_within_bounds(const Eigen::Ref<const Eigen::VectorXd>& theta) const;
  void check_size(const Eigen::Ref<const Eigen::VectorXd>& theta) const;

  bool operator==(const ParameterSpace&) const = default;

 private:
  std::vector<ParameterEntry> entries_;
};

}  // namespace cardioemu
