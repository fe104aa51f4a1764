#include "cardioemu/params.hpp"

#include <set>

#include "cardioemu/errors.hpp"

namespace cardioemu {

ParameterSpace::ParameterSpace(std::vector<ParameterEntry> entries) : entries_(std::move(entries)) {
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    if (!(e.lower < e.upper)) {
      throw ConfigError("parameter '" + e.name + "': lower bound must be < upper bound");
    }
    if (!seen.insert(e.name).second) {
      throw ConfigError("duplicate parameter name '" + e.name + "'");
    }
  }
}

int ParameterSpace::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

ParameterSpace ParameterSpace::subset(const std::vector<std::string>& names) const {
  std::vector<ParameterEntry> out;
  for (const auto& n : names) {
    const int idx = index_of(n);
    if (idx < 0) throw ConfigError("unknown parameter '" + n + "'");
    out.push_back(entries_[static_cast<std::size_t>(idx)]);
  }
  return ParameterSpace(std::move(out));
}

Eigen::VectorXd ParameterSpace::lower() const {
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); ++i) v[i] = entries_[static_cast<std::size_t>(i)].lower;
  return v;
}

Eigen::VectorXd ParameterSpace::upper() const {
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); ++i) v[i] = entries_[static_cast<std::size_t>(i)].upper;
  return v;
}

Eigen::VectorXd ParameterSpace::midpoint() const { return 0.5 * (lower() + upper()); }

Eigen::VectorXd ParameterSpace::normalize(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  check_size(theta);
  Eigen::VectorXd out(size());
  for (int i = 0; i < size(); ++i) {
    const auto& e = entries_[static_cast<std::size_t>(i)];
    out[i] = 2.0 * (theta[i] - e.lower) / (e.upper - e.lower) - 1.0;
  }
  return out;
}

Eigen::VectorXd ParameterSpace::denormalize(const Eigen::Ref<const Eigen::VectorXd>& unit) const {
  check_size(unit);
  Eigen::VectorXd out(size());
  for (int i = 0; i < size(); ++i) {
    const auto& e = entries_[static_cast<std::size_t>(i)];
    out[i] = e.lower + 0.5 * (unit[i] + 1.0) * (e.upper - e.lower);
  }
  return out;
}

void ParameterSpace::check_size(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  if (theta.size() != size()) {
    throw ShapeError("parameter vector length does not match the space");
  }
}

void ParameterSpace::check_within_bounds(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  check_size(theta);
  for (int i = 0; i < size(); ++i) {
    const auto& e = entries_[static_cast<std::size_t>(i)];
    if (theta[i] < e.lower || theta[i] > e.upper) {
      throw ConfigError("parameter '" + e.name + "' out of bounds");
    }
  }
}

}  // namespace cardioemu
