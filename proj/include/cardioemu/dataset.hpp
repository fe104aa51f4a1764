#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cardioemu/params.hpp"
#include "cardioemu/trajectory.hpp"

namespace cardioemu {

// One (theta, trajectory) pair. The target trajectory holds the physical
// traces only; its row 0 equals initial_state and its grid covers exactly
// [0, t_hb].
struct TrainingSample {
  Eigen::VectorXd theta;
  Eigen::VectorXd initial_state;  // physical values at t = 0
  Trajectory target;
  double t_hb = 0.854;
  double av_delay = 0.15;
  std::vector<std::string> warnings;

  void validate(const ParameterSpace& space, int n_traces) const;
};

struct Dataset {
  ParameterSpace space;
  std::vector<std::string> trace_labels = physical_state_labels();
  std::vector<TrainingSample> samples;
  std::uint64_t seed = 0;
  std::string generator = "";

  std::size_t size() const { return samples.size(); }
  int n_traces() const { return static_cast<int>(trace_labels.size()); }
  void validate() const;
};

// Layout: <dir>/manifest.json plus <dir>/samples/sample_%05d.csv in the
// trajectory CSV schema. Ingestion accepts any directory matching it.
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& dir);

// Index split helpers shared by training and the CLI.
std::pair<std::vector<int>, std::vector<int>> split_head_tail(std::size_t n, std::size_t n_tail);

}  // namespace cardioemu
