#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cardioemu/dataset.hpp"
#include "cardioemu/lnode.hpp"

namespace cardioemu {

// Composite loss: normalized trajectory mismatch plus weighted derivative,
// max, min, latent-endpoint and weight-regularization terms.
struct LossConfig {
  double alpha = 0.1;  // derivative mismatch
  double beta = 0.1;   // max mismatch
  double gamma = 0.1;  // min mismatch
  double eta = 0.1;    // latent endpoint penalty
  double iota = 0.0;   // L2 weight regularization
  double dt_ref = 0.0285;       // loss quadrature step
  double integrator_dt = 1e-3;  // forward Euler step
  Eigen::VectorXd z_norm;       // per physical trace
  Eigen::VectorXd z_norm_diff;
  Eigen::VectorXd z_norm_max;
  Eigen::VectorXd z_norm_min;

  void validate(int n_traces) const;
};

// Per-trace normalization stats measured on a training split: center and
// half-range of every trace, plus the derived loss normalizers.
struct NormStats {
  Eigen::VectorXd center;
  Eigen::VectorXd half_range;
};

NormStats compute_norm_stats(const Dataset& dataset, const std::vector<int>& indices);

struct LossResult {
  double value = 0.0;
  Eigen::VectorXd gradient;  // [flat weights, latent initial condition]
};

// Full-batch loss and exact gradient via backprop through the unrolled Euler
// integration. Per-sample terms are averaged; the iota term is added once.
// Sample evaluations may run on a worker pool; the reduction is a fixed-order
// serial sum so results do not depend on the worker count.
LossResult loss(const LnodeModel& model, const Dataset& dataset, const std::vector<int>& batch,
                const LossConfig& cfg, int workers = 1);

double loss_value(const LnodeModel& model, const Dataset& dataset, const std::vector<int>& batch,
                  const LossConfig& cfg, int workers = 1);

struct HyperConfig {
  int layers = 3;
  int neurons = 13;
  int num_states = 8;
  double dt_ref = 0.0285;
  double iota = 0.023;
};

struct HyperRanges {
  int layers_lo = 1, layers_hi = 7;
  int neurons_lo = 5, neurons_hi = 50;
  int states_lo = 8, states_hi = 12;
  double dt_ref_lo = 1e-3, dt_ref_hi = 0.1;
  double iota_lo = 1e-4, iota_hi = 1.0;
};

struct TrainOptions {
  int adam_iters = 1000;
  int bfgs_iters = 10000;
  double adam_lr = 1e-2;
  double integrator_dt = 1e-3;
  double alpha = 0.1, beta = 0.1, gamma = 0.1, eta = 0.1;
  int workers = 1;
  std::vector<int> train_indices;  // empty = all samples
  std::vector<int> valid_indices;  // empty = select on training loss
  bool verbose = false;
};

struct LossHistoryEntry {
  int iter = 0;
  std::string phase;  // "adam" | "bfgs"
  double train_loss = 0.0;
  double valid_loss = 0.0;  // NaN when no validation split
};

struct FitReport {
  std::string split_name;
  std::vector<std::string> trace_labels;
  Eigen::VectorXd nrmse;
  Eigen::VectorXd r2_percent;
  std::vector<LossHistoryEntry> history;
};

struct TrainResult {
  LnodeModel model;
  FitReport report;
  double best_selection_loss = 0.0;
  int adam_restarts = 0;
};

// Glorot init, adam_iters of Adam (restarting with lr/10 on divergence, at
// most twice), then up to bfgs_iters of L-BFGS with strong Wolfe; returns the
// checkpoint with the best validation loss seen across both phases.
TrainResult train(const Dataset& dataset, const HyperConfig& hyper, std::uint64_t seed,
                  const TrainOptions& opts = {});

struct KfoldFold {
  std::vector<int> train;
  std::vector<int> valid;
};

// Disjoint, exhaustive folds with sizes differing by at most one.
std::vector<KfoldFold> kfold_split(std::size_t n_samples, int k, std::uint64_t seed);

struct HyperTrialRow {
  HyperConfig config;
  // Mean K-fold validation loss per rung; NaN where the trial was culled.
  Eigen::Vector3d rung_scores{NAN, NAN, NAN};
};

struct HyperSearchResult {
  HyperConfig best;
  double best_score = 0.0;
  std::vector<HyperTrialRow> table;
};

// Random search over the hypercube with synchronous successive halving:
// rungs run {1/4, 1/2, 1} of the iteration budget and keep the best third.
HyperSearchResult hyper_search(const HyperRanges& ranges, int budget, const Dataset& dataset,
                               std::uint64_t seed, const TrainOptions& base, int k_folds);

// Per-trace NRMSE (RMSE over all samples and times divided by the trace's
// range over the test set) and R^2 in percent.
FitReport evaluate(const LnodeModel& model, const Dataset& dataset,
                   const std::vector<int>& indices, double integrator_dt = 1e-3, int workers = 1,
                   const std::string& split_name = "test");

}  // namespace cardioemu
