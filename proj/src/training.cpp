#include "cardioemu/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cardioemu/errors.hpp"
#include "cardioemu/optim.hpp"
#include "cardioemu/parallel.hpp"
#include "cardioemu/rng.hpp"

namespace cardioemu {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> all_indices(std::size_t n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

double shared_t_hb(const Dataset& dataset, const std::vector<int>& indices) {
  double t_hb = dataset.samples[static_cast<std::size_t>(indices.front())].t_hb;
  for (int i : indices) {
    if (std::abs(dataset.samples[static_cast<std::size_t>(i)].t_hb - t_hb) > 1e-9 * t_hb) {
      throw ConfigError("training requires all samples to share t_hb");
    }
  }
  return t_hb;
}

// Bracketing node and upper-node weight of t inside a trajectory grid.
void locate(const Eigen::VectorXd& times, double t, Eigen::Index& lo, double& w_hi) {
  const Eigen::Index n = times.size();
  if (t <= times[0]) {
    lo = 0;
    w_hi = 0.0;
    return;
  }
  if (t >= times[n - 1]) {
    lo = n - 2;
    w_hi = 1.0;
    return;
  }
  Eigen::Index a = 0;
  Eigen::Index b = n - 1;
  while (b - a > 1) {
    const Eigen::Index mid = (a + b) / 2;
    if (times[mid] <= t) {
      a = mid;
    } else {
      b = mid;
    }
  }
  lo = a;
  w_hi = (t - times[a]) / (times[b] - times[a]);
}

struct SampleLossScratch {
  Eigen::MatrixXd y;        // quadrature values, (Q+1) x n_traces
  Eigen::MatrixXd y_cot;    // dL/dy
  Eigen::MatrixXd node_cot; // rows x n_states
};

// Loss terms and (optionally) the gradient for one sample. Returns the value;
// fills grad (= [weights, latent]) when grad != nullptr.
double sample_loss(const LnodeModel& model, const TrainingSample& sample, const LossConfig& cfg,
                   SampleLossScratch& scratch, Eigen::VectorXd* grad) {
  const int n_traces = static_cast<int>(sample.target.n_states());
  const int nz = model.n_states();
  const int n_latent = model.n_latent();
  const CycleContext ctx{sample.t_hb, sample.av_delay, cfg.integrator_dt};

  Eigen::VectorXd z0(nz);
  z0.head(n_traces) = sample.initial_state;
  z0.tail(n_latent) = model.latent_ic;
  const Trajectory traj = integrate(model, z0, sample.theta, ctx);

  // Quadrature grid and target resampled onto it.
  const Eigen::VectorXd quad_times = make_time_grid(sample.t_hb, cfg.dt_ref);
  const Eigen::Index nq = quad_times.size();
  Eigen::MatrixXd target = resample_states(sample.target, quad_times);

  scratch.y.resize(nq, n_traces);
  std::vector<Eigen::Index> node_lo(static_cast<std::size_t>(nq));
  std::vector<double> w_hi(static_cast<std::size_t>(nq));
  for (Eigen::Index q = 0; q < nq; ++q) {
    locate(traj.times, quad_times[q], node_lo[static_cast<std::size_t>(q)],
           w_hi[static_cast<std::size_t>(q)]);
    const Eigen::Index lo = node_lo[static_cast<std::size_t>(q)];
    const double w = w_hi[static_cast<std::size_t>(q)];
    for (int j = 0; j < n_traces; ++j) {
      scratch.y(q, j) = (1.0 - w) * traj.states(lo, j) + w * traj.states(lo + 1, j);
    }
  }

  const bool want_grad = grad != nullptr;
  if (want_grad) {
    scratch.y_cot.setZero(nq, n_traces);
  }

  double value = 0.0;
  for (int j = 0; j < n_traces; ++j) {
    const double inv_norm2 = 1.0 / (cfg.z_norm[j] * cfg.z_norm[j]);
    const double inv_diff2 = 1.0 / (cfg.z_norm_diff[j] * cfg.z_norm_diff[j]);

    // Trajectory mismatch, left-rectangle rule.
    for (Eigen::Index q = 0; q + 1 < nq; ++q) {
      const double wq = quad_times[q + 1] - quad_times[q];
      const double r = scratch.y(q, j) - target(q, j);
      value += wq * r * r * inv_norm2;
      if (want_grad) scratch.y_cot(q, j) += 2.0 * wq * r * inv_norm2;
    }

    // Derivative mismatch via forward differences on the quadrature grid.
    if (cfg.alpha != 0.0) {
      for (Eigen::Index q = 0; q + 1 < nq; ++q) {
        const double dq = quad_times[q + 1] - quad_times[q];
        const double dy = (scratch.y(q + 1, j) - scratch.y(q, j)) / dq;
        const double dt_target = (target(q + 1, j) - target(q, j)) / dq;
        const double r = dy - dt_target;
        value += cfg.alpha * dq * r * r * inv_diff2;
        if (want_grad) {
          const double c = cfg.alpha * 2.0 * r * inv_diff2;
          scratch.y_cot(q + 1, j) += c;
          scratch.y_cot(q, j) -= c;
        }
      }
    }

    // Max/min mismatch over the quadrature grid; the gradient flows through
    // the first arg-extremum.
    if (cfg.beta != 0.0 || cfg.gamma != 0.0) {
      Eigen::Index arg_max = 0;
      Eigen::Index arg_min = 0;
      double y_max = scratch.y(0, j);
      double y_min = scratch.y(0, j);
      double t_max = target(0, j);
      double t_min = target(0, j);
      for (Eigen::Index q = 1; q < nq; ++q) {
        if (scratch.y(q, j) > y_max) {
          y_max = scratch.y(q, j);
          arg_max = q;
        }
        if (scratch.y(q, j) < y_min) {
          y_min = scratch.y(q, j);
          arg_min = q;
        }
        t_max = std::max(t_max, target(q, j));
        t_min = std::min(t_min, target(q, j));
      }
      const double inv_max2 = 1.0 / (cfg.z_norm_max[j] * cfg.z_norm_max[j]);
      const double inv_min2 = 1.0 / (cfg.z_norm_min[j] * cfg.z_norm_min[j]);
      const double rmax = y_max - t_max;
      const double rmin = y_min - t_min;
      value += cfg.beta * rmax * rmax * inv_max2 + cfg.gamma * rmin * rmin * inv_min2;
      if (want_grad) {
        scratch.y_cot(arg_max, j) += cfg.beta * 2.0 * rmax * inv_max2;
        scratch.y_cot(arg_min, j) += cfg.gamma * 2.0 * rmin * inv_min2;
      }
    }
  }

  // Latent endpoint penalty.
  if (n_latent > 0 && cfg.eta != 0.0) {
    value += cfg.eta * (model.latent_ic.squaredNorm() +
                        traj.states.row(traj.rows() - 1).tail(n_latent).squaredNorm());
  }

  if (!std::isfinite(value)) {
    throw DivergenceError("loss is not finite");
  }
  if (!want_grad) return value;

  // Scatter quadrature cotangents onto the integrator grid and run the
  // reverse sweep.
  scratch.node_cot.setZero(traj.rows(), nz);
  for (Eigen::Index q = 0; q < nq; ++q) {
    const Eigen::Index lo = node_lo[static_cast<std::size_t>(q)];
    const double w = w_hi[static_cast<std::size_t>(q)];
    for (int j = 0; j < n_traces; ++j) {
      const double c = scratch.y_cot(q, j);
      if (c == 0.0) continue;
      scratch.node_cot(lo, j) += (1.0 - w) * c;
      scratch.node_cot(lo + 1, j) += w * c;
    }
  }
  if (n_latent > 0 && cfg.eta != 0.0) {
    scratch.node_cot.row(0).tail(n_latent) += 2.0 * cfg.eta * model.latent_ic.transpose();
    scratch.node_cot.row(traj.rows() - 1).tail(n_latent) +=
        2.0 * cfg.eta * traj.states.row(traj.rows() - 1).tail(n_latent);
  }

  const Eigen::Index n_w = count_params(model.arch);
  grad->setZero(n_w + n_latent);
  Eigen::VectorXd grad_w = Eigen::VectorXd::Zero(n_w);
  Eigen::VectorXd grad_z0;
  backprop_trajectory(model, traj, sample.theta, scratch.node_cot, &grad_w, nullptr, &grad_z0);
  grad->head(n_w) = grad_w;
  grad->tail(n_latent) = grad_z0.tail(n_latent);
  return value;
}

LossResult loss_impl(const LnodeModel& model, const Dataset& dataset,
                     const std::vector<int>& batch, const LossConfig& cfg, int workers,
                     bool want_grad) {
  if (batch.empty()) throw ConfigError("loss: empty batch");
  cfg.validate(dataset.n_traces());
  model.validate();
  if (model.n_physical != dataset.n_traces()) {
    throw ConfigError("loss: model physical width does not match the dataset");
  }

  const Eigen::Index dim = count_params(model.arch) + model.n_latent();
  const std::size_t n = batch.size();
  Eigen::VectorXd values(static_cast<Eigen::Index>(n));
  Eigen::MatrixXd grads;
  if (want_grad) grads.resize(dim, static_cast<Eigen::Index>(n));

  for_each_index(n, workers, [&](std::size_t i) {
    SampleLossScratch scratch;
    const TrainingSample& sample = dataset.samples[static_cast<std::size_t>(batch[i])];
    try {
      if (want_grad) {
        Eigen::VectorXd g;
        values[static_cast<Eigen::Index>(i)] = sample_loss(model, sample, cfg, scratch, &g);
        grads.col(static_cast<Eigen::Index>(i)) = g;
      } else {
        values[static_cast<Eigen::Index>(i)] = sample_loss(model, sample, cfg, scratch, nullptr);
      }
    } catch (const DivergenceError& e) {
      throw DivergenceError("sample " + std::to_string(batch[i]) + ": " + e.what(),
                            e.step_index());
    }
  });

  LossResult result;
  const double inv_b = 1.0 / static_cast<double>(n);
  result.value = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) result.value += values[i];
  result.value *= inv_b;
  if (want_grad) {
    result.gradient.setZero(dim);
    for (Eigen::Index i = 0; i < grads.cols(); ++i) result.gradient += grads.col(i);
    result.gradient *= inv_b;
  }

  // Weight regularization enters once, not per sample.
  if (cfg.iota != 0.0) {
    result.value += cfg.iota * model.weights.squared_norm();
    if (want_grad) {
      result.gradient.head(count_params(model.arch)) += 2.0 * cfg.iota * model.weights.flatten();
    }
  }
  return result;
}

}  // namespace

void LossConfig::validate(int n_traces) const {
  if (alpha < 0 || beta < 0 || gamma < 0 || eta < 0 || iota < 0) {
    throw ConfigError("loss: weights must be >= 0");
  }
  if (!(dt_ref >= integrator_dt)) {
    throw ConfigError("loss: dt_ref must be >= the integrator dt");
  }
  const auto check = [&](const Eigen::VectorXd& v, const char* name) {
    if (v.size() != n_traces) throw ConfigError(std::string("loss: ") + name + " has wrong size");
    if ((v.array() <= 0.0).any()) {
      throw ConfigError(std::string("loss: ") + name + " must be positive");
    }
  };
  check(z_norm, "z_norm");
  check(z_norm_diff, "z_norm_diff");
  check(z_norm_max, "z_norm_max");
  check(z_norm_min, "z_norm_min");
}

NormStats compute_norm_stats(const Dataset& dataset, const std::vector<int>& indices) {
  if (indices.empty()) throw ConfigError("norm stats: empty index list");
  const int n_traces = dataset.n_traces();
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(n_traces, kInf);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(n_traces, -kInf);
  for (int i : indices) {
    const auto& states = dataset.samples[static_cast<std::size_t>(i)].target.states;
    lo = lo.cwiseMin(states.colwise().minCoeff().transpose());
    hi = hi.cwiseMax(states.colwise().maxCoeff().transpose());
  }
  NormStats stats;
  stats.center = 0.5 * (lo + hi);
  stats.half_range = (0.5 * (hi - lo)).cwiseMax(1e-9);
  return stats;
}

LossResult loss(const LnodeModel& model, const Dataset& dataset, const std::vector<int>& batch,
                const LossConfig& cfg, int workers) {
  return loss_impl(model, dataset, batch, cfg, workers, true);
}

double loss_value(const LnodeModel& model, const Dataset& dataset, const std::vector<int>& batch,
                  const LossConfig& cfg, int workers) {
  return loss_impl(model, dataset, batch, cfg, workers, false).value;
}

namespace {

void apply_trainables(LnodeModel& model, const Eigen::VectorXd& x) {
  const Eigen::Index n_w = count_params(model.arch);
  model.weights.set_flat(x.head(n_w));
  model.latent_ic = x.tail(model.n_latent());
}

Eigen::VectorXd gather_trainables(const LnodeModel& model) {
  const Eigen::Index n_w = count_params(model.arch);
  Eigen::VectorXd x(n_w + model.n_latent());
  x.head(n_w) = model.weights.flatten();
  x.tail(model.n_latent()) = model.latent_ic;
  return x;
}

}  // namespace

TrainResult train(const Dataset& dataset, const HyperConfig& hyper, std::uint64_t seed,
                  const TrainOptions& opts) {
  if (dataset.samples.empty()) throw ConfigError("train: dataset is empty");
  const std::vector<int> train_idx =
      opts.train_indices.empty() ? all_indices(dataset.size()) : opts.train_indices;
  const std::vector<int>& valid_idx = opts.valid_indices;
  const bool has_valid = !valid_idx.empty();
  const int n_traces = dataset.n_traces();
  if (hyper.num_states < n_traces) {
    throw ConfigError("train: num_states must be >= the number of physical traces");
  }
  const double t_hb = shared_t_hb(dataset, train_idx);

  const NormStats stats = compute_norm_stats(dataset, train_idx);

  AnnArchitecture arch;
  arch.input_dim = hyper.num_states + 2 + dataset.space.size();
  arch.hidden_layers = hyper.layers;
  arch.neurons_per_layer = hyper.neurons;
  arch.output_dim = hyper.num_states;

  LnodeModel model = make_model(arch, n_traces, dataset.space, seed);
  model.state_center.head(n_traces) = stats.center;
  model.state_scale.head(n_traces) = stats.half_range;

  LossConfig cfg;
  cfg.alpha = opts.alpha;
  cfg.beta = opts.beta;
  cfg.gamma = opts.gamma;
  cfg.eta = opts.eta;
  cfg.iota = hyper.iota;
  cfg.dt_ref = hyper.dt_ref;
  cfg.integrator_dt = opts.integrator_dt;
  cfg.z_norm = stats.half_range;
  cfg.z_norm_diff = stats.half_range / t_hb;
  cfg.z_norm_max = stats.half_range;
  cfg.z_norm_min = stats.half_range;
  cfg.validate(n_traces);

  TrainResult result;
  std::vector<LossHistoryEntry> history;

  Eigen::VectorXd x = gather_trainables(model);
  Eigen::VectorXd best_x = x;
  double best_selection = kInf;

  const auto valid_loss = [&]() -> double {
    return has_valid ? loss_value(model, dataset, valid_idx, cfg, opts.workers) : kNan;
  };
  const auto consider_best = [&](double train_l, double valid_l) {
    const double selection = has_valid ? valid_l : train_l;
    if (selection < best_selection) {
      best_selection = selection;
      best_x = x;
    }
  };

  // Adam phase; a divergence restarts from fresh Glorot weights with lr/10.
  double lr = opts.adam_lr;
  int restarts = 0;
  while (true) {
    model.weights = init_glorot(arch, seed);
    model.latent_ic.setZero();
    x = gather_trainables(model);
    Adam adam(x.size(), AdamOptions{lr});
    bool diverged = false;
    for (int it = 1; it <= opts.adam_iters; ++it) {
      apply_trainables(model, x);
      LossResult lr_res;
      try {
        lr_res = loss(model, dataset, train_idx, cfg, opts.workers);
      } catch (const DivergenceError&) {
        diverged = true;
        break;
      }
      if (!std::isfinite(lr_res.value)) {
        diverged = true;
        break;
      }
      const double vl = valid_loss();
      history.push_back({it, "adam", lr_res.value, vl});
      consider_best(lr_res.value, vl);
      adam.step(x, lr_res.gradient);
    }
    if (!diverged) break;
    if (++restarts > 2) {
      throw DivergenceError("train: Adam diverged after two learning-rate restarts");
    }
    lr /= 10.0;
    history.clear();
    best_selection = kInf;
  }
  result.adam_restarts = restarts;

  // L-BFGS phase from the last Adam iterate.
  if (opts.bfgs_iters > 0) {
    const Objective objective = [&](const Eigen::VectorXd& xx, Eigen::VectorXd& grad) {
      apply_trainables(model, xx);
      try {
        LossResult r = loss(model, dataset, train_idx, cfg, opts.workers);
        grad = r.gradient;
        return r.value;
      } catch (const DivergenceError&) {
        grad.setZero(xx.size());
        return kInf;
      }
    };
    LbfgsOptions lopts;
    lopts.max_iters = opts.bfgs_iters;
    lopts.history = 20;
    const int adam_iters_done = history.empty() ? 0 : history.back().iter;
    lbfgs_minimize(objective, x, lopts, [&](int iter, double value, const Eigen::VectorXd& xx) {
      apply_trainables(model, xx);
      const double vl = valid_loss();
      history.push_back({adam_iters_done + iter, "bfgs", value, vl});
      consider_best(value, vl);
    });
  }

  apply_trainables(model, best_x);
  result.model = model;
  result.best_selection_loss = best_selection;
  result.report = evaluate(model, dataset, has_valid ? valid_idx : train_idx, opts.integrator_dt,
                           opts.workers, has_valid ? "validation" : "training");
  result.report.history = std::move(history);
  return result;
}

std::vector<KfoldFold> kfold_split(std::size_t n_samples, int k, std::uint64_t seed) {
  if (k < 1) throw ConfigError("kfold: k must be >= 1");
  if (static_cast<std::size_t>(k) > n_samples) {
    throw ConfigError("kfold: k exceeds the dataset size");
  }
  std::vector<int> order = all_indices(n_samples);
  Rng rng(seed);
  for (std::size_t i = n_samples - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
    std::swap(order[i], order[j]);
  }
  std::vector<KfoldFold> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n_samples; ++i) {
    folds[i % static_cast<std::size_t>(k)].valid.push_back(order[i]);
  }
  for (auto& fold : folds) {
    std::sort(fold.valid.begin(), fold.valid.end());
    for (int i : order) {
      if (!std::binary_search(fold.valid.begin(), fold.valid.end(), i)) {
        fold.train.push_back(i);
      }
    }
    std::sort(fold.train.begin(), fold.train.end());
  }
  return folds;
}

HyperSearchResult hyper_search(const HyperRanges& ranges, int budget, const Dataset& dataset,
                               std::uint64_t seed, const TrainOptions& base, int k_folds) {
  if (budget < 1) throw ConfigError("hyper_search: budget must be >= 1");
  Rng rng(seed);
  Rng sampler = rng.fork(1);

  const int states_floor = std::max(ranges.states_lo, dataset.n_traces());
  std::vector<HyperTrialRow> table(static_cast<std::size_t>(budget));
  for (auto& row : table) {
    row.config.layers = static_cast<int>(sampler.uniform_int(ranges.layers_lo, ranges.layers_hi));
    row.config.neurons =
        static_cast<int>(sampler.uniform_int(ranges.neurons_lo, ranges.neurons_hi));
    row.config.num_states =
        static_cast<int>(sampler.uniform_int(states_floor, std::max(states_floor, ranges.states_hi)));
    row.config.dt_ref =
        std::exp(sampler.uniform(std::log(ranges.dt_ref_lo), std::log(ranges.dt_ref_hi)));
    row.config.iota = std::exp(sampler.uniform(std::log(ranges.iota_lo), std::log(ranges.iota_hi)));
    // The quadrature step cannot be finer than the integrator step.
    row.config.dt_ref = std::max(row.config.dt_ref, base.integrator_dt);
  }

  const auto folds = kfold_split(dataset.size(), k_folds, rng.fork(2).root_seed());

  const double fractions[3] = {0.25, 0.5, 1.0};
  std::vector<int> alive(static_cast<std::size_t>(budget));
  std::iota(alive.begin(), alive.end(), 0);

  for (int rung = 0; rung < 3; ++rung) {
    // A lone survivor only needs the final full-budget score.
    if (alive.size() == 1 && rung < 2) continue;
    const double frac = fractions[rung];
    TrainOptions opts = base;
    opts.adam_iters = std::max(1, static_cast<int>(std::ceil(base.adam_iters * frac)));
    opts.bfgs_iters = static_cast<int>(std::ceil(base.bfgs_iters * frac));

    for (int trial : alive) {
      double sum = 0.0;
      bool failed = false;
      for (std::size_t f = 0; f < folds.size(); ++f) {
        opts.train_indices = folds[f].train;
        opts.valid_indices = folds[f].valid;
        const std::uint64_t trial_seed =
            rng.fork(100 + static_cast<std::uint64_t>(trial) * folds.size() + f).root_seed();
        try {
          TrainResult r = train(dataset, table[static_cast<std::size_t>(trial)].config,
                                trial_seed, opts);
          sum += r.best_selection_loss;
        } catch (const DivergenceError&) {
          failed = true;
          break;
        }
      }
      table[static_cast<std::size_t>(trial)].rung_scores[rung] =
          failed ? kInf : sum / static_cast<double>(folds.size());
    }

    std::sort(alive.begin(), alive.end(), [&](int a, int b) {
      return table[static_cast<std::size_t>(a)].rung_scores[rung] <
             table[static_cast<std::size_t>(b)].rung_scores[rung];
    });
    if (rung < 2) {
      const std::size_t keep =
          std::max<std::size_t>(1, (alive.size() + 2) / 3);  // ceil(n / 3)
      alive.resize(keep);
    }
  }

  HyperSearchResult result;
  result.table = table;
  const int winner = alive.front();
  result.best = table[static_cast<std::size_t>(winner)].config;
  result.best_score = table[static_cast<std::size_t>(winner)].rung_scores[2];
  return result;
}

FitReport evaluate(const LnodeModel& model, const Dataset& dataset,
                   const std::vector<int>& indices, double integrator_dt, int workers,
                   const std::string& split_name) {
  if (indices.empty()) throw ConfigError("evaluate: empty index list");
  const int n_traces = dataset.n_traces();
  if (model.n_physical != n_traces) {
    throw ConfigError("evaluate: model physical width does not match the dataset");
  }

  // Predictions interpolated onto each sample's data grid.
  std::vector<Eigen::MatrixXd> predictions(indices.size());
  for_each_index(indices.size(), workers, [&](std::size_t i) {
    const TrainingSample& sample = dataset.samples[static_cast<std::size_t>(indices[i])];
    Eigen::VectorXd z0(model.n_states());
    z0.head(n_traces) = sample.initial_state;
    z0.tail(model.n_latent()) = model.latent_ic;
    const CycleContext ctx{sample.t_hb, sample.av_delay, integrator_dt};
    const Trajectory traj = integrate(model, z0, sample.theta, ctx);
    predictions[i] = resample_states(traj, sample.target.times).leftCols(n_traces);
  });

  // Pooled per-trace statistics over all samples and times.
  Eigen::VectorXd sse = Eigen::VectorXd::Zero(n_traces);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n_traces);
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(n_traces, kInf);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(n_traces, -kInf);
  std::int64_t count = 0;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& target = dataset.samples[static_cast<std::size_t>(indices[i])].target.states;
    sse += (predictions[i] - target).array().square().colwise().sum().matrix().transpose();
    sum += target.colwise().sum().transpose();
    lo = lo.cwiseMin(target.colwise().minCoeff().transpose());
    hi = hi.cwiseMax(target.colwise().maxCoeff().transpose());
    count += target.rows();
  }
  const Eigen::VectorXd mean = sum / static_cast<double>(count);
  Eigen::VectorXd sst = Eigen::VectorXd::Zero(n_traces);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& target = dataset.samples[static_cast<std::size_t>(indices[i])].target.states;
    sst += (target.rowwise() - mean.transpose()).array().square().colwise().sum().matrix().transpose();
  }

  FitReport report;
  report.split_name = split_name;
  report.trace_labels = dataset.trace_labels;
  report.nrmse.resize(n_traces);
  report.r2_percent.resize(n_traces);
  for (int j = 0; j < n_traces; ++j) {
    const double range = hi[j] - lo[j];
    const double rmse = std::sqrt(sse[j] / static_cast<double>(count));
    report.nrmse[j] = range > 0.0 ? rmse / range : (rmse > 0.0 ? kInf : 0.0);
    report.r2_percent[j] = sst[j] > 0.0 ? 100.0 * (1.0 - sse[j] / sst[j])
                                        : (sse[j] > 0.0 ? 0.0 : 100.0);
  }
  return report;
}

}  // namespace cardioemu
