#include "cardioemu/lnode.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "cardioemu/errors.hpp"
#include "cardioemu/numio.hpp"

namespace cardioemu {

using nlohmann::json;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr int kCheckpointVersion = 1;
}  // namespace

void LnodeModel::validate() const {
  arch.validate();
  if (arch.output_dim < n_physical) {
    throw ConfigError("model: fewer states than physical traces");
  }
  if (arch.input_dim != n_states() + 2 + n_params()) {
    throw ConfigError("model: input_dim must equal n_states + 2 + n_params");
  }
  if (latent_ic.size() != n_latent()) throw ConfigError("model: latent_ic size mismatch");
  if (static_cast<int>(state_labels.size()) != n_states()) {
    throw ConfigError("model: state label count mismatch");
  }
  if (state_center.size() != n_states() || state_scale.size() != n_states()) {
    throw ConfigError("model: normalization stats size mismatch");
  }
  if ((state_scale.array() <= 0.0).any()) {
    throw ConfigError("model: state scales must be positive");
  }
}

LnodeModel make_model(const AnnArchitecture& arch, int n_physical, const ParameterSpace& space,
                      std::uint64_t seed) {
  LnodeModel m;
  m.arch = arch;
  m.weights = init_glorot(arch, seed);
  m.n_physical = n_physical;
  m.latent_ic = Eigen::VectorXd::Zero(arch.output_dim - n_physical);
  if (n_physical == static_cast<int>(physical_state_labels().size())) {
    m.state_labels = state_labels_with_latent(arch.output_dim - n_physical);
  } else {
    for (int i = 0; i < n_physical; ++i) m.state_labels.push_back("y_" + std::to_string(i));
    for (int i = n_physical; i < arch.output_dim; ++i) {
      m.state_labels.push_back("z_lat_" + std::to_string(i - n_physical));
    }
  }
  m.state_center = Eigen::VectorXd::Zero(arch.output_dim);
  m.state_scale = Eigen::VectorXd::Ones(arch.output_dim);
  m.params = space;
  m.init_seed = seed;
  m.validate();
  return m;
}

std::pair<double, double> periodic_inputs(double t, const CycleContext& ctx) {
  const double phase = kTwoPi * (t - ctx.av_delay) / ctx.t_hb;
  return {std::cos(phase), std::sin(phase)};
}

void rhs(const LnodeModel& model, const Eigen::Ref<const Eigen::VectorXd>& state, double t,
         const Eigen::Ref<const Eigen::VectorXd>& theta, const CycleContext& ctx,
         LnodeWorkspace& ws, Eigen::VectorXd& dstate_dt) {
  const int nz = model.n_states();
  const int np = model.n_params();
  if (state.size() != nz) throw ShapeError("rhs: state length != n_states");
  if (theta.size() != np) throw ShapeError("rhs: parameter vector length != n_params");

  ws.net_in.resize(nz + 2 + np);
  ws.net_in.head(nz) = (state - model.state_center).cwiseQuotient(model.state_scale);
  const auto [c, s] = periodic_inputs(t, ctx);
  ws.net_in[nz] = c;
  ws.net_in[nz + 1] = s;
  ws.theta_norm = model.params.normalize(theta);
  ws.net_in.tail(np) = ws.theta_norm;

  forward(model.weights, ws.net_in, ws.ann, ws.net_out);
  dstate_dt = ws.net_out.cwiseProduct(model.state_scale) / ctx.t_hb;
}

Eigen::VectorXd rhs(const LnodeModel& model, const Eigen::Ref<const Eigen::VectorXd>& state,
                    double t, const Eigen::Ref<const Eigen::VectorXd>& theta,
                    const CycleContext& ctx) {
  LnodeWorkspace ws;
  Eigen::VectorXd out;
  rhs(model, state, t, theta, ctx, ws, out);
  return out;
}

namespace {

template <class StepFn>
Trajectory euler_sweep(const Eigen::Ref<const Eigen::VectorXd>& z0, const CycleContext& ctx,
                       StepFn&& eval_rhs) {
  ctx.validate();
  Trajectory traj;
  traj.context = ctx;
  traj.times = make_time_grid(ctx.t_hb, ctx.dt);
  const Eigen::Index rows = traj.times.size();
  traj.states.resize(rows, z0.size());
  traj.states.row(0) = z0.transpose();

  Eigen::VectorXd state = z0;
  Eigen::VectorXd dstate(z0.size());
  for (Eigen::Index k = 0; k + 1 < rows; ++k) {
    const double step = traj.times[k + 1] - traj.times[k];
    eval_rhs(state, traj.times[k], dstate);
    state += step * dstate;
    if (!state.allFinite()) {
      throw DivergenceError("integration diverged", static_cast<std::ptrdiff_t>(k));
    }
    traj.states.row(k + 1) = state.transpose();
  }
  return traj;
}

}  // namespace

Trajectory integrate(const LnodeModel& model, const Eigen::Ref<const Eigen::VectorXd>& z0,
                     const Eigen::Ref<const Eigen::VectorXd>& theta, const CycleContext& ctx) {
  if (z0.size() != model.n_states()) throw ShapeError("integrate: z0 length != n_states");
  const int nz = model.n_states();
  const int np = model.n_params();
  LnodeWorkspace ws;
  ws.net_in.resize(nz + 2 + np);
  ws.net_in.tail(np) = model.params.normalize(theta);
  const Eigen::VectorXd inv_scale = model.state_scale.cwiseInverse();
  return euler_sweep(z0, ctx, [&](const Eigen::VectorXd& state, double t, Eigen::VectorXd& dz) {
    ws.net_in.head(nz) = (state - model.state_center).cwiseProduct(inv_scale);
    const auto [c, s] = periodic_inputs(t, ctx);
    ws.net_in[nz] = c;
    ws.net_in[nz + 1] = s;
    forward(model.weights, ws.net_in, ws.ann, ws.net_out);
    dz = ws.net_out.cwiseProduct(model.state_scale) / ctx.t_hb;
  });
}

Trajectory integrate_rhs(const RhsFn& f, const Eigen::Ref<const Eigen::VectorXd>& z0,
                         const CycleContext& ctx) {
  return euler_sweep(z0, ctx, [&](const Eigen::VectorXd& state, double t, Eigen::VectorXd& dz) {
    f(state, t, dz);
  });
}

Eigen::VectorXd assemble_initial_state(const TrainingSample& sample, const LnodeModel& model) {
  if (sample.initial_state.size() != model.n_physical) {
    throw DatasetError("sample initial state does not provide the physical values");
  }
  Eigen::VectorXd z0(model.n_states());
  z0.head(model.n_physical) = sample.initial_state;
  z0.tail(model.n_latent()) = model.latent_ic;
  return z0;
}

void backprop_trajectory(const LnodeModel& model, const Trajectory& traj,
                         const Eigen::Ref<const Eigen::VectorXd>& theta,
                         const Eigen::Ref<const Eigen::MatrixXd>& node_cotangents,
                         Eigen::VectorXd* grad_weights, Eigen::VectorXd* grad_theta,
                         Eigen::VectorXd* grad_z0) {
  const int nz = model.n_states();
  const int np = model.n_params();
  const Eigen::Index rows = traj.rows();
  if (traj.n_states() != nz) throw ShapeError("backprop: trajectory width != n_states");
  if (node_cotangents.rows() != rows || node_cotangents.cols() != nz) {
    throw ShapeError("backprop: cotangent matrix must be rows x n_states");
  }

  LnodeWorkspace ws;
  ws.net_in.resize(nz + 2 + np);
  ws.theta_norm = model.params.normalize(theta);
  // d theta_norm / d theta per coordinate.
  Eigen::VectorXd theta_chain(np);
  for (int i = 0; i < np; ++i) {
    const auto& e = model.params.entry(i);
    theta_chain[i] = 2.0 / (e.upper - e.lower);
  }

  if (grad_weights != nullptr && grad_weights->size() != count_params(model.arch)) {
    throw ShapeError("backprop: grad_weights accumulator has wrong length");
  }
  if (grad_theta != nullptr && grad_theta->size() != np) {
    throw ShapeError("backprop: grad_theta accumulator has wrong length");
  }

  Eigen::VectorXd adjoint = node_cotangents.row(rows - 1).transpose();
  const Eigen::VectorXd inv_scale = model.state_scale.cwiseInverse();
  for (Eigen::Index k = rows - 2; k >= 0; --k) {
    const double h = traj.times[k + 1] - traj.times[k];
    ws.net_in.head(nz) =
        (traj.states.row(k).transpose() - model.state_center).cwiseProduct(inv_scale);
    const auto [c, s] = periodic_inputs(traj.times[k], traj.context);
    ws.net_in[nz] = c;
    ws.net_in[nz + 1] = s;
    ws.net_in.tail(np) = ws.theta_norm;

    // f = scale .* net / t_hb, so the net-output cotangent picks up the
    // output scaling; h folds into the weight accumulation directly.
    ws.cot = adjoint.cwiseProduct(model.state_scale) / traj.context.t_hb;
    vjp(model.weights, ws.net_in, ws.cot, ws.ann, ws.grad_in, grad_weights, h);
    if (grad_theta != nullptr) {
      grad_theta->noalias() +=
          h * ws.grad_in.tail(np).cwiseProduct(theta_chain);
    }
    adjoint += h * ws.grad_in.head(nz).cwiseProduct(inv_scale);
    adjoint += node_cotangents.row(k).transpose();
  }
  if (grad_z0 != nullptr) *grad_z0 = adjoint;
}

namespace {

json vector_to_hex(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(format_hex(v[i]));
  return arr;
}

Eigen::VectorXd vector_from_hex(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = parse_double(arr[i].get<std::string>());
  }
  return v;
}

json vector_to_full(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(format_full(v[i]));
  return arr;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const LnodeModel& model) {
  model.validate();
  json doc;
  doc["format_version"] = kCheckpointVersion;
  doc["architecture"] = {{"input_dim", model.arch.input_dim},
                         {"hidden_layers", model.arch.hidden_layers},
                         {"neurons_per_layer", model.arch.neurons_per_layer},
                         {"output_dim", model.arch.output_dim},
                         {"hidden_activation", activation_name(model.arch.hidden_activation)},
                         {"output_activation", activation_name(model.arch.output_activation)}};
  doc["seed"] = model.init_seed;
  doc["weights"] = vector_to_hex(model.weights.flatten());
  doc["latent_ic"] = vector_to_hex(model.latent_ic);
  doc["n_physical"] = model.n_physical;
  doc["state_labels"] = model.state_labels;
  doc["normalization"] = {{"state_center", vector_to_full(model.state_center)},
                          {"state_scale", vector_to_full(model.state_scale)}};
  json params = json::array();
  for (const auto& e : model.params.entries()) {
    params.push_back({{"name", e.name},
                      {"unit", e.unit},
                      {"lower", format_full(e.lower)},
                      {"upper", format_full(e.upper)}});
  }
  doc["parameters"] = params;

  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint '" + path.string() + "'");
  out << doc.dump(2) << "\n";
}

LnodeModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("bad checkpoint '" + path.string() + "': " + e.what());
  }
  if (doc.value("format_version", -1) != kCheckpointVersion) {
    throw ConfigError("unsupported checkpoint version in '" + path.string() + "'");
  }

  LnodeModel m;
  const json& a = doc.at("architecture");
  m.arch.input_dim = a.at("input_dim").get<int>();
  m.arch.hidden_layers = a.at("hidden_layers").get<int>();
  m.arch.neurons_per_layer = a.at("neurons_per_layer").get<int>();
  m.arch.output_dim = a.at("output_dim").get<int>();
  m.arch.hidden_activation = activation_from_name(a.at("hidden_activation").get<std::string>());
  m.arch.output_activation = activation_from_name(a.at("output_activation").get<std::string>());
  m.init_seed = doc.value("seed", 0ull);
  m.weights = AnnWeights::from_flat(m.arch, vector_from_hex(doc.at("weights")));
  m.latent_ic = vector_from_hex(doc.at("latent_ic"));
  m.n_physical = doc.at("n_physical").get<int>();
  m.state_labels = doc.at("state_labels").get<std::vector<std::string>>();
  const json& norm = doc.at("normalization");
  const auto full_vec = [](const json& arr) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = arr[i].is_string()
                                            ? parse_double(arr[i].get<std::string>())
                                            : arr[i].get<double>();
    }
    return v;
  };
  m.state_center = full_vec(norm.at("state_center"));
  m.state_scale = full_vec(norm.at("state_scale"));
  std::vector<ParameterEntry> entries;
  for (const auto& e : doc.at("parameters")) {
    entries.push_back({e.at("name").get<std::string>(), e.value("unit", ""),
                       parse_double(e.at("lower").get<std::string>()),
                       parse_double(e.at("upper").get<std::string>())});
  }
  m.params = ParameterSpace(std::move(entries));
  m.validate();
  return m;
}

}  // namespace cardioemu
