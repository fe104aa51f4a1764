#include "cardioemu/refmodel.hpp"

#include <cmath>

#include "cardioemu/errors.hpp"
#include "cardioemu/parallel.hpp"
#include "cardioemu/rng.hpp"
#include "cardioemu/sobol_seq.hpp"

namespace cardioemu {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Compartment order inside the generator state vector.
enum Compartment { kLA = 0, kLV, kRA, kRV, kSA, kSV, kPA, kPV, kNumCompartments };

struct CirculationRuntime {
  CirculationConstants c;
  double r_sys_scale = 1.0;
  double r_pulm_scale = 1.0;

  // Cosine bump rising 0 -> 1 -> 0 over `duration` cycle fractions.
  static double bump(double phase, double start, double duration) {
    double local = phase - start;
    local -= std::floor(local);
    if (local >= duration) return 0.0;
    return 0.5 * (1.0 - std::cos(kTwoPi * local / duration));
  }

  double elastance(int chamber, double t) const {
    const double phase = t / c.t_hb;
    switch (chamber) {
      case kLA:
        return c.e_min_la + (c.e_max_la - c.e_min_la) * bump(phase, 0.0, c.atrial_duration);
      case kRA:
        return c.e_min_ra + (c.e_max_ra - c.e_min_ra) * bump(phase, 0.0, c.atrial_duration);
      case kLV:
        return c.e_min_lv + (c.e_max_lv - c.e_min_lv) *
                                bump(phase, c.av_delay / c.t_hb, c.ventricular_duration);
      case kRV:
        return c.e_min_rv + (c.e_max_rv - c.e_min_rv) *
                                bump(phase, c.av_delay / c.t_hb, c.ventricular_duration);
      default:
        return 0.0;
    }
  }

  // Smooth diode: forward conductance blends in over ~4*valve_band mmHg.
  double valve_flow(double dp, double resistance) const {
    const double gate = 1.0 / (1.0 + std::exp(-dp / c.valve_band));
    return gate * dp / resistance;
  }

  void pressures(const double* v, double t, double* p) const {
    p[kLA] = elastance(kLA, t) * (v[kLA] - c.v0_la);
    p[kLV] = elastance(kLV, t) * (v[kLV] - c.v0_lv);
    p[kRA] = elastance(kRA, t) * (v[kRA] - c.v0_ra);
    p[kRV] = elastance(kRV, t) * (v[kRV] - c.v0_rv);
    p[kSA] = (v[kSA] - c.v0_sa) / c.c_sa;
    p[kSV] = (v[kSV] - c.v0_sv) / c.c_sv;
    p[kPA] = (v[kPA] - c.v0_pa) / c.c_pa;
    p[kPV] = (v[kPV] - c.v0_pv) / c.c_pv;
  }

  void derivative(const double* v, double t, double* dv) const {
    double p[kNumCompartments];
    pressures(v, t, p);
    const double q_mv = valve_flow(p[kLA] - p[kLV], c.r_mv);
    const double q_av = valve_flow(p[kLV] - p[kSA], c.r_av);
    const double q_sys = (p[kSA] - p[kSV]) / (c.r_sys * r_sys_scale);
    const double q_sv = (p[kSV] - p[kRA]) / c.r_sv_in;
    const double q_tv = valve_flow(p[kRA] - p[kRV], c.r_tv);
    const double q_pvalve = valve_flow(p[kRV] - p[kPA], c.r_pv);
    const double q_pulm = (p[kPA] - p[kPV]) / (c.r_pulm * r_pulm_scale);
    const double q_pv = (p[kPV] - p[kLA]) / c.r_pv_in;

    dv[kLA] = q_pv - q_mv;
    dv[kLV] = q_mv - q_av;
    dv[kSA] = q_av - q_sys;
    dv[kSV] = q_sys - q_sv;
    dv[kRA] = q_sv - q_tv;
    dv[kRV] = q_tv - q_pvalve;
    dv[kPA] = q_pvalve - q_pulm;
    dv[kPV] = q_pulm - q_pv;
  }

  void rk4_step(double* v, double t, double h) const {
    double k1[kNumCompartments], k2[kNumCompartments], k3[kNumCompartments],
        k4[kNumCompartments], tmp[kNumCompartments];
    derivative(v, t, k1);
    for (int i = 0; i < kNumCompartments; ++i) tmp[i] = v[i] + 0.5 * h * k1[i];
    derivative(tmp, t + 0.5 * h, k2);
    for (int i = 0; i < kNumCompartments; ++i) tmp[i] = v[i] + 0.5 * h * k2[i];
    derivative(tmp, t + 0.5 * h, k3);
    for (int i = 0; i < kNumCompartments; ++i) tmp[i] = v[i] + h * k3[i];
    derivative(tmp, t + h, k4);
    for (int i = 0; i < kNumCompartments; ++i) {
      v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
};

void apply_parameters(CirculationRuntime& rt, const Eigen::Ref<const Eigen::VectorXd>& theta,
                      const ParameterSpace& space) {
  space.check_within_bounds(theta);
  for (int i = 0; i < space.size(); ++i) {
    const std::string& name = space.entry(i).name;
    const double value = theta[i];
    if (name == "E_max_LV") {
      rt.c.e_max_lv = value;
    } else if (name == "E_min_LV") {
      rt.c.e_min_lv = value;
    } else if (name == "E_max_RV") {
      rt.c.e_max_rv = value;
    } else if (name == "E_max_LA") {
      rt.c.e_max_la = value;
    } else if (name == "E_max_RA") {
      rt.c.e_max_ra = value;
    } else if (name == "R_sys") {
      rt.r_sys_scale = value;
    } else if (name == "R_pulm") {
      rt.r_pulm_scale = value;
    } else if (name == "AV_delay") {
      rt.c.av_delay = value;
    } else if (name == "T_HB") {
      rt.c.t_hb = value;
    } else if (name == "t_sys_frac") {
      rt.c.ventricular_duration = value;
    } else if (name == "C_sa") {
      rt.c.c_sa = value;
    } else if (name == "C_pa") {
      rt.c.c_pa = value;
    } else {
      throw ConfigError("circulation generator does not know parameter '" + name + "'");
    }
  }
}

}  // namespace

ParameterSpace circulation_parameter_space() {
  return ParameterSpace({
      {"E_max_LV", "mmHg/mL", 1.5, 3.5},
      {"E_max_RV", "mmHg/mL", 0.4, 1.0},
      {"E_max_LA", "mmHg/mL", 0.28, 0.55},
      {"E_max_RA", "mmHg/mL", 0.20, 0.42},
      {"E_min_LV", "mmHg/mL", 0.05, 0.12},
      {"R_sys", "-", 1.0, 4.0},
      {"R_pulm", "-", 1.0, 4.0},
      {"AV_delay", "s", 0.1, 0.2},
      {"T_HB", "s", 0.7, 1.0},
      {"t_sys_frac", "-", 0.30, 0.46},
      {"C_sa", "mL/mmHg", 1.0, 2.0},
      {"C_pa", "mL/mmHg", 3.5, 6.0},
  });
}

ParameterSpace benchmark_parameter_space() {
  return circulation_parameter_space().subset(
      {"E_max_LV", "E_max_RV", "R_sys", "R_pulm", "AV_delay"});
}

SimulationResult simulate_circulation(const Eigen::Ref<const Eigen::VectorXd>& theta,
                                      const ParameterSpace& space,
                                      const SimulationOptions& opts) {
  if (opts.n_beats < 1) throw ConfigError("circulation: n_beats must be >= 1");
  CirculationRuntime rt;
  apply_parameters(rt, theta, space);

  double v[kNumCompartments];
  for (int i = 0; i < kNumCompartments; ++i) v[i] = rt.c.init_volumes[i];

  const double t_hb = rt.c.t_hb;
  const auto steps_per_beat = static_cast<std::int64_t>(std::ceil(t_hb / opts.rk4_dt - 1e-12));
  std::vector<double> sv_per_beat;  // LV stroke volume per beat

  // March beat by beat; only the final beat keeps its fine-grid history.
  Eigen::MatrixXd fine;       // rows x 8 chamber traces for the last beat
  Eigen::MatrixXd fine_ves;   // rows x 8 vessel pressure+volume traces
  Eigen::VectorXd fine_times;

  for (int beat = 0; beat < opts.n_beats; ++beat) {
    const bool last = beat == opts.n_beats - 1;
    double v_lv_min = v[kLV];
    double v_lv_max = v[kLV];
    if (last) {
      fine.resize(steps_per_beat + 1, 8);
      fine_ves.resize(steps_per_beat + 1, 8);
      fine_times.resize(steps_per_beat + 1);
    }
    for (std::int64_t k = 0; k <= steps_per_beat; ++k) {
      const double t_local = std::min(static_cast<double>(k) * opts.rk4_dt, t_hb);
      if (last) {
        double p[kNumCompartments];
        rt.pressures(v, t_local, p);
        fine_times[k] = t_local;
        fine(k, 0) = p[kLA];
        fine(k, 1) = p[kLV];
        fine(k, 2) = p[kRA];
        fine(k, 3) = p[kRV];
        fine(k, 4) = v[kLA];
        fine(k, 5) = v[kLV];
        fine(k, 6) = v[kRA];
        fine(k, 7) = v[kRV];
        fine_ves(k, 0) = p[kSA];
        fine_ves(k, 1) = p[kSV];
        fine_ves(k, 2) = p[kPA];
        fine_ves(k, 3) = p[kPV];
        fine_ves(k, 4) = v[kSA];
        fine_ves(k, 5) = v[kSV];
        fine_ves(k, 6) = v[kPA];
        fine_ves(k, 7) = v[kPV];
      }
      if (k == steps_per_beat) break;
      const double h = std::min(opts.rk4_dt, t_hb - static_cast<double>(k) * opts.rk4_dt);
      rt.rk4_step(v, t_local, h);
      v_lv_min = std::min(v_lv_min, v[kLV]);
      v_lv_max = std::max(v_lv_max, v[kLV]);
      for (int i = 0; i < kNumCompartments; ++i) {
        if (!std::isfinite(v[i])) {
          throw DivergenceError("circulation model diverged", static_cast<std::ptrdiff_t>(k));
        }
      }
    }
    sv_per_beat.push_back(v_lv_max - v_lv_min);
  }

  SimulationResult result;
  result.t_hb = t_hb;
  result.av_delay = rt.c.av_delay;
  result.beat.context = CycleContext{t_hb, rt.c.av_delay, opts.output_dt};
  result.beat.times = make_time_grid(t_hb, opts.output_dt);

  Trajectory fine_traj;
  fine_traj.times = fine_times;
  fine_traj.states = fine;
  result.beat.states = resample_states(fine_traj, result.beat.times);
  fine_traj.states = fine_ves;
  Eigen::MatrixXd vessels = resample_states(fine_traj, result.beat.times);
  result.vessel_pressures = vessels.leftCols(4);
  result.vessel_volumes = vessels.rightCols(4);

  if (opts.n_beats >= 2) {
    const double prev = sv_per_beat[sv_per_beat.size() - 2];
    const double cur = sv_per_beat.back();
    if (prev > 0.0 && std::abs(cur - prev) / prev > 0.10) {
      result.warnings.push_back("stroke volume drift above 10% between the last two beats");
    }
  }
  return result;
}

Dataset generate_dataset(const ParameterSpace& space, int n_samples, std::uint64_t seed,
                         const GenerateOptions& opts, int workers) {
  if (n_samples < 1) throw ConfigError("generate_dataset: n_samples must be >= 1");
  SobolSequence seq(space.size(), seed);
  const Eigen::VectorXd lo = space.lower();
  const Eigen::VectorXd hi = space.upper();

  Dataset dataset;
  dataset.space = space;
  dataset.trace_labels = physical_state_labels();
  dataset.seed = seed;
  dataset.generator = "elastance-circulation-v1";
  dataset.samples.resize(static_cast<std::size_t>(n_samples));

  for_each_index(static_cast<std::size_t>(n_samples), workers, [&](std::size_t i) {
    std::vector<double> unit(static_cast<std::size_t>(space.size()));
    seq.point(i, unit.data());
    Eigen::VectorXd theta(space.size());
    for (int d = 0; d < space.size(); ++d) theta[d] = lo[d] + unit[static_cast<std::size_t>(d)] * (hi[d] - lo[d]);

    SimulationResult sim = simulate_circulation(theta, space, opts.simulation);
    TrainingSample& s = dataset.samples[i];
    s.theta = theta;
    s.target = sim.beat;
    s.initial_state = sim.beat.states.row(0).transpose();
    s.t_hb = sim.t_hb;
    s.av_delay = sim.av_delay;
    s.warnings = sim.warnings;
  });
  return dataset;
}

// ---------------------------------------------------------------------------

double AdditiveMap::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return coeffs.dot(x);
}

Eigen::VectorXd AdditiveMap::analytic_indices() const {
  Eigen::VectorXd contrib(coeffs.size());
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    const auto& e = space.entry(static_cast<int>(i));
    const double width = e.upper - e.lower;
    contrib[i] = coeffs[i] * coeffs[i] * width * width / 12.0;
  }
  return contrib / contrib.sum();
}

AdditiveMap make_additive_map(const Eigen::VectorXd& coeffs) {
  // Unit-variance inputs: width sqrt(12) centered at zero.
  const double half = std::sqrt(12.0) / 2.0;
  std::vector<ParameterEntry> entries;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    entries.push_back({"x" + std::to_string(i), "-", -half, half});
  }
  return AdditiveMap{coeffs, ParameterSpace(std::move(entries))};
}

double Ishigami::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return std::sin(x[0]) + a * std::sin(x[1]) * std::sin(x[1]) +
         b * std::pow(x[2], 4) * std::sin(x[0]);
}

ParameterSpace Ishigami::space() const {
  return ParameterSpace({{"x0", "-", -kPi, kPi}, {"x1", "-", -kPi, kPi}, {"x2", "-", -kPi, kPi}});
}

Eigen::Vector3d Ishigami::analytic_s1() const {
  const double pi4 = kPi * kPi * kPi * kPi;
  const double pi8 = pi4 * pi4;
  const double v1 = 0.5 * std::pow(1.0 + b * pi4 / 5.0, 2);
  const double v2 = a * a / 8.0;
  const double total = v1 + v2 + b * b * pi8 * (1.0 / 18.0 - 1.0 / 50.0);
  return {v1 / total, v2 / total, 0.0};
}

Eigen::Vector3d Ishigami::analytic_st() const {
  const double pi4 = kPi * kPi * kPi * kPi;
  const double pi8 = pi4 * pi4;
  const double v13 = b * b * pi8 * (1.0 / 18.0 - 1.0 / 50.0);
  const double v1 = 0.5 * std::pow(1.0 + b * pi4 / 5.0, 2);
  const double v2 = a * a / 8.0;
  const double total = v1 + v2 + v13;
  return {(v1 + v13) / total, v2 / total, v13 / total};
}

void ishigami_bruteforce_indices(const Ishigami& f, int n_outer, int n_inner, std::uint64_t seed,
                                 Eigen::Vector3d& s1, Eigen::Vector3d& st) {
  // Double-loop conditional expectations/variances:
  //   S1_i = Var_i(E[Y | x_i]) / Var(Y)
  //   ST_i = E_~i(Var_i(Y | x_~i)) / Var(Y)
  Rng rng(seed);
  const auto draw = [&](Rng& r) { return -kPi + kTwoPi * r.uniform(); };

  // Total variance from a big plain Monte Carlo pass.
  Rng var_rng = rng.fork(999);
  const std::int64_t n_var = static_cast<std::int64_t>(n_outer) * n_inner;
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t k = 0; k < n_var; ++k) {
    Eigen::Vector3d x(draw(var_rng), draw(var_rng), draw(var_rng));
    const double y = f(x);
    const double delta = y - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (y - mean);
  }
  const double var_total = m2 / static_cast<double>(n_var - 1);

  for (int i = 0; i < 3; ++i) {
    Rng outer_rng = rng.fork(static_cast<std::uint64_t>(i));
    double mean_cond = 0.0;
    double m2_cond = 0.0;
    double sum_var_cond = 0.0;
    for (int o = 0; o < n_outer; ++o) {
      Rng inner_rng = outer_rng.fork(static_cast<std::uint64_t>(o));
      // S1: fix x_i, average over the others. ST: fix the others, vary x_i.
      const double xi = draw(outer_rng);
      Eigen::Vector3d frozen(draw(outer_rng), draw(outer_rng), draw(outer_rng));
      double mean_in_s1 = 0.0;
      double mean_in_st = 0.0;
      double m2_in_st = 0.0;
      for (int m = 0; m < n_inner; ++m) {
        Eigen::Vector3d x(draw(inner_rng), draw(inner_rng), draw(inner_rng));
        x[i] = xi;
        mean_in_s1 += f(x);

        Eigen::Vector3d xt = frozen;
        xt[i] = draw(inner_rng);
        const double yt = f(xt);
        const double delta = yt - mean_in_st;
        mean_in_st += delta / static_cast<double>(m + 1);
        m2_in_st += delta * (yt - mean_in_st);
      }
      mean_in_s1 /= static_cast<double>(n_inner);
      const double delta = mean_in_s1 - mean_cond;
      mean_cond += delta / static_cast<double>(o + 1);
      m2_cond += delta * (mean_in_s1 - mean_cond);
      sum_var_cond += m2_in_st / static_cast<double>(n_inner - 1);
    }
    s1[i] = (m2_cond / static_cast<double>(n_outer - 1)) / var_total;
    st[i] = (sum_var_cond / static_cast<double>(n_outer)) / var_total;
  }
}

Dataset make_exponential_dataset(int n_samples, std::uint64_t seed, double k_lo, double k_hi,
                                 double z0, double t_end, double grid_dt) {
  Dataset dataset;
  dataset.space = ParameterSpace({{"k", "1/s", k_lo, k_hi}});
  dataset.trace_labels = {"z"};
  dataset.seed = seed;
  dataset.generator = "exponential-decay-v1";

  SobolSequence seq(1, seed);
  const Eigen::VectorXd times = make_time_grid(t_end, grid_dt);
  for (int i = 0; i < n_samples; ++i) {
    double unit = 0.0;
    seq.point(static_cast<std::uint64_t>(i), &unit);
    const double k = k_lo + unit * (k_hi - k_lo);

    TrainingSample s;
    s.theta = Eigen::VectorXd::Constant(1, k);
    s.t_hb = t_end;
    s.av_delay = 0.0;
    s.target.context = CycleContext{t_end, 0.0, grid_dt};
    s.target.times = times;
    s.target.states.resize(times.size(), 1);
    for (Eigen::Index r = 0; r < times.size(); ++r) {
      s.target.states(r, 0) = z0 * std::exp(-k * times[r]);
    }
    s.initial_state = s.target.states.row(0).transpose();
    dataset.samples.push_back(std::move(s));
  }
  return dataset;
}

}  // namespace cardioemu
