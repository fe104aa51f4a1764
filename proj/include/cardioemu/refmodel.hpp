#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cardioemu/dataset.hpp"
#include "cardioemu/params.hpp"
#include "cardioemu/trajectory.hpp"

namespace cardioemu {

// Closed-loop 0D circulation: four time-varying-elastance chambers, smooth
// diode valves, systemic and pulmonary windkessel branches. It is the
// synthetic ground-truth generator, tuned for plausible pressure-volume loops
// rather than clinical fidelity.
struct CirculationConstants {
  // Chamber elastances (mmHg/mL) and rest volumes (mL).
  double e_min_la = 0.18, e_max_la = 0.42, v0_la = 10.0;
  double e_min_lv = 0.08, e_max_lv = 2.5, v0_lv = 10.0;
  double e_min_ra = 0.12, e_max_ra = 0.30, v0_ra = 10.0;
  double e_min_rv = 0.05, e_max_rv = 0.70, v0_rv = 10.0;
  // Activation timing as cycle fractions: atria fire at phase 0, ventricles
  // after the atrioventricular delay.
  double atrial_duration = 0.22;
  double ventricular_duration = 0.40;
  // Vessels: compliances (mL/mmHg) and unstressed volumes (mL).
  double c_sa = 1.4, v0_sa = 420.0;
  double c_sv = 40.0, v0_sv = 2500.0;
  double c_pa = 4.5, v0_pa = 50.0;
  double c_pv = 18.0, v0_pv = 320.0;
  // Resistances (mmHg*s/mL). r_sys/r_pulm are bases scaled by the R_sys and
  // R_pulm parameters.
  double r_mv = 0.012, r_av = 0.010, r_tv = 0.012, r_pv = 0.010;
  double r_sys = 0.55, r_sv_in = 0.05;
  double r_pulm = 0.055, r_pv_in = 0.025;
  // Valve blending half-width (mmHg); keeps the diodes differentiable.
  double valve_band = 0.025;
  // Timing defaults when not in the parameter space.
  double t_hb = 0.854;
  double av_delay = 0.15;
  // Initial compartment volumes (mL): LA, LV, RA, RV, SA, SV, PA, PV.
  double init_volumes[8] = {65.0, 140.0, 65.0, 140.0, 520.0, 2680.0, 90.0, 420.0};
};

// Full documented parameter space of the generator (12 entries). Names mirror
// the calibration test structure: contractility analogues, resistance scale
// factors and the cycle timing parameters.
ParameterSpace circulation_parameter_space();

// The 5-parameter subset used throughout the benchmarks:
// E_max_LV, E_max_RV, R_sys, R_pulm, AV_delay.
ParameterSpace benchmark_parameter_space();

struct SimulationOptions {
  int n_beats = 5;
  double rk4_dt = 1e-4;
  double output_dt = 1e-3;
};

struct SimulationResult {
  Trajectory beat;                  // last beat, physical traces, t in [0, t_hb]
  Eigen::MatrixXd vessel_pressures; // rows x {SA, SV, PA, PV}
  Eigen::MatrixXd vessel_volumes;   // rows x {SA, SV, PA, PV}
  double t_hb = 0.0;
  double av_delay = 0.0;
  std::vector<std::string> warnings;
};

// Runs n_beats of the closed loop with RK4 and returns the final beat
// resampled onto the output grid. theta overrides the constants named by the
// space; unspecified entries stay at their defaults.
SimulationResult simulate_circulation(const Eigen::Ref<const Eigen::VectorXd>& theta,
                                      const ParameterSpace& space,
                                      const SimulationOptions& opts = {});

struct GenerateOptions {
  SimulationOptions simulation;
};

// Scrambled low-discrepancy parameter points, one circulation run per point.
// Per-sample streams derive from (seed, sample index) so generation order and
// worker count do not matter.
Dataset generate_dataset(const ParameterSpace& space, int n_samples, std::uint64_t seed,
                         const GenerateOptions& opts = {}, int workers = 1);

// ---------------------------------------------------------------------------
// Closed-form test systems used as oracles by the training and GSA suites.
// ---------------------------------------------------------------------------

// Y = sum a_i X_i with X_i uniform on the space ranges; Sobol indices are
// analytic: S1_i = ST_i = a_i^2 Var(X_i) / sum_j a_j^2 Var(X_j).
struct AdditiveMap {
  Eigen::VectorXd coeffs;
  ParameterSpace space;

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd analytic_indices() const;
};

AdditiveMap make_additive_map(const Eigen::VectorXd& coeffs);

// Ishigami function on [-pi, pi]^3.
struct Ishigami {
  double a = 7.0;
  double b = 0.1;

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  ParameterSpace space() const;
  Eigen::Vector3d analytic_s1() const;
  Eigen::Vector3d analytic_st() const;
};

// Brute-force double-loop Monte Carlo Sobol estimates for the Ishigami
// function; total draw budget is n_outer * n_inner per index.
void ishigami_bruteforce_indices(const Ishigami& f, int n_outer, int n_inner, std::uint64_t seed,
                                 Eigen::Vector3d& s1, Eigen::Vector3d& st);

// Family of decay trajectories z(t) = z0 * exp(-k t) with k as the single
// parameter; the closed form makes it a trainer smoke benchmark.
Dataset make_exponential_dataset(int n_samples, std::uint64_t seed, double k_lo = 0.5,
                                 double k_hi = 2.0, double z0 = 1.0, double t_end = 1.0,
                                 double grid_dt = 1e-2);

}  // namespace cardioemu
