#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cardioemu/ann.hpp"
#include "cardioemu/dataset.hpp"
#include "cardioemu/params.hpp"
#include "cardioemu/trajectory.hpp"

namespace cardioemu {

// Neural-ODE surrogate: d z / dt = scale/T_HB * net([zn, cos, sin, thetan]).
// The state keeps physical units; the net sees states centered/scaled per
// trace and parameters mapped affinely to [-1, 1]. The leading n_physical
// state entries are data-backed traces, the rest are latent with a trainable
// shared initial condition.
struct LnodeModel {
  AnnArchitecture arch;
  AnnWeights weights;
  Eigen::VectorXd latent_ic;            // size n_states - n_physical
  int n_physical = 8;
  std::vector<std::string> state_labels;  // size n_states
  Eigen::VectorXd state_center;           // size n_states
  Eigen::VectorXd state_scale;            // size n_states, all > 0
  ParameterSpace params;
  std::uint64_t init_seed = 0;

  int n_states() const { return arch.output_dim; }
  int n_latent() const { return n_states() - n_physical; }
  int n_params() const { return params.size(); }

  void validate() const;
};

// Fresh model with Glorot weights, zero latent initial condition and unit
// normalization (callers overwrite the stats before training).
LnodeModel make_model(const AnnArchitecture& arch, int n_physical, const ParameterSpace& space,
                      std::uint64_t seed);

// cos/sin of the cycle phase 2*pi*(t - av_delay)/t_hb.
std::pair<double, double> periodic_inputs(double t, const CycleContext& ctx);

// Scratch shared by rhs/integration/backprop sweeps on one thread.
struct LnodeWorkspace {
  AnnWorkspace ann;
  Eigen::VectorXd net_in;
  Eigen::VectorXd net_out;
  Eigen::VectorXd theta_norm;
  Eigen::VectorXd cot;
  Eigen::VectorXd grad_in;
};

void rhs(const LnodeModel& model, const Eigen::Ref<const Eigen::VectorXd>& state, double t,
         const Eigen::Ref<const Eigen::VectorXd>& theta, const CycleContext& ctx,
         LnodeWorkspace& ws, Eigen::VectorXd& dstate_dt);

Eigen::VectorXd rhs(const LnodeModel& model, const Eigen::Ref<const Eigen::VectorXd>& state,
                    double t, const Eigen::Ref<const Eigen::VectorXd>& theta,
                    const CycleContext& ctx);

// Forward Euler over the make_time_grid() grid; throws DivergenceError with
// the offending step index if the state leaves the finite range.
Trajectory integrate(const LnodeModel& model, const Eigen::Ref<const Eigen::VectorXd>& z0,
                     const Eigen::Ref<const Eigen::VectorXd>& theta, const CycleContext& ctx);

// Test hook: same integrator driven by an arbitrary right-hand side.
using RhsFn = std::function<void(const Eigen::VectorXd& state, double t, Eigen::VectorXd& dstate)>;
Trajectory integrate_rhs(const RhsFn& f, const Eigen::Ref<const Eigen::VectorXd>& z0,
                         const CycleContext& ctx);

// Physical block from the sample, latent block from the model's trainable
// latent initial condition.
Eigen::VectorXd assemble_initial_state(const TrainingSample& sample, const LnodeModel& model);

// Reverse sweep over a stored Euler trajectory. node_cotangents carries the
// direct dL/dz_k contribution of every grid node (rows x n_states); the sweep
// runs the discrete adjoint a_k = a_{k+1} + h_k J_z^T a_{k+1} + g_k backward
// and accumulates, where requested,
//   grad_weights += sum_k h_k (dnet/dw)^T cot_k      (size count_params)
//   grad_theta   += sum_k h_k (df/dtheta)^T a_{k+1}  (physical units)
//   grad_z0      =  a_0                              (full dL/dz_0)
// This is the exact gradient of any functional of the discrete trajectory.
void backprop_trajectory(const LnodeModel& model, const Trajectory& traj,
                         const Eigen::Ref<const Eigen::VectorXd>& theta,
                         const Eigen::Ref<const Eigen::MatrixXd>& node_cotangents,
                         Eigen::VectorXd* grad_weights, Eigen::VectorXd* grad_theta,
                         Eigen::VectorXd* grad_z0);

// Checkpoint JSON; weights and latent ICs stored as hex-float strings so the
// round-trip is bit-exact.
void save_checkpoint(const std::filesystem::path& path, const LnodeModel& model);
LnodeModel load_checkpoint(const std::filesystem::path& path);

}  // namespace cardioemu
