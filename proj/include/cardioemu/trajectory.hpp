#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace cardioemu {

// One heartbeat's timing: period, atrioventricular delay and integrator step.
struct CycleContext {
  double t_hb = 0.854;
  double av_delay = 0.15;
  double dt = 1e-3;

  void validate() const;
};

// Uniform time grid covering [0, t_hb]. When t_hb / dt is an integer (within
// 1e-9 relative) the grid is k * dt with the last point snapped to exactly
// t_hb; otherwise the floor(t_hb/dt) full steps are followed by one remainder
// step so the final time is still exactly t_hb.
Eigen::VectorXd make_time_grid(double t_hb, double dt);

// Uniformly sampled states over one cycle; row k is the state at times[k].
struct Trajectory {
  CycleContext context;
  Eigen::VectorXd times;   // n_rows
  Eigen::MatrixXd states;  // n_rows x n_states

  Eigen::Index rows() const { return states.rows(); }
  Eigen::Index n_states() const { return states.cols(); }
};

// Physical trace labels in state order: pressures then volumes.
const std::vector<std::string>& physical_state_labels();

// Labels for a state vector with n_latent trailing latent entries.
std::vector<std::string> state_labels_with_latent(int n_latent);

// CSV with header t,<label0>,<label1>,... and full-precision decimals.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const std::vector<std::string>& labels);

// Reads a trajectory CSV; labels_out (optional) receives the header names.
Trajectory read_trajectory_csv(const std::filesystem::path& path,
                               std::vector<std::string>* labels_out = nullptr);

// Linear interpolation of a trajectory column onto time t (clamped to the
// grid ends).
double interp_trace(const Eigen::VectorXd& times, const Eigen::VectorXd& values, double t);

// Resamples all columns onto a new time grid by linear interpolation.
Eigen::MatrixXd resample_states(const Trajectory& traj, const Eigen::VectorXd& new_times);

}  // namespace cardioemu
