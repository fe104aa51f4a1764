#include "cardioemu/trajectory.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cardioemu/errors.hpp"
#include "cardioemu/numio.hpp"

namespace cardioemu {

void CycleContext::validate() const {
  if (!(t_hb > 0.0)) throw ConfigError("cycle: t_hb must be > 0");
  if (!(dt > 0.0)) throw ConfigError("cycle: dt must be > 0");
  if (std::floor(t_hb / dt + 1e-9) < 2.0) {
    throw ConfigError("cycle: dt must divide the cycle into at least 2 steps");
  }
}

Eigen::VectorXd make_time_grid(double t_hb, double dt) {
  const double ratio = t_hb / dt;
  auto n_full = static_cast<Eigen::Index>(std::floor(ratio + 1e-9));
  const bool exact = std::abs(t_hb - static_cast<double>(n_full) * dt) <= 1e-9 * t_hb;
  const Eigen::Index n_rows = exact ? n_full + 1 : n_full + 2;
  Eigen::VectorXd times(n_rows);
  for (Eigen::Index k = 0; k + 1 < n_rows; ++k) {
    times[k] = static_cast<double>(k) * dt;
  }
  times[n_rows - 1] = t_hb;
  return times;
}

const std::vector<std::string>& physical_state_labels() {
  static const std::vector<std::string> labels = {"p_LA", "p_LV", "p_RA", "p_RV",
                                                  "V_LA", "V_LV", "V_RA", "V_RV"};
  return labels;
}

std::vector<std::string> state_labels_with_latent(int n_latent) {
  std::vector<std::string> labels = physical_state_labels();
  for (int i = 0; i < n_latent; ++i) {
    labels.push_back("z_lat_" + std::to_string(i));
  }
  return labels;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const std::vector<std::string>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != traj.n_states()) {
    throw ShapeError("trajectory csv: label count != state count");
  }
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot open '" + path.string() + "' for writing");
  out << "t";
  for (const auto& l : labels) out << "," << l;
  out << "\n";
  for (Eigen::Index k = 0; k < traj.rows(); ++k) {
    out << format_full(traj.times[k]);
    for (Eigen::Index j = 0; j < traj.n_states(); ++j) {
      out << "," << format_full(traj.states(k, j));
    }
    out << "\n";
  }
  if (!out) throw DatasetError("write failed for '" + path.string() + "'");
}

Trajectory read_trajectory_csv(const std::filesystem::path& path,
                               std::vector<std::string>* labels_out) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DatasetError("empty trajectory file '" + path.string() + "'");

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "t") {
    throw DatasetError("trajectory csv must start with a 't' column: '" + path.string() + "'");
  }
  const std::size_t n_cols = header.size();

  std::vector<double> flat;
  std::size_t n_rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t got = 0;
    while (std::getline(ss, cell, ',')) {
      flat.push_back(parse_double(cell));
      ++got;
    }
    if (got != n_cols) throw DatasetError("ragged row in '" + path.string() + "'");
    ++n_rows;
  }
  if (n_rows < 2) throw DatasetError("trajectory needs at least 2 rows: '" + path.string() + "'");

  Trajectory traj;
  traj.times.resize(static_cast<Eigen::Index>(n_rows));
  traj.states.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols - 1));
  for (std::size_t r = 0; r < n_rows; ++r) {
    traj.times[static_cast<Eigen::Index>(r)] = flat[r * n_cols];
    for (std::size_t c = 1; c < n_cols; ++c) {
      traj.states(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) =
          flat[r * n_cols + c];
    }
  }
  traj.context.t_hb = traj.times[traj.times.size() - 1];
  if (n_rows >= 2) traj.context.dt = traj.times[1] - traj.times[0];
  if (labels_out != nullptr) {
    labels_out->assign(header.begin() + 1, header.end());
  }
  return traj;
}

double interp_trace(const Eigen::VectorXd& times, const Eigen::VectorXd& values, double t) {
  const Eigen::Index n = times.size();
  if (t <= times[0]) return values[0];
  if (t >= times[n - 1]) return values[n - 1];
  // Grids are small and uniform-ish; binary search keeps this general.
  Eigen::Index lo = 0;
  Eigen::Index hi = n - 1;
  while (hi - lo > 1) {
    const Eigen::Index mid = (lo + hi) / 2;
    if (times[mid] <= t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double w = (t - times[lo]) / (times[hi] - times[lo]);
  return (1.0 - w) * values[lo] + w * values[hi];
}

Eigen::MatrixXd resample_states(const Trajectory& traj, const Eigen::VectorXd& new_times) {
  Eigen::MatrixXd out(new_times.size(), traj.n_states());
  for (Eigen::Index j = 0; j < traj.n_states(); ++j) {
    const Eigen::VectorXd col = traj.states.col(j);
    for (Eigen::Index k = 0; k < new_times.size(); ++k) {
      out(k, j) = interp_trace(traj.times, col, new_times[k]);
    }
  }
  return out;
}

}  // namespace cardioemu
