#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace cardioemu {

// Objective callback: fills grad (same size as x) and returns the value.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct AdamOptions {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(Eigen::Index dim, const AdamOptions& opts = {});

  void step(Eigen::VectorXd& x, const Eigen::VectorXd& grad);
  void reset();
  const AdamOptions& options() const { return opts_; }
  void set_learning_rate(double lr) { opts_.lr = lr; }

 private:
  AdamOptions opts_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  long t_ = 0;
};

struct LbfgsOptions {
  int max_iters = 100;
  int history = 20;
  double c1 = 1e-4;   // Armijo (sufficient decrease)
  double c2 = 0.9;    // strong Wolfe curvature
  double grad_tol = 1e-10;
  double step_tol = 1e-14;
  int max_line_search = 30;
};

struct LbfgsReport {
  int iterations = 0;
  int evaluations = 0;
  double final_value = 0.0;
  double final_grad_norm = 0.0;
  bool converged = false;
  std::string stop_reason;
};

// Limited-memory BFGS with a strong-Wolfe bracketing line search. Accepted
// iterates are strictly non-increasing in the objective. on_step (optional)
// observes every accepted iterate.
LbfgsReport lbfgs_minimize(const Objective& objective, Eigen::VectorXd& x,
                           const LbfgsOptions& opts = {},
                           const std::function<void(int iter, double value,
                                                    const Eigen::VectorXd& x)>& on_step = {});

}  // namespace cardioemu
