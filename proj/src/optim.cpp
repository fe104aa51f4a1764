#include "cardioemu/optim.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "cardioemu/errors.hpp"

namespace cardioemu {

Adam::Adam(Eigen::Index dim, const AdamOptions& opts)
    : opts_(opts), m_(Eigen::VectorXd::Zero(dim)), v_(Eigen::VectorXd::Zero(dim)) {}

void Adam::step(Eigen::VectorXd& x, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = opts_.beta1 * m_ + (1.0 - opts_.beta1) * grad;
  v_ = opts_.beta2 * v_ + (1.0 - opts_.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(opts_.beta1, t_);
  const double bc2 = 1.0 - std::pow(opts_.beta2, t_);
  x.array() -= opts_.lr * (m_.array() / bc1) /
               ((v_.array() / bc2).sqrt() + opts_.eps);
}

void Adam::reset() {
  m_.setZero();
  v_.setZero();
  t_ = 0;
}

namespace {

struct LinePoint {
  double alpha;
  double value;
  double slope;
};

// Cubic interpolation minimizer on [a, b] from values/slopes at both ends;
// falls back to bisection when the cubic is degenerate.
double cubic_min(const LinePoint& a, const LinePoint& b) {
  const double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.slope * b.slope;
  if (disc < 0.0) return 0.5 * (a.alpha + b.alpha);
  const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
  const double denom = b.slope - a.slope + 2.0 * d2;
  if (denom == 0.0) return 0.5 * (a.alpha + b.alpha);
  double alpha = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
  const double lo = std::min(a.alpha, b.alpha);
  const double hi = std::max(a.alpha, b.alpha);
  const double margin = 0.1 * (hi - lo);
  if (!std::isfinite(alpha) || alpha < lo + margin || alpha > hi - margin) {
    alpha = 0.5 * (a.alpha + b.alpha);
  }
  return alpha;
}

}  // namespace

LbfgsReport lbfgs_minimize(const Objective& objective, Eigen::VectorXd& x,
                           const LbfgsOptions& opts,
                           const std::function<void(int, double, const Eigen::VectorXd&)>& on_step) {
  const Eigen::Index dim = x.size();
  LbfgsReport report;

  Eigen::VectorXd grad(dim);
  double value = objective(x, grad);
  ++report.evaluations;
  if (!std::isfinite(value)) {
    throw DivergenceError("lbfgs: objective not finite at the start point");
  }

  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  std::deque<double> rho_hist;

  Eigen::VectorXd direction(dim);
  Eigen::VectorXd x_new(dim);
  Eigen::VectorXd grad_new(dim);
  Eigen::VectorXd alpha_buf;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const double gnorm = grad.norm();
    if (gnorm <= opts.grad_tol) {
      report.converged = true;
      report.stop_reason = "gradient norm below tolerance";
      break;
    }

    // Two-loop recursion.
    direction = -grad;
    const int m = static_cast<int>(s_hist.size());
    alpha_buf.resize(m);
    for (int i = m - 1; i >= 0; --i) {
      alpha_buf[i] = rho_hist[static_cast<std::size_t>(i)] *
                     s_hist[static_cast<std::size_t>(i)].dot(direction);
      direction -= alpha_buf[i] * y_hist[static_cast<std::size_t>(i)];
    }
    if (m > 0) {
      const auto& s = s_hist.back();
      const auto& y = y_hist.back();
      direction *= s.dot(y) / y.squaredNorm();
    }
    for (int i = 0; i < m; ++i) {
      const double beta = rho_hist[static_cast<std::size_t>(i)] *
                          y_hist[static_cast<std::size_t>(i)].dot(direction);
      direction += (alpha_buf[i] - beta) * s_hist[static_cast<std::size_t>(i)];
    }

    double slope0 = grad.dot(direction);
    if (slope0 >= 0.0) {
      // History lost descent; restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      direction = -grad;
      slope0 = -grad.squaredNorm();
    }

    // Strong-Wolfe line search (bracket then zoom).
    const double value0 = value;
    const auto eval_at = [&](double a, LinePoint& pt) {
      x_new = x + a * direction;
      pt.value = objective(x_new, grad_new);
      ++report.evaluations;
      pt.slope = grad_new.dot(direction);
      pt.alpha = a;
      last_eval_alpha = a;
      last_eval_value = pt.value;
    };

    LinePoint cur;
    double alpha = (iter == 0 && m == 0) ? std::min(1.0, 1.0 / std::max(gnorm, 1e-12)) : 1.0;
    LinePoint prev{0.0, value0, slope0};
    bool accepted = false;
    double accepted_alpha = 0.0;
    double last_eval_alpha = -1.0;
    double last_eval_value = value0;

    const auto wolfe_ok = [&](const LinePoint& p) {
      return p.value <= value0 + opts.c1 * p.alpha * slope0 &&
             std::abs(p.slope) <= opts.c2 * std::abs(slope0);
    };

    const auto zoom = [&](LinePoint a, LinePoint b) {
      for (int z = 0; z < opts.max_line_search; ++z) {
        LinePoint trial;
        const double alpha_z = cubic_min(a, b);
        eval_at(alpha_z, trial);
        if (!std::isfinite(trial.value) || trial.value > value0 + opts.c1 * alpha_z * slope0 ||
            trial.value >= a.value) {
          b = trial;
        } else {
          if (std::abs(trial.slope) <= opts.c2 * std::abs(slope0)) {
            accepted = true;
            accepted_alpha = alpha_z;
            return;
          }
          if (trial.slope * (b.alpha - a.alpha) >= 0.0) b = a;
          a = trial;
        }
        if (std::abs(b.alpha - a.alpha) * direction.norm() < opts.step_tol) break;
      }
      // Fall back to the best sufficient-decrease point seen, if any.
      if (a.alpha > 0.0 && a.value < value0) {
        accepted = true;
        accepted_alpha = a.alpha;
      }
    };

    for (int ls = 0; ls < opts.max_line_search && !accepted; ++ls) {
      eval_at(alpha, cur);
      if (!std::isfinite(cur.value) || cur.value > value0 + opts.c1 * alpha * slope0 ||
          (ls > 0 && cur.value >= prev.value)) {
        zoom(prev, cur);
        break;
      }
      if (std::abs(cur.slope) <= opts.c2 * std::abs(slope0)) {
        accepted = true;
        accepted_alpha = alpha;
        break;
      }
      if (cur.slope >= 0.0) {
        zoom(cur, prev);
        break;
      }
      prev = cur;
      alpha_prev = alpha;
      alpha *= 2.0;
    }

    if (!accepted) {
      report.stop_reason = "line search failed";
      break;
    }

    // x_new/grad_new already hold the accepted point unless the fallback
    // picked an earlier trial; re-evaluate only in that case.
    double value_new = last_eval_value;
    if (last_eval_alpha != accepted_alpha) {
      x_new = x + accepted_alpha * direction;
      value_new = objective(x_new, grad_new);
      ++report.evaluations;
    }

    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    x.swap(x_new);
    grad.swap(grad_new);
    const double improvement = value - value_new;
    value = value_new;
    ++report.iterations;
    if (on_step) on_step(report.iterations, value, x);

    if (improvement >= 0.0 && improvement <= opts.step_tol * (std::abs(value) + 1.0)) {
      report.converged = true;
      report.stop_reason = "objective improvement below tolerance";
      break;
    }
  }

  if (report.stop_reason.empty()) {
    report.stop_reason = report.converged ? "converged" : "iteration budget exhausted";
  }
  report.final_value = value;
  report.final_grad_norm = grad.norm();
  return report;
}

}  // namespace cardioemu
