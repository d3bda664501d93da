#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "cadapt/error.hpp"
#include "cadapt/objectives.hpp"

namespace cadapt {

struct BfgsOptions {
  int max_iters = 500;
  double grad_tol = 1e-6;
  double armijo_c1 = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 60;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // objective after every accepted step
};

/// Dense BFGS on the inverse Hessian with Armijo backtracking. Every
/// accepted step strictly decreases the objective. When no step along the
/// quasi-Newton direction satisfies Armijo, the approximation is reset to
/// the identity once; a failing steepest-descent search ends the run.
inline BfgsResult MinimizeBfgs(const ObjectiveFn& f, Eigen::VectorXd x0,
                               const BfgsOptions& opt) {
  const Eigen::Index n = x0.size();
  BfgsResult res;
  res.x = std::move(x0);
  ObjectiveValue cur = f(res.x);
  res.history.push_back(cur.loss);
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  bool h_is_identity = true;

  for (res.iterations = 0; res.iterations < opt.max_iters; ++res.iterations) {
    if (cur.gradient.lpNorm<Eigen::Infinity>() < opt.grad_tol) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd dir = -h * cur.gradient;
    double slope = cur.gradient.dot(dir);
    if (!(slope < 0.0)) {
      h.setIdentity();
      h_is_identity = true;
      dir = -cur.gradient;
      slope = cur.gradient.dot(dir);
    }

    bool accepted = false;
    Eigen::VectorXd x_next;
    ObjectiveValue next;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double step = 1.0;
      if (h_is_identity) {
        step = std::min(1.0, 1.0 / cur.gradient.lpNorm<Eigen::Infinity>());
      }
      for (int k = 0; k < opt.max_backtracks; ++k, step *= opt.shrink) {
        x_next = res.x + step * dir;
        next = f(x_next);
        if (std::isfinite(next.loss) &&
            next.loss <= cur.loss + opt.armijo_c1 * step * slope &&
            next.loss < cur.loss) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (h_is_identity) break;
        h.setIdentity();
        h_is_identity = true;
        dir = -cur.gradient;
        slope = cur.gradient.dot(dir);
      }
    }
    if (!accepted) break;

    const Eigen::VectorXd s = x_next - res.x;
    const Eigen::VectorXd y = next.gradient - cur.gradient;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (h_is_identity) h *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd left =
          Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
      h = left * h * left.transpose() + rho * s * s.transpose();
      h_is_identity = false;
    }
    res.x = std::move(x_next);
    cur = std::move(next);
    res.history.push_back(cur.loss);
  }
  if (!res.converged &&
      cur.gradient.lpNorm<Eigen::Infinity>() < opt.grad_tol) {
    res.converged = true;
  }
  res.value = cur.loss;
  res.gradient = cur.gradient;
  return res;
}

}  // namespace cadapt
