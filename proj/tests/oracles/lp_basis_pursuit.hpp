// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

// Reference basis-pursuit solver for tests: min ||x||_1 s.t. A x = b with A real and dense,
// written as the standard-form LP over x = u - v, u, v >= 0 and solved by Mehrotra's
// predictor-corrector interior-point method.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace fdbeam::oracle {

struct LpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  double gap = 0.0;
};

// min c^T x  s.t.  A x = b, x >= 0.
inline LpResult solve_standard_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                  double tolerance = 1e-12, int max_iterations = 200) {
  const Eigen::Index n = a.cols();
  const Eigen::LDLT<Eigen::MatrixXd> aat(a * a.transpose());
  Eigen::VectorXd x = a.transpose() * aat.solve(b);
  Eigen::VectorXd lambda = aat.solve(a * c);
  Eigen::VectorXd s = c - a.transpose() * lambda;
  x.array() += std::max(-1.5 * x.minCoeff(), 0.0);
  s.array() += std::max(-1.5 * s.minCoeff(), 0.0);
  const double xs = x.dot(s);
  x.array() += 0.5 * xs / s.sum();
  s.array() += 0.5 * xs / x.sum();

  auto max_step = [](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
    }
    return alpha;
  };

  LpResult result;
  const double scale = 1.0 + std::max(b.norm(), c.norm());
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd rb = a * x - b;
    const Eigen::VectorXd rc = a.transpose() * lambda + s - c;
    const double mu = x.dot(s) / static_cast<double>(n);
    result.iterations = it;
    result.gap = std::abs(c.dot(x) - b.dot(lambda)) / (1.0 + std::abs(c.dot(x)));
    if (rb.norm() / scale < tolerance && rc.norm() / scale < tolerance && result.gap < tolerance) break;

    const Eigen::VectorXd d = x.cwiseQuotient(s);
    const Eigen::LDLT<Eigen::MatrixXd> normal(a * d.asDiagonal() * a.transpose());
    auto solve = [&](const Eigen::VectorXd& rxs, Eigen::VectorXd& dx, Eigen::VectorXd& dl, Eigen::VectorXd& ds) {
      const Eigen::VectorXd rhs = -rb + a * rxs.cwiseQuotient(s) - a * d.cwiseProduct(rc);
      dl = normal.solve(rhs);
      ds = -rc - a.transpose() * dl;
      dx = -rxs.cwiseQuotient(s) - d.cwiseProduct(ds);
    };
    Eigen::VectorXd dx, dl, ds;
    solve(x.cwiseProduct(s), dx, dl, ds);
    const double ap = max_step(x, dx);
    const double ad = max_step(s, ds);
    const double mu_aff = (x + ap * dx).dot(s + ad * ds) / static_cast<double>(n);
    const double sigma = std::pow(mu_aff / mu, 3.0);
    const Eigen::VectorXd rxs =
        x.cwiseProduct(s) + dx.cwiseProduct(ds) - Eigen::VectorXd::Constant(n, sigma * mu);
    solve(rxs, dx, dl, ds);
    const double step_p = std::min(1.0, 0.99 * max_step(x, dx));
    const double step_d = std::min(1.0, 0.99 * max_step(s, ds));
    x += step_p * dx;
    lambda += step_d * dl;
    s += step_d * ds;
    if (!x.allFinite() || !s.allFinite()) throw std::runtime_error("interior-point iterate diverged");
  }
  result.x = x;
  result.objective = c.dot(x);
  return result;
}

// min ||x||_1 s.t. A x = b.
inline LpResult basis_pursuit(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tolerance = 1e-12) {
  const Eigen::Index n = a.cols();
  Eigen::MatrixXd split(a.rows(), 2 * n);
  split << a, -a;
  const LpResult lp = solve_standard_lp(split, b, Eigen::VectorXd::Ones(2 * n), tolerance);
  LpResult out = lp;
  out.x = lp.x.head(n) - lp.x.tail(n);
  return out;
}

}  // namespace fdbeam::oracle
