// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#include "fdbeam/cs_recovery.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace fdbeam {

namespace {

double norm2(std::span<const cplx> v) {
  double s = 0.0;
  for (const cplx& x : v) s += std::norm(x);
  return std::sqrt(s);
}

cplx twiddle(long k, long l, long n) {
  const long j = ((k * l) % n + n) % n;
  return std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n));
}

}  // namespace

RecoveryProblem::RecoveryProblem(std::size_t n, std::vector<int> indices, std::vector<cplx> measurements,
                                 std::vector<cplx> pulse)
    : n_(n) {
  if (n == 0) throw std::invalid_argument("recovery problem needs N > 0");
  if (indices.size() != measurements.size() || indices.size() != pulse.size())
    throw std::invalid_argument("indices, measurements and pulse values must have the same length");
  double h_max = 0.0;
  for (const cplx& h : pulse) h_max = std::max(h_max, std::abs(h));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int k = indices[i];
    if (k < 0 || static_cast<std::size_t>(k) >= n)
      throw std::invalid_argument("measurement index " + std::to_string(k) + " outside [0, N)");
    if (!(std::abs(pulse[i]) >= 1e-8 * h_max) || h_max == 0.0) {
      excluded_.push_back(k);
      continue;
    }
    indices_.push_back(k);
    c_.push_back(measurements[i]);
    h_.push_back(pulse[i]);
  }
  if (!excluded_.empty()) {
    std::ostringstream msg;
    msg << excluded_.size() << " bin(s) excluded: pulse spectrum below 1e-8 of its maximum";
    warnings_.push_back(msg.str());
  }
  if (indices_.empty()) throw std::invalid_argument("all measurement bins were excluded by the conditioning guard");
  std::vector<int> sorted(indices_);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("duplicate measurement index");
  half_spectrum_ = std::all_of(indices_.begin(), indices_.end(),
                               [n](int k) { return k > 0 && 2 * static_cast<std::size_t>(k) < n; });
}

void RecoveryProblem::forward(std::span<const double> b, std::span<cplx> out) const {
  if (b.size() != n_ || out.size() != rows()) throw std::invalid_argument("forward: size mismatch");
  const RealFft& fft = real_fft(n_);
  std::vector<cplx> spectrum(fft.bins());
  fft.forward(b, spectrum);
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    const std::size_t k = static_cast<std::size_t>(indices_[i]);
    const cplx x = 2 * k <= n_ ? spectrum[k] : std::conj(spectrum[n_ - k]);
    out[i] = h_[i] * x;
  }
}

void RecoveryProblem::adjoint(std::span<const cplx> y, std::span<double> out) const {
  if (y.size() != rows() || out.size() != n_) throw std::invalid_argument("adjoint: size mismatch");
  if (half_spectrum_) {
    // the c2r transform of a half spectrum supported on (0, N/2) returns 2 Re(sum)
    const RealFft& fft = real_fft(n_);
    std::vector<cplx> half(fft.bins());
    for (std::size_t i = 0; i < indices_.size(); ++i) half[static_cast<std::size_t>(indices_[i])] = std::conj(h_[i]) * y[i];
    fft.inverse(half, out);
    for (double& v : out) v *= 0.5;
    return;
  }
  const ComplexFft& fft = complex_fft(n_);
  std::vector<cplx> full(n_);
  for (std::size_t i = 0; i < indices_.size(); ++i) full[static_cast<std::size_t>(indices_[i])] += std::conj(h_[i]) * y[i];
  std::vector<cplx> time(n_);
  fft.inverse(full, time);
  for (std::size_t l = 0; l < n_; ++l) out[l] = time[l].real();
}

std::vector<cplx> RecoveryProblem::forward(std::span<const double> b) const {
  std::vector<cplx> out(rows());
  forward(b, out);
  return out;
}

std::vector<double> RecoveryProblem::adjoint(std::span<const cplx> y) const {
  std::vector<double> out(n_);
  adjoint(y, out);
  return out;
}

double RecoveryProblem::adjoint_mismatch(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> x(n_);
  for (double& v : x) v = normal(rng);
  std::vector<cplx> y(rows());
  for (cplx& v : y) v = cplx(normal(rng), normal(rng));
  const std::vector<cplx> ax = forward(x);
  const std::vector<double> aty = adjoint(y);
  double lhs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) lhs += (std::conj(ax[i]) * y[i]).real();
  const double rhs = std::inner_product(x.begin(), x.end(), aty.begin(), 0.0);
  const double scale = norm2(ax) * norm2(y);
  return scale == 0.0 ? std::abs(lhs - rhs) : std::abs(lhs - rhs) / scale;
}

RecoveryProblem RecoveryProblem::scaled(double alpha) const {
  RecoveryProblem out(*this);
  for (cplx& v : out.c_) v *= alpha;
  return out;
}

RecoveryProblem build_problem(const BeamSpectrum& spectrum, const Pulse& pulse) {
  spectrum.validate();
  if (pulse.length() != spectrum.length) throw std::invalid_argument("pulse length does not match the beam spectrum");
  std::vector<cplx> h;
  h.reserve(spectrum.indices.size());
  for (int k : spectrum.indices) h.push_back(pulse.spectrum[static_cast<std::size_t>(k)]);
  RecoveryProblem problem(spectrum.length, spectrum.indices, spectrum.values, std::move(h));
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const double mismatch = problem.adjoint_mismatch(seed);
    if (!(mismatch <= 1e-10)) {
      std::ostringstream msg;
      msg << "measurement operator failed the adjoint test (relative mismatch " << mismatch << ")";
      throw std::logic_error(msg.str());
    }
  }
  return problem;
}

RecoveredLine solve_omp(const RecoveryProblem& problem, std::size_t atoms) {
  if (atoms < 1 || atoms > problem.rows()) throw std::invalid_argument("OMP needs 1 <= L <= |mu|");
  const std::size_t n = problem.length();
  const std::size_t rows = problem.rows();
  const auto c = problem.measurements();
  const auto h = problem.pulse();
  const auto idx = problem.indices();

  RecoveredLine out;
  out.solver = "omp";
  out.coefficients.assign(n, 0.0);
  out.warnings = problem.warnings();

  Eigen::VectorXd rhs(2 * rows);
  for (std::size_t i = 0; i < rows; ++i) {
    rhs(static_cast<Eigen::Index>(i)) = c[i].real();
    rhs(static_cast<Eigen::Index>(rows + i)) = c[i].imag();
  }
  const double c_norm = rhs.norm();
  // every atom has norm sqrt(sum |h_k|^2), so normalizing does not change the argmax
  double atom_norm = 0.0;
  for (const cplx& v : h) atom_norm += std::norm(v);
  atom_norm = std::sqrt(atom_norm);

  std::vector<cplx> residual(c.begin(), c.end());
  std::vector<double> correlation(n);
  std::vector<std::size_t> support;
  std::vector<char> chosen(n, 0);
  Eigen::MatrixXd system(2 * rows, 0);
  Eigen::VectorXd amplitudes;
  out.residual_history.push_back(c_norm);

  while (support.size() < atoms) {
    if (out.residual_history.back() <= 1e-12 * c_norm) break;
    problem.adjoint(residual, correlation);
    std::size_t best = n;
    double best_value = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (chosen[l]) continue;
      const double v = std::abs(correlation[l]) / atom_norm;
      if (v > best_value) {
        best_value = v;
        best = l;
      }
    }
    if (best == n) break;

    Eigen::MatrixXd candidate(2 * rows, static_cast<Eigen::Index>(support.size() + 1));
    candidate.leftCols(static_cast<Eigen::Index>(support.size())) = system;
    for (std::size_t i = 0; i < rows; ++i) {
      const cplx a = h[i] * twiddle(idx[i], static_cast<long>(best), static_cast<long>(n));
      candidate(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(support.size())) = a.real();
      candidate(static_cast<Eigen::Index>(rows + i), static_cast<Eigen::Index>(support.size())) = a.imag();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(candidate);
    qr.setThreshold(1e-10);
    if (qr.rank() < candidate.cols()) {
      std::ostringstream msg;
      msg << "OMP refit lost rank at atom " << support.size() + 1 << "; stopped with " << support.size() << " atoms";
      out.warnings.push_back(msg.str());
      break;
    }
    system = std::move(candidate);
    amplitudes = qr.solve(rhs);
    support.push_back(best);
    chosen[best] = 1;

    const Eigen::VectorXd fit = system * amplitudes;
    for (std::size_t i = 0; i < rows; ++i) {
      residual[i] = c[i] - cplx(fit(static_cast<Eigen::Index>(i)), fit(static_cast<Eigen::Index>(rows + i)));
    }
    out.residual_history.push_back((rhs - fit).norm());
  }

  for (std::size_t j = 0; j < support.size(); ++j) out.coefficients[support[j]] = amplitudes(static_cast<Eigen::Index>(j));
  out.iterations = support.size();
  out.support = support.size();
  out.residual_norm = out.residual_history.back();
  for (double v : out.coefficients) out.l1_norm += std::abs(v);
  return out;
}

namespace {

// Projection onto {x : ||A x - c|| <= eps} for A A* = diag(d); carries A x along.
struct Projector {
  const RecoveryProblem& problem;
  std::vector<double> d;
  double epsilon;

  void operator()(std::span<const double> q, std::span<const cplx> aq, std::span<double> x, std::span<cplx> ax) const {
    const auto c = problem.measurements();
    const std::size_t rows = c.size();
    std::vector<cplx> r(rows);
    double r2 = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      r[i] = aq[i] - c[i];
      r2 += std::norm(r[i]);
    }
    if (r2 <= epsilon * epsilon) {
      std::copy(q.begin(), q.end(), x.begin());
      std::copy(aq.begin(), aq.end(), ax.begin());
      return;
    }
    std::vector<cplx> w(rows);
    if (epsilon == 0.0) {
      for (std::size_t i = 0; i < rows; ++i) {
        w[i] = r[i] / d[i];
        ax[i] = c[i];
      }
    } else {
      // Newton on sum |r|^2 / (1 + lambda d)^2 = eps^2, convex and decreasing in lambda >= 0
      double lambda = 0.0;
      const double target = epsilon * epsilon;
      for (int iter = 0; iter < 200; ++iter) {
        double value = -target;
        double slope = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          const double s = 1.0 / (1.0 + lambda * d[i]);
          const double e = std::norm(r[i]) * s * s;
          value += e;
          slope -= 2.0 * e * d[i] * s;
        }
        if (std::abs(value) <= 1e-15 * target || slope == 0.0) break;
        const double step = value / slope;
        lambda -= step;
        if (std::abs(step) <= 1e-15 * lambda) break;
      }
      for (std::size_t i = 0; i < rows; ++i) {
        const double s = 1.0 / (1.0 + lambda * d[i]);
        w[i] = lambda * s * r[i];
        ax[i] = c[i] + s * r[i];
      }
    }
    std::vector<double> correction(q.size());
    problem.adjoint(w, correction);
    for (std::size_t l = 0; l < q.size(); ++l) x[l] = q[l] - correction[l];
  }
};

double huber(std::span<const double> x, double mu) {
  double f = 0.0;
  for (double v : x) {
    const double a = std::abs(v);
    f += a <= mu ? 0.5 * v * v / mu : a - 0.5 * mu;
  }
  return f;
}

}  // namespace

RecoveredLine solve_l1(const RecoveryProblem& problem, double epsilon, double smoothing, const L1Options& options) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
  if (!(smoothing > 0.0)) throw std::invalid_argument("smoothing must be positive");
  if (options.continuation_stages < 1 || options.max_iterations < 10 || !(options.tolerance > 0.0))
    throw std::invalid_argument("invalid l1 solver options");
  if (!problem.half_spectrum())
    throw std::invalid_argument("l1 solver needs measurement indices strictly between 0 and N/2");

  const std::size_t n = problem.length();
  const std::size_t rows = problem.rows();
  const auto c = problem.measurements();

  RecoveredLine out;
  out.solver = "l1";
  out.coefficients.assign(n, 0.0);
  out.warnings = problem.warnings();
  const double c_norm = norm2(c);
  if (c_norm <= epsilon) {
    out.residual_norm = c_norm;
    out.residual_history.push_back(c_norm);
    return out;
  }

  Projector project{problem, std::vector<double>(rows), epsilon};
  for (std::size_t i = 0; i < rows; ++i) project.d[i] = 0.5 * static_cast<double>(n) * std::norm(problem.pulse()[i]);

  // minimum-norm solution of A x = c
  std::vector<cplx> w(rows);
  for (std::size_t i = 0; i < rows; ++i) w[i] = c[i] / project.d[i];
  std::vector<double> start = problem.adjoint(w);
  std::vector<cplx> a_start(c.begin(), c.end());
  double x0_max = 0.0;
  for (double v : start) x0_max = std::max(x0_max, std::abs(v));
  const double mu_final = smoothing * x0_max;

  std::vector<double> x(n), g(n), q(n), y(n), z(n), acc(n);
  std::vector<cplx> ax(rows), ag(rows), aq(rows), ay(rows), az(rows), a_acc(rows);
  std::vector<double> recent;
  bool converged = false;

  for (int stage = 0; stage < options.continuation_stages; ++stage) {
    const double mu = mu_final * std::ldexp(1.0, options.continuation_stages - 1 - stage);
    x = start;
    ax = a_start;
    std::fill(acc.begin(), acc.end(), 0.0);
    std::fill(a_acc.begin(), a_acc.end(), cplx{});
    recent.clear();
    converged = false;
    for (int k = 0; k < options.max_iterations; ++k) {
      if (k > 0 && k % 64 == 0) problem.forward(x, ax);
      for (std::size_t l = 0; l < n; ++l) g[l] = std::abs(x[l]) <= mu ? x[l] / mu : (x[l] > 0.0 ? 1.0 : -1.0);
      problem.forward(g, ag);

      for (std::size_t l = 0; l < n; ++l) q[l] = x[l] - mu * g[l];
      for (std::size_t i = 0; i < rows; ++i) aq[i] = ax[i] - mu * ag[i];
      project(q, aq, y, ay);

      const double alpha = 0.5 * (k + 1);
      for (std::size_t l = 0; l < n; ++l) acc[l] += alpha * g[l];
      for (std::size_t i = 0; i < rows; ++i) a_acc[i] += alpha * ag[i];
      for (std::size_t l = 0; l < n; ++l) q[l] = start[l] - mu * acc[l];
      for (std::size_t i = 0; i < rows; ++i) aq[i] = a_start[i] - mu * a_acc[i];
      project(q, aq, z, az);

      const double tau = 2.0 / (k + 3);
      for (std::size_t l = 0; l < n; ++l) x[l] = tau * z[l] + (1.0 - tau) * y[l];
      for (std::size_t i = 0; i < rows; ++i) ax[i] = tau * az[i] + (1.0 - tau) * ay[i];

      double res = 0.0;
      for (std::size_t i = 0; i < rows; ++i) res += std::norm(ay[i] - c[i]);
      out.residual_history.push_back(std::sqrt(res));
      ++out.iterations;

      const double f = huber(y, mu);
      if (recent.size() == 10) {
        const double mean = std::accumulate(recent.begin(), recent.end(), 0.0) / 10.0;
        if (mean > 0.0 && std::abs(f - mean) / mean < options.tolerance) {
          converged = true;
          break;
        }
        recent.erase(recent.begin());
      }
      recent.push_back(f);
    }
    start = y;
    a_start = ay;
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "l1 solver did not reach tolerance " << options.tolerance << " within " << options.max_iterations
        << " iterations in its final stage";
    throw ConvergenceError(msg.str(), out.residual_history);
  }

  out.coefficients = start;
  std::vector<cplx> final_fit = problem.forward(out.coefficients);
  double res = 0.0;
  for (std::size_t i = 0; i < rows; ++i) res += std::norm(final_fit[i] - c[i]);
  out.residual_norm = std::sqrt(res);
  double b_max = 0.0;
  for (double v : out.coefficients) {
    out.l1_norm += std::abs(v);
    b_max = std::max(b_max, std::abs(v));
  }
  for (double v : out.coefficients) out.support += std::abs(v) > 1e-6 * b_max ? 1 : 0;
  return out;
}

BeamformedLine reconstruct_beam(const RecoveredLine& line, const Pulse& pulse, std::size_t out_len, double theta) {
  const std::size_t n = line.coefficients.size();
  if (pulse.length() != n) throw std::invalid_argument("pulse length does not match the coefficient vector");
  const RealFft& fft = real_fft(n);
  std::vector<cplx> b(fft.bins());
  fft.forward(line.coefficients, b);
  BeamSpectrum spectrum;
  spectrum.length = n;
  spectrum.theta = theta;
  spectrum.sample_rate = pulse.sample_rate;
  spectrum.indices.resize(b.size());
  spectrum.values.resize(b.size());
  for (std::size_t k = 0; k < b.size(); ++k) {
    spectrum.indices[k] = static_cast<int>(k);
    spectrum.values[k] = b[k] * pulse.spectrum[k];
  }
  return spectrum_to_time(spectrum, out_len);
}

}  // namespace fdbeam
