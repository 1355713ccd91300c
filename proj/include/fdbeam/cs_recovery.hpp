// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdbeam/fft.hpp"
#include "fdbeam/freq_beamformer.hpp"
#include "fdbeam/phantom.hpp"
#include "fdbeam/time_beamformer.hpp"

namespace fdbeam {

/// Partial-spectrum measurement c = H D b of a real length-N coefficient vector b.
///
/// Row k of A is h_k exp(-i 2 pi k l / N). The adjoint is taken in the real inner product
/// <u, v> = Re(u^H v), so A* y = Re(D^H H^H y).
class RecoveryProblem {
 public:
  RecoveryProblem() = default;
  /// Throws std::invalid_argument on size mismatches or indices outside [0, n). Bins with
  /// |h_k| < 1e-8 max|h| are excluded and reported in warnings(); none left is an error.
  RecoveryProblem(std::size_t n, std::vector<int> indices, std::vector<cplx> measurements, std::vector<cplx> pulse);

  std::size_t length() const { return n_; }
  std::size_t rows() const { return indices_.size(); }
  std::span<const int> indices() const { return indices_; }
  std::span<const cplx> measurements() const { return c_; }
  std::span<const cplx> pulse() const { return h_; }
  std::span<const int> excluded() const { return excluded_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  /// True when every index lies strictly between 0 and N/2, so that A A* = (N/2) diag|h_k|^2.
  bool half_spectrum() const { return half_spectrum_; }

  void forward(std::span<const double> b, std::span<cplx> out) const;
  void adjoint(std::span<const cplx> y, std::span<double> out) const;
  std::vector<cplx> forward(std::span<const double> b) const;
  std::vector<double> adjoint(std::span<const cplx> y) const;

  /// |<A x, y> - <x, A* y>| / (|A x| |y|) for one random real x and complex y drawn from `seed`.
  double adjoint_mismatch(std::uint64_t seed) const;

  /// Copy with measurements scaled by alpha.
  RecoveryProblem scaled(double alpha) const;

 private:
  std::size_t n_ = 0;
  std::vector<int> indices_;
  std::vector<cplx> c_;
  std::vector<cplx> h_;
  std::vector<int> excluded_;
  std::vector<std::string> warnings_;
  bool half_spectrum_ = false;
};

/// Problem from beam coefficients on mu and the pulse spectrum. Runs the adjoint test and throws
/// std::logic_error when it fails.
RecoveryProblem build_problem(const BeamSpectrum& spectrum, const Pulse& pulse);

struct RecoveredLine {
  std::vector<double> coefficients;  // b, length N
  std::string solver;
  std::size_t iterations = 0;
  double residual_norm = 0.0;
  double l1_norm = 0.0;
  std::size_t support = 0;  // nonzero entries
  std::vector<double> residual_history;
  std::vector<std::string> warnings;
};

/// Raised by solve_l1 when the final stage does not meet its tolerance within the iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// Orthogonal matching pursuit with a real least-squares refit on the support every iteration.
/// Stops early on an exact fit or when the refit loses rank (the last atom is dropped with a warning).
RecoveredLine solve_omp(const RecoveryProblem& problem, std::size_t atoms);

struct L1Options {
  int continuation_stages = 4;
  double tolerance = 1e-6;  // relative change of the smoothed objective over the last 10 iterations
  int max_iterations = 20000;  // per stage
};

/// min ||b||_1 subject to ||A b - c||_2 <= epsilon by Nesterov's smoothed first-order method.
///
/// `smoothing` is relative: the final Huber width is smoothing x max|x0| with x0 the minimum-norm
/// solution of A x = c, and earlier stages double it. Requires a half-spectrum problem.
RecoveredLine solve_l1(const RecoveryProblem& problem, double epsilon, double smoothing = 1e-3,
                       const L1Options& options = {});

/// Circular convolution of b with the pulse, zero-padded onto an out_len grid.
BeamformedLine reconstruct_beam(const RecoveredLine& line, const Pulse& pulse, std::size_t out_len, double theta = 0.0);

}  // namespace fdbeam
