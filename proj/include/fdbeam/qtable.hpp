// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "fdbeam/fft.hpp"
#include "fdbeam/geometry.hpp"

namespace fdbeam {

/// Which Fourier coefficients Q_{k,m}[n] of the distortion function are kept.
struct TruncationPolicy {
  enum class Kind : std::uint8_t { window = 0, top_k = 1 };

  Kind kind = Kind::top_k;
  int below = 10;  // N1: window keeps n in [-below, above]
  int above = 10;  // N2
  int count = 20;  // K for top_k
  // top_k picks the K largest coefficients among n in [-search_below, search_above]
  int search_below = 32;
  int search_above = 12;

  static TruncationPolicy window(int n1, int n2);
  static TruncationPolicy top_k(int k = 20);

  /// N1 + N2 used by the sample-count bookkeeping (K for top_k).
  int margin() const;
  /// Nominal (N1, N2) split of the margin.
  int nominal_below() const;
  int nominal_above() const;
  /// Candidate taps evaluated by the quadrature.
  int first_candidate() const;
  int last_candidate() const;
  void validate() const;

  bool operator==(const TruncationPolicy&) const = default;
};

enum class QuadratureMethod : std::uint8_t {
  /// Gauss-Legendre panels in the focused-time variable, sized by phase.
  phase_panels = 0,
  /// Uniform grid over [0, T) in the received-time variable, FFT, midpoint rule.
  uniform_fft = 1,
};

struct QuadratureOptions {
  QuadratureMethod method = QuadratureMethod::phase_panels;
  int nodes_per_panel = 16;
  double cycles_per_panel = 2.0;
  /// uniform_fft grid = grid_oversample x N points
  std::size_t grid_oversample = 8;
};

/// Distortion function q_{k,m}(u; theta) on [0, T): indicator of [|gamma|, tau(T_B)),
/// Jacobian factor 1 + gamma^2 cos^2 / (u - gamma sin)^2 and the k-dependent phase.
cplx distortion_function(double u, int k, double gamma, double theta, double support, double period);

/// sum_n |Q_{k,m}[n]|^2, which is independent of k: (1/T) integral of the squared Jacobian.
double distortion_energy(double gamma, double theta, double support, double period);

/// Q_{k,m}[n] for n in [first, last] (inclusive).
std::vector<cplx> distortion_coefficients(double gamma, double theta, int k, int first, int last,
                                          const ImagingSetup& setup, double support,
                                          const QuadratureOptions& options = {});

/// Truncated distortion coefficients for one steering angle.
///
/// Runs are stored per (beam index position, element) in row-major order; each run is
/// a sorted list of taps n with their weights Q_{k,m;theta}[n].
struct QTable {
  double theta = 0.0;
  std::uint64_t key = 0;
  TruncationPolicy policy;
  std::size_t elements = 0;
  std::size_t length = 0;  // N
  std::vector<int> beam_indices;
  std::vector<std::uint32_t> offsets;  // beam_indices.size() * elements + 1
  std::vector<int> taps;
  std::vector<cplx> weights;
  std::vector<double> kept_energy;  // kept / total energy per run

  std::size_t run(std::size_t k_pos, std::size_t m) const { return k_pos * elements + m; }
  std::span<const int> taps_of(std::size_t k_pos, std::size_t m) const;
  std::span<const cplx> weights_of(std::size_t k_pos, std::size_t m) const;
  std::optional<std::size_t> position(int k) const;

  /// Table restricted to `indices`; throws std::out_of_range if one is missing.
  QTable subset(std::span<const int> indices) const;
  /// Mean kept-energy fraction over the runs of `indices` (all runs when empty).
  double mean_kept_energy(std::span<const int> indices = {}) const;
  int min_tap() const;
  int max_tap() const;

  bool operator==(const QTable&) const = default;
};

/// Hash of everything a table depends on except the beam index set.
std::uint64_t qtable_key(const TransducerArray& array, const ImagingSetup& setup, double theta,
                         const TruncationPolicy& policy, const QuadratureOptions& options = {});

/// Throws std::invalid_argument for indices outside [0, N/2) or an invalid policy, and when the
/// uniform_fft grid has fewer than 4 points per carrier period.
QTable compute_q_table(const TransducerArray& array, const ImagingSetup& setup, double theta,
                       std::span<const int> beam_indices, const TruncationPolicy& policy = {},
                       const QuadratureOptions& options = {});

/// Versioned little-endian binary. Round trip is bit-exact.
void save_q_table(const QTable& table, const std::filesystem::path& path);
QTable load_q_table(const std::filesystem::path& path);

/// Loads the cached table for (array, setup, theta, policy) from `dir` when it covers
/// `beam_indices`, otherwise computes and stores it.
QTable cached_q_table(const std::filesystem::path& dir, const TransducerArray& array, const ImagingSetup& setup,
                      double theta, std::span<const int> beam_indices, const TruncationPolicy& policy = {},
                      const QuadratureOptions& options = {});

}  // namespace fdbeam
