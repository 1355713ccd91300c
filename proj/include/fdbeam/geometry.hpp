// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#pragma once

#include <cstddef>
#include <vector>

namespace fdbeam {

/// Linear receive array. Offsets are signed distances from the reference element along x.
struct TransducerArray {
  std::vector<double> element_offsets;  // meters
  std::size_t reference_index = 0;

  /// Evenly spaced array with the reference element at index count / 2.
  static TransducerArray uniform(std::size_t count, double pitch);

  std::size_t size() const { return element_offsets.size(); }
  /// gamma_m = delta_m / c, seconds.
  std::vector<double> gammas(double speed_of_sound) const;
  /// Throws std::invalid_argument when an invariant does not hold.
  void validate() const;
};

/// Acquisition constants for one frame.
struct ImagingSetup {
  double speed_of_sound = 1540.0;  // m/s
  double depth = 0.0;              // m
  double carrier = 0.0;            // Hz
  double bandwidth = 0.0;          // bandpass bandwidth, Hz
  double sample_rate = 0.0;        // beamforming rate f_s, Hz
  std::vector<double> angles;      // radians

  /// T = 2 r / c.
  double duration() const { return 2.0 * depth / speed_of_sound; }
  /// N = floor(T f_s). A relative slack of 1e-9 absorbs rounding in T.
  std::size_t samples_per_line() const;
  /// DFT index of the highest in-band frequency, floor((f0 + bandwidth / 2) N / f_s).
  std::size_t highest_frequency_index() const;
  /// Period of the length-N DFT grid, N / f_s.
  double dft_period() const;

  void validate() const;

  /// 64-channel cardiac setup: c = 1540 m/s, T = 210 us, f0 = 3.4 MHz, 2 MHz band,
  /// f_s = 16 MHz, and `lines` angles evenly spread over +-sector_half_width.
  static ImagingSetup cardiac(std::size_t lines = 120, double sector_half_width = 0.785398163397448);
};

/// Angles evenly spaced over [-half_width, half_width].
std::vector<double> uniform_sector(std::size_t lines, double half_width);

/// Dynamic-focus delay tau_m(t; theta) = (t + sqrt(t^2 - 4 gamma t sin(theta) + 4 gamma^2)) / 2.
/// Throws std::domain_error for negative or non-finite t.
double delay_map(double t, double theta, double gamma);

/// Algebraic inverse of delay_map on [|gamma|, inf): (tau^2 - gamma^2) / (tau - gamma sin(theta)).
double delay_map_inverse(double tau, double theta, double gamma);

/// d tau / d t.
double delay_map_derivative(double t, double theta, double gamma);

/// Support end of the beamformed line, T_B(theta) = min_m tau_m^{-1}(T; theta).
double beam_support(double theta, const TransducerArray& array, const ImagingSetup& setup);

}  // namespace fdbeam
