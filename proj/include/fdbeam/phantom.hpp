// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fdbeam/fft.hpp"
#include "fdbeam/geometry.hpp"

namespace fdbeam {

/// Gaussian-modulated cosine h(t) = exp(-t^2 / (2 sigma^2)) cos(2 pi f0 t), sampled at f_s.
///
/// `samples` is the circular length-N representation centered on n = 0 (negative times
/// wrap to the end), so circular shifts of it model pulse replicas on the line.
struct Pulse {
  double carrier = 0.0;
  double envelope_sigma = 0.0;
  double sample_rate = 0.0;
  std::size_t half_width = 0;  // samples beyond which the envelope is below 1e-16
  std::vector<double> samples;
  std::vector<cplx> spectrum;  // length-N DFT of `samples`

  std::size_t length() const { return samples.size(); }
  double value(double t) const;
  /// h[n] for any integer n (circular).
  double at(long n) const;
};

/// Envelope width whose amplitude spectrum drops to `level_db` at +-half_band_hz from the carrier.
double envelope_sigma_for_band(double half_band_hz, double level_db);

/// Throws std::invalid_argument for non-positive sigma or a pulse wider than half the line.
Pulse make_pulse(const ImagingSetup& setup, double envelope_sigma);

struct Scatterer {
  double time = 0.0;       // two-way arrival time at the reference element, s
  double amplitude = 0.0;  // dimensionless reflectivity
  double angle = 0.0;      // direction of the line it lies on, rad
};

/// Point scatterers grouped as strong reflectors and weak speckle.
struct PhantomScene {
  std::vector<Scatterer> strong;
  std::vector<Scatterer> speckle;
  std::uint64_t rng_seed = 0;

  /// Throws std::out_of_range naming the first scatterer whose time is outside [0, T).
  void validate(const ImagingSetup& setup) const;
  /// Scatterers lying on the line at `theta` (strong first, then speckle).
  std::vector<Scatterer> on_line(double theta) const;
  PhantomScene merged(const PhantomScene& other) const;
};

/// Parameters of the random scene generator.
struct SceneSpec {
  std::size_t strong_per_line = 25;
  std::size_t speckle_per_line = 400;
  double strong_min = 0.3;
  double strong_max = 1.0;
  /// Expected mean |speckle| / mean |strong|.
  double speckle_ratio = 0.01;
  /// Snap strong reflectors to the sample grid.
  bool on_grid = false;
  /// Scatterers are kept this far from both ends of the line, s.
  double time_margin = 10e-6;
  std::uint64_t seed = 1;
};

/// Random scene with `strong_per_line` reflectors of random sign and `speckle_per_line`
/// zero-mean Gaussian scatterers on every line of `setup.angles`.
PhantomScene generate_scene(const SceneSpec& spec, const ImagingSetup& setup);

/// Per-element received signals for one transmit direction, row-major elements x samples.
struct ChannelData {
  std::size_t elements = 0;
  std::size_t samples = 0;
  double theta = 0.0;
  double sample_rate = 0.0;
  std::vector<double> data;

  ChannelData() = default;
  ChannelData(std::size_t m, std::size_t n, double theta_, double fs)
      : elements(m), samples(n), theta(theta_), sample_rate(fs), data(m * n, 0.0) {}

  std::span<const double> channel(std::size_t m) const { return {data.data() + m * samples, samples}; }
  std::span<double> channel(std::size_t m) { return {data.data() + m * samples, samples}; }
};

/// phi_m[n] = sum_l b_l h(n / f_s - tau_m(t_l; theta)) + noise over the scatterers on `theta`.
/// Shifts are applied as spectral phase ramps, so off-grid arrival times are exact for the
/// circular band-limited pulse. Noise is seeded from the scene seed and the angle.
ChannelData simulate_channels(const PhantomScene& scene, const TransducerArray& array,
                              const ImagingSetup& setup, const Pulse& pulse, double theta,
                              double noise_sigma = 0.0);

/// Ideal line sum_l b_l h[n - round(t_l f_s)] for the scatterers on `theta`.
std::vector<double> ground_truth_beam(const PhantomScene& scene, const ImagingSetup& setup,
                                      const Pulse& pulse, double theta);

/// Sparse coefficient vector b of the quantized model (length N) for the line at `theta`.
std::vector<double> ground_truth_coefficients(const PhantomScene& scene, const ImagingSetup& setup,
                                              double theta);

}  // namespace fdbeam
