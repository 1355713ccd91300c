// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#include "fdbeam/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fdbeam {

TransducerArray TransducerArray::uniform(std::size_t count, double pitch) {
  if (count == 0) throw std::invalid_argument("uniform array needs at least one element");
  TransducerArray array;
  array.reference_index = count / 2;
  array.element_offsets.resize(count);
  for (std::size_t m = 0; m < count; ++m) {
    const double index = static_cast<double>(m) - static_cast<double>(array.reference_index);
    array.element_offsets[m] = index * pitch;
  }
  return array;
}

std::vector<double> TransducerArray::gammas(double speed_of_sound) const {
  std::vector<double> out(element_offsets.size());
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = element_offsets[m] / speed_of_sound;
  return out;
}

void TransducerArray::validate() const {
  if (element_offsets.empty()) throw std::invalid_argument("transducer array has no elements");
  if (reference_index >= element_offsets.size())
    throw std::invalid_argument("reference index outside the array");
  if (element_offsets[reference_index] != 0.0)
    throw std::invalid_argument("reference element offset must be exactly zero");
  for (std::size_t m = 0; m < element_offsets.size(); ++m) {
    if (!std::isfinite(element_offsets[m])) {
      std::ostringstream msg;
      msg << "element " << m << " has a non-finite offset";
      throw std::invalid_argument(msg.str());
    }
  }
}

std::size_t ImagingSetup::samples_per_line() const {
  return static_cast<std::size_t>(std::floor(duration() * sample_rate * (1.0 + 1e-9)));
}

std::size_t ImagingSetup::highest_frequency_index() const {
  const double n = static_cast<double>(samples_per_line());
  return static_cast<std::size_t>(std::floor((carrier + 0.5 * bandwidth) * n / sample_rate * (1.0 + 1e-9)));
}

double ImagingSetup::dft_period() const { return static_cast<double>(samples_per_line()) / sample_rate; }

void ImagingSetup::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(speed_of_sound)) throw std::invalid_argument("speed of sound must be positive");
  if (!positive(depth)) throw std::invalid_argument("depth must be positive");
  if (!positive(carrier)) throw std::invalid_argument("carrier must be positive");
  if (!positive(bandwidth)) throw std::invalid_argument("bandwidth must be positive");
  if (!positive(sample_rate)) throw std::invalid_argument("sample rate must be positive");
  if (sample_rate < 4.0 * bandwidth)
    throw std::invalid_argument("beamforming rate must be at least 4x the bandpass bandwidth");
  const std::size_t n = samples_per_line();
  const std::size_t p = highest_frequency_index();
  if (p == 0 || 2 * p >= n) throw std::invalid_argument("highest frequency index must satisfy 0 < P < N/2");
  for (double theta : angles) {
    if (!(std::abs(theta) < 0.5 * std::numbers::pi))
      throw std::invalid_argument("steering angles must satisfy |theta| < pi/2");
  }
}

ImagingSetup ImagingSetup::cardiac(std::size_t lines, double sector_half_width) {
  ImagingSetup setup;
  setup.speed_of_sound = 1540.0;
  setup.depth = 210e-6 * setup.speed_of_sound / 2.0;
  setup.carrier = 3.4e6;
  setup.bandwidth = 2e6;
  setup.sample_rate = 16e6;
  setup.angles = uniform_sector(lines, sector_half_width);
  return setup;
}

std::vector<double> uniform_sector(std::size_t lines, double half_width) {
  std::vector<double> angles(lines);
  if (lines == 1) {
    angles[0] = 0.0;
    return angles;
  }
  for (std::size_t j = 0; j < lines; ++j) {
    angles[j] = -half_width + 2.0 * half_width * static_cast<double>(j) / static_cast<double>(lines - 1);
  }
  return angles;
}

double delay_map(double t, double theta, double gamma) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::domain_error("delay_map: t must be finite and non-negative");
  // radicand = (t - 2 gamma sin)^2 + 4 gamma^2 cos^2 >= 0; clamp absorbs cancellation
  const double radicand = t * t - 4.0 * gamma * t * std::sin(theta) + 4.0 * gamma * gamma;
  return 0.5 * (t + std::sqrt(std::max(radicand, 0.0)));
}

double delay_map_inverse(double tau, double theta, double gamma) {
  return (tau * tau - gamma * gamma) / (tau - gamma * std::sin(theta));
}

double delay_map_derivative(double t, double theta, double gamma) {
  const double a = t - 2.0 * gamma * std::sin(theta);
  const double c = std::cos(theta);
  const double r = std::sqrt(a * a + 4.0 * gamma * gamma * c * c);
  if (r == 0.0) return 1.0;
  return 0.5 * (1.0 + a / r);
}

double beam_support(double theta, const TransducerArray& array, const ImagingSetup& setup) {
  const double period = setup.duration();
  double support = std::numeric_limits<double>::infinity();
  for (double gamma : array.gammas(setup.speed_of_sound)) {
    if (!(period > std::abs(gamma))) throw std::logic_error("beam_support: aperture exceeds the imaging depth");
    const double t = delay_map_inverse(period, theta, gamma);
    if (std::abs(delay_map(t, theta, gamma) - period) > 1e-9 * period)
      throw std::logic_error("beam_support: inverse delay failed its round-trip check");
    support = std::min(support, t);
  }
  return support;
}

}  // namespace fdbeam
