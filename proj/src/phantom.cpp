// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#include "fdbeam/phantom.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fdbeam {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSameLine = 1e-12;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

long wrap(long n, long len) {
  const long r = n % len;
  return r < 0 ? r + len : r;
}

}  // namespace

double Pulse::value(double t) const {
  return std::exp(-t * t / (2.0 * envelope_sigma * envelope_sigma)) * std::cos(kTwoPi * carrier * t);
}

double Pulse::at(long n) const { return samples[static_cast<std::size_t>(wrap(n, static_cast<long>(samples.size())))]; }

double envelope_sigma_for_band(double half_band_hz, double level_db) {
  if (!(half_band_hz > 0.0) || !(level_db < 0.0))
    throw std::invalid_argument("envelope_sigma_for_band: need half_band > 0 and level_db < 0");
  // |H(f0 + df)| / |H(f0)| = exp(-(2 pi sigma df)^2 / 2)
  const double log_ratio = -level_db / 20.0 * std::log(10.0);
  return std::sqrt(2.0 * log_ratio) / (kTwoPi * half_band_hz);
}

Pulse make_pulse(const ImagingSetup& setup, double envelope_sigma) {
  if (!(envelope_sigma > 0.0) || !std::isfinite(envelope_sigma))
    throw std::invalid_argument("make_pulse: envelope sigma must be positive");
  const std::size_t n = setup.samples_per_line();
  Pulse pulse;
  pulse.carrier = setup.carrier;
  pulse.envelope_sigma = envelope_sigma;
  pulse.sample_rate = setup.sample_rate;
  // exp(-x^2/2) < 1e-16 beyond x = 8.6
  const double reach = 8.6 * envelope_sigma * setup.sample_rate;
  if (reach >= static_cast<double>(n / 2) - 1.0) {
    std::ostringstream msg;
    msg << "make_pulse: envelope sigma " << envelope_sigma << " s does not fit in a " << n << "-sample window";
    throw std::invalid_argument(msg.str());
  }
  pulse.half_width = static_cast<std::size_t>(std::ceil(reach));
  pulse.samples.assign(n, 0.0);
  const long half = static_cast<long>(pulse.half_width);
  for (long k = -half; k <= half; ++k) {
    pulse.samples[static_cast<std::size_t>(wrap(k, static_cast<long>(n)))] =
        pulse.value(static_cast<double>(k) / setup.sample_rate);
  }
  pulse.spectrum = dft(pulse.samples);
  return pulse;
}

void PhantomScene::validate(const ImagingSetup& setup) const {
  const double period = setup.duration();
  auto check = [&](const std::vector<Scatterer>& list, const char* kind) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const double t = list[i].time;
      if (!(t >= 0.0 && t < period) || !std::isfinite(list[i].amplitude)) {
        std::ostringstream msg;
        msg << kind << " scatterer " << i << " at t = " << t << " s lies outside [0, " << period << ")";
        throw std::out_of_range(msg.str());
      }
    }
  };
  check(strong, "strong");
  check(speckle, "speckle");
}

std::vector<Scatterer> PhantomScene::on_line(double theta) const {
  std::vector<Scatterer> out;
  for (const auto* list : {&strong, &speckle}) {
    for (const Scatterer& s : *list) {
      if (std::abs(s.angle - theta) <= kSameLine) out.push_back(s);
    }
  }
  return out;
}

PhantomScene PhantomScene::merged(const PhantomScene& other) const {
  PhantomScene out = *this;
  out.strong.insert(out.strong.end(), other.strong.begin(), other.strong.end());
  out.speckle.insert(out.speckle.end(), other.speckle.begin(), other.speckle.end());
  return out;
}

PhantomScene generate_scene(const SceneSpec& spec, const ImagingSetup& setup) {
  const double period = setup.duration();
  if (!(spec.time_margin >= 0.0) || 2.0 * spec.time_margin >= period)
    throw std::invalid_argument("generate_scene: time margin leaves no room on the line");
  if (!(spec.strong_min >= 0.0 && spec.strong_max >= spec.strong_min))
    throw std::invalid_argument("generate_scene: invalid strong amplitude range");

  PhantomScene scene;
  scene.rng_seed = spec.seed;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> when(spec.time_margin, period - spec.time_margin);
  std::uniform_real_distribution<double> level(spec.strong_min, spec.strong_max);
  std::bernoulli_distribution sign;
  // E|N(0, s)| = s sqrt(2 / pi)
  const double mean_strong = 0.5 * (spec.strong_min + spec.strong_max);
  const double speckle_sigma = spec.speckle_ratio * mean_strong / std::sqrt(2.0 / std::numbers::pi);
  std::normal_distribution<double> weak(0.0, speckle_sigma);

  for (double theta : setup.angles) {
    for (std::size_t l = 0; l < spec.strong_per_line; ++l) {
      double t = when(rng);
      if (spec.on_grid) t = std::round(t * setup.sample_rate) / setup.sample_rate;
      const double a = level(rng) * (sign(rng) ? 1.0 : -1.0);
      scene.strong.push_back({t, a, theta});
    }
    for (std::size_t l = 0; l < spec.speckle_per_line; ++l) {
      const double t = when(rng);
      scene.speckle.push_back({t, weak(rng), theta});
    }
  }
  return scene;
}

ChannelData simulate_channels(const PhantomScene& scene, const TransducerArray& array,
                              const ImagingSetup& setup, const Pulse& pulse, double theta,
                              double noise_sigma) {
  array.validate();
  scene.validate(setup);
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("simulate_channels: noise sigma must be >= 0");
  const std::size_t n = setup.samples_per_line();
  if (pulse.length() != n) throw std::invalid_argument("simulate_channels: pulse length does not match the setup");

  const std::size_t m_count = array.size();
  ChannelData out(m_count, n, theta, setup.sample_rate);
  const std::vector<Scatterer> targets = scene.on_line(theta);
  const std::vector<double> gamma = array.gammas(setup.speed_of_sound);

  // bins carrying pulse energy; elsewhere the spectrum is numerically zero
  const std::size_t half = n / 2;
  double peak = 0.0;
  for (std::size_t k = 0; k <= half; ++k) peak = std::max(peak, std::abs(pulse.spectrum[k]));
  std::size_t k_lo = half + 1, k_hi = 0;
  for (std::size_t k = 0; k <= half; ++k) {
    if (std::abs(pulse.spectrum[k]) > 1e-13 * peak) {
      k_lo = std::min(k_lo, k);
      k_hi = std::max(k_hi, k);
    }
  }

  const RealFft& plan = real_fft(n);
  const double period = setup.dft_period();
  std::vector<cplx> acc(half + 1);
  std::vector<double> line(n);
  if (!targets.empty() && k_lo <= k_hi) {
    for (std::size_t m = 0; m < m_count; ++m) {
      std::fill(acc.begin(), acc.end(), cplx{});
      for (const Scatterer& s : targets) {
        const double arrival = delay_map(s.time, s.angle, gamma[m]);
        const double step = -kTwoPi * arrival / period;
        const cplx rotate = std::polar(1.0, step);
        cplx phase;
        for (std::size_t k = k_lo; k <= k_hi; ++k) {
          // re-anchor the recurrence periodically to bound drift
          if ((k - k_lo) % 128 == 0) phase = std::polar(1.0, step * static_cast<double>(k));
          acc[k] += s.amplitude * phase;
          phase *= rotate;
        }
      }
      for (std::size_t k = 0; k <= half; ++k) acc[k] = (k >= k_lo && k <= k_hi) ? acc[k] * pulse.spectrum[k] : cplx{};
      acc[0] = acc[0].real();
      if (n % 2 == 0) acc[half] = acc[half].real();
      plan.inverse(acc, line);
      auto dst = out.channel(m);
      for (std::size_t i = 0; i < n; ++i) dst[i] = line[i] / static_cast<double>(n);
    }
  }

  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(splitmix64(scene.rng_seed ^ std::bit_cast<std::uint64_t>(theta)));
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (double& v : out.data) v += noise(rng);
  }
  return out;
}

std::vector<double> ground_truth_beam(const PhantomScene& scene, const ImagingSetup& setup, const Pulse& pulse,
                                      double theta) {
  scene.validate(setup);
  const std::size_t n = setup.samples_per_line();
  if (pulse.length() != n) throw std::invalid_argument("ground_truth_beam: pulse length does not match the setup");
  std::vector<double> beam(n, 0.0);
  const long len = static_cast<long>(n);
  const long reach = static_cast<long>(pulse.half_width);
  for (const Scatterer& s : scene.on_line(theta)) {
    const long q = std::lround(s.time * setup.sample_rate);
    for (long d = -reach; d <= reach; ++d) {
      beam[static_cast<std::size_t>(wrap(q + d, len))] += s.amplitude * pulse.at(d);
    }
  }
  return beam;
}

std::vector<double> ground_truth_coefficients(const PhantomScene& scene, const ImagingSetup& setup, double theta) {
  scene.validate(setup);
  const std::size_t n = setup.samples_per_line();
  std::vector<double> b(n, 0.0);
  for (const Scatterer& s : scene.on_line(theta)) {
    b[static_cast<std::size_t>(wrap(std::lround(s.time * setup.sample_rate), static_cast<long>(n)))] += s.amplitude;
  }
  return b;
}

}  // namespace fdbeam
