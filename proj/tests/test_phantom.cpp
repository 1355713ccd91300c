// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#include <doctest.h>

#include <cmath>

#include "fdbeam/imaging.hpp"
#include "fdbeam/phantom.hpp"
#include "test_support.hpp"

using namespace fdbeam;

namespace {

PhantomScene one_reflector(double time, double amplitude, double theta = 0.0) {
  PhantomScene s;
  s.strong.push_back({time, amplitude, theta});
  return s;
}

// Sub-sample peak of a sampled curve by a parabola through the maximum and its neighbours.
double refined_peak(const std::vector<double>& v) {
  const std::size_t i = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  if (i == 0 || i + 1 >= v.size()) return static_cast<double>(i);
  const double a = v[i - 1], b = v[i], c = v[i + 1];
  return static_cast<double>(i) + 0.5 * (a - c) / (a - 2 * b + c);
}

}  // namespace

TEST_SUITE("phantom") {
  TEST_CASE("band pulse keeps its energy in band") {
    const ImagingSetup setup = test::small_setup();
    const Pulse p = test::band_pulse(setup);
    const std::size_t n = p.length();
    double total = 0.0, in_band = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double f = static_cast<double>(std::min(k, n - k)) * setup.sample_rate / static_cast<double>(n);
      const double e = std::norm(p.spectrum[k]);
      total += e;
      if (std::abs(f - setup.carrier) <= 0.5 * setup.bandwidth) in_band += e;
    }
    CHECK(in_band / total >= 0.99);
    const double at_edge = std::exp(-0.5 * std::pow(2 * test::kPi * 1e6 * p.envelope_sigma, 2));
    CHECK(20 * std::log10(at_edge) == doctest::Approx(-40.0).epsilon(1e-12));
  }

  TEST_CASE("narrow envelope gives a spike with flat spectrum") {
    const ImagingSetup setup = test::small_setup();
    const Pulse p = make_pulse(setup, 1e-12);
    CHECK(p.samples[0] == 1.0);
    for (std::size_t i = 1; i < p.length(); ++i) CHECK(p.samples[i] == 0.0);
    for (const cplx& v : p.spectrum) CHECK(std::abs(v) == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("time mirror conjugates the spectrum") {
    const ImagingSetup setup = test::small_setup();
    const Pulse p = test::band_pulse(setup);
    const long n = static_cast<long>(p.length());
    std::vector<double> y(p.length()), mirrored(p.length());
    for (long i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = p.at(i - 3) + 0.5 * p.at(i - 11);
    for (long i = 0; i < n; ++i) mirrored[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>((n - i) % n)];
    const auto fy = dft(y);
    const auto fm = dft(mirrored);
    for (std::size_t k = 0; k < fy.size(); ++k) {
      CHECK(std::abs(fm[k] - std::conj(fy[k])) <= 1e-12);
      CHECK(std::abs(std::abs(fm[k]) - std::abs(fy[k])) <= 1e-12);
    }
  }

  TEST_CASE("make_pulse rejects bad widths") {
    const ImagingSetup setup = test::small_setup();
    CHECK_THROWS_AS(make_pulse(setup, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_pulse(setup, 1e-5), std::invalid_argument);
  }

  TEST_CASE("empty scene gives silent channels") {
    const ImagingSetup setup = test::small_setup();
    const ChannelData ch = simulate_channels(PhantomScene{}, TransducerArray::uniform(8, 1e-4), setup,
                                             test::band_pulse(setup), 0.0);
    CHECK(ch.elements == 8);
    CHECK(ch.samples == 512);
    for (double v : ch.data) CHECK(v == 0.0);
  }

  TEST_CASE("coincident elements see the same echo at t_l") {
    const ImagingSetup setup = test::small_setup();
    const Pulse p = test::band_pulse(setup);
    const double t = 200.0 / setup.sample_rate;
    const PhantomScene scene = one_reflector(t, 0.8);
    const ChannelData ch = simulate_channels(scene, test::coincident_array(4), setup, p, 0.0);
    const std::vector<double> truth = ground_truth_beam(scene, setup, p, 0.0);
    for (std::size_t m = 0; m < 4; ++m) {
      const auto c = ch.channel(m);
      CHECK(test::max_abs_diff(std::vector<double>(c.begin(), c.end()), truth) <= 1e-12);
    }
    CHECK(std::max_element(truth.begin(), truth.end()) - truth.begin() == 200);
  }

  TEST_CASE("each element peaks at its focusing delay") {
    const ImagingSetup setup = test::small_setup({0.35});
    const Pulse p = test::band_pulse(setup);
    const TransducerArray array = TransducerArray::uniform(64, 1e-4);
    const double t = 14.3e-6;
    const ChannelData ch = simulate_channels(one_reflector(t, 1.0, 0.35), array, setup, p, 0.35);
    const auto gammas = array.gammas(setup.speed_of_sound);
    for (std::size_t m = 0; m < 64; m += 7) {
      const std::vector<double> env = envelope(ch.channel(m));
      const double expected = delay_map(t, 0.35, gammas[m]) * setup.sample_rate;
      CHECK(std::abs(refined_peak(env) - expected) <= 0.5);
    }
  }

  TEST_CASE("ground truth of one on-grid reflector is a shifted pulse") {
    const ImagingSetup setup = test::small_setup();
    const Pulse p = test::band_pulse(setup);
    const long q = 137;
    const auto beam = ground_truth_beam(one_reflector(q / setup.sample_rate, 1.0), setup, p, 0.0);
    for (long i = 0; i < 512; ++i) CHECK(beam[static_cast<std::size_t>(i)] == doctest::Approx(p.at(i - q)).epsilon(1e-15));
  }

  TEST_CASE("separated reflectors give disjoint copies in amplitude ratio") {
    const ImagingSetup setup = test::small_setup();
    const Pulse p = test::band_pulse(setup);
    PhantomScene scene = one_reflector(100 / setup.sample_rate, 1.0);
    scene.strong.push_back({400 / setup.sample_rate, -0.25, 0.0});
    const auto beam = ground_truth_beam(scene, setup, p, 0.0);
    CHECK(beam[100] == doctest::Approx(1.0));
    CHECK(beam[400] / beam[100] == doctest::Approx(-0.25));
    CHECK(std::abs(beam[250]) <= 1e-12);
  }

  TEST_CASE("speckle ground truth is the convolution of b with h") {
    ImagingSetup setup = test::small_setup({-0.2, 0.0, 0.2});
    const Pulse p = test::band_pulse(setup);
    SceneSpec spec;
    spec.strong_per_line = 5;
    spec.speckle_per_line = 200;
    spec.time_margin = 2e-6;
    const PhantomScene scene = generate_scene(spec, setup);
    const auto beam = ground_truth_beam(scene, setup, p, 0.0);
    const auto b = ground_truth_coefficients(scene, setup, 0.0);
    const long n = 512;
    std::vector<double> conv(512, 0.0);
    for (long l = 0; l < n; ++l) {
      if (b[static_cast<std::size_t>(l)] == 0.0) continue;
      for (long i = 0; i < n; ++i) conv[static_cast<std::size_t>(i)] += b[static_cast<std::size_t>(l)] * p.at(i - l);
    }
    CHECK(test::max_abs_diff(beam, conv) <= 1e-12 * test::norm2(conv));
  }

  TEST_CASE("scene and noise are reproducible from the seed") {
    const ImagingSetup setup = test::small_setup({-0.3, 0.3});
    SceneSpec spec;
    spec.speckle_per_line = 50;
    spec.seed = 42;
    const PhantomScene a = generate_scene(spec, setup);
    const PhantomScene b = generate_scene(spec, setup);
    const TransducerArray array = TransducerArray::uniform(8, 1e-4);
    const Pulse p = test::band_pulse(setup);
    const ChannelData ca = simulate_channels(a, array, setup, p, 0.3, 0.01);
    const ChannelData cb = simulate_channels(b, array, setup, p, 0.3, 0.01);
    CHECK(ca.data == cb.data);
    spec.seed = 43;
    const ChannelData cc = simulate_channels(generate_scene(spec, setup), array, setup, p, 0.3, 0.01);
    CHECK(ca.data != cc.data);
    CHECK(a.strong.size() == 2 * spec.strong_per_line);
  }

  TEST_CASE("scatterers outside the line are rejected") {
    const ImagingSetup setup = test::small_setup();
    CHECK_THROWS_AS(one_reflector(40e-6, 1.0).validate(setup), std::out_of_range);
    CHECK_THROWS_AS(one_reflector(-1e-9, 1.0).validate(setup), std::out_of_range);
  }
}
