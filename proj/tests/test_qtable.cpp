// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fdbeam/qtable.hpp"
#include "test_support.hpp"

using namespace fdbeam;

namespace {

// (1/T) integral over [|gamma|, tau(T_B)) of the squared Jacobian, composite Simpson.
double energy_by_simpson(double gamma, double theta, double support, double period) {
  const double lo = std::abs(gamma);
  const double hi = std::min(delay_map(support, theta, gamma), period);
  const double g2 = gamma * gamma * std::cos(theta) * std::cos(theta);
  auto f = [&](double u) {
    const double v = u - gamma * std::sin(theta);
    const double j = 1.0 + g2 / (v * v);
    return j * j;
  };
  const int panels = 2000000;
  const double h = (hi - lo) / panels;
  double s = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0 / period;
}

}  // namespace

TEST_SUITE("qtable") {
  TEST_CASE("zero offset gives a delta at DC") {
    const ImagingSetup setup = test::small_setup();
    for (int k : {0, 3, 100}) {
      const auto q = distortion_coefficients(0.0, 0.3, k, -6, 6, setup, setup.duration());
      for (int n = -6; n <= 6; ++n) {
        const cplx v = q[static_cast<std::size_t>(n + 6)];
        CHECK(std::abs(v - (n == 0 ? cplx(1.0) : cplx(0.0))) <= 1e-13);
      }
    }
    const QTable t = compute_q_table(test::coincident_array(3), setup, 0.3, std::vector<int>{5, 80},
                                     TruncationPolicy::window(2, 2));
    for (std::size_t pos = 0; pos < 2; ++pos) {
      for (std::size_t m = 0; m < 3; ++m) {
        const auto taps = t.taps_of(pos, m);
        const auto w = t.weights_of(pos, m);
        for (std::size_t i = 0; i < taps.size(); ++i)
          CHECK(std::abs(w[i] - (taps[i] == 0 ? cplx(1.0) : cplx(0.0))) <= 1e-13);
        CHECK(t.kept_energy[t.run(pos, m)] == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("cardiac coefficients concentrate at DC") {
    const ImagingSetup setup = ImagingSetup::cardiac(1);
    const TransducerArray array = TransducerArray::uniform(64, 1e-4);
    const double gamma = array.gammas(setup.speed_of_sound)[14];
    const double support = beam_support(0.421, array, setup);
    const auto q = distortion_coefficients(gamma, 0.421, 100, -40, 40, setup, support);
    const double q0 = std::abs(q[40]);
    CHECK(q0 > 0.9);
    for (int n = 1; n <= 40; ++n) {
      CHECK(std::abs(q[static_cast<std::size_t>(40 + n)]) < std::abs(q[static_cast<std::size_t>(39 + n)]));
      CHECK(std::abs(q[static_cast<std::size_t>(40 - n)]) < std::abs(q[static_cast<std::size_t>(41 - n)]));
      if (n >= 4) {
        CHECK(std::abs(q[static_cast<std::size_t>(40 + n)]) < 0.05 * q0);
        CHECK(std::abs(q[static_cast<std::size_t>(40 - n)]) < 0.05 * q0);
      }
    }
  }

  TEST_CASE("closed-form energy matches direct integration and Parseval") {
    const ImagingSetup setup = test::small_setup();
    const TransducerArray array = TransducerArray::uniform(16, 2e-4);
    const double period = setup.dft_period();
    for (double theta : {-0.5, 0.0, 0.4}) {
      const double support = beam_support(theta, array, setup);
      for (double gamma : array.gammas(setup.speed_of_sound)) {
        if (gamma == 0.0) continue;
        const double closed = distortion_energy(gamma, theta, support, period);
        CHECK(closed == doctest::Approx(energy_by_simpson(gamma, theta, support, period)).epsilon(1e-10));
      }
      const double gamma = array.gammas(setup.speed_of_sound)[1];
      const auto q = distortion_coefficients(gamma, theta, 90, -2000, 2000, setup, support);
      double sum = 0.0;
      for (const cplx& v : q) sum += std::norm(v);
      CHECK(sum == doctest::Approx(distortion_energy(gamma, theta, support, period)).epsilon(2e-3));
      CHECK(sum <= distortion_energy(gamma, theta, support, period));
    }
  }

  TEST_CASE("panel quadrature agrees with the uniform FFT route") {
    const ImagingSetup setup = test::small_setup();
    const TransducerArray array = TransducerArray::uniform(16, 2e-4);
    QuadratureOptions fft;
    fft.method = QuadratureMethod::uniform_fft;
    for (double theta : {-0.6, 0.2}) {
      const double support = beam_support(theta, array, setup);
      for (std::size_t m : {0u, 5u, 15u}) {
        const double gamma = array.gammas(setup.speed_of_sound)[m];
        for (int k : {60, 110}) {
          const auto a = distortion_coefficients(gamma, theta, k, -32, 12, setup, support);
          const auto b = distortion_coefficients(gamma, theta, k, -32, 12, setup, support, fft);
          double diff = 0.0, peak = 0.0;
          for (std::size_t i = 0; i < a.size(); ++i) {
            diff = std::max(diff, std::abs(a[i] - b[i]));
            peak = std::max(peak, std::abs(a[i]));
          }
          CHECK(diff <= 1e-3 * peak);
        }
      }
    }
  }

  TEST_CASE("a finer panel rule changes nothing") {
    const ImagingSetup setup = ImagingSetup::cardiac(1);
    const TransducerArray array = TransducerArray::uniform(64, 1e-4);
    const double gamma = array.gammas(setup.speed_of_sound)[0];
    const double support = beam_support(0.7, array, setup);
    QuadratureOptions fine;
    fine.nodes_per_panel = 24;
    fine.cycles_per_panel = 1.0;
    const auto a = distortion_coefficients(gamma, 0.7, 900, -32, 12, setup, support);
    const auto b = distortion_coefficients(gamma, 0.7, 900, -32, 12, setup, support, fine);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
  }

  TEST_CASE("top-K keeps the largest coefficients") {
    const ImagingSetup setup = test::small_setup({0.5});
    const TransducerArray array = TransducerArray::uniform(8, 2e-4);
    const std::vector<int> k{40, 70, 100};
    const QTable t = compute_q_table(array, setup, 0.5, k, TruncationPolicy::top_k(20));
    const double support = beam_support(0.5, array, setup);
    const auto gammas = array.gammas(setup.speed_of_sound);
    for (std::size_t pos = 0; pos < k.size(); ++pos) {
      for (std::size_t m = 0; m < array.size(); ++m) {
        const auto taps = t.taps_of(pos, m);
        const auto w = t.weights_of(pos, m);
        REQUIRE(taps.size() == 20);
        CHECK(std::is_sorted(taps.begin(), taps.end()));
        const auto all = distortion_coefficients(gammas[m], 0.5, k[pos], -32, 12, setup, support);
        double smallest_kept = 1e300, kept = 0.0;
        for (std::size_t i = 0; i < taps.size(); ++i) {
          CHECK(std::abs(w[i] - all[static_cast<std::size_t>(taps[i] + 32)]) <= 1e-13);
          smallest_kept = std::min(smallest_kept, std::abs(w[i]));
          kept += std::norm(w[i]);
        }
        for (int n = -32; n <= 12; ++n) {
          if (std::find(taps.begin(), taps.end(), n) == taps.end())
            CHECK(std::abs(all[static_cast<std::size_t>(n + 32)]) <= smallest_kept);
        }
        const double total = distortion_energy(gammas[m], 0.5, support, setup.dft_period());
        CHECK(t.kept_energy[t.run(pos, m)] == doctest::Approx(kept / total).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("window policy keeps a fixed tap range") {
    const ImagingSetup setup = test::small_setup({0.1});
    const QTable t = compute_q_table(TransducerArray::uniform(4, 2e-4), setup, 0.1, std::vector<int>{50},
                                     TruncationPolicy::window(3, 2));
    for (std::size_t m = 0; m < 4; ++m) {
      const auto taps = t.taps_of(0, m);
      CHECK(std::vector<int>(taps.begin(), taps.end()) == std::vector<int>{-3, -2, -1, 0, 1, 2});
    }
    CHECK(t.min_tap() == -3);
    CHECK(t.max_tap() == 2);
  }

  TEST_CASE("tables are reproducible and subsettable") {
    const ImagingSetup setup = test::small_setup({-0.3});
    const TransducerArray array = TransducerArray::uniform(8, 2e-4);
    const std::vector<int> k{30, 31, 90, 120};
    const QTable a = compute_q_table(array, setup, -0.3, k);
    const QTable b = compute_q_table(array, setup, -0.3, k);
    CHECK(a == b);
    const std::vector<int> part{90, 30};
    const QTable s = a.subset(part);
    CHECK(s.beam_indices == std::vector<int>{30, 90});
    // panels are sized for the whole index set, so a fresh table differs only by rounding
    const QTable fresh = compute_q_table(array, setup, -0.3, std::vector<int>{30, 90});
    CHECK(fresh.taps == s.taps);
    for (std::size_t i = 0; i < s.weights.size(); ++i) CHECK(std::abs(fresh.weights[i] - s.weights[i]) <= 1e-13);
    CHECK_THROWS_AS(a.subset(std::vector<int>{32}), std::out_of_range);
    CHECK(a.position(90).value() == 2);
    CHECK_FALSE(a.position(91).has_value());
  }

  TEST_CASE("save, load and cache round trip") {
    test::TempDir dir("qtable");
    const ImagingSetup setup = test::small_setup({0.2});
    const TransducerArray array = TransducerArray::uniform(8, 2e-4);
    const std::vector<int> k{40, 41, 42};
    const QTable a = compute_q_table(array, setup, 0.2, k);
    save_q_table(a, dir.path / "a.fdbq");
    CHECK(load_q_table(dir.path / "a.fdbq") == a);

    const QTable c1 = cached_q_table(dir.path / "cache", array, setup, 0.2, k);
    CHECK(c1 == a);
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir.path / "cache")) files += e.is_regular_file() ? 1 : 0;
    CHECK(files == 1);
    CHECK(cached_q_table(dir.path / "cache", array, setup, 0.2, std::vector<int>{41}) == a.subset(std::vector<int>{41}));
    CHECK(qtable_key(array, setup, 0.2, {}) != qtable_key(array, setup, 0.21, {}));

    std::ofstream(dir.path / "bad.fdbq") << "nope";
    CHECK_THROWS(load_q_table(dir.path / "bad.fdbq"));
  }

  TEST_CASE("invalid requests are rejected") {
    const ImagingSetup setup = test::small_setup({0.0});
    const TransducerArray array = TransducerArray::uniform(4, 2e-4);
    CHECK_THROWS_AS(compute_q_table(array, setup, 0.0, std::vector<int>{256}), std::invalid_argument);
    CHECK_THROWS_AS(compute_q_table(array, setup, 0.0, std::vector<int>{-1}), std::invalid_argument);
    CHECK_THROWS_AS(compute_q_table(array, setup, 0.0, std::vector<int>{5}, TruncationPolicy::top_k(0)),
                    std::invalid_argument);
    ImagingSetup fast = setup;
    fast.carrier = 5e6;  // 3.2 grid points per carrier period at 1x
    QuadratureOptions coarse;
    coarse.method = QuadratureMethod::uniform_fft;
    coarse.grid_oversample = 1;
    CHECK_THROWS_AS(compute_q_table(array, fast, 0.0, std::vector<int>{5}, {}, coarse), std::invalid_argument);
  }
}
