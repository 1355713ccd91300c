// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#include <doctest.h>

#include <cmath>

#include "fdbeam/geometry.hpp"
#include "test_support.hpp"

using namespace fdbeam;

TEST_SUITE("geometry") {
  TEST_CASE("delay map reduces to identity without offset") {
    for (double t : {0.0, 1e-6, 37e-6, 209e-6}) {
      for (double theta : {-0.7, 0.0, 0.3}) CHECK(delay_map(t, theta, 0.0) == doctest::Approx(t).epsilon(1e-15));
    }
  }

  TEST_CASE("delay map at t = 0 is |gamma|") {
    CHECK(delay_map(0.0, 0.4, 3e-6) == doctest::Approx(3e-6).epsilon(1e-14));
    CHECK(delay_map(0.0, -0.4, -3e-6) == doctest::Approx(3e-6).epsilon(1e-14));
  }

  TEST_CASE("delay map reference value") {
    // 0.5 * (100 + sqrt(10000 - 1000 + 100)) us
    const double expected = 0.5 * (100.0 + std::sqrt(9100.0)) * 1e-6;
    CHECK(delay_map(100e-6, test::kPi / 6.0, 5e-6) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected == doctest::Approx(97.697e-6).epsilon(1e-5));
  }

  TEST_CASE("inverse and derivative agree with the map") {
    const double gamma = 2.1e-6;
    for (double theta : {-0.6, 0.1, 0.7}) {
      for (double t : {5e-6, 50e-6, 180e-6}) {
        const double tau = delay_map(t, theta, gamma);
        CHECK(delay_map_inverse(tau, theta, gamma) == doctest::Approx(t).epsilon(1e-12));
        const double h = 1e-9;
        const double fd = (delay_map(t + h, theta, gamma) - delay_map(t - h, theta, gamma)) / (2 * h);
        CHECK(delay_map_derivative(t, theta, gamma) == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("delay map rejects negative time") { CHECK_THROWS_AS(delay_map(-1e-6, 0.0, 1e-6), std::domain_error); }

  TEST_CASE("beam support") {
    ImagingSetup setup = ImagingSetup::cardiac(1);
    CHECK(beam_support(0.0, test::coincident_array(4), setup) == doctest::Approx(setup.duration()).epsilon(1e-15));

    TransducerArray a;
    a.element_offsets = {0.0, 5e-6 * setup.speed_of_sound, 0.0};
    const double tb = beam_support(0.0, a, setup);
    CHECK(tb == doctest::Approx((210.0 * 210.0 - 25.0) / 210.0 * 1e-6).epsilon(1e-12));
    CHECK(tb == doctest::Approx(209.881e-6).epsilon(1e-5));
    CHECK(delay_map(tb, 0.0, 5e-6) == doctest::Approx(setup.duration()).epsilon(1e-13));
  }

  TEST_CASE("cardiac setup constants") {
    const ImagingSetup s = ImagingSetup::cardiac();
    CHECK(s.samples_per_line() == 3360);
    CHECK(s.angles.size() == 120);
    CHECK(s.angles.front() == doctest::Approx(-test::kPi / 4));
    CHECK(s.angles.back() == doctest::Approx(test::kPi / 4));
  }

  TEST_CASE("array validation") {
    TransducerArray a = TransducerArray::uniform(64, 1e-4);
    CHECK_NOTHROW(a.validate());
    CHECK(a.element_offsets[a.reference_index] == 0.0);
    a.reference_index = 64;
    CHECK_THROWS_AS(a.validate(), std::invalid_argument);
    TransducerArray b;
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  }
}
