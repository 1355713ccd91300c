// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#pragma once

#include <vector>

#include "fdbeam/geometry.hpp"
#include "fdbeam/phantom.hpp"

namespace fdbeam {

/// One image line sampled at `sample_rate`.
struct BeamformedLine {
  std::vector<double> samples;
  double theta = 0.0;
  double sample_rate = 0.0;
};

/// Dynamic-focus delay-and-sum:
///   Phi[n] = (1/M) sum_m phi_m(tau_m(n / f_s; theta))
/// with 2-tap linear interpolation. Reads past the recorded window contribute zero while
/// the divisor stays M, and samples at or beyond T_B(theta) are zeroed.
/// Throws std::invalid_argument on a dimension mismatch.
BeamformedLine beamform_time(const ChannelData& channels, const TransducerArray& array,
                             const ImagingSetup& setup);

}  // namespace fdbeam
