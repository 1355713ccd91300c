// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#include "fdbeam/time_beamformer.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fdbeam {

BeamformedLine beamform_time(const ChannelData& channels, const TransducerArray& array,
                             const ImagingSetup& setup) {
  array.validate();
  const std::size_t n = setup.samples_per_line();
  if (channels.elements != array.size() || channels.samples != n ||
      channels.data.size() != channels.elements * channels.samples) {
    std::ostringstream msg;
    msg << "beamform_time: channel data is " << channels.elements << " x " << channels.samples
        << ", expected " << array.size() << " x " << n;
    throw std::invalid_argument(msg.str());
  }

  const double fs = setup.sample_rate;
  const double theta = channels.theta;
  const double support = beam_support(theta, array, setup);
  const std::vector<double> gamma = array.gammas(setup.speed_of_sound);

  BeamformedLine line{std::vector<double>(n, 0.0), theta, fs};
  // delays are evaluated in sample units so that gamma = 0 lands exactly on the grid
  const double last = support * fs;
  for (std::size_t m = 0; m < array.size(); ++m) {
    const auto phi = channels.channel(m);
    for (std::size_t i = 0; i < n; ++i) {
      if (static_cast<double>(i) >= last) break;
      const double pos = delay_map(static_cast<double>(i), theta, gamma[m] * fs);
      const double base = std::floor(pos);
      const double frac = pos - base;
      const auto i0 = static_cast<std::size_t>(base);
      if (i0 + 1 < n) {
        line.samples[i] += (1.0 - frac) * phi[i0] + frac * phi[i0 + 1];
      } else if (i0 + 1 == n && frac == 0.0) {
        line.samples[i] += phi[i0];
      }
    }
  }
  const double scale = 1.0 / static_cast<double>(array.size());
  for (double& v : line.samples) v *= scale;
  return line;
}

}  // namespace fdbeam
