// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fdbeam/fft.hpp"
#include "fdbeam/geometry.hpp"
#include "fdbeam/phantom.hpp"
#include "fdbeam/qtable.hpp"
#include "fdbeam/time_beamformer.hpp"

namespace fdbeam {

/// DFT coefficients of one real channel on a sorted index set within [0, N).
///
/// An index missing from the set is served through conjugate symmetry when N - k is present. When `band_limited` is set,
/// indices missing from the set are known zeros; otherwise asking for one is an error.
struct IndexedSpectrum {
  std::vector<int> indices;
  std::vector<cplx> values;
  bool band_limited = false;
};

/// Per-element spectra of one line's channel data.
struct ChannelSpectra {
  std::size_t length = 0;  // N
  double theta = 0.0;
  std::vector<IndexedSpectrum> channels;

  /// phi_m[k mod N]; throws std::out_of_range naming the element and index when it is not available.
  cplx at(std::size_t m, long k) const;
  /// Number of stored coefficients per channel (largest over elements).
  std::size_t coefficients_per_channel() const;
};

/// All bins 0..N/2 of every channel.
ChannelSpectra full_spectra(const ChannelData& channels);

/// Bins `indices` (each in [0, N)) of every channel.
ChannelSpectra restricted_spectra(const ChannelData& channels, std::span<const int> indices, bool band_limited);

/// DFT-scale beam coefficients c_k on a set of indices in [0, N).
struct BeamSpectrum {
  std::vector<int> indices;
  std::vector<cplx> values;
  std::size_t length = 0;
  double theta = 0.0;
  double sample_rate = 0.0;  // rate of the length-N time grid

  /// Throws std::invalid_argument on duplicate, out-of-range or non-finite entries.
  void validate() const;
};

/// c_k = (1/M) sum_m sum_{n in nu(k)} phi_m[(k - n) mod N] Q_{k,m}[n] for every k of the table.
/// Throws std::invalid_argument on a setup mismatch and std::out_of_range for a missing coefficient.
BeamSpectrum beamform_freq(const ChannelSpectra& spectra, const QTable& table, const ImagingSetup& setup);

/// Channel indices in [0, N/2] that beamform_freq reads for `table`.
std::vector<int> required_channel_indices(const QTable& table);

/// Zero-filled, conjugate-symmetric inverse DFT onto an out_len grid (out_len >= N). A single
/// entry c_0 = N gives a line of ones.
BeamformedLine spectrum_to_time(const BeamSpectrum& spectrum, std::size_t out_len);

}  // namespace fdbeam
