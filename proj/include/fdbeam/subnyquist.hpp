// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fdbeam/freq_beamformer.hpp"
#include "fdbeam/phantom.hpp"

namespace fdbeam {

/// A set of DFT indices: a contiguous band, random bands drawn from a band, or an explicit list.
struct BandSelection {
  enum class Kind : std::uint8_t { full_band = 0, random_bands = 1, explicit_list = 2 };

  Kind kind = Kind::explicit_list;
  std::vector<int> indices;  // sorted, unique
  std::size_t band_count = 0;
  std::size_t band_width = 0;  // nominal width; the first bands are one wider when it does not divide
  std::uint64_t rng_seed = 0;

  std::size_t size() const { return indices.size(); }
  bool contains(int k) const;
  /// Throws std::invalid_argument unless indices are sorted, unique and inside [0, n).
  void validate(std::size_t n) const;

  static BandSelection contiguous(int first, int last);
  static BandSelection list(std::vector<int> indices);
};

/// Contiguous positive-frequency run around the spectral peak where |h_k| >= max |h| 10^(threshold_db / 20).
/// Throws std::invalid_argument for threshold_db >= 0 or an empty pulse spectrum.
BandSelection band_support(const Pulse& pulse, double threshold_db);

enum class SpectrumPath : std::uint8_t {
  /// Length-N FFT restricted to the selection.
  fft = 0,
  /// Inner products with the selected Fourier vectors, one modulate-and-integrate channel per index.
  emulated = 1,
};

/// phi[k] for k in the selection. Throws std::invalid_argument when `length` differs from the signal length.
IndexedSpectrum channel_spectrum(std::span<const double> channel, std::size_t length, const BandSelection& selection,
                                 SpectrumPath path = SpectrumPath::fft, bool band_limited = false);

/// channel_spectrum for every element of a line.
ChannelSpectra acquire_spectra(const ChannelData& channels, const BandSelection& selection,
                               SpectrumPath path = SpectrumPath::fft, bool band_limited = false);

/// `num_bands` contiguous runs totaling `num_coeffs` indices, placed uniformly at random without overlap
/// among the positions of `beta`. Widths are num_coeffs / num_bands with the remainder given to the
/// leftmost runs. Throws std::invalid_argument when the packing is infeasible.
BandSelection select_subset(const BandSelection& beta, std::size_t num_coeffs, std::size_t num_bands,
                            std::uint64_t rng_seed);

/// Real-valued samples and processed values per channel per image line for one method.
struct RateLedger {
  std::string method;
  std::size_t nyquist_samples = 0;  // N on the beamforming grid
  std::size_t acquired = 0;         // DFT coefficients delivered by the front end (0 for time)
  std::size_t margin = 0;           // N1 + N2
  std::size_t sampled = 0;          // nominal real samples
  std::size_t processed = 0;        // nominal real values entering the beamformer
  std::size_t consumed = 0;         // distinct channel coefficients actually read

  double sampling_reduction() const;
  double processing_reduction() const;
};

enum class Method : std::uint8_t { time = 0, freq_full = 1, freq_reduced = 2, subnyquist = 3 };

std::string method_name(Method method);

/// Counts derived from N, the acquired set size and the truncation margin:
///   time:         N samples, N processed
///   freq_full:    N samples (full grid), 2 x (acquired) processed
///   freq_reduced: B samples, 2B processed
///   subnyquist:   |mu| + N1 + N2 samples, twice that processed
RateLedger rate_ledger(Method method, std::size_t n, std::size_t acquired, std::size_t margin, std::size_t consumed);

}  // namespace fdbeam
