// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#include "fdbeam/subnyquist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fdbeam {

bool BandSelection::contains(int k) const { return std::binary_search(indices.begin(), indices.end(), k); }

void BandSelection::validate(std::size_t n) const {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || static_cast<std::size_t>(indices[i]) >= n)
      throw std::invalid_argument("band index " + std::to_string(indices[i]) + " outside [0, N)");
    if (i > 0 && indices[i] <= indices[i - 1]) throw std::invalid_argument("band indices must be sorted and unique");
  }
}

BandSelection BandSelection::contiguous(int first, int last) {
  if (last < first) throw std::invalid_argument("empty band");
  BandSelection band;
  band.kind = Kind::full_band;
  for (int k = first; k <= last; ++k) band.indices.push_back(k);
  band.band_count = 1;
  band.band_width = band.indices.size();
  return band;
}

BandSelection BandSelection::list(std::vector<int> indices) {
  BandSelection band;
  band.kind = Kind::explicit_list;
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  band.indices = std::move(indices);
  return band;
}

BandSelection band_support(const Pulse& pulse, double threshold_db) {
  if (!(threshold_db < 0.0)) throw std::invalid_argument("band threshold must be negative (dB)");
  const std::size_t n = pulse.spectrum.size();
  if (n == 0) throw std::invalid_argument("pulse has no spectrum");
  const std::size_t half = n / 2;
  std::size_t peak = 0;
  double peak_mag = 0.0;
  for (std::size_t k = 0; k <= half; ++k) {
    const double mag = std::abs(pulse.spectrum[k]);
    if (mag > peak_mag) {
      peak_mag = mag;
      peak = k;
    }
  }
  if (peak_mag == 0.0) throw std::invalid_argument("pulse spectrum is identically zero");
  const double level = peak_mag * std::pow(10.0, threshold_db / 20.0);
  std::size_t lo = peak;
  std::size_t hi = peak;
  while (lo > 0 && std::abs(pulse.spectrum[lo - 1]) >= level) --lo;
  while (hi < half && std::abs(pulse.spectrum[hi + 1]) >= level) ++hi;
  return BandSelection::contiguous(static_cast<int>(lo), static_cast<int>(hi));
}

IndexedSpectrum channel_spectrum(std::span<const double> channel, std::size_t length, const BandSelection& selection,
                                 SpectrumPath path, bool band_limited) {
  if (channel.size() != length) {
    std::ostringstream msg;
    msg << "channel has " << channel.size() << " samples, expected " << length;
    throw std::invalid_argument(msg.str());
  }
  selection.validate(length);
  IndexedSpectrum out;
  out.indices = selection.indices;
  out.band_limited = band_limited;
  out.values.resize(selection.size());
  if (path == SpectrumPath::fft) {
    const RealFft& fft = real_fft(length);
    std::vector<cplx> half(fft.bins());
    fft.forward(channel, half);
    for (std::size_t i = 0; i < out.indices.size(); ++i) {
      const std::size_t k = static_cast<std::size_t>(out.indices[i]);
      out.values[i] = 2 * k <= length ? half[k] : std::conj(half[length - k]);
    }
    return out;
  }
  // exact twiddle table indexed by (k n) mod N, so each product is a table lookup
  std::vector<cplx> twiddle(length);
  for (std::size_t j = 0; j < length; ++j)
    twiddle[j] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(length));
  for (std::size_t i = 0; i < out.indices.size(); ++i) {
    const std::size_t k = static_cast<std::size_t>(out.indices[i]);
    cplx acc{};
    std::size_t phase = 0;
    for (std::size_t t = 0; t < length; ++t) {
      acc += channel[t] * twiddle[phase];
      phase += k;
      if (phase >= length) phase -= length;
    }
    out.values[i] = acc;
  }
  return out;
}

ChannelSpectra acquire_spectra(const ChannelData& channels, const BandSelection& selection, SpectrumPath path,
                               bool band_limited) {
  ChannelSpectra out;
  out.length = channels.samples;
  out.theta = channels.theta;
  out.channels.reserve(channels.elements);
  for (std::size_t m = 0; m < channels.elements; ++m)
    out.channels.push_back(channel_spectrum(channels.channel(m), channels.samples, selection, path, band_limited));
  return out;
}

BandSelection select_subset(const BandSelection& beta, std::size_t num_coeffs, std::size_t num_bands,
                            std::uint64_t rng_seed) {
  if (num_bands == 0) throw std::invalid_argument("at least one band is required");
  if (num_coeffs > beta.size()) throw std::invalid_argument("subset larger than the band it is drawn from");
  if (num_coeffs < num_bands) throw std::invalid_argument("fewer coefficients than bands: some bands would be empty");

  std::vector<std::size_t> widths(num_bands, num_coeffs / num_bands);
  for (std::size_t b = 0; b < num_coeffs % num_bands; ++b) ++widths[b];

  // stars and bars: choose the run starts among free + num_bands slots
  const std::size_t free_slots = beta.size() - num_coeffs;
  const std::size_t slots = free_slots + num_bands;
  std::mt19937_64 rng(rng_seed);
  std::vector<std::size_t> pool(slots);
  for (std::size_t i = 0; i < slots; ++i) pool[i] = i;
  for (std::size_t i = 0; i < num_bands; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, slots - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(num_bands));
  std::sort(chosen.begin(), chosen.end());

  BandSelection out;
  out.kind = BandSelection::Kind::random_bands;
  out.band_count = num_bands;
  out.band_width = num_coeffs / num_bands;
  out.rng_seed = rng_seed;
  std::size_t used = 0;
  for (std::size_t b = 0; b < num_bands; ++b) {
    const std::size_t start = chosen[b] - b + used;
    for (std::size_t i = 0; i < widths[b]; ++i) out.indices.push_back(beta.indices[start + i]);
    used += widths[b];
  }
  return out;
}

double RateLedger::sampling_reduction() const {
  return sampled == 0 ? 0.0 : static_cast<double>(nyquist_samples) / static_cast<double>(sampled);
}

double RateLedger::processing_reduction() const {
  return processed == 0 ? 0.0 : static_cast<double>(nyquist_samples) / static_cast<double>(processed);
}

std::string method_name(Method method) {
  switch (method) {
    case Method::time: return "time";
    case Method::freq_full: return "freq-full";
    case Method::freq_reduced: return "freq-reduced";
    case Method::subnyquist: return "subnyquist";
  }
  return "unknown";
}

RateLedger rate_ledger(Method method, std::size_t n, std::size_t acquired, std::size_t margin, std::size_t consumed) {
  RateLedger ledger;
  ledger.method = method_name(method);
  ledger.nyquist_samples = n;
  ledger.margin = margin;
  ledger.consumed = consumed;
  switch (method) {
    case Method::time:
      ledger.sampled = n;
      ledger.processed = n;
      ledger.consumed = n;
      break;
    case Method::freq_full:
      ledger.acquired = acquired;
      ledger.sampled = n;
      ledger.processed = 2 * acquired;
      break;
    case Method::freq_reduced:
      ledger.acquired = acquired;
      ledger.sampled = acquired;
      ledger.processed = 2 * acquired;
      break;
    case Method::subnyquist:
      ledger.acquired = acquired;
      ledger.sampled = acquired + margin;
      ledger.processed = 2 * (acquired + margin);
      break;
  }
  return ledger;
}

}  // namespace fdbeam
