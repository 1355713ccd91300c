// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#include "fdbeam/freq_beamformer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fdbeam {

namespace {

long wrap(long k, long n) { return ((k % n) + n) % n; }

}  // namespace

cplx ChannelSpectra::at(std::size_t m, long k) const {
  const long n = static_cast<long>(length);
  const long j = wrap(k, n);
  const IndexedSpectrum& s = channels.at(m);
  auto find = [&s](long index) -> const cplx* {
    const auto it = std::lower_bound(s.indices.begin(), s.indices.end(), static_cast<int>(index));
    if (it == s.indices.end() || *it != index) return nullptr;
    return &s.values[static_cast<std::size_t>(it - s.indices.begin())];
  };
  if (const cplx* v = find(j)) return *v;
  if (const cplx* v = find(wrap(n - j, n))) return std::conj(*v);
  if (s.band_limited) return {};
  std::ostringstream msg;
  msg << "channel " << m << " has no DFT coefficient at index " << j;
  throw std::out_of_range(msg.str());
}

std::size_t ChannelSpectra::coefficients_per_channel() const {
  std::size_t most = 0;
  for (const auto& c : channels) most = std::max(most, c.indices.size());
  return most;
}

ChannelSpectra full_spectra(const ChannelData& channels) {
  ChannelSpectra out;
  out.length = channels.samples;
  out.theta = channels.theta;
  const RealFft& fft = real_fft(channels.samples);
  out.channels.resize(channels.elements);
  for (std::size_t m = 0; m < channels.elements; ++m) {
    IndexedSpectrum& s = out.channels[m];
    s.values.resize(fft.bins());
    fft.forward(channels.channel(m), s.values);
    s.indices.resize(fft.bins());
    for (std::size_t k = 0; k < fft.bins(); ++k) s.indices[k] = static_cast<int>(k);
  }
  return out;
}

ChannelSpectra restricted_spectra(const ChannelData& channels, std::span<const int> indices, bool band_limited) {
  std::vector<int> sorted(indices.begin(), indices.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (int k : sorted) {
    if (k < 0 || static_cast<std::size_t>(k) >= channels.samples)
      throw std::invalid_argument("channel index " + std::to_string(k) + " outside [0, N)");
  }
  ChannelSpectra out;
  out.length = channels.samples;
  out.theta = channels.theta;
  const RealFft& fft = real_fft(channels.samples);
  std::vector<cplx> half(fft.bins());
  out.channels.resize(channels.elements);
  for (std::size_t m = 0; m < channels.elements; ++m) {
    fft.forward(channels.channel(m), half);
    IndexedSpectrum& s = out.channels[m];
    s.indices = sorted;
    s.band_limited = band_limited;
    s.values.reserve(sorted.size());
    for (int k : sorted) {
      const std::size_t u = static_cast<std::size_t>(k);
      s.values.push_back(2 * u <= channels.samples ? half[u] : std::conj(half[channels.samples - u]));
    }
  }
  return out;
}

void BeamSpectrum::validate() const {
  if (indices.size() != values.size()) throw std::invalid_argument("beam spectrum index/value size mismatch");
  std::vector<int> sorted(indices);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("beam spectrum has duplicate indices");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || static_cast<std::size_t>(indices[i]) >= length)
      throw std::invalid_argument("beam spectrum index " + std::to_string(indices[i]) + " outside [0, N)");
    if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag()))
      throw std::invalid_argument("beam spectrum coefficient at index " + std::to_string(indices[i]) + " is not finite");
  }
}

BeamSpectrum beamform_freq(const ChannelSpectra& spectra, const QTable& table, const ImagingSetup& setup) {
  const std::size_t n = setup.samples_per_line();
  if (spectra.length != n || table.length != n) throw std::invalid_argument("spectrum length does not match the setup");
  if (spectra.channels.size() != table.elements)
    throw std::invalid_argument("element count differs between channel spectra and Q table");
  if (spectra.theta != table.theta) throw std::invalid_argument("Q table was built for a different steering angle");

  BeamSpectrum out;
  out.length = n;
  out.theta = table.theta;
  out.sample_rate = setup.sample_rate;
  out.indices = table.beam_indices;
  out.values.assign(out.indices.size(), cplx{});
  const double scale = 1.0 / static_cast<double>(table.elements);
  for (std::size_t pos = 0; pos < out.indices.size(); ++pos) {
    const long k = out.indices[pos];
    cplx acc{};
    for (std::size_t m = 0; m < table.elements; ++m) {
      const auto taps = table.taps_of(pos, m);
      const auto weights = table.weights_of(pos, m);
      for (std::size_t i = 0; i < taps.size(); ++i) acc += spectra.at(m, k - taps[i]) * weights[i];
    }
    out.values[pos] = acc * scale;
  }
  return out;
}

std::vector<int> required_channel_indices(const QTable& table) {
  const long n = static_cast<long>(table.length);
  std::set<int> needed;
  for (std::size_t pos = 0; pos < table.beam_indices.size(); ++pos) {
    for (std::size_t m = 0; m < table.elements; ++m) {
      for (int tap : table.taps_of(pos, m)) {
        long j = wrap(static_cast<long>(table.beam_indices[pos]) - tap, n);
        if (2 * j > n) j = n - j;
        needed.insert(static_cast<int>(j));
      }
    }
  }
  return {needed.begin(), needed.end()};
}

BeamformedLine spectrum_to_time(const BeamSpectrum& spectrum, std::size_t out_len) {
  spectrum.validate();
  const std::size_t n = spectrum.length;
  if (out_len < n) throw std::invalid_argument("output length shorter than the spectrum length");
  // positive-frequency half on the N grid, Hermitian part of whatever was listed
  std::vector<cplx> sum(n / 2 + 1);
  std::vector<int> hits(n / 2 + 1, 0);
  for (std::size_t i = 0; i < spectrum.indices.size(); ++i) {
    const std::size_t k = static_cast<std::size_t>(spectrum.indices[i]);
    if (2 * k <= n) {
      sum[k] += spectrum.values[i];
      ++hits[k];
    } else {
      sum[n - k] += std::conj(spectrum.values[i]);
      ++hits[n - k];
    }
  }
  const RealFft& fft = real_fft(out_len);
  std::vector<cplx> half(fft.bins());
  for (std::size_t k = 0; k <= n / 2; ++k) {
    if (hits[k] == 0) continue;
    cplx v = sum[k] / static_cast<double>(hits[k]);
    const bool self_conjugate = k == 0 || 2 * k == n;
    if (self_conjugate) v = cplx(v.real(), 0.0);
    // the Nyquist bin of an even N splits evenly between +-N/2 on a longer grid
    half[k] = (2 * k == n && out_len > n) ? 0.5 * v : v;
  }
  BeamformedLine line;
  line.theta = spectrum.theta;
  line.sample_rate = spectrum.sample_rate * static_cast<double>(out_len) / static_cast<double>(n);
  line.samples.resize(out_len);
  fft.inverse(half, line.samples);
  const double scale = 1.0 / static_cast<double>(n);
  for (double& x : line.samples) x *= scale;
  return line;
}

}  // namespace fdbeam
