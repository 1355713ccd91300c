// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fdbeam {

using cplx = std::complex<double>;

/// Real-to-complex DFT of fixed length backed by FFTW.
///
/// Plans are created once under a process-wide lock and executed through the
/// new-array interface, so one instance can be shared by concurrent callers.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// X[k] = sum_n x[n] exp(-i 2 pi k n / N), k = 0..N/2.
  void forward(std::span<const double> in, std::span<cplx> out) const;
  /// Unnormalized inverse of a Hermitian half spectrum (k = 0..N/2).
  void inverse(std::span<const cplx> in, std::span<double> out) const;

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
};

/// Complex DFT of fixed length, same sharing rules as RealFft.
class ComplexFft {
 public:
  explicit ComplexFft(std::size_t n);
  ~ComplexFft();
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;

  std::size_t size() const { return n_; }
  void forward(std::span<const cplx> in, std::span<cplx> out) const;
  /// Unnormalized inverse.
  void inverse(std::span<const cplx> in, std::span<cplx> out) const;

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
};

/// Shared plan instances keyed by length; references stay valid for the process lifetime.
const RealFft& real_fft(std::size_t n);
const ComplexFft& complex_fft(std::size_t n);

/// Full-length DFT of a real signal (all N bins, Hermitian completion applied).
std::vector<cplx> dft(std::span<const double> x);

/// Real inverse of a full-length Hermitian spectrum, normalized by 1/N.
std::vector<double> idft_real(std::span<const cplx> spectrum);

}  // namespace fdbeam
