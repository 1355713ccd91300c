// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#include "fdbeam/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace fdbeam {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const cplx* p) {
  return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p));
}

constexpr unsigned kPlanFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("RealFft: zero length");
  std::vector<double> re(n);
  std::vector<cplx> ce(n / 2 + 1);
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), re.data(), as_fftw(ce.data()), kPlanFlags);
  inverse_plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), as_fftw(ce.data()), re.data(),
                                       kPlanFlags | FFTW_DESTROY_INPUT);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void RealFft::forward(std::span<const double> in, std::span<cplx> out) const {
  if (in.size() != n_ || out.size() != bins()) throw std::invalid_argument("RealFft::forward: size mismatch");
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()),
                       as_fftw(out.data()));
}

void RealFft::inverse(std::span<const cplx> in, std::span<double> out) const {
  if (in.size() != bins() || out.size() != n_) throw std::invalid_argument("RealFft::inverse: size mismatch");
  // c2r overwrites its input
  std::vector<cplx> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), as_fftw(scratch.data()), out.data());
}

ComplexFft::ComplexFft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("ComplexFft: zero length");
  std::vector<cplx> a(n), b(n);
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_1d(static_cast<int>(n), as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD,
                                   kPlanFlags);
  inverse_plan_ = fftw_plan_dft_1d(static_cast<int>(n), as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD,
                                   kPlanFlags);
}

ComplexFft::~ComplexFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void ComplexFft::forward(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != n_ || out.size() != n_) throw std::invalid_argument("ComplexFft::forward: size mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(in.data()), as_fftw(out.data()));
}

void ComplexFft::inverse(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != n_ || out.size() != n_) throw std::invalid_argument("ComplexFft::inverse: size mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), as_fftw(in.data()), as_fftw(out.data()));
}

namespace {

template <typename Plan>
const Plan& cached_plan(std::size_t n) {
  static std::mutex m;
  static std::map<std::size_t, std::unique_ptr<Plan>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Plan>(n);
  return *slot;
}

}  // namespace

const RealFft& real_fft(std::size_t n) { return cached_plan<RealFft>(n); }
const ComplexFft& complex_fft(std::size_t n) { return cached_plan<ComplexFft>(n); }

std::vector<cplx> dft(std::span<const double> x) {
  const std::size_t n = x.size();
  const RealFft& plan = real_fft(n);
  std::vector<cplx> half(plan.bins());
  plan.forward(x, half);
  std::vector<cplx> full(n);
  for (std::size_t k = 0; k < half.size(); ++k) full[k] = half[k];
  for (std::size_t k = half.size(); k < n; ++k) full[k] = std::conj(half[n - k]);
  return full;
}

std::vector<double> idft_real(std::span<const cplx> spectrum) {
  const std::size_t n = spectrum.size();
  const RealFft& plan = real_fft(n);
  std::vector<cplx> half(plan.bins());
  for (std::size_t k = 0; k < half.size(); ++k) half[k] = spectrum[k];
  std::vector<double> out(n);
  plan.inverse(half, out);
  for (double& v : out) v /= static_cast<double>(n);
  return out;
}

}  // namespace fdbeam
