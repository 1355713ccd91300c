// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "fdbeam/cs_recovery.hpp"
#include "fdbeam/pipeline.hpp"
#include "fdbeam/subnyquist.hpp"
#include "oracles/lp_basis_pursuit.hpp"
#include "oracles/toy_metrics_expected.hpp"
#include "test_support.hpp"

using namespace fdbeam;

namespace {

// Pinned tolerances.
constexpr double kFullNrmse = 0.05, kFullSsim = 0.93;
constexpr double kReducedNrmse = 0.06, kReducedSsim = 0.92;
constexpr double kSubNrmse = 0.12, kSubSsim = 0.55;
constexpr double kRuntimeSeconds = 300.0;
constexpr double kKeptEnergy = 0.95;
constexpr int kOmpExactSeeds = 95;
constexpr double kL1RelError = 1e-3;
constexpr double kL1Smoothing = 1e-4;
constexpr double kOperatorTol = 1e-10;
constexpr double kMetricTol = 1e-12;

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

const MethodResult& method(const FrameResult& frame, Selector s) {
  for (const MethodResult& m : frame.methods) {
    if (m.selector == s) return m;
  }
  throw std::logic_error("selector missing");
}

void cardiac_criteria() {
  RunConfig config;  // defaults are the cardiac setup
  const Scenario scenario = make_scenario(config);
  const Selector selectors[] = {Selector::freq_full, Selector::freq_reduced, Selector::subnyquist_l1,
                                Selector::subnyquist_omp};
  const auto start = std::chrono::steady_clock::now();
  const FrameResult frame = run_frame(scenario, config, selectors);
  const ImageGrid base =
      bmode_image(frame.baseline, scenario.setup, config.dynamic_range_db, config.image_rows, config.image_cols);
  const auto metrics = [&](Selector s) { return evaluate(frame.baseline, base, method(frame, s).lines, scenario, config); };
  const MethodMetrics full = metrics(Selector::freq_full);
  const MethodMetrics reduced = metrics(Selector::freq_reduced);
  const MethodMetrics l1 = metrics(Selector::subnyquist_l1);
  const MethodMetrics omp = metrics(Selector::subnyquist_omp);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  report(1, "time/frequency equivalence",
         full.nrmse <= kFullNrmse && full.ssim >= kFullSsim && seconds <= kRuntimeSeconds,
         fmt("nrmse %.4f (<= %.2f), ssim %.4f (>= %.2f)", full.nrmse, kFullNrmse, full.ssim, kFullSsim) +
             fmt(", frame with all methods %.1f s (<= %.0f s)", seconds, kRuntimeSeconds));

  const RateLedger& rl = method(frame, Selector::freq_reduced).ledger;
  report(2, "reduced-rate frequency beamforming", reduced.nrmse <= kReducedNrmse && reduced.ssim >= kReducedSsim,
         fmt("nrmse %.4f (<= %.2f), ssim %.4f (>= %.2f)", reduced.nrmse, kReducedNrmse, reduced.ssim, kReducedSsim) +
             fmt(", %.0f samples/line, %.2fx", double(rl.sampled), rl.sampling_reduction()));

  const RateLedger& sl = method(frame, Selector::subnyquist_l1).ledger;
  const bool ledger_ok = sl.sampled == 120 && sl.sampling_reduction() == 28.0 && sl.processing_reduction() == 14.0;
  report(3, "sub-Nyquist l1 recovery",
         l1.nrmse <= kSubNrmse && l1.ssim >= kSubSsim && l1.nrmse < omp.nrmse && ledger_ok,
         fmt("nrmse %.4f (<= %.2f), ssim %.4f (>= %.2f)", l1.nrmse, kSubNrmse, l1.ssim, kSubSsim) +
             fmt(", omp nrmse %.4f ssim %.4f", omp.nrmse, omp.ssim) +
             fmt(", %.0f samples/line, %gx sampling, %gx processing", double(sl.sampled), sl.sampling_reduction(),
                 sl.processing_reduction()));

  const double kept = method(frame, Selector::freq_full).kept_energy;
  report(4, "Q-table kept energy", kept >= kKeptEnergy,
         fmt("mean kept fraction %.5f over %.0f angles, top-20, k in beta (>= %.2f)", kept,
             double(config.lines), kKeptEnergy));
}

double relative_error(const std::vector<double>& x, const std::vector<double>& ref) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - ref[i]) * (x[i] - ref[i]);
    den += ref[i] * ref[i];
  }
  return std::sqrt(num / den);
}

void sparse_recovery() {
  const BandSelection beta = BandSelection::contiguous(10, 117);
  int exact = 0;
  double worst = 0.0, worst_lp = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto s = test::sparse_instance(256, beta, 5, 100, 10, seed);
    const RecoveredLine o = solve_omp(s.problem, 5);
    bool ok = true;
    for (std::size_t l = 0; l < 256; ++l) ok = ok && ((std::abs(o.coefficients[l]) > 1e-9) == (s.truth[l] != 0.0));
    exact += ok ? 1 : 0;

    const auto lp = oracle::basis_pursuit(test::dense_real_operator(s.problem), test::stacked_measurements(s.problem));
    const std::vector<double> reference(lp.x.data(), lp.x.data() + lp.x.size());
    worst_lp = std::max(worst_lp, relative_error(reference, s.truth));
    double c_norm = 0.0;
    for (const cplx& v : s.problem.measurements()) c_norm += std::norm(v);
    const RecoveredLine r = solve_l1(s.problem, 1e-6 * std::sqrt(c_norm), kL1Smoothing);
    worst = std::max(worst, relative_error(r.coefficients, reference));
  }
  report(5, "exact sparse recovery", exact >= kOmpExactSeeds && worst <= kL1RelError,
         fmt("omp exact support on %.0f/100 seeds (>= %.0f), l1 worst relative error %.2e (<= %.0e)", exact,
             kOmpExactSeeds, worst, kL1RelError) +
             fmt(", reference vs truth %.1e", worst_lp));
}

void operator_checks() {
  RunConfig config;
  const Scenario scenario = make_scenario(config);
  const std::size_t n = scenario.setup.samples_per_line();
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g(0.0, 1.0);

  std::vector<cplx> h;
  for (int k : scenario.mu.indices) h.push_back(scenario.pulse.spectrum[static_cast<std::size_t>(k)]);
  const RecoveryProblem p(n, scenario.mu.indices, std::vector<cplx>(h.size()), h);
  double adj = 0.0;
  for (int pair = 0; pair < 1000; ++pair) {
    std::vector<double> x(n);
    std::vector<cplx> y(p.rows());
    for (double& v : x) v = g(rng);
    for (cplx& v : y) v = {g(rng), g(rng)};
    const auto ax = p.forward(x);
    const auto aty = p.adjoint(y);
    double lhs = 0.0, rhs = 0.0, nax = 0.0, ny = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      lhs += (std::conj(ax[i]) * y[i]).real();
      nax += std::norm(ax[i]);
      ny += std::norm(y[i]);
    }
    for (std::size_t i = 0; i < n; ++i) rhs += x[i] * aty[i];
    adj = std::max(adj, std::abs(lhs - rhs) / std::sqrt(nax * ny));
  }

  double dual = 0.0;
  for (int sig = 0; sig < 1000; ++sig) {
    std::vector<double> x(n);
    for (double& v : x) v = g(rng);
    const auto a = channel_spectrum(x, n, scenario.beta, SpectrumPath::fft);
    const auto b = channel_spectrum(x, n, scenario.beta, SpectrumPath::emulated);
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      diff = std::max(diff, std::abs(a.values[i] - b.values[i]));
      ref = std::max(ref, std::abs(a.values[i]));
    }
    dual = std::max(dual, diff / ref);
  }
  report(6, "operator correctness", adj <= kOperatorTol && dual <= kOperatorTol,
         fmt("adjoint worst %.2e over 1000 pairs, fft vs emulated worst %.2e over 1000 signals (<= %.0e)", adj, dual,
             kOperatorTol));
}

void metric_oracles() {
  const auto pairs = test::toy_pairs();
  double worst = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& e = oracle::kToyMetricCases[i];
    worst = std::max(worst, std::abs(nrmse(test::rows_of(pairs[i].a), test::rows_of(pairs[i].b)) - e.nrmse));
    worst = std::max(worst, std::abs(ssim(pairs[i].a, pairs[i].b) - e.ssim));
  }
  bool identity = true;
  for (const auto& pr : pairs) {
    identity = identity && nrmse(test::rows_of(pr.a), test::rows_of(pr.a)) == 0.0 && ssim(pr.a, pr.a) == 1.0;
  }
  report(7, "metric oracles", worst <= kMetricTol && identity,
         fmt("worst deviation %.2e on 3 toy cases (<= %.0e), identity cases ", worst, kMetricTol) +
             (identity ? "exact" : "not exact"));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism() {
  test::TempDir dir("acceptance");
  bool same = true;
  std::size_t files = 0;
  for (Selector s : {Selector::time, Selector::freq_full, Selector::freq_reduced, Selector::subnyquist_l1,
                     Selector::subnyquist_omp}) {
    RunConfig c;
    c.lines = 16;
    c.image_rows = 200;
    c.image_cols = 200;
    c.selector = s;
    c.output_dir = dir.path / selector_name(s);
    const PipelineResult first = run_pipeline(c);
    std::vector<std::string> bytes;
    for (const auto& p : first.outputs) bytes.push_back(slurp(p));
    const PipelineResult second = run_pipeline(c);
    same = same && second.outputs == first.outputs;
    for (std::size_t i = 0; same && i < bytes.size(); ++i) same = slurp(second.outputs[i]) == bytes[i];
    files += bytes.size();
  }
  report(8, "determinism", same,
         fmt("%.0f PGM/JSON files over 5 selectors, 16 lines, repeated run ", double(files)) +
             (same ? "bit identical" : "differs"));
}

}  // namespace

int main() {
  try {
    metric_oracles();
    operator_checks();
    sparse_recovery();
    determinism();
    cardiac_criteria();
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
