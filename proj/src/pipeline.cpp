// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#include "fdbeam/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "fdbeam/cs_recovery.hpp"
#include "fdbeam/formats.hpp"
#include "fdbeam/freq_beamformer.hpp"
#include "fdbeam/parallel.hpp"
#include "fdbeam/qtable.hpp"

namespace fdbeam {

namespace {

using json = nlohmann::ordered_json;

// Acceptance thresholds checked by run_pipeline (and the CLI's --check mode).
constexpr double kFullNrmse = 0.05;
constexpr double kFullSsim = 0.93;
constexpr double kReducedNrmse = 0.06;
constexpr double kReducedSsim = 0.92;
constexpr double kSubNyquistNrmse = 0.12;
constexpr double kSubNyquistSsim = 0.55;

bool uses_master_table(Selector s) { return s == Selector::freq_full || s == Selector::freq_reduced; }
bool is_subnyquist(Selector s) { return s == Selector::subnyquist_l1 || s == Selector::subnyquist_omp; }

std::vector<int> union_of(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::size_t count_in(const std::vector<int>& sorted, const BandSelection& band) {
  std::size_t n = 0;
  for (int k : sorted) n += band.contains(k) ? 1 : 0;
  return n;
}

std::vector<int> in_band(const std::vector<int>& indices, const BandSelection& band) {
  std::vector<int> out;
  for (int k : indices) {
    if (band.contains(k)) out.push_back(k);
  }
  return out;
}

// Per-line output of one method before aggregation.
struct LineOutput {
  BeamformedLine line;
  std::size_t consumed = 0;
  double kept_energy = -1.0;
  std::optional<LineDiagnostics> diagnostics;
};

}  // namespace

Scenario make_scenario(const RunConfig& config) {
  config.validate();
  Scenario s;
  s.setup = config.setup();
  s.array = config.array();
  s.pulse = make_pulse(s.setup, envelope_sigma_for_band(0.5 * config.bandwidth, config.pulse_level_db));
  SceneSpec spec = config.scene;
  spec.seed = config.rng_seed;
  s.scene = generate_scene(spec, s.setup);
  s.scene.validate(s.setup);
  s.beta = band_support(s.pulse, config.band_threshold_db);

  const int half = static_cast<int>(s.setup.samples_per_line() / 2);
  const int lo = std::max(0, s.beta.indices.front() - config.policy.nominal_below());
  const int hi = std::min(half - 1, s.beta.indices.back() + config.policy.nominal_above());
  for (int k = lo; k <= hi; ++k) s.beam_band.push_back(k);
  const int p = std::min(half - 1, static_cast<int>(s.setup.highest_frequency_index()));
  for (int k = 0; k <= p; ++k) s.full_band.push_back(k);
  const bool feasible = config.subset_size >= 1 && config.subset_bands >= 1 &&
                        config.subset_bands <= config.subset_size && config.subset_size <= s.beta.size();
  if (feasible) {
    s.mu = select_subset(s.beta, config.subset_size, config.subset_bands, config.rng_seed);
  } else if (is_subnyquist(config.selector)) {
    throw std::invalid_argument("band.subset_size does not fit the channel band of size " + std::to_string(s.beta.size()));
  }
  return s;
}

namespace {

// Runs `selectors` on one line of channel data; the baseline is computed when `baseline` is set.
std::vector<LineOutput> process_line(const Scenario& scenario, const RunConfig& config,
                                     std::span<const Selector> selectors, const ChannelData& channels,
                                     std::size_t line_index, BeamformedLine* baseline) {
  const ImagingSetup& setup = scenario.setup;
  const std::size_t n = setup.samples_per_line();
  const double theta = channels.theta;
  if (channels.samples != n || channels.elements != scenario.array.size())
    throw std::invalid_argument("channel data does not match the configured array and setup");

  auto table_for = [&](const std::vector<int>& indices) {
    if (!config.cache_dir.empty())
      return cached_q_table(config.cache_dir, scenario.array, setup, theta, indices, config.policy, config.quadrature);
    return compute_q_table(scenario.array, setup, theta, indices, config.policy, config.quadrature);
  };
  std::optional<BeamformedLine> time_line;
  auto time_beam = [&]() -> const BeamformedLine& {
    if (!time_line) time_line = beamform_time(channels, scenario.array, setup);
    return *time_line;
  };
  if (baseline) *baseline = time_beam();

  std::optional<QTable> master;
  if (std::any_of(selectors.begin(), selectors.end(), uses_master_table))
    master = table_for(union_of(scenario.full_band, scenario.beam_band));
  std::optional<ChannelSpectra> band_spectra;
  auto band_limited_spectra = [&]() -> const ChannelSpectra& {
    if (!band_spectra) {
      const SpectrumPath path = config.emulated_acquisition ? SpectrumPath::emulated : SpectrumPath::fft;
      band_spectra = acquire_spectra(channels, scenario.beta, path, true);
    }
    return *band_spectra;
  };

  std::vector<LineOutput> outputs(selectors.size());
  for (std::size_t s = 0; s < selectors.size(); ++s) {
    LineOutput& out = outputs[s];
    switch (selectors[s]) {
      case Selector::time:
        out.line = time_beam();
        out.consumed = n;
        break;
      case Selector::freq_full: {
        const QTable table = master->subset(scenario.full_band);
        out.line = spectrum_to_time(beamform_freq(full_spectra(channels), table, setup), n);
        out.consumed = required_channel_indices(table).size();
        out.kept_energy = master->mean_kept_energy(scenario.beta.indices);
        break;
      }
      case Selector::freq_reduced: {
        const QTable table = master->subset(scenario.beam_band);
        out.line = spectrum_to_time(beamform_freq(band_limited_spectra(), table, setup), n);
        out.consumed = count_in(required_channel_indices(table), scenario.beta);
        out.kept_energy = master->mean_kept_energy(scenario.beta.indices);
        break;
      }
      case Selector::subnyquist_l1:
      case Selector::subnyquist_omp: {
        if (scenario.mu.size() == 0) throw std::invalid_argument("sub-Nyquist subset is empty");
        const QTable table = master ? master->subset(scenario.mu.indices) : table_for(scenario.mu.indices);
        const BeamSpectrum spectrum = beamform_freq(band_limited_spectra(), table, setup);
        const RecoveryProblem problem = build_problem(spectrum, scenario.pulse);
        LineDiagnostics diag;
        diag.line = line_index;
        RecoveredLine recovered;
        if (selectors[s] == Selector::subnyquist_l1) {
          double c_norm = 0.0;
          for (const cplx& v : problem.measurements()) c_norm += std::norm(v);
          diag.epsilon = config.epsilon_rel * std::sqrt(c_norm);
          L1Options options;
          options.tolerance = config.tolerance;
          options.max_iterations = config.max_iterations;
          recovered = solve_l1(problem, diag.epsilon, config.smoothing, options);
        } else {
          recovered = solve_omp(problem, config.omp_atoms);
        }
        diag.solver = recovered.solver;
        diag.iterations = recovered.iterations;
        diag.residual_norm = recovered.residual_norm;
        diag.l1_norm = recovered.l1_norm;
        diag.support = recovered.support;
        diag.warnings = recovered.warnings;
        out.diagnostics = diag;
        out.line = reconstruct_beam(recovered, scenario.pulse, n, theta);
        out.consumed = count_in(required_channel_indices(table), scenario.beta);
        out.kept_energy = table.mean_kept_energy(in_band(scenario.mu.indices, scenario.beta));
        break;
      }
    }
  }
  return outputs;
}

MethodResult aggregate(Selector selector, std::vector<LineOutput>& outputs, const Scenario& scenario,
                       const RunConfig& config) {
  const std::size_t n = scenario.setup.samples_per_line();
  MethodResult method;
  method.selector = selector;
  std::size_t consumed = 0;
  double kept = 0.0;
  for (LineOutput& out : outputs) {
    method.lines.push_back(std::move(out.line));
    consumed = std::max(consumed, out.consumed);
    kept += out.kept_energy;
    if (out.diagnostics) method.diagnostics.push_back(*out.diagnostics);
  }
  if (!outputs.empty() && outputs.front().kept_energy >= 0.0) method.kept_energy = kept / static_cast<double>(outputs.size());
  const std::size_t margin = static_cast<std::size_t>(config.policy.margin());
  switch (selector) {
    case Selector::time: method.ledger = rate_ledger(Method::time, n, 0, 0, n); break;
    case Selector::freq_full: method.ledger = rate_ledger(Method::freq_full, n, consumed, margin, consumed); break;
    case Selector::freq_reduced:
      method.ledger = rate_ledger(Method::freq_reduced, n, scenario.beta.size(), margin, consumed);
      break;
    case Selector::subnyquist_l1:
    case Selector::subnyquist_omp:
      method.ledger = rate_ledger(Method::subnyquist, n, scenario.mu.size(), margin, consumed);
      break;
  }
  method.ledger.method = selector_name(selector);
  return method;
}

}  // namespace

FrameResult run_frame(const Scenario& scenario, const RunConfig& config, std::span<const Selector> selectors) {
  const ImagingSetup& setup = scenario.setup;
  const std::size_t lines = setup.angles.size();
  FrameResult frame;
  frame.baseline.resize(lines);
  std::vector<std::vector<LineOutput>> per_line(lines);
  parallel_for(lines, config.threads, [&](std::size_t j) {
    const ChannelData channels = simulate_channels(scenario.scene, scenario.array, setup, scenario.pulse,
                                                   setup.angles[j], config.noise_sigma);
    per_line[j] = process_line(scenario, config, selectors, channels, j, &frame.baseline[j]);
  });
  for (std::size_t s = 0; s < selectors.size(); ++s) {
    std::vector<LineOutput> outputs(lines);
    for (std::size_t j = 0; j < lines; ++j) outputs[j] = std::move(per_line[j][s]);
    frame.methods.push_back(aggregate(selectors[s], outputs, scenario, config));
  }
  return frame;
}

MethodResult process_channels(const Scenario& scenario, const RunConfig& config, Selector selector,
                              const std::vector<ChannelData>& records) {
  std::vector<LineOutput> outputs(records.size());
  const Selector one[1] = {selector};
  parallel_for(records.size(), config.threads, [&](std::size_t j) {
    outputs[j] = std::move(process_line(scenario, config, one, records[j], j, nullptr).front());
  });
  return aggregate(selector, outputs, scenario, config);
}

std::vector<ChannelData> simulate_frame(const Scenario& scenario, const RunConfig& config) {
  const ImagingSetup& setup = scenario.setup;
  std::vector<ChannelData> records(setup.angles.size());
  parallel_for(records.size(), config.threads, [&](std::size_t j) {
    records[j] = simulate_channels(scenario.scene, scenario.array, setup, scenario.pulse, setup.angles[j],
                                   config.noise_sigma);
  });
  return records;
}

MethodMetrics evaluate(const std::vector<BeamformedLine>& baseline, const ImageGrid& baseline_image,
                       const std::vector<BeamformedLine>& lines, const Scenario& scenario, const RunConfig& config) {
  MethodMetrics m;
  std::vector<std::vector<double>> ref;
  std::vector<std::vector<double>> test;
  for (std::size_t j = 0; j < baseline.size(); ++j) {
    ref.push_back(envelope(baseline[j].samples));
    test.push_back(envelope(lines[j].samples));
  }
  m.nrmse = nrmse(ref, test, &m.warnings);
  m.image = bmode_image(lines, scenario.setup, config.dynamic_range_db, config.image_rows, config.image_cols);
  m.ssim = ssim(baseline_image, m.image);
  return m;
}

bool PipelineResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

namespace {

json ledger_json(const RateLedger& l) {
  json j;
  j["method"] = l.method;
  j["nyquist_samples"] = l.nyquist_samples;
  j["acquired_coefficients"] = l.acquired;
  j["margin"] = l.margin;
  j["sampled_real_samples"] = l.sampled;
  j["processed_real_values"] = l.processed;
  j["consumed_coefficients"] = l.consumed;
  j["sampling_reduction"] = l.sampling_reduction();
  j["processing_reduction"] = l.processing_reduction();
  return j;
}

Check threshold_check(const std::string& name, double value, double limit, bool upper) {
  std::ostringstream detail;
  detail.precision(6);
  detail << value << (upper ? " <= " : " >= ") << limit;
  return Check{name, upper ? value <= limit : value >= limit, detail.str()};
}

std::vector<Check> checks_for(Selector selector, const MethodMetrics& metrics, const RateLedger& ledger,
                              const Scenario& scenario, const RunConfig& config, const MethodMetrics* omp) {
  std::vector<Check> checks;
  const std::size_t n = scenario.setup.samples_per_line();
  switch (selector) {
    case Selector::time:
      checks.push_back(Check{"baseline identity", metrics.nrmse == 0.0 && metrics.ssim == 1.0, "nrmse 0 and ssim 1"});
      checks.push_back(Check{"ledger samples per line", ledger.sampled == n, std::to_string(ledger.sampled)});
      break;
    case Selector::freq_full:
      checks.push_back(threshold_check("nrmse vs time", metrics.nrmse, kFullNrmse, true));
      checks.push_back(threshold_check("ssim vs time", metrics.ssim, kFullSsim, false));
      break;
    case Selector::freq_reduced:
      checks.push_back(threshold_check("nrmse vs time", metrics.nrmse, kReducedNrmse, true));
      checks.push_back(threshold_check("ssim vs time", metrics.ssim, kReducedSsim, false));
      checks.push_back(Check{"ledger samples per line", ledger.sampled == scenario.beta.size(),
                             std::to_string(ledger.sampled) + " = B"});
      break;
    case Selector::subnyquist_l1:
      checks.push_back(threshold_check("nrmse vs time", metrics.nrmse, kSubNyquistNrmse, true));
      checks.push_back(threshold_check("ssim vs time", metrics.ssim, kSubNyquistSsim, false));
      if (omp) {
        std::ostringstream detail;
        detail << metrics.nrmse << " < " << omp->nrmse;
        checks.push_back(Check{"l1 beats omp", metrics.nrmse < omp->nrmse, detail.str()});
      }
      [[fallthrough]];
    case Selector::subnyquist_omp: {
      const std::size_t expected = config.subset_size + static_cast<std::size_t>(config.policy.margin());
      checks.push_back(Check{"ledger samples per line", ledger.sampled == expected,
                             std::to_string(ledger.sampled) + " = |mu| + N1 + N2"});
      break;
    }
  }
  return checks;
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& config) {
  PipelineResult result;
  std::string stage = "validate";
  try {
    config.validate();
    stage = "setup";
    const Scenario scenario = make_scenario(config);

    stage = "beamform";
    std::vector<Selector> selectors{config.selector};
    const bool compare = config.selector == Selector::subnyquist_l1 && config.compare_omp;
    if (compare) selectors.push_back(Selector::subnyquist_omp);
    const FrameResult frame = run_frame(scenario, config, selectors);

    stage = "image";
    const ImageGrid baseline_image =
        bmode_image(frame.baseline, scenario.setup, config.dynamic_range_db, config.image_rows, config.image_cols);
    std::vector<MethodMetrics> metrics;
    for (const MethodResult& m : frame.methods)
      metrics.push_back(evaluate(frame.baseline, baseline_image, m.lines, scenario, config));

    stage = "report";
    const MethodResult& main = frame.methods.front();
    result.checks = checks_for(config.selector, metrics.front(), main.ledger, scenario, config,
                               compare ? &metrics.back() : nullptr);

    const RateLedger baseline_ledger = rate_ledger(Method::time, scenario.setup.samples_per_line(), 0, 0,
                                                   scenario.setup.samples_per_line());
    json ledger = json::array();
    ledger.push_back(ledger_json(baseline_ledger));
    for (const MethodResult& m : frame.methods) {
      if (m.selector != Selector::time) ledger.push_back(ledger_json(m.ledger));
    }

    json report;
    report["selector"] = selector_name(config.selector);
    report["config"] = format_config(config);
    json setup;
    setup["samples_per_line"] = scenario.setup.samples_per_line();
    setup["highest_frequency_index"] = scenario.setup.highest_frequency_index();
    setup["lines"] = scenario.setup.angles.size();
    setup["elements"] = scenario.array.size();
    setup["band"] = {scenario.beta.indices.front(), scenario.beta.indices.back()};
    setup["band_size"] = scenario.beta.size();
    setup["beam_band"] = {scenario.beam_band.front(), scenario.beam_band.back()};
    setup["subset"] = scenario.mu.indices;
    report["setup"] = setup;
    json methods = json::array();
    for (std::size_t i = 0; i < frame.methods.size(); ++i) {
      const MethodResult& m = frame.methods[i];
      json entry;
      entry["method"] = selector_name(m.selector);
      entry["nrmse"] = metrics[i].nrmse;
      entry["ssim"] = metrics[i].ssim;
      if (m.kept_energy >= 0.0) entry["mean_kept_energy"] = m.kept_energy;
      entry["ledger"] = ledger_json(m.ledger);
      entry["warnings"] = metrics[i].warnings;
      if (!m.diagnostics.empty()) {
        json lines = json::array();
        for (const LineDiagnostics& d : m.diagnostics) {
          json l;
          l["line"] = d.line;
          l["solver"] = d.solver;
          l["iterations"] = d.iterations;
          l["epsilon"] = d.epsilon;
          l["residual_norm"] = d.residual_norm;
          l["l1_norm"] = d.l1_norm;
          l["support"] = d.support;
          l["warnings"] = d.warnings;
          lines.push_back(l);
        }
        entry["lines"] = lines;
      }
      methods.push_back(entry);
    }
    report["methods"] = methods;
    json checks = json::array();
    for (const Check& c : result.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    report["checks"] = checks;
    result.report = report.dump(2) + "\n";

    stage = "write";
    std::filesystem::create_directories(config.output_dir);
    auto track = [&result](const std::filesystem::path& p) {
      result.outputs.push_back(p);
      return p;
    };
    write_pgm(baseline_image, track(config.output_dir / "baseline.pgm"));
    for (std::size_t i = 0; i < frame.methods.size(); ++i) {
      const std::string name = selector_name(frame.methods[i].selector);
      write_pgm(metrics[i].image, track(config.output_dir / (name + ".pgm")));
      if (config.write_lines) write_lines(frame.methods[i].lines, track(config.output_dir / (name + ".fdbm")));
    }
    if (config.write_lines) write_lines(frame.baseline, track(config.output_dir / "baseline.fdbm"));
    {
      std::ofstream out(track(config.output_dir / "report.json"), std::ios::binary | std::ios::trunc);
      out << result.report;
      if (!out) throw std::runtime_error("cannot write report.json");
    }
    {
      std::ofstream out(track(config.output_dir / "ledger.json"), std::ios::binary | std::ios::trunc);
      out << ledger.dump(2) << "\n";
      if (!out) throw std::runtime_error("cannot write ledger.json");
    }
  } catch (const std::exception& e) {
    std::error_code ignored;
    for (const auto& p : result.outputs) std::filesystem::remove(p, ignored);
    throw PipelineError(stage, e.what());
  }
  return result;
}

}  // namespace fdbeam
