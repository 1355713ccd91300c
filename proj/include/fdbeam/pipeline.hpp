// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdbeam/config.hpp"
#include "fdbeam/imaging.hpp"
#include "fdbeam/phantom.hpp"
#include "fdbeam/subnyquist.hpp"
#include "fdbeam/time_beamformer.hpp"

namespace fdbeam {

/// Error raised by run_pipeline, tagged with the stage that failed.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Derived, immutable inputs of one frame.
struct Scenario {
  ImagingSetup setup;
  TransducerArray array;
  Pulse pulse;
  PhantomScene scene;
  BandSelection beta;           // channel band
  std::vector<int> beam_band;   // beta widened by the truncation margin
  std::vector<int> full_band;   // 0..P
  BandSelection mu;             // sub-Nyquist subset of beta
};

Scenario make_scenario(const RunConfig& config);

struct LineDiagnostics {
  std::size_t line = 0;
  std::string solver;
  std::size_t iterations = 0;
  double epsilon = 0.0;
  double residual_norm = 0.0;
  double l1_norm = 0.0;
  std::size_t support = 0;
  std::vector<std::string> warnings;
};

struct MethodResult {
  Selector selector = Selector::time;
  std::vector<BeamformedLine> lines;
  RateLedger ledger;
  std::vector<LineDiagnostics> diagnostics;
  double kept_energy = -1.0;  // mean kept Q energy over (k in beta, m) and lines; < 0 when unused
};

struct FrameResult {
  std::vector<BeamformedLine> baseline;  // time-domain beamformer on the same channels
  std::vector<MethodResult> methods;     // in the order requested
};

/// Simulates every line once and runs the baseline and all `selectors` on it.
FrameResult run_frame(const Scenario& scenario, const RunConfig& config, std::span<const Selector> selectors);

/// Channel data of every line of the scenario.
std::vector<ChannelData> simulate_frame(const Scenario& scenario, const RunConfig& config);

/// Runs one selector on recorded channel data (one record per line, angle taken from the record).
MethodResult process_channels(const Scenario& scenario, const RunConfig& config, Selector selector,
                              const std::vector<ChannelData>& records);

struct MethodMetrics {
  double nrmse = 0.0;
  double ssim = 0.0;
  ImageGrid image;
  std::vector<std::string> warnings;
};

MethodMetrics evaluate(const std::vector<BeamformedLine>& baseline, const ImageGrid& baseline_image,
                       const std::vector<BeamformedLine>& lines, const Scenario& scenario, const RunConfig& config);

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct PipelineResult {
  std::string report;  // JSON text as written to report.json
  std::vector<Check> checks;
  std::vector<std::filesystem::path> outputs;

  bool all_passed() const;
};

/// simulate -> beamform or recover -> image -> metrics against the time-domain baseline.
/// Writes baseline.pgm, <selector>.pgm, report.json and ledger.json under config.output_dir.
/// On failure every file written so far is removed and a PipelineError is thrown.
PipelineResult run_pipeline(const RunConfig& config);

}  // namespace fdbeam
