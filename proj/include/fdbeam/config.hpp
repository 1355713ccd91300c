// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fdbeam/geometry.hpp"
#include "fdbeam/phantom.hpp"
#include "fdbeam/qtable.hpp"

namespace fdbeam {

enum class Selector : std::uint8_t { time, freq_full, freq_reduced, subnyquist_l1, subnyquist_omp };

std::string selector_name(Selector selector);
/// Throws std::invalid_argument for an unknown name.
Selector parse_selector(const std::string& name);

/// Everything one pipeline run depends on.
struct RunConfig {
  // [setup]
  double speed_of_sound = 1540.0;
  double duration = 210e-6;  // T, s; depth = c T / 2
  double carrier = 3.4e6;
  double bandwidth = 2e6;
  double sample_rate = 16e6;
  std::size_t lines = 120;
  double sector_half_width_deg = 45.0;
  // [array]
  std::size_t elements = 64;
  double pitch = 1e-4;
  std::vector<double> offsets;  // overrides elements/pitch when non-empty
  std::size_t reference_index = 0;
  // [pulse]
  double pulse_level_db = -40.0;  // spectrum level at carrier +- bandwidth / 2
  // [phantom]
  SceneSpec scene;
  double noise_sigma = 0.0;
  // [pipeline]
  Selector selector = Selector::freq_full;
  std::size_t threads = 0;  // 0: hardware concurrency
  // [band]
  double band_threshold_db = -40.0;
  std::size_t subset_size = 100;
  std::size_t subset_bands = 10;
  bool emulated_acquisition = false;
  // [qtable]
  TruncationPolicy policy;
  QuadratureOptions quadrature;
  std::filesystem::path cache_dir;  // empty: no cache
  // [solver]
  std::size_t omp_atoms = 25;
  double epsilon_rel = 0.05;
  double smoothing = 1e-3;
  double tolerance = 1e-6;
  int max_iterations = 20000;
  bool compare_omp = true;
  // [output]
  std::filesystem::path output_dir = "out";
  std::size_t image_rows = 400;
  std::size_t image_cols = 400;
  double dynamic_range_db = 50.0;
  bool write_lines = false;
  // [run]
  std::uint64_t rng_seed = 1;

  ImagingSetup setup() const;
  TransducerArray array() const;
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Flat key/value text with [sections]; '#' and ';' start comments. Keys are returned as "section.key".
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Applies "section.key" entries onto `base`. Throws std::invalid_argument for unknown keys or bad values.
RunConfig apply_config(const std::map<std::string, std::string>& entries, RunConfig base = {});

/// Every key apply_config accepts, sorted.
std::vector<std::string> config_keys();

RunConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config_text + apply_config of it reproduces the config.
std::string format_config(const RunConfig& config);

}  // namespace fdbeam
