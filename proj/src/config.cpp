// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#include "fdbeam/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fdbeam {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || !std::isfinite(v)) throw std::invalid_argument(key + ": expected a number, got '" + value + "'");
  return v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!value.empty() && value[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty())
    throw std::invalid_argument(key + ": expected a non-negative integer, got '" + value + "'");
  return v;
}

int to_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty()) throw std::invalid_argument(key + ": expected an integer, got '" + value + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw std::invalid_argument(key + ": expected true or false, got '" + value + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

std::string number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"setup.speed_of_sound", [](RunConfig& c, auto& k, auto& v) { c.speed_of_sound = to_double(k, v); }},
      {"setup.duration", [](RunConfig& c, auto& k, auto& v) { c.duration = to_double(k, v); }},
      {"setup.carrier", [](RunConfig& c, auto& k, auto& v) { c.carrier = to_double(k, v); }},
      {"setup.bandwidth", [](RunConfig& c, auto& k, auto& v) { c.bandwidth = to_double(k, v); }},
      {"setup.sample_rate", [](RunConfig& c, auto& k, auto& v) { c.sample_rate = to_double(k, v); }},
      {"setup.lines", [](RunConfig& c, auto& k, auto& v) { c.lines = to_unsigned(k, v); }},
      {"setup.sector_half_width_deg", [](RunConfig& c, auto& k, auto& v) { c.sector_half_width_deg = to_double(k, v); }},
      {"array.elements", [](RunConfig& c, auto& k, auto& v) { c.elements = to_unsigned(k, v); }},
      {"array.pitch", [](RunConfig& c, auto& k, auto& v) { c.pitch = to_double(k, v); }},
      {"array.offsets", [](RunConfig& c, auto& k, auto& v) { c.offsets = to_list(k, v); }},
      {"array.reference_index", [](RunConfig& c, auto& k, auto& v) { c.reference_index = to_unsigned(k, v); }},
      {"pulse.level_db", [](RunConfig& c, auto& k, auto& v) { c.pulse_level_db = to_double(k, v); }},
      {"phantom.strong_per_line", [](RunConfig& c, auto& k, auto& v) { c.scene.strong_per_line = to_unsigned(k, v); }},
      {"phantom.speckle_per_line", [](RunConfig& c, auto& k, auto& v) { c.scene.speckle_per_line = to_unsigned(k, v); }},
      {"phantom.strong_min", [](RunConfig& c, auto& k, auto& v) { c.scene.strong_min = to_double(k, v); }},
      {"phantom.strong_max", [](RunConfig& c, auto& k, auto& v) { c.scene.strong_max = to_double(k, v); }},
      {"phantom.speckle_ratio", [](RunConfig& c, auto& k, auto& v) { c.scene.speckle_ratio = to_double(k, v); }},
      {"phantom.on_grid", [](RunConfig& c, auto& k, auto& v) { c.scene.on_grid = to_bool(k, v); }},
      {"phantom.time_margin", [](RunConfig& c, auto& k, auto& v) { c.scene.time_margin = to_double(k, v); }},
      {"phantom.noise_sigma", [](RunConfig& c, auto& k, auto& v) { c.noise_sigma = to_double(k, v); }},
      {"pipeline.selector", [](RunConfig& c, auto&, auto& v) { c.selector = parse_selector(v); }},
      {"pipeline.threads", [](RunConfig& c, auto& k, auto& v) { c.threads = to_unsigned(k, v); }},
      {"band.threshold_db", [](RunConfig& c, auto& k, auto& v) { c.band_threshold_db = to_double(k, v); }},
      {"band.subset_size", [](RunConfig& c, auto& k, auto& v) { c.subset_size = to_unsigned(k, v); }},
      {"band.subset_bands", [](RunConfig& c, auto& k, auto& v) { c.subset_bands = to_unsigned(k, v); }},
      {"band.emulated_acquisition", [](RunConfig& c, auto& k, auto& v) { c.emulated_acquisition = to_bool(k, v); }},
      {"qtable.policy",
       [](RunConfig& c, auto& k, auto& v) {
         if (v == "top-k") {
           c.policy.kind = TruncationPolicy::Kind::top_k;
         } else if (v == "window") {
           c.policy.kind = TruncationPolicy::Kind::window;
         } else {
           throw std::invalid_argument(k + ": expected top-k or window, got '" + v + "'");
         }
       }},
      {"qtable.k", [](RunConfig& c, auto& k, auto& v) { c.policy.count = to_int(k, v); }},
      {"qtable.n1", [](RunConfig& c, auto& k, auto& v) { c.policy.below = to_int(k, v); }},
      {"qtable.n2", [](RunConfig& c, auto& k, auto& v) { c.policy.above = to_int(k, v); }},
      {"qtable.search_below", [](RunConfig& c, auto& k, auto& v) { c.policy.search_below = to_int(k, v); }},
      {"qtable.search_above", [](RunConfig& c, auto& k, auto& v) { c.policy.search_above = to_int(k, v); }},
      {"qtable.method",
       [](RunConfig& c, auto& k, auto& v) {
         if (v == "phase-panels") {
           c.quadrature.method = QuadratureMethod::phase_panels;
         } else if (v == "uniform-fft") {
           c.quadrature.method = QuadratureMethod::uniform_fft;
         } else {
           throw std::invalid_argument(k + ": expected phase-panels or uniform-fft, got '" + v + "'");
         }
       }},
      {"qtable.grid_oversample", [](RunConfig& c, auto& k, auto& v) { c.quadrature.grid_oversample = to_unsigned(k, v); }},
      {"qtable.cache_dir", [](RunConfig& c, auto&, auto& v) { c.cache_dir = v; }},
      {"solver.omp_atoms", [](RunConfig& c, auto& k, auto& v) { c.omp_atoms = to_unsigned(k, v); }},
      {"solver.epsilon_rel", [](RunConfig& c, auto& k, auto& v) { c.epsilon_rel = to_double(k, v); }},
      {"solver.smoothing", [](RunConfig& c, auto& k, auto& v) { c.smoothing = to_double(k, v); }},
      {"solver.tolerance", [](RunConfig& c, auto& k, auto& v) { c.tolerance = to_double(k, v); }},
      {"solver.max_iterations", [](RunConfig& c, auto& k, auto& v) { c.max_iterations = to_int(k, v); }},
      {"solver.compare_omp", [](RunConfig& c, auto& k, auto& v) { c.compare_omp = to_bool(k, v); }},
      {"output.dir", [](RunConfig& c, auto&, auto& v) { c.output_dir = v; }},
      {"output.image_rows", [](RunConfig& c, auto& k, auto& v) { c.image_rows = to_unsigned(k, v); }},
      {"output.image_cols", [](RunConfig& c, auto& k, auto& v) { c.image_cols = to_unsigned(k, v); }},
      {"output.dynamic_range_db", [](RunConfig& c, auto& k, auto& v) { c.dynamic_range_db = to_double(k, v); }},
      {"output.write_lines", [](RunConfig& c, auto& k, auto& v) { c.write_lines = to_bool(k, v); }},
      {"run.rng_seed", [](RunConfig& c, auto& k, auto& v) { c.rng_seed = to_unsigned(k, v); }},
  };
  return table;
}

}  // namespace

std::string selector_name(Selector selector) {
  switch (selector) {
    case Selector::time: return "time";
    case Selector::freq_full: return "freq-full";
    case Selector::freq_reduced: return "freq-reduced";
    case Selector::subnyquist_l1: return "subnyquist-l1";
    case Selector::subnyquist_omp: return "subnyquist-omp";
  }
  return "unknown";
}

Selector parse_selector(const std::string& name) {
  for (Selector s : {Selector::time, Selector::freq_full, Selector::freq_reduced, Selector::subnyquist_l1,
                     Selector::subnyquist_omp}) {
    if (selector_name(s) == name) return s;
  }
  throw std::invalid_argument("unknown pipeline selector '" + name + "'");
}

ImagingSetup RunConfig::setup() const {
  ImagingSetup s;
  s.speed_of_sound = speed_of_sound;
  s.depth = duration * speed_of_sound / 2.0;
  s.carrier = carrier;
  s.bandwidth = bandwidth;
  s.sample_rate = sample_rate;
  s.angles = uniform_sector(lines, sector_half_width_deg * std::numbers::pi / 180.0);
  return s;
}

TransducerArray RunConfig::array() const {
  if (offsets.empty()) return TransducerArray::uniform(elements, pitch);
  TransducerArray a;
  a.element_offsets = offsets;
  a.reference_index = reference_index;
  return a;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(lines >= 2, "setup.lines must be at least 2");
  require(sector_half_width_deg > 0.0 && sector_half_width_deg < 90.0, "setup.sector_half_width_deg must be in (0, 90)");
  require(duration > 0.0, "setup.duration must be positive");
  setup().validate();
  if (offsets.empty()) {
    require(elements >= 1, "array.elements must be at least 1");
    require(pitch > 0.0, "array.pitch must be positive");
  }
  array().validate();
  require(pulse_level_db < 0.0, "pulse.level_db must be negative");
  require(scene.strong_min > 0.0 && scene.strong_max >= scene.strong_min, "phantom strong amplitude range is invalid");
  require(scene.speckle_ratio >= 0.0, "phantom.speckle_ratio must be non-negative");
  require(scene.time_margin >= 0.0 && 2.0 * scene.time_margin < duration, "phantom.time_margin leaves no room");
  require(noise_sigma >= 0.0, "phantom.noise_sigma must be non-negative");
  require(band_threshold_db < 0.0, "band.threshold_db must be negative");
  const bool subnyquist = selector == Selector::subnyquist_l1 || selector == Selector::subnyquist_omp;
  if (subnyquist) {
    require(subset_size >= 1, "band.subset_size must be at least 1");
    require(subset_bands >= 1 && subset_bands <= subset_size, "band.subset_bands must be in [1, subset_size]");
    require(omp_atoms >= 1 && omp_atoms <= subset_size, "solver.omp_atoms must be in [1, subset_size]");
    require(epsilon_rel >= 0.0, "solver.epsilon_rel must be non-negative");
    require(smoothing > 0.0, "solver.smoothing must be positive");
    require(tolerance > 0.0, "solver.tolerance must be positive");
    require(max_iterations >= 10, "solver.max_iterations must be at least 10");
  }
  policy.validate();
  require(quadrature.grid_oversample >= 1, "qtable.grid_oversample must be at least 1");
  require(image_rows >= 16 && image_cols >= 16, "output image must be at least 16 x 16");
  require(dynamic_range_db > 0.0, "output.dynamic_range_db must be positive");
  require(!output_dir.empty(), "output.dir must be set");
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> entries;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("line " + std::to_string(line_no) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw std::invalid_argument("line " + std::to_string(line_no) + ": empty key");
    entries[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
  }
  return entries;
}

RunConfig apply_config(const std::map<std::string, std::string>& entries, RunConfig base) {
  const auto& table = setters();
  for (const auto& [key, value] : entries) {
    const auto it = table.find(key);
    if (it == table.end()) throw std::invalid_argument("unknown config key '" + key + "'");
    it->second(base, key, value);
  }
  return base;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& entry : setters()) keys.push_back(entry.first);
  return keys;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return apply_config(parse_config_text(text.str()));
}

std::string format_config(const RunConfig& c) {
  std::ostringstream out;
  out << "[setup]\n"
      << "speed_of_sound = " << number(c.speed_of_sound) << "\n"
      << "duration = " << number(c.duration) << "\n"
      << "carrier = " << number(c.carrier) << "\n"
      << "bandwidth = " << number(c.bandwidth) << "\n"
      << "sample_rate = " << number(c.sample_rate) << "\n"
      << "lines = " << c.lines << "\n"
      << "sector_half_width_deg = " << number(c.sector_half_width_deg) << "\n\n";
  out << "[array]\n";
  out << "elements = " << c.elements << "\n"
      << "pitch = " << number(c.pitch) << "\n";
  if (!c.offsets.empty()) {
    out << "offsets = ";
    for (std::size_t i = 0; i < c.offsets.size(); ++i) out << (i ? ", " : "") << number(c.offsets[i]);
    out << "\nreference_index = " << c.reference_index << "\n";
  }
  out << "\n";
  out << "[pulse]\n"
      << "level_db = " << number(c.pulse_level_db) << "\n\n";
  out << "[phantom]\n"
      << "strong_per_line = " << c.scene.strong_per_line << "\n"
      << "speckle_per_line = " << c.scene.speckle_per_line << "\n"
      << "strong_min = " << number(c.scene.strong_min) << "\n"
      << "strong_max = " << number(c.scene.strong_max) << "\n"
      << "speckle_ratio = " << number(c.scene.speckle_ratio) << "\n"
      << "on_grid = " << (c.scene.on_grid ? "true" : "false") << "\n"
      << "time_margin = " << number(c.scene.time_margin) << "\n"
      << "noise_sigma = " << number(c.noise_sigma) << "\n\n";
  out << "[pipeline]\n"
      << "selector = " << selector_name(c.selector) << "\n"
      << "threads = " << c.threads << "\n\n";
  out << "[band]\n"
      << "threshold_db = " << number(c.band_threshold_db) << "\n"
      << "subset_size = " << c.subset_size << "\n"
      << "subset_bands = " << c.subset_bands << "\n"
      << "emulated_acquisition = " << (c.emulated_acquisition ? "true" : "false") << "\n\n";
  out << "[qtable]\n"
      << "policy = " << (c.policy.kind == TruncationPolicy::Kind::top_k ? "top-k" : "window") << "\n"
      << "k = " << c.policy.count << "\n"
      << "n1 = " << c.policy.below << "\n"
      << "n2 = " << c.policy.above << "\n"
      << "search_below = " << c.policy.search_below << "\n"
      << "search_above = " << c.policy.search_above << "\n"
      << "method = " << (c.quadrature.method == QuadratureMethod::phase_panels ? "phase-panels" : "uniform-fft") << "\n"
      << "grid_oversample = " << c.quadrature.grid_oversample << "\n";
  if (!c.cache_dir.empty()) out << "cache_dir = " << c.cache_dir.string() << "\n";
  out << "\n[solver]\n"
      << "omp_atoms = " << c.omp_atoms << "\n"
      << "epsilon_rel = " << number(c.epsilon_rel) << "\n"
      << "smoothing = " << number(c.smoothing) << "\n"
      << "tolerance = " << number(c.tolerance) << "\n"
      << "max_iterations = " << c.max_iterations << "\n"
      << "compare_omp = " << (c.compare_omp ? "true" : "false") << "\n\n";
  out << "[output]\n"
      << "dir = " << c.output_dir.string() << "\n"
      << "image_rows = " << c.image_rows << "\n"
      << "image_cols = " << c.image_cols << "\n"
      << "dynamic_range_db = " << number(c.dynamic_range_db) << "\n"
      << "write_lines = " << (c.write_lines ? "true" : "false") << "\n\n";
  out << "[run]\n"
      << "rng_seed = " << c.rng_seed << "\n";
  return out.str();
}

}  // namespace fdbeam
