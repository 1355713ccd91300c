// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdbeam/config.hpp"
#include "fdbeam/formats.hpp"
#include "fdbeam/imaging.hpp"
#include "fdbeam/pipeline.hpp"

namespace {

using namespace fdbeam;

// Config file plus per-key overrides; every subcommand accepts the same set.
struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", file, "run configuration file")->check(CLI::ExistingFile);
    for (const std::string& key : config_keys()) {
      cmd.add_option_function<std::string>(
             "--" + key, [this, key](const std::string& v) { overrides[key] = v; }, "override " + key)
          ->group("Config overrides");
    }
  }

  RunConfig resolve() const {
    RunConfig base = file.empty() ? RunConfig{} : load_config(file);
    RunConfig config = apply_config(overrides, base);
    config.validate();
    return config;
  }
};

void print_checks(const PipelineResult& result) {
  for (const Check& c : result.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frequency-domain and sub-Nyquist ultrasound beamforming"};
  app.require_subcommand(1);

  ConfigFlags sim_flags, bf_flags, rec_flags, met_flags, ren_flags, run_flags;
  std::string out_path, in_path, method, solver = "l1", reference_path, test_path, json_path;
  bool check = false;

  CLI::App* simulate = app.add_subcommand("simulate", "simulate channel data for every line");
  sim_flags.attach(*simulate);
  simulate->add_option("--out", out_path, "channel data file (.fdbm)")->required();

  CLI::App* beamform = app.add_subcommand("beamform", "beamform recorded channel data");
  bf_flags.attach(*beamform);
  beamform->add_option("--in", in_path, "channel data file")->required()->check(CLI::ExistingFile);
  beamform->add_option("--out", out_path, "beamformed lines file")->required();
  beamform->add_option("--method", method, "time | freq-full | freq-reduced (default: pipeline.selector)");

  CLI::App* recover = app.add_subcommand("recover", "sub-Nyquist acquisition and sparse recovery");
  rec_flags.attach(*recover);
  recover->add_option("--in", in_path, "channel data file")->required()->check(CLI::ExistingFile);
  recover->add_option("--out", out_path, "recovered lines file")->required();
  recover->add_option("--solver", solver, "l1 | omp")->check(CLI::IsMember({"l1", "omp"}));

  CLI::App* metrics = app.add_subcommand("metrics", "NRMSE and SSIM of a line set against a reference");
  met_flags.attach(*metrics);
  metrics->add_option("--reference", reference_path, "reference lines file")->required()->check(CLI::ExistingFile);
  metrics->add_option("--test", test_path, "test lines file")->required()->check(CLI::ExistingFile);
  metrics->add_option("--json", json_path, "write the metrics here instead of stdout");

  CLI::App* render = app.add_subcommand("render", "B-mode image of a line set");
  ren_flags.attach(*render);
  render->add_option("--in", in_path, "lines file")->required()->check(CLI::ExistingFile);
  render->add_option("--out", out_path, "PGM image")->required();

  CLI::App* run = app.add_subcommand("run", "end-to-end pipeline with report and ledger");
  run_flags.attach(*run);
  run->add_flag("--check", check, "exit non-zero unless every acceptance check passes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      const RunConfig config = sim_flags.resolve();
      const Scenario scenario = make_scenario(config);
      write_channel_data(simulate_frame(scenario, config), out_path);
      return 0;
    }
    if (beamform->parsed()) {
      RunConfig config = bf_flags.resolve();
      const Selector selector = method.empty() ? config.selector : parse_selector(method);
      if (selector != Selector::time && selector != Selector::freq_full && selector != Selector::freq_reduced)
        throw std::invalid_argument("beamform takes time, freq-full or freq-reduced; use recover for sub-Nyquist");
      config.selector = selector;
      const Scenario scenario = make_scenario(config);
      const MethodResult result = process_channels(scenario, config, selector, read_channel_data(in_path));
      write_lines(result.lines, out_path);
      return 0;
    }
    if (recover->parsed()) {
      RunConfig config = rec_flags.resolve();
      config.selector = solver == "omp" ? Selector::subnyquist_omp : Selector::subnyquist_l1;
      const Scenario scenario = make_scenario(config);
      const MethodResult result = process_channels(scenario, config, config.selector, read_channel_data(in_path));
      write_lines(result.lines, out_path);
      return 0;
    }
    if (metrics->parsed()) {
      const RunConfig config = met_flags.resolve();
      const Scenario scenario = make_scenario(config);
      const std::vector<BeamformedLine> reference = read_lines(reference_path);
      const std::vector<BeamformedLine> test = read_lines(test_path);
      if (reference.size() != test.size()) throw std::invalid_argument("line sets differ in size");
      const ImageGrid reference_image =
          bmode_image(reference, scenario.setup, config.dynamic_range_db, config.image_rows, config.image_cols);
      const MethodMetrics m = evaluate(reference, reference_image, test, scenario, config);
      nlohmann::ordered_json j;
      j["nrmse"] = m.nrmse;
      j["ssim"] = m.ssim;
      j["warnings"] = m.warnings;
      if (json_path.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        std::ofstream out(json_path, std::ios::binary | std::ios::trunc);
        out << j.dump(2) << "\n";
        if (!out) throw std::runtime_error("cannot write " + json_path);
      }
      return 0;
    }
    if (render->parsed()) {
      const RunConfig config = ren_flags.resolve();
      const ImageGrid image = bmode_image(read_lines(in_path), config.setup(), config.dynamic_range_db,
                                          config.image_rows, config.image_cols);
      write_pgm(image, out_path);
      return 0;
    }
    if (run->parsed()) {
      const RunConfig config = run_flags.resolve();
      const PipelineResult result = run_pipeline(config);
      print_checks(result);
      std::cout << "outputs written to " << config.output_dir.string() << "\n";
      return (check && !result.all_passed()) ? 1 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
