// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fdbeam/pipeline.hpp"
#include "test_support.hpp"

using namespace fdbeam;

namespace {

RunConfig small_config(const std::filesystem::path& out, Selector selector) {
  RunConfig c;
  c.duration = 32e-6;
  c.lines = 8;
  c.sector_half_width_deg = 30.0;
  c.elements = 16;
  c.scene.strong_per_line = 5;
  c.scene.speckle_per_line = 100;
  c.scene.time_margin = 2e-6;
  c.subset_size = 40;
  c.subset_bands = 4;
  c.image_rows = 64;
  c.image_cols = 64;
  c.selector = selector;
  c.output_dir = out;
  c.threads = 2;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("repeated runs are bit identical") {
    test::TempDir dir("pipe");
    for (Selector s : {Selector::freq_reduced, Selector::subnyquist_l1}) {
      const RunConfig c = small_config(dir.path / selector_name(s), s);
      const PipelineResult first = run_pipeline(c);
      std::vector<std::string> bytes;
      for (const auto& p : first.outputs) bytes.push_back(slurp(p));
      const PipelineResult second = run_pipeline(c);
      REQUIRE(second.outputs == first.outputs);
      for (std::size_t i = 0; i < bytes.size(); ++i) CHECK(slurp(second.outputs[i]) == bytes[i]);
      CHECK(second.report == first.report);
      CHECK(std::filesystem::exists(c.output_dir / "baseline.pgm"));
      CHECK(std::filesystem::exists(c.output_dir / (selector_name(s) + ".pgm")));
      CHECK(std::filesystem::exists(c.output_dir / "ledger.json"));
    }
  }

  TEST_CASE("thread count does not change the lines") {
    RunConfig c = small_config("unused", Selector::freq_full);
    const Scenario scenario = make_scenario(c);
    const Selector sel[] = {Selector::freq_full, Selector::subnyquist_omp};
    c.threads = 1;
    const FrameResult a = run_frame(scenario, c, sel);
    c.threads = 3;
    const FrameResult b = run_frame(scenario, c, sel);
    for (std::size_t m = 0; m < 2; ++m) {
      for (std::size_t j = 0; j < a.methods[m].lines.size(); ++j)
        CHECK(a.methods[m].lines[j].samples == b.methods[m].lines[j].samples);
    }
    const MethodResult direct = process_channels(scenario, c, Selector::freq_full, simulate_frame(scenario, c));
    for (std::size_t j = 0; j < direct.lines.size(); ++j)
      CHECK(direct.lines[j].samples == a.methods[0].lines[j].samples);
  }

  TEST_CASE("report carries metrics, ledger and solver diagnostics") {
    test::TempDir dir("report");
    const RunConfig c = small_config(dir.path, Selector::subnyquist_l1);
    const PipelineResult r = run_pipeline(c);
    const auto report = nlohmann::json::parse(r.report);
    CHECK(report["selector"] == "subnyquist-l1");
    REQUIRE(report["methods"].size() == 2);
    const auto& l1 = report["methods"][0];
    CHECK(l1["ledger"]["sampled_real_samples"] == 60);
    CHECK(l1["lines"].size() == 8);
    CHECK(l1["lines"][0]["solver"] == "l1");
    CHECK(report["methods"][1]["method"] == "subnyquist-omp");
    const auto ledger = nlohmann::json::parse(slurp(dir.path / "ledger.json"));
    CHECK(ledger[0]["method"] == "time");
    CHECK(ledger[0]["sampled_real_samples"] == 512);
    CHECK(ledger[1]["sampling_reduction"].get<double>() == doctest::Approx(512.0 / 60.0));
    CHECK_FALSE(r.checks.empty());
  }

  TEST_CASE("time baseline is its own reference") {
    test::TempDir dir("time");
    const PipelineResult r = run_pipeline(small_config(dir.path, Selector::time));
    CHECK(r.all_passed());
  }

  TEST_CASE("a failing stage is named and leaves nothing behind") {
    test::TempDir dir("fail");
    RunConfig c = small_config(dir.path / "a", Selector::subnyquist_l1);
    c.subset_size = 5000;
    try {
      run_pipeline(c);
      FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
      CHECK((e.stage() == "validate" || e.stage() == "setup"));
    }
    CHECK_FALSE(std::filesystem::exists(c.output_dir / "baseline.pgm"));

    c = small_config(dir.path / "b", Selector::freq_reduced);
    std::filesystem::create_directories(c.output_dir / "report.json");
    try {
      run_pipeline(c);
      FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
      CHECK(e.stage() == "write");
    }
    CHECK_FALSE(std::filesystem::exists(c.output_dir / "baseline.pgm"));
    CHECK_FALSE(std::filesystem::exists(c.output_dir / "freq-reduced.pgm"));
  }
}
