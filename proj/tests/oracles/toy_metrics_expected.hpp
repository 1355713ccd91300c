// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors
// Generated by tests/oracles/toy_metrics.py; do not edit.
#pragma once

namespace fdbeam::oracle {

struct ToyMetricCase {
  const char* name;
  double nrmse;
  double ssim;
};

inline constexpr ToyMetricCase kToyMetricCases[] = {
    {"ramp_bump", 0.099436891104358246, 0.99442556178933351},
    {"checker_inverted", 1.0000000000000000, -0.99640646835695748},
    {"modular_patterns", 0.61618952212893428, 0.098147169966162499},
};

}  // namespace fdbeam::oracle
