// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#pragma once

#include <filesystem>
#include <vector>

#include "fdbeam/phantom.hpp"
#include "fdbeam/time_beamformer.hpp"

namespace fdbeam {

/// Channel-data records: "FDBM", u16 version, u16 M, u32 N, f64 f_s, f64 theta, then M x N f64,
/// all little-endian. A file holds one or more records back to back; a line set is stored with M = 1.
void write_channel_data(const std::vector<ChannelData>& records, const std::filesystem::path& path);
std::vector<ChannelData> read_channel_data(const std::filesystem::path& path);

void write_lines(const std::vector<BeamformedLine>& lines, const std::filesystem::path& path);
/// Throws std::runtime_error when a record has more than one row.
std::vector<BeamformedLine> read_lines(const std::filesystem::path& path);

}  // namespace fdbeam
