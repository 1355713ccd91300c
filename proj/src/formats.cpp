// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#include "fdbeam/formats.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "binary_io.hpp"

namespace fdbeam {

namespace {

constexpr char kMagic[4] = {'F', 'D', 'B', 'M'};
constexpr std::uint16_t kVersion = 1;

}  // namespace

void write_channel_data(const std::vector<ChannelData>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const ChannelData& r : records) {
    if (r.elements > std::numeric_limits<std::uint16_t>::max() || r.samples > std::numeric_limits<std::uint32_t>::max())
      throw std::invalid_argument("channel data too large for the FDBM header");
    if (r.data.size() != r.elements * r.samples) throw std::invalid_argument("channel data size does not match M x N");
    out.write(kMagic, 4);
    detail::write_u16(out, kVersion);
    detail::write_u16(out, static_cast<std::uint16_t>(r.elements));
    detail::write_u32(out, static_cast<std::uint32_t>(r.samples));
    detail::write_f64(out, r.sample_rate);
    detail::write_f64(out, r.theta);
    for (double v : r.data) detail::write_f64(out, v);
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<ChannelData> read_channel_data(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<ChannelData> records;
  while (in.peek() != std::ifstream::traits_type::eof()) {
    char magic[4];
    detail::read_exact(in, magic, 4, "magic");
    if (!std::equal(magic, magic + 4, kMagic)) throw std::runtime_error(path.string() + " is not an FDBM file");
    const std::uint16_t version = detail::read_u16(in, "version");
    if (version != kVersion) throw std::runtime_error("unsupported FDBM version " + std::to_string(version));
    const std::uint16_t m = detail::read_u16(in, "header");
    const std::uint32_t n = detail::read_u32(in, "header");
    const double fs = detail::read_f64(in, "header");
    const double theta = detail::read_f64(in, "header");
    ChannelData r(m, n, theta, fs);
    for (double& v : r.data) v = detail::read_f64(in, "samples");
    records.push_back(std::move(r));
  }
  return records;
}

void write_lines(const std::vector<BeamformedLine>& lines, const std::filesystem::path& path) {
  std::vector<ChannelData> records;
  records.reserve(lines.size());
  for (const BeamformedLine& line : lines) {
    ChannelData r(1, line.samples.size(), line.theta, line.sample_rate);
    r.data = line.samples;
    records.push_back(std::move(r));
  }
  write_channel_data(records, path);
}

std::vector<BeamformedLine> read_lines(const std::filesystem::path& path) {
  std::vector<BeamformedLine> lines;
  for (ChannelData& r : read_channel_data(path)) {
    if (r.elements != 1) throw std::runtime_error(path.string() + " holds channel data, not beamformed lines");
    lines.push_back(BeamformedLine{std::move(r.data), r.theta, r.sample_rate});
  }
  return lines;
}

}  // namespace fdbeam
