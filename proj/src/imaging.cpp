// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#include "fdbeam/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fdbeam/fft.hpp"

namespace fdbeam {

void ImageGrid::validate() const {
  if (pixels.size() != rows * cols) throw std::invalid_argument("image pixel count does not match its dimensions");
  for (double v : pixels) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("image pixel outside [0, 1]");
  }
}

std::vector<double> envelope(std::span<const double> line) {
  const std::size_t n = line.size();
  if (n == 0) return {};
  const RealFft& rfft = real_fft(n);
  std::vector<cplx> half(rfft.bins());
  rfft.forward(line, half);
  std::vector<cplx> analytic(n);
  for (std::size_t k = 0; k < half.size(); ++k) {
    const bool edge = k == 0 || 2 * k == n;
    analytic[k] = edge ? half[k] : 2.0 * half[k];
  }
  std::vector<cplx> time(n);
  complex_fft(n).inverse(analytic, time);
  std::vector<double> out(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::abs(time[i]) * scale;
  return out;
}

namespace {

double compress(double x, double peak, double dynamic_range_db) {
  if (peak <= 0.0 || x <= 0.0) return 0.0;
  const double v = 1.0 + 20.0 * std::log10(x / peak) / dynamic_range_db;
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace

std::vector<std::vector<double>> log_compress(const std::vector<std::vector<double>>& frame, double dynamic_range_db) {
  if (!(dynamic_range_db > 0.0)) throw std::invalid_argument("dynamic range must be positive");
  double peak = 0.0;
  for (const auto& line : frame) {
    for (double v : line) peak = std::max(peak, v);
  }
  std::vector<std::vector<double>> out(frame.size());
  for (std::size_t j = 0; j < frame.size(); ++j) {
    out[j].resize(frame[j].size());
    for (std::size_t i = 0; i < frame[j].size(); ++i) out[j][i] = compress(frame[j][i], peak, dynamic_range_db);
  }
  return out;
}

std::vector<double> log_compress(std::span<const double> env, double dynamic_range_db) {
  std::vector<std::vector<double>> frame(1, std::vector<double>(env.begin(), env.end()));
  return log_compress(frame, dynamic_range_db).front();
}

ImageGrid scan_convert(const std::vector<std::vector<double>>& lines, std::span<const double> angles,
                       const ImagingSetup& setup, std::size_t rows, std::size_t cols) {
  if (angles.size() < 2) throw std::invalid_argument("scan conversion needs at least 2 angles");
  if (lines.size() != angles.size()) throw std::invalid_argument("one line per angle is required");
  if (rows < 16 || cols < 16) throw std::invalid_argument("image grid must be at least 16 x 16");
  const bool increasing = angles[1] > angles[0];
  for (std::size_t j = 1; j < angles.size(); ++j) {
    if ((angles[j] > angles[j - 1]) != increasing || angles[j] == angles[j - 1])
      throw std::invalid_argument("angle set must be strictly monotone");
  }
  const std::size_t samples = lines.front().size();
  for (const auto& line : lines) {
    if (line.size() != samples) throw std::invalid_argument("lines must have equal length");
  }

  ImageGrid image;
  image.rows = rows;
  image.cols = cols;
  image.depth = setup.depth;
  double widest = 0.0;
  for (double a : angles) widest = std::max(widest, std::abs(a));
  image.lateral = 2.0 * setup.depth * std::sin(widest);
  image.angles.assign(angles.begin(), angles.end());
  image.pixels.assign(rows * cols, 0.0);

  const double lo = std::min(angles.front(), angles.back());
  const double hi = std::max(angles.front(), angles.back());
  const double samples_per_meter = 2.0 * setup.sample_rate / setup.speed_of_sound;
  const double half_width = 0.5 * image.lateral;
  for (std::size_t r = 0; r < rows; ++r) {
    const double z = setup.depth * static_cast<double>(r) / static_cast<double>(rows - 1);
    for (std::size_t c = 0; c < cols; ++c) {
      // symmetric about the center column, so mirrored columns get exactly negated x
      const double x = half_width * (2.0 * static_cast<double>(c) - static_cast<double>(cols - 1)) /
                       static_cast<double>(cols - 1);
      const double range = std::hypot(x, z);
      const double phi = std::atan2(x, z);
      if (phi < lo || phi > hi) continue;
      const double s = range * samples_per_meter;
      if (s > static_cast<double>(samples - 1)) continue;

      // bracketing angles
      std::size_t j = 0;
      while (j + 2 < angles.size() && (increasing ? angles[j + 1] <= phi : angles[j + 1] >= phi)) ++j;
      const double wa = (phi - angles[j]) / (angles[j + 1] - angles[j]);
      const std::size_t i0 = std::min(static_cast<std::size_t>(s), samples - 1);
      const std::size_t i1 = std::min(i0 + 1, samples - 1);
      const double ws = s - static_cast<double>(i0);
      const double v0 = (1.0 - ws) * lines[j][i0] + ws * lines[j][i1];
      const double v1 = (1.0 - ws) * lines[j + 1][i0] + ws * lines[j + 1][i1];
      image.at(r, c) = std::clamp((1.0 - wa) * v0 + wa * v1, 0.0, 1.0);
    }
  }
  return image;
}

ImageGrid bmode_image(const std::vector<BeamformedLine>& lines, const ImagingSetup& setup, double dynamic_range_db,
                      std::size_t rows, std::size_t cols) {
  std::vector<std::vector<double>> envelopes;
  std::vector<double> angles;
  envelopes.reserve(lines.size());
  for (const auto& line : lines) {
    envelopes.push_back(envelope(line.samples));
    angles.push_back(line.theta);
  }
  return scan_convert(log_compress(envelopes, dynamic_range_db), angles, setup, rows, cols);
}

double line_nrmse(std::span<const double> reference, std::span<const double> test) {
  if (reference.size() != test.size() || reference.empty()) throw std::invalid_argument("line lengths differ or are zero");
  double sum = 0.0;
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - test[i];
    sum += d * d;
    hi = std::max(hi, reference[i]);
    lo = std::min(lo, reference[i]);
  }
  if (!(hi > lo)) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(sum / static_cast<double>(reference.size())) / (hi - lo);
}

double nrmse(const std::vector<std::vector<double>>& reference, const std::vector<std::vector<double>>& test,
             std::vector<std::string>* warnings) {
  if (reference.size() != test.size()) throw std::invalid_argument("reference and test have different line counts");
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t j = 0; j < reference.size(); ++j) {
    const double v = line_nrmse(reference[j], test[j]);
    if (std::isnan(v)) {
      if (warnings) warnings->push_back("line " + std::to_string(j) + " has a flat reference and was skipped");
      continue;
    }
    sum += v;
    ++used;
  }
  if (used == 0) throw std::invalid_argument("every reference line is flat");
  return sum / static_cast<double>(used);
}

double ssim(const ImageGrid& a, const ImageGrid& b, std::size_t window, double k1, double k2) {
  if (a.rows != b.rows || a.cols != b.cols) throw std::invalid_argument("SSIM needs images of equal size");
  if (window == 0 || window > a.rows || window > a.cols) throw std::invalid_argument("SSIM window does not fit the image");
  if (a.pixels.size() != a.rows * a.cols || b.pixels.size() != b.rows * b.cols)
    throw std::invalid_argument("image pixel count does not match its dimensions");
  const double c1 = (k1 * 1.0) * (k1 * 1.0);
  const double c2 = (k2 * 1.0) * (k2 * 1.0);
  const double count = static_cast<double>(window * window);
  double total = 0.0;
  std::size_t positions = 0;
  for (std::size_t r = 0; r + window <= a.rows; ++r) {
    for (std::size_t c = 0; c + window <= a.cols; ++c) {
      double sa = 0.0, sb = 0.0;
      for (std::size_t i = 0; i < window; ++i) {
        for (std::size_t j = 0; j < window; ++j) {
          sa += a.at(r + i, c + j);
          sb += b.at(r + i, c + j);
        }
      }
      const double ma = sa / count;
      const double mb = sb / count;
      double va = 0.0, vb = 0.0, cov = 0.0;
      for (std::size_t i = 0; i < window; ++i) {
        for (std::size_t j = 0; j < window; ++j) {
          const double da = a.at(r + i, c + j) - ma;
          const double db = b.at(r + i, c + j) - mb;
          va += da * da;
          vb += db * db;
          cov += da * db;
        }
      }
      va /= count;
      vb /= count;
      cov /= count;
      total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++positions;
    }
  }
  return total / static_cast<double>(positions);
}

void write_pgm(const ImageGrid& image, const std::filesystem::path& path) {
  if (image.pixels.size() != image.rows * image.cols) throw std::invalid_argument("image pixel count does not match its dimensions");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "P5\n" << image.cols << ' ' << image.rows << "\n255\n";
  std::vector<unsigned char> bytes(image.pixels.size());
  for (std::size_t i = 0; i < bytes.size(); ++i)
    bytes[i] = static_cast<unsigned char>(std::lround(std::clamp(image.pixels[i], 0.0, 1.0) * 255.0));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

namespace {

// next header token, skipping whitespace and comments
std::string pgm_token(std::istream& in) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  return token;
}

}  // namespace

ImageGrid read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  if (pgm_token(in) != "P5") throw std::runtime_error(path.string() + " is not a binary PGM");
  ImageGrid image;
  try {
    image.cols = std::stoul(pgm_token(in));
    image.rows = std::stoul(pgm_token(in));
    const unsigned long maxval = std::stoul(pgm_token(in));
    if (maxval == 0 || maxval > 255) throw std::runtime_error("only 8-bit PGM is supported");
    std::vector<unsigned char> bytes(image.rows * image.cols);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) throw std::runtime_error("truncated PGM data");
    image.pixels.resize(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) image.pixels[i] = bytes[i] / static_cast<double>(maxval);
  } catch (const std::logic_error&) {
    throw std::runtime_error("malformed PGM header in " + path.string());
  }
  return image;
}

}  // namespace fdbeam
