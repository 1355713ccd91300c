// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The fdbeam Authors

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fdbeam/geometry.hpp"
#include "fdbeam/time_beamformer.hpp"

namespace fdbeam {

/// Grayscale cartesian image, row-major, values in [0, 1]. Row 0 is the shallowest depth.
struct ImageGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> pixels;
  double depth = 0.0;    // m, extent of the rows
  double lateral = 0.0;  // m, full width of the columns
  std::vector<double> angles;

  double at(std::size_t r, std::size_t c) const { return pixels[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return pixels[r * cols + c]; }
  /// Throws std::invalid_argument when sizes disagree or a pixel is outside [0, 1].
  void validate() const;
};

/// Magnitude of the analytic signal (negative frequencies zeroed, positive ones doubled).
std::vector<double> envelope(std::span<const double> line);

/// clamp(1 + 20 log10(x / max) / DR, 0, 1) with max over all lines of the frame. An all-zero frame maps to zeros.
std::vector<std::vector<double>> log_compress(const std::vector<std::vector<double>>& frame, double dynamic_range_db);
std::vector<double> log_compress(std::span<const double> envelope, double dynamic_range_db);

/// Polar (range sample, angle) to cartesian with bilinear interpolation; outside the sector is 0.
///
/// Column x and row z sample [-lateral/2, lateral/2] x [0, depth] inclusive, lateral = 2 depth sin(max|theta|).
/// Throws std::invalid_argument for fewer than 2 angles, a non-monotone angle set or a grid below 16 x 16.
ImageGrid scan_convert(const std::vector<std::vector<double>>& lines, std::span<const double> angles,
                       const ImagingSetup& setup, std::size_t rows, std::size_t cols);

/// Envelope, frame log-compression and scan conversion of RF lines.
ImageGrid bmode_image(const std::vector<BeamformedLine>& lines, const ImagingSetup& setup, double dynamic_range_db,
                      std::size_t rows, std::size_t cols);

/// RMSE(reference, test) / (max - min of reference) for one line. Returns NaN for a flat reference.
double line_nrmse(std::span<const double> reference, std::span<const double> test);

/// Mean of line_nrmse over lines whose reference is not flat; flat lines are skipped and named in `warnings`.
/// Throws std::invalid_argument on a size mismatch or when every reference line is flat.
double nrmse(const std::vector<std::vector<double>>& reference, const std::vector<std::vector<double>>& test,
             std::vector<std::string>* warnings = nullptr);

/// Mean SSIM over all window x window positions (stride 1, population moments), dynamic range L = 1.
double ssim(const ImageGrid& a, const ImageGrid& b, std::size_t window = 8, double k1 = 0.01, double k2 = 0.03);

/// Binary 8-bit graymap (P5).
void write_pgm(const ImageGrid& image, const std::filesystem::path& path);
ImageGrid read_pgm(const std::filesystem::path& path);

}  // namespace fdbeam
