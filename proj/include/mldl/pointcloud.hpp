#pragma once

#include "mldl/common.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mldl {

/// A set of M points in N-dimensional ambient space, with optional integer
/// labels, optional 2-D intrinsic (generator-parameter) coordinates, and a
/// provenance record.
struct PointCloud {
  Matrix points;  // M x N
  std::optional<std::vector<int>> labels;
  std::optional<Matrix> params;  // M x 2 intrinsic coordinates

  struct Meta {
    std::string generator;
    std::uint64_t seed = 0;
    double noise_sigma = 0.0;
  } meta;

  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }

  /// Throws std::invalid_argument if points contain non-finite entries or the
  /// label/param row counts disagree with M.
  void validate() const;
};

/// CSV with columns x0,...,x{N-1}[,label]. Data rows only, %.17g, no timestamps.
void save_csv(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud load_csv(const std::filesystem::path& path);

// Compact binary cache. Layout, little-endian:
//   magic "MLDLPC1" (7 bytes)
//   u32 M, u32 N
//   f64 points, row-major
//   u8 has_labels  [i32 x M]
//   u8 has_params  [f64 x (M*2), row-major]
void save_binary(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud load_binary(const std::filesystem::path& path);

}  // namespace mldl
