#pragma once

#include "mldl/pointcloud.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>

namespace mldl::datasets {

/// Swiss Roll, sklearn parametrization: t ~ U[1.5pi, 4.5pi], y ~ U[0, 21],
/// point = (t cos t, y, t sin t) + N(0, sigma^2) per coordinate.
/// Intrinsic params column order is (t, y).
PointCloud make_swiss_roll(int n, double noise_sigma, std::uint64_t seed);

/// S-Curve, sklearn parametrization: t ~ U[-1.5pi, 1.5pi], y ~ U[0, 2],
/// point = (sin t, y, sign(t) * (cos t - 1)) + noise.
PointCloud make_s_curve(int n, double noise_sigma, std::uint64_t seed);

struct SpheresSpec {
  enum class Variant { Spheres10000, Spheres5500_5500 };
  Variant variant = Variant::Spheres10000;
  int n_small_spheres = 10;
  int points_per_small = 500;
  int points_on_big = 5000;  // 500 for Spheres5500_5500
  int ambient_dim = 101;
  double small_radius = 5.0;
  double big_radius = 25.0;
  double center_scale = 10.0 / std::sqrt(101.0);

  static SpheresSpec preset(Variant v);
  /// Scale the per-sphere point counts by `factor` (desk-scale reductions).
  SpheresSpec scaled(double factor) const;
};

/// One big sphere enclosing `n_small_spheres` small ones. Small-sphere centers
/// are standard-Gaussian draws scaled by center_scale; points are uniform on
/// each sphere. Labels: 0..9 small, 10 big.
PointCloud make_spheres(const SpheresSpec& spec, std::uint64_t seed);

/// Reads IDX-format image/label files (magic 0x00000803 / 0x00000801,
/// big-endian), scales pixels to [0,1], and splits into disjoint train/test
/// subsets via a seeded shuffle of all row indices.
std::pair<PointCloud, PointCloud> load_mnist(const std::filesystem::path& images_path,
                                             const std::filesystem::path& labels_path,
                                             int n_train, int n_test, std::uint64_t seed);

enum class Shape { Diamond, Square, Pentagram, FiveRing };

Shape shape_from_name(const std::string& name);
std::string shape_name(Shape s);

/// True if normalized intrinsic point (u, v) falls inside the shape.
bool shape_contains(Shape shape, const std::array<double, 2>& center, double size,
                    double u, double v);

/// Keeps the rows whose intrinsic coordinates, rescaled to [0,1]^2 by the
/// cloud's own parameter ranges, fall OUTSIDE the shape. Row order preserved.
PointCloud excise_shape(const PointCloud& cloud, Shape shape,
                        const std::array<double, 2>& center, double size);

}  // namespace mldl::datasets
