#include "mldl/datasets.hpp"

#include "mldl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace mldl::datasets {

namespace {

void check_generator_args(int n, double noise_sigma) {
  if (n < 0) throw std::invalid_argument("point count must be >= 0");
  if (noise_sigma < 0) throw std::invalid_argument("noise sigma must be >= 0");
}

void add_noise(PointCloud& cloud, double sigma, Rng& rng) {
  if (sigma <= 0) return;
  for (int i = 0; i < cloud.size(); ++i)
    for (int j = 0; j < cloud.dim(); ++j) cloud.points(i, j) += sigma * rng.normal();
}

}  // namespace

PointCloud make_swiss_roll(int n, double noise_sigma, std::uint64_t seed) {
  check_generator_args(n, noise_sigma);
  PointCloud cloud;
  cloud.points.resize(n, 3);
  cloud.params.emplace(n, 2);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    double t = rng.uniform(1.5 * M_PI, 4.5 * M_PI);
    double y = rng.uniform(0.0, 21.0);
    cloud.points(i, 0) = t * std::cos(t);
    cloud.points(i, 1) = y;
    cloud.points(i, 2) = t * std::sin(t);
    (*cloud.params)(i, 0) = t;
    (*cloud.params)(i, 1) = y;
  }
  add_noise(cloud, noise_sigma, rng);
  cloud.meta = {"swiss_roll", seed, noise_sigma};
  return cloud;
}

PointCloud make_s_curve(int n, double noise_sigma, std::uint64_t seed) {
  check_generator_args(n, noise_sigma);
  PointCloud cloud;
  cloud.points.resize(n, 3);
  cloud.params.emplace(n, 2);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    double t = rng.uniform(-1.5 * M_PI, 1.5 * M_PI);
    double y = rng.uniform(0.0, 2.0);
    double sign = t < 0 ? -1.0 : 1.0;
    cloud.points(i, 0) = std::sin(t);
    cloud.points(i, 1) = y;
    cloud.points(i, 2) = sign * (std::cos(t) - 1.0);
    (*cloud.params)(i, 0) = t;
    (*cloud.params)(i, 1) = y;
  }
  add_noise(cloud, noise_sigma, rng);
  cloud.meta = {"s_curve", seed, noise_sigma};
  return cloud;
}

SpheresSpec SpheresSpec::preset(Variant v) {
  SpheresSpec spec;
  spec.variant = v;
  spec.points_on_big = (v == Variant::Spheres10000) ? 5000 : 500;
  return spec;
}

SpheresSpec SpheresSpec::scaled(double factor) const {
  SpheresSpec spec = *this;
  spec.points_per_small = std::max(1, static_cast<int>(std::lround(points_per_small * factor)));
  spec.points_on_big = std::max(1, static_cast<int>(std::lround(points_on_big * factor)));
  return spec;
}

PointCloud make_spheres(const SpheresSpec& spec, std::uint64_t seed) {
  if (spec.n_small_spheres <= 0 || spec.points_per_small < 0 || spec.points_on_big < 0 ||
      spec.ambient_dim <= 0 || spec.small_radius <= 0 || spec.big_radius <= 0) {
    throw std::invalid_argument("spheres: counts and radii must be positive");
  }
  // Typical center norm is center_scale * sqrt(dim); the big sphere has to
  // clear that plus the small radius for the enclosure to hold.
  double typical_center_norm = spec.center_scale * std::sqrt(static_cast<double>(spec.ambient_dim));
  if (spec.big_radius <= typical_center_norm + spec.small_radius) {
    throw std::invalid_argument("spheres: big_radius too small to enclose the small spheres");
  }

  int n = spec.n_small_spheres * spec.points_per_small + spec.points_on_big;
  int d = spec.ambient_dim;
  PointCloud cloud;
  cloud.points.resize(n, d);
  cloud.labels.emplace(n);
  Rng rng(seed);

  auto unit_vector = [&](Vector& v) {
    double norm2 = 0.0;
    do {
      for (int j = 0; j < d; ++j) v[j] = rng.normal();
      norm2 = v.squaredNorm();
    } while (norm2 == 0.0);
    v /= std::sqrt(norm2);
  };

  Vector dir(d);
  int row = 0;
  for (int s = 0; s < spec.n_small_spheres; ++s) {
    Vector center(d);
    for (int j = 0; j < d; ++j) center[j] = spec.center_scale * rng.normal();
    for (int p = 0; p < spec.points_per_small; ++p, ++row) {
      unit_vector(dir);
      cloud.points.row(row) = (center + spec.small_radius * dir).transpose();
      (*cloud.labels)[row] = s;
    }
  }
  for (int p = 0; p < spec.points_on_big; ++p, ++row) {
    unit_vector(dir);
    cloud.points.row(row) = (spec.big_radius * dir).transpose();
    (*cloud.labels)[row] = spec.n_small_spheres;
  }
  cloud.meta = {spec.variant == SpheresSpec::Variant::Spheres10000 ? "spheres10000"
                                                                   : "spheres5500_5500",
                seed, 0.0};
  return cloud;
}

namespace {

std::uint32_t read_be_u32(std::ifstream& in, const std::filesystem::path& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw IoError("truncated IDX file: " + path.string());
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

}  // namespace

std::pair<PointCloud, PointCloud> load_mnist(const std::filesystem::path& images_path,
                                             const std::filesystem::path& labels_path,
                                             int n_train, int n_test, std::uint64_t seed) {
  if (n_train < 0 || n_test < 0) throw std::invalid_argument("subset sizes must be >= 0");

  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw IoError("cannot open: " + images_path.string());
  if (read_be_u32(img, images_path) != 0x00000803u) {
    throw IoError("bad magic in image file: " + images_path.string());
  }
  int n = static_cast<int>(read_be_u32(img, images_path));
  int rows = static_cast<int>(read_be_u32(img, images_path));
  int cols = static_cast<int>(read_be_u32(img, images_path));
  int dim = rows * cols;

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw IoError("cannot open: " + labels_path.string());
  if (read_be_u32(lab, labels_path) != 0x00000801u) {
    throw IoError("bad magic in label file: " + labels_path.string());
  }
  if (static_cast<int>(read_be_u32(lab, labels_path)) != n) {
    throw IoError("image/label count mismatch");
  }
  if (n_train + n_test > n) {
    throw std::invalid_argument("requested " + std::to_string(n_train + n_test) +
                                " rows but file has " + std::to_string(n));
  }

  std::vector<unsigned char> pixels(static_cast<std::size_t>(n) * dim);
  img.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!img) throw IoError("truncated IDX file: " + images_path.string());
  std::vector<unsigned char> digits(n);
  lab.read(reinterpret_cast<char*>(digits.data()), n);
  if (!lab) throw IoError("truncated IDX file: " + labels_path.string());

  // Fisher-Yates with our Rng so the split is seed-stable.
  Rng rng(seed);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }

  auto take = [&](int offset, int count) {
    PointCloud cloud;
    cloud.points.resize(count, dim);
    cloud.labels.emplace(count);
    for (int i = 0; i < count; ++i) {
      int src = order[offset + i];
      for (int j = 0; j < dim; ++j) {
        cloud.points(i, j) = pixels[static_cast<std::size_t>(src) * dim + j] / 255.0;
      }
      (*cloud.labels)[i] = digits[src];
    }
    cloud.meta = {"mnist", seed, 0.0};
    return cloud;
  };
  return {take(0, n_train), take(n_train, n_test)};
}

Shape shape_from_name(const std::string& name) {
  if (name == "diamond") return Shape::Diamond;
  if (name == "square") return Shape::Square;
  if (name == "pentagram") return Shape::Pentagram;
  if (name == "five-ring" || name == "five_ring") return Shape::FiveRing;
  throw std::invalid_argument("unknown shape: " + name);
}

std::string shape_name(Shape s) {
  switch (s) {
    case Shape::Diamond: return "diamond";
    case Shape::Square: return "square";
    case Shape::Pentagram: return "pentagram";
    case Shape::FiveRing: return "five_ring";
  }
  return "?";
}

namespace {

// Even-odd rule; vertices in order, closed implicitly.
bool point_in_polygon(const std::vector<std::array<double, 2>>& poly, double x, double y) {
  bool inside = false;
  std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    double xi = poly[i][0], yi = poly[i][1];
    double xj = poly[j][0], yj = poly[j][1];
    bool crosses = (yi > y) != (yj > y);
    if (crosses && x < (xj - xi) * (y - yi) / (yj - yi) + xi) inside = !inside;
  }
  return inside;
}

std::vector<std::array<double, 2>> pentagram_vertices(const std::array<double, 2>& c, double size) {
  // Ten-vertex outline of a five-pointed star: outer radius size/2, inner
  // radius R * cos(72) / cos(36).
  double r_out = size / 2.0;
  double r_in = r_out * std::cos(2.0 * M_PI / 5.0) / std::cos(M_PI / 5.0);
  std::vector<std::array<double, 2>> poly;
  for (int k = 0; k < 5; ++k) {
    double a_out = M_PI / 2.0 + k * 2.0 * M_PI / 5.0;
    double a_in = a_out + M_PI / 5.0;
    poly.push_back({c[0] + r_out * std::cos(a_out), c[1] + r_out * std::sin(a_out)});
    poly.push_back({c[0] + r_in * std::cos(a_in), c[1] + r_in * std::sin(a_in)});
  }
  return poly;
}

// Olympic-style layout, in units of size/6: three rings on top, two below.
constexpr std::array<std::array<double, 2>, 5> kRingCenters = {{
    {-2.2, 0.55}, {0.0, 0.55}, {2.2, 0.55}, {-1.1, -0.55}, {1.1, -0.55},
}};
constexpr double kRingOuter = 1.0;
constexpr double kRingInner = 0.62;

}  // namespace

bool shape_contains(Shape shape, const std::array<double, 2>& center, double size,
                    double u, double v) {
  if (size <= 0) return false;
  double dx = u - center[0];
  double dy = v - center[1];
  switch (shape) {
    case Shape::Square:
      return std::abs(dx) <= size / 2 && std::abs(dy) <= size / 2;
    case Shape::Diamond:
      return std::abs(dx) + std::abs(dy) <= size / 2;
    case Shape::Pentagram:
      return point_in_polygon(pentagram_vertices(center, size), u, v);
    case Shape::FiveRing: {
      double unit = size / 6.0;
      for (const auto& rc : kRingCenters) {
        double rx = dx - rc[0] * unit;
        double ry = dy - rc[1] * unit;
        double r = std::hypot(rx, ry);
        if (r >= kRingInner * unit && r <= kRingOuter * unit) return true;
      }
      return false;
    }
  }
  return false;
}

PointCloud excise_shape(const PointCloud& cloud, Shape shape,
                        const std::array<double, 2>& center, double size) {
  if (!cloud.params) {
    throw std::invalid_argument("excise_shape: cloud has no intrinsic coordinates");
  }
  const Matrix& p = *cloud.params;
  double u_min = p.col(0).minCoeff(), u_max = p.col(0).maxCoeff();
  double v_min = p.col(1).minCoeff(), v_max = p.col(1).maxCoeff();
  double u_span = u_max > u_min ? u_max - u_min : 1.0;
  double v_span = v_max > v_min ? v_max - v_min : 1.0;

  std::vector<int> keep;
  keep.reserve(cloud.size());
  for (int i = 0; i < cloud.size(); ++i) {
    double u = (p(i, 0) - u_min) / u_span;
    double v = (p(i, 1) - v_min) / v_span;
    if (!shape_contains(shape, center, size, u, v)) keep.push_back(i);
  }

  PointCloud out;
  out.points.resize(static_cast<int>(keep.size()), cloud.dim());
  if (cloud.labels) out.labels.emplace(keep.size());
  out.params.emplace(static_cast<int>(keep.size()), 2);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.points.row(static_cast<int>(i)) = cloud.points.row(keep[i]);
    if (cloud.labels) (*out.labels)[i] = (*cloud.labels)[keep[i]];
    out.params->row(static_cast<int>(i)) = p.row(keep[i]);
  }
  out.meta = cloud.meta;
  return out;
}

}  // namespace mldl::datasets
