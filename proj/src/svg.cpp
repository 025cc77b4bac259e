#include "mldl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace mldl::svg {

namespace {

struct Ramp {
  double lo, hi;
  // Blue -> cyan -> yellow -> red.
  std::string operator()(double v) const {
    double t = hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.5;
    auto channel = [&](double a, double b) { return static_cast<int>(std::lround(a + t * (b - a))); };
    int r, g, b;
    if (t < 0.5) {
      double u = t * 2;
      r = static_cast<int>(std::lround(40 + u * 180));
      g = static_cast<int>(std::lround(90 + u * 130));
      b = static_cast<int>(std::lround(200 - u * 80));
    } else {
      double u = (t - 0.5) * 2;
      r = static_cast<int>(std::lround(220 + u * 20));
      g = static_cast<int>(std::lround(220 - u * 170));
      b = static_cast<int>(std::lround(120 - u * 80));
    }
    (void)channel;
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
  }
};

void draw_panel(std::ofstream& out, const Matrix& points, int cx, int cy,
                const std::optional<Vector>& color, double x0, double y0, double panel_w,
                double panel_size) {
  double min_x = points.col(cx).minCoeff(), max_x = points.col(cx).maxCoeff();
  double min_y = points.col(cy).minCoeff(), max_y = points.col(cy).maxCoeff();
  double span = std::max({max_x - min_x, max_y - min_y, 1e-12});
  double pad = 0.05 * span;
  span += 2 * pad;
  Ramp ramp{0, 1};
  if (color) {
    ramp.lo = color->minCoeff();
    ramp.hi = color->maxCoeff();
  }
  out << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << panel_w << "\" height=\""
      << panel_size << "\" fill=\"white\" stroke=\"#cccccc\"/>\n";
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double px = x0 + (points(i, cx) - min_x + pad) / span * panel_w;
    double py = y0 + panel_size - (points(i, cy) - min_y + pad) / span * panel_size;
    std::string fill = color ? ramp((*color)[static_cast<int>(i)]) : std::string("#555555");
    out << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"2\" fill=\"" << fill
        << "\" fill-opacity=\"0.75\"/>\n";
  }
}

}  // namespace

void save_scatter_2d(const Matrix& points, const std::optional<Vector>& color,
                     const std::filesystem::path& path) {
  if (points.cols() != 2) throw std::invalid_argument("save_scatter_2d: need 2-D points");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
         "viewBox=\"0 0 640 640\">\n";
  if (points.rows() > 0) draw_panel(out, points, 0, 1, color, 10, 10, 620, 620);
  out << "</svg>\n";
  if (!out) throw IoError("write failed: " + path.string());
}

void save_scatter_3d(const Matrix& points, const std::optional<Vector>& color,
                     const std::filesystem::path& path) {
  if (points.cols() != 3) throw std::invalid_argument("save_scatter_3d: need 3-D points");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"340\" "
         "viewBox=\"0 0 960 340\">\n";
  const int axes[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  const char* names[3] = {"xy", "xz", "yz"};
  for (int p = 0; p < 3; ++p) {
    double x0 = 10 + p * 315;
    if (points.rows() > 0) {
      draw_panel(out, points, axes[p][0], axes[p][1], color, x0, 30, 300, 300);
    }
    out << "<text x=\"" << x0 + 140 << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
        << names[p] << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace mldl::svg
