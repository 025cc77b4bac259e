#include "mldl/pointcloud.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mldl {

void PointCloud::validate() const {
  if (!points.allFinite()) {
    throw std::invalid_argument("PointCloud: non-finite coordinates");
  }
  if (labels && static_cast<int>(labels->size()) != size()) {
    throw std::invalid_argument("PointCloud: label count does not match point count");
  }
  if (params && (params->rows() != points.rows() || params->cols() != 2)) {
    throw std::invalid_argument("PointCloud: params must be M x 2");
  }
}

void save_csv(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  char buf[40];
  for (int i = 0; i < cloud.size(); ++i) {
    for (int j = 0; j < cloud.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", cloud.points(i, j));
      if (j) out << ',';
      out << buf;
    }
    if (cloud.labels) out << ',' << (*cloud.labels)[i];
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

PointCloud load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("ragged CSV: " + path.string());
    }
    rows.push_back(std::move(row));
  }
  PointCloud cloud;
  if (rows.empty()) {
    cloud.points.resize(0, 0);
    return cloud;
  }
  // A final integer-valued column written by save_csv is the label column;
  // CSV alone cannot distinguish it from an integer coordinate, so loaders
  // that need certainty should use the binary cache.
  int cols = static_cast<int>(rows.front().size());
  bool has_labels = cols >= 2;
  for (const auto& r : rows) {
    double v = r.back();
    if (v != std::floor(v)) has_labels = false;
  }
  int n = cols - (has_labels ? 1 : 0);
  cloud.points.resize(static_cast<int>(rows.size()), n);
  if (has_labels) cloud.labels.emplace(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < n; ++j) cloud.points(static_cast<int>(i), j) = rows[i][j];
    if (has_labels) (*cloud.labels)[i] = static_cast<int>(rows[i].back());
  }
  return cloud;
}

namespace {

constexpr char kMagic[7] = {'M', 'L', 'D', 'L', 'P', 'C', '1'};

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_raw(std::ifstream& in, const std::filesystem::path& path) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw IoError("truncated file: " + path.string());
  return v;
}

}  // namespace

void save_binary(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(kMagic, sizeof kMagic);
  write_raw(out, static_cast<std::uint32_t>(cloud.size()));
  write_raw(out, static_cast<std::uint32_t>(cloud.dim()));
  for (int i = 0; i < cloud.size(); ++i)
    for (int j = 0; j < cloud.dim(); ++j) write_raw(out, cloud.points(i, j));
  write_raw(out, static_cast<std::uint8_t>(cloud.labels ? 1 : 0));
  if (cloud.labels)
    for (int v : *cloud.labels) write_raw(out, static_cast<std::int32_t>(v));
  write_raw(out, static_cast<std::uint8_t>(cloud.params ? 1 : 0));
  if (cloud.params)
    for (int i = 0; i < cloud.size(); ++i)
      for (int j = 0; j < 2; ++j) write_raw(out, (*cloud.params)(i, j));
  if (!out) throw IoError("write failed: " + path.string());
}

PointCloud load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  char magic[7];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw IoError("bad magic (not an MLDLPC1 cache): " + path.string());
  }
  auto m = read_raw<std::uint32_t>(in, path);
  auto n = read_raw<std::uint32_t>(in, path);
  PointCloud cloud;
  cloud.points.resize(m, n);
  for (std::uint32_t i = 0; i < m; ++i)
    for (std::uint32_t j = 0; j < n; ++j) cloud.points(i, j) = read_raw<double>(in, path);
  if (read_raw<std::uint8_t>(in, path)) {
    cloud.labels.emplace(m);
    for (std::uint32_t i = 0; i < m; ++i) (*cloud.labels)[i] = read_raw<std::int32_t>(in, path);
  }
  if (read_raw<std::uint8_t>(in, path)) {
    cloud.params.emplace(m, 2);
    for (std::uint32_t i = 0; i < m; ++i)
      for (int j = 0; j < 2; ++j) (*cloud.params)(i, j) = read_raw<double>(in, path);
  }
  return cloud;
}

}  // namespace mldl
