#pragma once

#include "mldl/common.hpp"

#include <vector>

namespace mldl::geometry {

/// Symmetric pairwise Euclidean distances, optionally normalized by the
/// square root of the space dimensionality.
struct DistanceMatrix {
  Matrix d;            // M x M, zero diagonal
  int dim_used = 0;    // dimensionality used for normalization
  bool normalized = false;

  int size() const { return static_cast<int>(d.rows()); }
};

DistanceMatrix pairwise_distances(const Matrix& x, bool normalize);

struct NeighborhoodSystem {
  enum class Mode { kNN, rBall };
  // neighbors[i] excludes i. kNN: exactly k entries ordered by (distance,
  // index). rBall: all j with d(i,j) < r, ordered by index.
  std::vector<std::vector<int>> neighbors;
  Mode mode = Mode::kNN;
  double param = 0.0;  // k or r
  int source_layer = 0;

  int size() const { return static_cast<int>(neighbors.size()); }
};

/// k smallest-distance indices per row, self excluded, ties broken by
/// ascending index. Requires 1 <= k <= M-1.
NeighborhoodSystem knn_neighborhood(const DistanceMatrix& d, int k);

/// neighbors[i] = { j != i : d(i,j) < r }, strict inequality. Requires r > 0.
NeighborhoodSystem rball_neighborhood(const DistanceMatrix& d, double r);

/// Unordered pairs {i, j}, i < j, unique, sorted lexicographically.
struct CliqueSet {
  std::vector<std::pair<int, int>> pairs;
  int num_points = 0;

  int size() const { return static_cast<int>(pairs.size()); }
  /// M x M boolean adjacency (diagonal false).
  std::vector<char> adjacency() const;
};

/// Pairs (i, j in N_i) of one system, deduplicated.
CliqueSet cliques_of(const NeighborhoodSystem& nbh);

/// Pairs appearing in either system.
CliqueSet clique_union(const NeighborhoodSystem& a, const NeighborhoodSystem& b);
CliqueSet clique_union(const CliqueSet& a, const CliqueSet& b);

}  // namespace mldl::geometry
