#include "mldl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mldl::geometry {

DistanceMatrix pairwise_distances(const Matrix& x, bool normalize) {
  if (!x.allFinite()) throw std::invalid_argument("pairwise_distances: non-finite input");
  int m = static_cast<int>(x.rows());
  int n = static_cast<int>(x.cols());
  DistanceMatrix out;
  out.dim_used = n;
  out.normalized = normalize;
  out.d.setZero(m, m);
  double scale = normalize ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0;
  // Direct row differences; the Gram-matrix trick loses precision on close
  // pairs, which the nearly-isometric losses then amplify.
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      double dist = scale * (x.row(i) - x.row(j)).norm();
      out.d(i, j) = dist;
      out.d(j, i) = dist;
    }
  }
  return out;
}

NeighborhoodSystem knn_neighborhood(const DistanceMatrix& d, int k) {
  int m = d.size();
  if (k < 1 || k > m - 1) {
    throw std::invalid_argument("knn_neighborhood: k must be in [1, M-1]");
  }
  NeighborhoodSystem nbh;
  nbh.mode = NeighborhoodSystem::Mode::kNN;
  nbh.param = k;
  nbh.neighbors.resize(m);
  std::vector<int> idx(m);
  for (int i = 0; i < m; ++i) {
    idx.resize(m);
    std::iota(idx.begin(), idx.end(), 0);
    idx.erase(idx.begin() + i);
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
      double da = d.d(i, a), db = d.d(i, b);
      return da < db || (da == db && a < b);
    });
    nbh.neighbors[i].assign(idx.begin(), idx.begin() + k);
  }
  return nbh;
}

NeighborhoodSystem rball_neighborhood(const DistanceMatrix& d, double r) {
  if (!(r > 0)) throw std::invalid_argument("rball_neighborhood: r must be > 0");
  int m = d.size();
  NeighborhoodSystem nbh;
  nbh.mode = NeighborhoodSystem::Mode::rBall;
  nbh.param = r;
  nbh.neighbors.resize(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (j != i && d.d(i, j) < r) nbh.neighbors[i].push_back(j);
    }
  }
  return nbh;
}

std::vector<char> CliqueSet::adjacency() const {
  std::vector<char> adj(static_cast<std::size_t>(num_points) * num_points, 0);
  for (auto [i, j] : pairs) {
    adj[static_cast<std::size_t>(i) * num_points + j] = 1;
    adj[static_cast<std::size_t>(j) * num_points + i] = 1;
  }
  return adj;
}

namespace {

CliqueSet dedup(std::vector<std::pair<int, int>> pairs, int m) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return CliqueSet{std::move(pairs), m};
}

}  // namespace

CliqueSet cliques_of(const NeighborhoodSystem& nbh) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < nbh.size(); ++i) {
    for (int j : nbh.neighbors[i]) {
      pairs.emplace_back(std::min(i, j), std::max(i, j));
    }
  }
  return dedup(std::move(pairs), nbh.size());
}

CliqueSet clique_union(const NeighborhoodSystem& a, const NeighborhoodSystem& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("clique_union: neighborhood systems have different sizes");
  }
  return clique_union(cliques_of(a), cliques_of(b));
}

CliqueSet clique_union(const CliqueSet& a, const CliqueSet& b) {
  if (a.num_points != b.num_points) {
    throw std::invalid_argument("clique_union: clique sets cover different point counts");
  }
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(a.pairs.size() + b.pairs.size());
  std::merge(a.pairs.begin(), a.pairs.end(), b.pairs.begin(), b.pairs.end(),
             std::back_inserter(pairs));
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return CliqueSet{std::move(pairs), a.num_points};
}

}  // namespace mldl::geometry
