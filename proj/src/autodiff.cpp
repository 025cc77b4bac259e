#include "mldl/autodiff.hpp"

#include <cmath>

namespace mldl::net {

Matrix affine_forward(const Matrix& x, const Matrix& w, const Matrix& b) {
  if (x.cols() != w.cols() || w.rows() != b.rows() || b.cols() != 1) {
    throw std::invalid_argument("affine: shape mismatch");
  }
  Matrix y(x.rows(), w.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    y.row(i).noalias() = (w * x.row(i).transpose() + b).transpose();
  }
  return y;
}

int Tape::add(Matrix value, bool requires_grad, std::function<void()> back) {
  nodes_.push_back(Node{std::move(value), Matrix(), requires_grad, std::move(back)});
  return static_cast<int>(nodes_.size()) - 1;
}

Matrix& Tape::adj(int id) {
  Node& n = nodes_[id];
  if (n.adj.size() == 0) n.adj.setZero(n.value.rows(), n.value.cols());
  return n.adj;
}

Tape::Var Tape::constant(Matrix value) { return {add(std::move(value), false)}; }

Tape::Var Tape::param(Matrix value) { return {add(std::move(value), true)}; }

Tape::Var Tape::affine(Var x, Var w, Var b) {
  Matrix y = affine_forward(value(x), value(w), value(b));
  int xi = x.id, wi = w.id, bi = b.id;
  int id = add(std::move(y), true, [this, xi, wi, bi, id = static_cast<int>(nodes_.size())] {
    const Matrix& g = nodes_[id].adj;
    if (g.size() == 0) return;
    if (nodes_[xi].requires_grad) adj(xi).noalias() += g * nodes_[wi].value;
    adj(wi).noalias() += g.transpose() * nodes_[xi].value;
    adj(bi).noalias() += g.colwise().sum().transpose();
  });
  return {id};
}

Tape::Var Tape::leaky_relu(Var x, double slope) {
  const Matrix& in = value(x);
  Matrix y = in.unaryExpr([slope](double v) { return v >= 0 ? v : slope * v; });
  int xi = x.id;
  bool rg = needs(x);
  int id = add(std::move(y), rg, [this, xi, slope, id = static_cast<int>(nodes_.size())] {
    const Matrix& g = nodes_[id].adj;
    if (g.size() == 0) return;
    const Matrix& in = nodes_[xi].value;
    // Right-derivative at the kink: slope 1 for x == 0.
    adj(xi).array() +=
        g.array() * in.unaryExpr([slope](double v) { return v >= 0 ? 1.0 : slope; }).array();
  });
  return {id};
}

Tape::Var Tape::pairwise_distances(Var x, bool normalize) {
  const Matrix& p = value(x);
  int m = static_cast<int>(p.rows());
  double scale = normalize ? 1.0 / std::sqrt(static_cast<double>(p.cols())) : 1.0;
  Matrix d1(m, m);
  d1.setZero();
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      double dist = scale * (p.row(i) - p.row(j)).norm();
      d1(i, j) = dist;
      d1(j, i) = dist;
    }
  }
  int xi = x.id;
  bool rg = needs(x);
  int id = add(std::move(d1), rg, [this, xi, scale, id = static_cast<int>(nodes_.size())] {
    const Matrix& g = nodes_[id].adj;
    if (g.size() == 0 || !nodes_[xi].requires_grad) return;
    const Matrix& p = nodes_[xi].value;
    const Matrix& d = nodes_[id].value;
    int m = static_cast<int>(p.rows());
    // dL/dx_i = sum_j (g_ij + g_ji) * scale^2 * (x_i - x_j) / d_ij
    Matrix coupling(m, m);
    for (int i = 0; i < m; ++i) {
      coupling(i, i) = 0.0;
      for (int j = 0; j < m; ++j) {
        if (j == i) continue;
        double dist = d(i, j);
        coupling(i, j) = dist > 0 ? (g(i, j) + g(j, i)) * scale * scale / dist : 0.0;
      }
    }
    Vector row_sums = coupling.rowwise().sum();
    adj(xi).noalias() += row_sums.asDiagonal() * p - coupling * p;
  });
  return {id};
}

Tape::Var Tape::pair_distances(Var x, std::vector<std::pair<int, int>> pairs, bool normalize) {
  const Matrix& p = value(x);
  double scale = normalize ? 1.0 / std::sqrt(static_cast<double>(p.cols())) : 1.0;
  Matrix d(static_cast<int>(pairs.size()), 1);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    d(static_cast<int>(k), 0) = scale * (p.row(pairs[k].first) - p.row(pairs[k].second)).norm();
  }
  int xi = x.id;
  bool rg = needs(x);
  int id = add(std::move(d), rg,
               [this, xi, scale, pairs = std::move(pairs), id = static_cast<int>(nodes_.size())] {
                 const Matrix& g = nodes_[id].adj;
                 if (g.size() == 0 || !nodes_[xi].requires_grad) return;
                 const Matrix& p = nodes_[xi].value;
                 const Matrix& d = nodes_[id].value;
                 Matrix& gx = adj(xi);
                 for (std::size_t k = 0; k < pairs.size(); ++k) {
                   double dist = d(static_cast<int>(k), 0);
                   if (dist <= 0) continue;
                   double c = g(static_cast<int>(k), 0) * scale * scale / dist;
                   auto [i, j] = pairs[k];
                   gx.row(i) += c * (p.row(i) - p.row(j));
                   gx.row(j) -= c * (p.row(i) - p.row(j));
                 }
               });
  return {id};
}

Tape::Var Tape::sub(Var a, Var b) {
  if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols()) {
    throw std::invalid_argument("sub: shape mismatch");
  }
  int ai = a.id, bi = b.id;
  bool rg = needs(a) || needs(b);
  int id = add(value(a) - value(b), rg, [this, ai, bi, id = static_cast<int>(nodes_.size())] {
    const Matrix& g = nodes_[id].adj;
    if (g.size() == 0) return;
    if (nodes_[ai].requires_grad) adj(ai) += g;
    if (nodes_[bi].requires_grad) adj(bi) -= g;
  });
  return {id};
}

Tape::Var Tape::abs(Var a) {
  int ai = a.id;
  bool rg = needs(a);
  int id = add(value(a).cwiseAbs(), rg, [this, ai, id = static_cast<int>(nodes_.size())] {
    const Matrix& g = nodes_[id].adj;
    if (g.size() == 0 || !nodes_[ai].requires_grad) return;
    const Matrix& in = nodes_[ai].value;
    adj(ai).array() +=
        g.array() * in.unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; }).array();
  });
  return {id};
}

Tape::Var Tape::square(Var a) {
  int ai = a.id;
  bool rg = needs(a);
  int id = add(value(a).cwiseProduct(value(a)), rg,
               [this, ai, id = static_cast<int>(nodes_.size())] {
                 const Matrix& g = nodes_[id].adj;
                 if (g.size() == 0 || !nodes_[ai].requires_grad) return;
                 adj(ai).array() += 2.0 * g.array() * nodes_[ai].value.array();
               });
  return {id};
}

Tape::Var Tape::sum(Var a) {
  Matrix s(1, 1);
  s(0, 0) = value(a).sum();
  int ai = a.id;
  bool rg = needs(a);
  int id = add(std::move(s), rg, [this, ai, id = static_cast<int>(nodes_.size())] {
    const Matrix& g = nodes_[id].adj;
    if (g.size() == 0 || !nodes_[ai].requires_grad) return;
    adj(ai).array() += g(0, 0);
  });
  return {id};
}

Tape::Var Tape::push_sum(Var dist_matrix, const std::vector<char>& neighbor_adjacency,
                         double bound, int* gated_count) {
  const Matrix& d = value(dist_matrix);
  int m = static_cast<int>(d.rows());
  if (static_cast<int>(neighbor_adjacency.size()) != m * m) {
    throw std::invalid_argument("push_sum: adjacency size mismatch");
  }
  std::vector<std::pair<int, int>> gated;
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (neighbor_adjacency[static_cast<std::size_t>(i) * m + j]) continue;
      if (d(i, j) < bound) {
        gated.emplace_back(i, j);
        total += d(i, j);
      }
    }
  }
  if (gated_count) *gated_count = static_cast<int>(gated.size());
  Matrix s(1, 1);
  s(0, 0) = -total;
  int di = dist_matrix.id;
  bool rg = needs(dist_matrix);
  int id = add(std::move(s), rg,
               [this, di, gated = std::move(gated), id = static_cast<int>(nodes_.size())] {
                 const Matrix& g = nodes_[id].adj;
                 if (g.size() == 0 || !nodes_[di].requires_grad) return;
                 Matrix& gd = adj(di);
                 for (auto [i, j] : gated) gd(i, j) -= g(0, 0);
               });
  return {id};
}

Tape::Var Tape::weighted_sum(const std::vector<std::pair<double, Var>>& terms) {
  double total = 0.0;
  bool rg = false;
  for (const auto& [c, v] : terms) {
    if (value(v).size() != 1) throw std::invalid_argument("weighted_sum: non-scalar term");
    total += c * scalar(v);
    rg = rg || needs(v);
  }
  Matrix s(1, 1);
  s(0, 0) = total;
  std::vector<std::pair<double, int>> ids;
  ids.reserve(terms.size());
  for (const auto& [c, v] : terms) ids.emplace_back(c, v.id);
  int id = add(std::move(s), rg, [this, ids = std::move(ids), id = static_cast<int>(nodes_.size())] {
    const Matrix& g = nodes_[id].adj;
    if (g.size() == 0) return;
    for (auto [c, vi] : ids) {
      if (nodes_[vi].requires_grad) adj(vi)(0, 0) += c * g(0, 0);
    }
  });
  return {id};
}

void Tape::backward(Var root) {
  if (value(root).size() != 1) throw std::invalid_argument("backward: root must be a scalar");
  adj(root.id)(0, 0) += 1.0;
  for (int i = root.id; i >= 0; --i) {
    if (nodes_[i].back && nodes_[i].adj.size() != 0) nodes_[i].back();
  }
}

const Matrix& Tape::grad(Var v) {
  return adj(v.id);
}

}  // namespace mldl::net
