#pragma once

#include "mldl/common.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace mldl::net {

// Reverse-mode tape over dense matrices. Nodes are appended in evaluation
// order (values are computed eagerly), so the reverse sweep is a simple
// backwards walk. Scalars are 1x1 matrices.
//
// Supported primitives: affine layers, leaky-relu, pairwise / pair-list
// distances, elementwise sub/abs/square, sums, the indicator-gated push-away
// sum (gate frozen at forward time), and weighted sums of scalars. These are
// exactly the pieces the training objectives are built from.
class Tape {
 public:
  struct Var {
    int id = -1;
  };

  /// Leaf without gradient (inputs, precomputed distance matrices).
  Var constant(Matrix value);
  /// Leaf with gradient (network weights and biases).
  Var param(Matrix value);

  /// x: M x in, w: out x in, b: out x 1  ->  M x out. Row-wise products, so
  /// a row's output never depends on which other rows share the batch.
  Var affine(Var x, Var w, Var b);
  Var leaky_relu(Var x, double slope);

  /// M x n points -> full M x M distance matrix, optionally / sqrt(n).
  Var pairwise_distances(Var x, bool normalize);
  /// Distances only for the listed (i, j) pairs -> P x 1.
  Var pair_distances(Var x, std::vector<std::pair<int, int>> pairs, bool normalize);

  Var sub(Var a, Var b);
  Var abs(Var a);
  Var square(Var a);
  Var sum(Var a);

  /// -sum over { i<j : !neighbor_adjacency[i*M+j] and d(i,j) < bound } of
  /// d(i,j). The gate is evaluated on the current values and treated as a
  /// constant in the backward pass. Returns the scalar and reports how many
  /// pairs were gated.
  Var push_sum(Var dist_matrix, const std::vector<char>& neighbor_adjacency, double bound,
               int* gated_count = nullptr);

  /// sum of coefficient * scalar-var.
  Var weighted_sum(const std::vector<std::pair<double, Var>>& terms);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const { return nodes_[v.id].value(0, 0); }

  /// Seeds d(root)/d(root) = 1 and runs the reverse sweep. Root must be 1x1.
  void backward(Var root);

  /// Accumulated adjoint; zero-shaped like the value if the node was never
  /// touched by the sweep.
  const Matrix& grad(Var v);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix adj;
    bool requires_grad = false;
    std::function<void()> back;
  };

  int add(Matrix value, bool requires_grad, std::function<void()> back = {});
  bool needs(Var v) const { return nodes_[v.id].requires_grad; }
  Matrix& adj(int id);

  std::vector<Node> nodes_;
};

/// Shared forward kernel for affine layers; also used outside the tape so the
/// inference path and the training path cannot drift apart.
Matrix affine_forward(const Matrix& x, const Matrix& w, const Matrix& b);

}  // namespace mldl::net
