#pragma once

#include "mldl/autodiff.hpp"
#include "mldl/common.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace mldl::net {

/// Dense MLP shape. Hidden layers use LeakyReLU; the last layer is affine
/// only, so embeddings and reconstructions are unbounded.
struct Architecture {
  std::vector<int> layer_dims;  // [in, h1, ..., out], >= 2 entries
  double leaky_slope = 0.01;

  int num_layers() const { return static_cast<int>(layer_dims.size()) - 1; }
  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }
  void validate() const;
  /// Decoder shape: the layer dims reversed.
  Architecture mirrored() const;
};

struct NetworkParams {
  std::vector<Matrix> weights;  // out x in
  std::vector<Matrix> biases;   // out x 1

  int num_layers() const { return static_cast<int>(weights.size()); }
};

/// Kaiming-uniform-style init: W ~ U(-b, b) with b = sqrt(6 / fan_in),
/// biases zero. Deterministic per seed.
NetworkParams init_params(const Architecture& arch, std::uint64_t seed);

struct LayeredActivations {
  std::vector<Matrix> x_by_layer;  // index 0 = the input itself

  int num_layers() const { return static_cast<int>(x_by_layer.size()) - 1; }
  const Matrix& latent() const { return x_by_layer.back(); }
};

/// Plain forward pass returning every layer's activations.
LayeredActivations forward_all(const Architecture& arch, const NetworkParams& params,
                               const Matrix& x);

/// Forward pass recorded on a tape: weights/biases become parameter leaves.
struct TapedNet {
  std::vector<Tape::Var> weights;
  std::vector<Tape::Var> biases;
  std::vector<Tape::Var> acts;  // acts[0] = input var
};
TapedNet forward_on_tape(Tape& tape, const Architecture& arch, const NetworkParams& params,
                         Tape::Var input);

/// Extract d(loss)/d(params) from a tape after backward().
void collect_grads(Tape& tape, const TapedNet& taped, std::vector<Matrix>* weight_grads,
                   std::vector<Matrix>* bias_grads);

// Parameter checkpoint. Layout, little-endian:
//   magic "MLDLNET1", u32 layer count, per layer u32 out and u32 in,
//   then per layer f64 weights (row-major) followed by f64 biases.
void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_checkpoint(const std::filesystem::path& path);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Standard Adam with bias correction; moments live in this record.
class Adam {
 public:
  Adam(const NetworkParams& shape_like, AdamConfig config);
  void step(NetworkParams& params, const std::vector<Matrix>& weight_grads,
            const std::vector<Matrix>& bias_grads);
  long steps_taken() const { return t_; }

 private:
  void update(Matrix& p, const Matrix& g, Matrix& m, Matrix& v, double corr1, double corr2);

  AdamConfig config_;
  std::vector<Matrix> m_w_, v_w_, m_b_, v_b_;
  long t_ = 0;
};

}  // namespace mldl::net
