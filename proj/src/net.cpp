#include "mldl/net.hpp"

#include "mldl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace mldl::net {

void Architecture::validate() const {
  if (layer_dims.size() < 2) throw std::invalid_argument("architecture needs >= 2 layers");
  for (int d : layer_dims) {
    if (d < 1) throw std::invalid_argument("architecture layer dims must be >= 1");
  }
}

Architecture Architecture::mirrored() const {
  Architecture rev = *this;
  std::reverse(rev.layer_dims.begin(), rev.layer_dims.end());
  return rev;
}

NetworkParams init_params(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  Rng rng(seed);
  NetworkParams params;
  for (int l = 0; l < arch.num_layers(); ++l) {
    int in = arch.layer_dims[l];
    int out = arch.layer_dims[l + 1];
    double bound = std::sqrt(6.0 / in);
    Matrix w(out, in);
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < in; ++j) w(i, j) = rng.uniform(-bound, bound);
    params.weights.push_back(std::move(w));
    params.biases.push_back(Matrix::Zero(out, 1));
  }
  return params;
}

LayeredActivations forward_all(const Architecture& arch, const NetworkParams& params,
                               const Matrix& x) {
  if (x.cols() != arch.input_dim()) {
    throw std::invalid_argument("forward_all: input dim mismatch");
  }
  LayeredActivations acts;
  acts.x_by_layer.push_back(x);
  for (int l = 0; l < arch.num_layers(); ++l) {
    Matrix z = affine_forward(acts.x_by_layer.back(), params.weights[l], params.biases[l]);
    if (l + 1 < arch.num_layers()) {
      double slope = arch.leaky_slope;
      z = z.unaryExpr([slope](double v) { return v >= 0 ? v : slope * v; });
    }
    acts.x_by_layer.push_back(std::move(z));
  }
  return acts;
}

TapedNet forward_on_tape(Tape& tape, const Architecture& arch, const NetworkParams& params,
                         Tape::Var input) {
  TapedNet taped;
  taped.acts.push_back(input);
  for (int l = 0; l < arch.num_layers(); ++l) {
    taped.weights.push_back(tape.param(params.weights[l]));
    taped.biases.push_back(tape.param(params.biases[l]));
    Tape::Var z = tape.affine(taped.acts.back(), taped.weights[l], taped.biases[l]);
    if (l + 1 < arch.num_layers()) z = tape.leaky_relu(z, arch.leaky_slope);
    taped.acts.push_back(z);
  }
  return taped;
}

void collect_grads(Tape& tape, const TapedNet& taped, std::vector<Matrix>* weight_grads,
                   std::vector<Matrix>* bias_grads) {
  weight_grads->clear();
  bias_grads->clear();
  for (std::size_t l = 0; l < taped.weights.size(); ++l) {
    weight_grads->push_back(tape.grad(taped.weights[l]));
    bias_grads->push_back(tape.grad(taped.biases[l]));
  }
}

namespace {

constexpr char kMagic[8] = {'M', 'L', 'D', 'L', 'N', 'E', 'T', '1'};

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::ifstream& in, const std::filesystem::path& path) {
  std::uint32_t v;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) throw IoError("truncated checkpoint: " + path.string());
  return v;
}

}  // namespace

void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(kMagic, sizeof kMagic);
  write_u32(out, static_cast<std::uint32_t>(params.num_layers()));
  for (int l = 0; l < params.num_layers(); ++l) {
    write_u32(out, static_cast<std::uint32_t>(params.weights[l].rows()));
    write_u32(out, static_cast<std::uint32_t>(params.weights[l].cols()));
  }
  for (int l = 0; l < params.num_layers(); ++l) {
    const Matrix& w = params.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        out.write(reinterpret_cast<const char*>(&w(i, j)), 8);
    const Matrix& b = params.biases[l];
    for (Eigen::Index i = 0; i < b.rows(); ++i)
      out.write(reinterpret_cast<const char*>(&b(i, 0)), 8);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

NetworkParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw IoError("bad magic (not an MLDLNET1 checkpoint): " + path.string());
  }
  auto n_layers = read_u32(in, path);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> dims;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    auto out_dim = read_u32(in, path);
    auto in_dim = read_u32(in, path);
    dims.emplace_back(out_dim, in_dim);
  }
  NetworkParams params;
  auto read_f64 = [&] {
    double v;
    in.read(reinterpret_cast<char*>(&v), 8);
    if (!in) throw IoError("truncated checkpoint: " + path.string());
    return v;
  };
  for (auto [out_dim, in_dim] : dims) {
    Matrix w(out_dim, in_dim);
    for (std::uint32_t i = 0; i < out_dim; ++i)
      for (std::uint32_t j = 0; j < in_dim; ++j) w(i, j) = read_f64();
    Matrix b(out_dim, 1);
    for (std::uint32_t i = 0; i < out_dim; ++i) b(i, 0) = read_f64();
    params.weights.push_back(std::move(w));
    params.biases.push_back(std::move(b));
  }
  return params;
}

Adam::Adam(const NetworkParams& shape_like, AdamConfig config) : config_(config) {
  for (int l = 0; l < shape_like.num_layers(); ++l) {
    m_w_.push_back(Matrix::Zero(shape_like.weights[l].rows(), shape_like.weights[l].cols()));
    v_w_.push_back(m_w_.back());
    m_b_.push_back(Matrix::Zero(shape_like.biases[l].rows(), 1));
    v_b_.push_back(m_b_.back());
  }
}

void Adam::update(Matrix& p, const Matrix& g, Matrix& m, Matrix& v, double corr1, double corr2) {
  if (p.rows() != g.rows() || p.cols() != g.cols()) {
    throw std::invalid_argument("adam: gradient shape mismatch");
  }
  m = config_.beta1 * m + (1.0 - config_.beta1) * g;
  v = config_.beta2 * v + (1.0 - config_.beta2) * g.cwiseProduct(g);
  p.array() -= config_.lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + config_.eps);
}

void Adam::step(NetworkParams& params, const std::vector<Matrix>& weight_grads,
                const std::vector<Matrix>& bias_grads) {
  if (static_cast<int>(weight_grads.size()) != params.num_layers() ||
      static_cast<int>(bias_grads.size()) != params.num_layers()) {
    throw std::invalid_argument("adam: layer count mismatch");
  }
  ++t_;
  double corr1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  double corr2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (int l = 0; l < params.num_layers(); ++l) {
    update(params.weights[l], weight_grads[l], m_w_[l], v_w_[l], corr1, corr2);
    update(params.biases[l], bias_grads[l], m_b_[l], v_b_[l], corr1, corr2);
  }
}

}  // namespace mldl::net
