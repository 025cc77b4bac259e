#pragma once

#include "mldl/config_io.hpp"
#include "mldl/losses.hpp"
#include "mldl/metrics.hpp"
#include "mldl/net.hpp"
#include "mldl/pointcloud.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mldl::trainer {

struct NeighborhoodMode {
  enum class Kind { kNN, rBall } kind = Kind::rBall;
  double value = 0.23;  // k or r
};

struct TrainConfig {
  net::Architecture arch;
  std::optional<net::Architecture> decoder_arch;  // mirror of arch when absent
  losses::WeightScheme scheme;
  NeighborhoodMode nbh_mode;
  double push_bound = 3.0;
  bool push_all_pairs = false;
  losses::ReconWeights gammas;  // autoencoder only
  losses::MuSchedule mu;
  double lr = 1e-3;
  int epochs = 1500;
  std::uint64_t seed = 0;
  // Input coordinates are divided by this before training; the distances the
  // r-ball and bound thresholds see are in these units.
  double input_scale = 1.0;
  // Recompute per-layer neighborhoods from the current activations each
  // epoch instead of fixing the input-layer system.
  bool evolving_neighborhoods = false;

  std::string preset_name;  // provenance only

  void validate() const;
};

/// Named hyperparameter presets: swiss-roll, s-curve, mnist, spheres5500,
/// spheres10000 (each also with an "-ae" suffix for the autoencoder).
TrainConfig preset(const std::string& name);
std::vector<std::string> preset_names();

struct EpochLog {
  int epoch = 0;
  double lis = 0;
  double push = 0;
  double recon = 0;
  double mu = 0;
  double total = 0;
  double lis_per_clique = 0;
  long gated_pairs = 0;
};

struct TrainedModel {
  TrainConfig config;
  net::NetworkParams encoder;
  std::optional<net::NetworkParams> decoder;
  std::vector<EpochLog> history;
  net::LayeredActivations final_enc_acts;  // on the (scaled) training data
  std::optional<net::LayeredActivations> final_dec_acts;
  geometry::NeighborhoodSystem train_nbh;  // input-layer system
  Matrix train_input;                      // scaled training coordinates

  bool has_decoder() const { return decoder.has_value(); }
  int encoder_layers() const { return config.arch.num_layers(); }
};

/// Full-batch training of the encoder under LIS + mu * push.
TrainedModel train_ml_enc(const TrainConfig& config, const PointCloud& data);

/// Full-batch training of encoder + mirrored decoder under
/// LIS + reconstruction + mu * push.
TrainedModel train_ml_ae(const TrainConfig& config, const PointCloud& data);

/// Pure forward pass of raw-coordinate points through the trained encoder
/// (the model's input scaling is applied internally).
Matrix encode(const TrainedModel& model, const PointCloud& data);
Matrix encode(const TrainedModel& model, const Matrix& raw_points);

enum class Sampler { UniformBbox, KdeLatent };

Sampler sampler_from_name(const std::string& name);

/// Draws latent samples near the training embedding and decodes them.
/// UniformBbox: uniform over the embedding's bounding box, rejection-filtered
/// to a union of balls around the embedded points (alpha-shape stand-in).
/// KdeLatent: Gaussian kernel samples centered on embedded points.
/// Returned coordinates are in the raw (unscaled) input units.
PointCloud generate(const TrainedModel& model, int n, std::uint64_t seed, Sampler sampler);

/// Metric evaluation of a trained model at the conventional layer pair:
/// (0, L) for encoders, (0, 2L) plus MRE for autoencoders. MPE is filled from
/// the 3-D layer(s) when the architecture has them.
metrics::MetricReport evaluate(const TrainedModel& model, const metrics::MetricConfig& mconfig);

// Model directory layout: encoder.net [, decoder.net], config.ini,
// loss_history.csv, embedding.bin.
void save_model(const TrainedModel& model, const std::filesystem::path& dir);

/// Reloads enough of a saved model for encode() and generate(); training-time
/// activations, history, and neighborhoods are not persisted.
TrainedModel load_model(const std::filesystem::path& dir);

ConfigText config_to_text(const TrainConfig& config);
TrainConfig config_from_text(const ConfigText& text);

}  // namespace mldl::trainer
