#pragma once

#include "mldl/autodiff.hpp"
#include "mldl/geometry.hpp"
#include "mldl/net.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mldl::losses {

// Global layer indexing used throughout: encoder layers are 0..L (0 = input,
// L = latent). When a decoder is present its stage-k output is layer L+k, so
// the mirror of encoder layer l is layer 2L-l and the reconstruction is
// layer 2L.
struct ActivationsView {
  const net::LayeredActivations* enc = nullptr;
  const net::LayeredActivations* dec = nullptr;  // dec->x_by_layer[0] is the latent

  int encoder_layers() const { return enc->num_layers(); }
  int total_layers() const {
    return dec ? encoder_layers() + dec->num_layers() : encoder_layers();
  }
  const Matrix& layer(int g) const {
    int L = encoder_layers();
    return g <= L ? enc->x_by_layer[g] : dec->x_by_layer[g - L];
  }
};

enum class SchemeName { M1, M2, M3, M4, M5, M6, M7, M8, M9, M10, Custom };

SchemeName scheme_from_name(const std::string& name);
std::string scheme_name(SchemeName name);

/// Cross-layer weights. `alpha` keys are global layer pairs (a < b).
/// `corresponding` maps encoder layer l to the weight on pair (l, 2L-l);
/// those terms only apply when a decoder exists.
struct WeightScheme {
  SchemeName name = SchemeName::Custom;
  std::map<std::pair<int, int>, double> alpha;
  std::map<int, double> corresponding;
  // Mirror the alpha pattern onto the decoder stack when training an
  // autoencoder. Encoder-pattern schemes (M1..M6) default to true; the
  // corresponding-layer schemes (M7..M10) are complete as written.
  bool reflect_to_decoder = true;

  void validate() const;
};

/// The exact weights of schemes M1..M10 for the 5-layer encoder / mirrored
/// autoencoder. Throws for any other L.
WeightScheme make_scheme(SchemeName name, int encoder_layers);

/// All (layer pair, weight) terms a scheme induces for a model with
/// `encoder_layers` layers, with the decoder reflection and corresponding
/// pairs expanded when `has_decoder`.
std::vector<std::pair<std::pair<int, int>, double>> effective_pairs(const WeightScheme& scheme,
                                                                    int encoder_layers,
                                                                    bool has_decoder);

/// Push-away weight continuation: mu0 until start_epoch, linear decay to zero
/// at end_epoch, zero afterwards.
struct MuSchedule {
  double mu0 = 0.0;
  int start_epoch = 500;
  int end_epoch = 1000;
};

double mu_at(const MuSchedule& schedule, int epoch);

/// Per-encoder-layer reconstruction weights gamma_0..gamma_{L-1}.
struct ReconWeights {
  std::vector<double> gamma;

  static ReconWeights constant(double value, int encoder_layers);
};

/// Cliques per global layer. Training normally fixes the input-layer system
/// for every layer, which the single-element "shared" form expresses.
struct LayerCliques {
  std::vector<geometry::CliqueSet> by_layer;

  static LayerCliques shared(geometry::CliqueSet cliques);
  bool is_shared() const { return by_layer.size() == 1; }
  const geometry::CliqueSet& at(int layer) const {
    return is_shared() ? by_layer[0] : by_layer[layer];
  }
};

// Pure evaluations (the tape builders below are the training path; tests pin
// the two against each other).

/// Sum over cliques {i,j} of |d_a(i,j) - d_b(i,j)|.
double lis_pair_loss(const geometry::DistanceMatrix& a, const geometry::DistanceMatrix& b,
                     const geometry::CliqueSet& cliques);

/// Sum over the scheme's effective layer pairs of
///   alpha * lis_pair_loss(D_a, D_b, C_a u C_b)
/// with per-layer dimension-normalized distances.
double lis_loss(const ActivationsView& acts, const WeightScheme& scheme,
                const LayerCliques& cliques);

/// -sum over non-neighbor pairs (i,j) at `pairs_layer` of
///   1[d_target(i,j) < bound] * d_target(i,j).
double push_away_loss(const ActivationsView& acts, const geometry::NeighborhoodSystem& nbh,
                      int pairs_layer, int target_layer, double bound);

/// Sum over encoder layers l = 0..L-1 of gamma_l * sum_i |x_i^l - xhat_i^l|^2.
double reconstruction_loss(const net::LayeredActivations& enc_acts,
                           const net::LayeredActivations& dec_acts, const ReconWeights& gammas);

double total_enc_loss(const ActivationsView& acts, const WeightScheme& scheme,
                      const LayerCliques& cliques, const geometry::NeighborhoodSystem& nbh,
                      double mu, double bound);

double total_ae_loss(const net::LayeredActivations& enc_acts,
                     const net::LayeredActivations& dec_acts, const WeightScheme& scheme,
                     const ReconWeights& gammas, const LayerCliques& cliques,
                     const geometry::NeighborhoodSystem& nbh, double mu, double bound);

// Tape builders.

struct LossOptions {
  double mu = 0.0;
  double push_bound = 3.0;
  // Default: push acts on input-layer non-neighbors gated at the latent
  // layer. When push_all_pairs is set, one push term is added per effective
  // super-clique instead.
  bool push_all_pairs = false;
};

struct LossTerms {
  net::Tape::Var total;
  net::Tape::Var lis;
  net::Tape::Var push;
  net::Tape::Var recon;
  int gated_pairs = 0;
  long clique_terms = 0;
};

struct TapedLayers {
  std::vector<net::Tape::Var> acts;  // global layer index -> activation var
  int encoder_layers = 0;
};

TapedLayers join_taped(const net::TapedNet& enc, const net::TapedNet* dec);

/// Push non-neighbors are read from the clique set at the push source layer.
LossTerms build_loss(net::Tape& tape, const TapedLayers& layers, const WeightScheme& scheme,
                     const LayerCliques& cliques, const ReconWeights* gammas,
                     const LossOptions& options);

}  // namespace mldl::losses
