#include "mldl/losses.hpp"

#include <algorithm>
#include <cmath>

namespace mldl::losses {

SchemeName scheme_from_name(const std::string& name) {
  for (int i = 0; i < 10; ++i) {
    if (name == "M" + std::to_string(i + 1)) return static_cast<SchemeName>(i);
  }
  if (name == "custom") return SchemeName::Custom;
  throw std::invalid_argument("unknown scheme: " + name);
}

std::string scheme_name(SchemeName name) {
  if (name == SchemeName::Custom) return "custom";
  return "M" + std::to_string(static_cast<int>(name) + 1);
}

void WeightScheme::validate() const {
  bool any_nonzero = false;
  auto check = [&](double w) {
    if (w < 0) throw std::invalid_argument("scheme weights must be >= 0");
    any_nonzero = any_nonzero || w > 0;
  };
  for (const auto& [pair, w] : alpha) {
    if (pair.first >= pair.second || pair.first < 0) {
      throw std::invalid_argument("scheme pair must satisfy 0 <= l < l'");
    }
    check(w);
  }
  for (const auto& [l, w] : corresponding) {
    if (l < 0) throw std::invalid_argument("corresponding layer must be >= 0");
    check(w);
  }
  if (!any_nonzero) throw std::invalid_argument("scheme needs at least one nonzero weight");
}

WeightScheme make_scheme(SchemeName name, int encoder_layers) {
  if (name == SchemeName::Custom) {
    throw std::invalid_argument("custom schemes are built by hand, not by name");
  }
  if (encoder_layers != 5) {
    throw std::invalid_argument("schemes M1..M10 are defined for the 5-layer encoder");
  }
  WeightScheme s;
  s.name = name;
  switch (name) {
    case SchemeName::M1:
      s.alpha[{0, 5}] = 1.0;
      break;
    case SchemeName::M2:
      for (int l = 0; l < 5; ++l) s.alpha[{l, l + 1}] = 2.0 * (l + 1) / 30.0;
      break;
    case SchemeName::M3:
      for (int l = 1; l < 5; ++l) s.alpha[{l, 5}] = 2.0 * l / 30.0;
      s.alpha[{0, 5}] = 10.0 / 30.0;
      break;
    case SchemeName::M4:
      for (int l = 1; l <= 5; ++l) s.alpha[{0, l}] = 2.0 * l / 30.0;
      break;
    case SchemeName::M5:
      for (int l = 1; l <= 5; ++l) s.alpha[{0, l}] = 1.0 / 5.0;
      break;
    case SchemeName::M6:
      for (int l = 1; l <= 5; ++l) s.alpha[{0, l}] = 2.0 * (6 - l) / 30.0;
      break;
    case SchemeName::M7:
      s.alpha[{0, 5}] = 1.0;
      s.reflect_to_decoder = false;
      break;
    case SchemeName::M8:
      s.alpha[{0, 5}] = 1.0;
      for (int l = 0; l < 5; ++l) s.corresponding[l] = 2.0 * (l + 1) / 30.0;
      s.reflect_to_decoder = false;
      break;
    case SchemeName::M9:
      s.alpha[{0, 5}] = 1.0;
      for (int l = 0; l < 5; ++l) s.corresponding[l] = 1.0 / 5.0;
      s.reflect_to_decoder = false;
      break;
    case SchemeName::M10:
      s.alpha[{0, 5}] = 1.0;
      for (int l = 0; l < 5; ++l) s.corresponding[l] = 2.0 * (5 - l) / 30.0;
      s.reflect_to_decoder = false;
      break;
    case SchemeName::Custom:
      break;
  }
  s.validate();
  return s;
}

std::vector<std::pair<std::pair<int, int>, double>> effective_pairs(const WeightScheme& scheme,
                                                                    int encoder_layers,
                                                                    bool has_decoder) {
  scheme.validate();
  int L = encoder_layers;
  int max_layer = has_decoder ? 2 * L : L;
  std::map<std::pair<int, int>, double> merged;
  auto insert = [&](std::pair<int, int> pair, double w) {
    if (pair.second > max_layer) {
      throw std::invalid_argument("scheme references layer " + std::to_string(pair.second) +
                                  " beyond last layer " + std::to_string(max_layer));
    }
    merged[pair] += w;
  };
  for (const auto& [pair, w] : scheme.alpha) {
    if (w == 0) continue;
    insert(pair, w);
    if (has_decoder && scheme.reflect_to_decoder) {
      insert({2 * L - pair.second, 2 * L - pair.first}, w);
    }
  }
  if (has_decoder) {
    for (const auto& [l, w] : scheme.corresponding) {
      if (w == 0) continue;
      if (l >= L) throw std::invalid_argument("corresponding layer must be < L");
      insert({l, 2 * L - l}, w);
    }
  }
  return {merged.begin(), merged.end()};
}

double mu_at(const MuSchedule& schedule, int epoch) {
  if (schedule.start_epoch > schedule.end_epoch) {
    throw std::invalid_argument("mu schedule: start_epoch must be <= end_epoch");
  }
  if (schedule.mu0 < 0) throw std::invalid_argument("mu schedule: mu0 must be >= 0");
  if (epoch < schedule.start_epoch) return schedule.mu0;
  if (epoch >= schedule.end_epoch) return 0.0;
  double span = schedule.end_epoch - schedule.start_epoch;
  return schedule.mu0 * (schedule.end_epoch - epoch) / span;
}

ReconWeights ReconWeights::constant(double value, int encoder_layers) {
  ReconWeights w;
  w.gamma.assign(encoder_layers, value);
  return w;
}

LayerCliques LayerCliques::shared(geometry::CliqueSet cliques) {
  LayerCliques c;
  c.by_layer.push_back(std::move(cliques));
  return c;
}

double lis_pair_loss(const geometry::DistanceMatrix& a, const geometry::DistanceMatrix& b,
                     const geometry::CliqueSet& cliques) {
  if (a.size() != b.size()) throw std::invalid_argument("lis_pair_loss: size mismatch");
  double total = 0.0;
  for (auto [i, j] : cliques.pairs) total += std::abs(a.d(i, j) - b.d(i, j));
  return total;
}

namespace {

geometry::CliqueSet union_for(const LayerCliques& cliques, int a, int b) {
  if (cliques.is_shared()) return cliques.at(0);
  return geometry::clique_union(cliques.at(a), cliques.at(b));
}

}  // namespace

double lis_loss(const ActivationsView& acts, const WeightScheme& scheme,
                const LayerCliques& cliques) {
  double total = 0.0;
  for (const auto& [pair, alpha] : effective_pairs(scheme, acts.encoder_layers(),
                                                   acts.dec != nullptr)) {
    auto da = geometry::pairwise_distances(acts.layer(pair.first), true);
    auto db = geometry::pairwise_distances(acts.layer(pair.second), true);
    total += alpha * lis_pair_loss(da, db, union_for(cliques, pair.first, pair.second));
  }
  return total;
}

double push_away_loss(const ActivationsView& acts, const geometry::NeighborhoodSystem& nbh,
                      int pairs_layer, int target_layer, double bound) {
  if (!(bound > 0)) throw std::invalid_argument("push_away_loss: bound must be > 0");
  (void)pairs_layer;  // the neighborhood system passed in is the one at pairs_layer
  auto adjacency = geometry::cliques_of(nbh).adjacency();
  auto d = geometry::pairwise_distances(acts.layer(target_layer), true);
  int m = d.size();
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (adjacency[static_cast<std::size_t>(i) * m + j]) continue;
      if (d.d(i, j) < bound) total -= d.d(i, j);
    }
  }
  return total;
}

double reconstruction_loss(const net::LayeredActivations& enc_acts,
                           const net::LayeredActivations& dec_acts, const ReconWeights& gammas) {
  int L = enc_acts.num_layers();
  if (static_cast<int>(gammas.gamma.size()) != L) {
    throw std::invalid_argument("reconstruction_loss: need one gamma per encoder layer 0..L-1");
  }
  double total = 0.0;
  for (int l = 0; l < L; ++l) {
    if (gammas.gamma[l] == 0) continue;
    const Matrix& x = enc_acts.x_by_layer[l];
    const Matrix& xhat = dec_acts.x_by_layer[L - l];
    if (x.rows() != xhat.rows() || x.cols() != xhat.cols()) {
      throw std::invalid_argument("reconstruction_loss: layer " + std::to_string(l) +
                                  " dims do not mirror");
    }
    total += gammas.gamma[l] * (x - xhat).squaredNorm();
  }
  return total;
}

double total_enc_loss(const ActivationsView& acts, const WeightScheme& scheme,
                      const LayerCliques& cliques, const geometry::NeighborhoodSystem& nbh,
                      double mu, double bound) {
  double lis = lis_loss(acts, scheme, cliques);
  double push = mu != 0 ? push_away_loss(acts, nbh, 0, acts.encoder_layers(), bound) : 0.0;
  return lis + mu * push;
}

double total_ae_loss(const net::LayeredActivations& enc_acts,
                     const net::LayeredActivations& dec_acts, const WeightScheme& scheme,
                     const ReconWeights& gammas, const LayerCliques& cliques,
                     const geometry::NeighborhoodSystem& nbh, double mu, double bound) {
  ActivationsView acts{&enc_acts, &dec_acts};
  double lis = lis_loss(acts, scheme, cliques);
  double recon = reconstruction_loss(enc_acts, dec_acts, gammas);
  double push = mu != 0 ? push_away_loss(acts, nbh, 0, acts.encoder_layers(), bound) : 0.0;
  return lis + recon + mu * push;
}

TapedLayers join_taped(const net::TapedNet& enc, const net::TapedNet* dec) {
  TapedLayers layers;
  layers.acts = enc.acts;
  layers.encoder_layers = static_cast<int>(enc.acts.size()) - 1;
  if (dec) {
    // dec->acts[0] is the latent var again; skip the duplicate.
    layers.acts.insert(layers.acts.end(), dec->acts.begin() + 1, dec->acts.end());
  }
  return layers;
}

LossTerms build_loss(net::Tape& tape, const TapedLayers& layers, const WeightScheme& scheme,
                     const LayerCliques& cliques, const ReconWeights* gammas,
                     const LossOptions& options) {
  using Var = net::Tape::Var;
  int L = layers.encoder_layers;
  bool has_decoder = static_cast<int>(layers.acts.size()) - 1 > L;
  auto pairs = effective_pairs(scheme, L, has_decoder);

  LossTerms terms;

  // LIS: per layer pair, distances on the clique union only.
  std::vector<std::pair<double, Var>> lis_parts;
  std::map<std::pair<int, long>, Var> pair_dist_cache;  // (layer, clique set identity)
  for (const auto& [pair, alpha] : pairs) {
    geometry::CliqueSet uni = union_for(cliques, pair.first, pair.second);
    long clique_id = cliques.is_shared() ? 0 : (static_cast<long>(pair.first) << 20) + pair.second;
    terms.clique_terms += uni.size();
    auto dist_of = [&](int layer) {
      auto key = std::make_pair(layer, clique_id);
      auto it = pair_dist_cache.find(key);
      if (it != pair_dist_cache.end()) return it->second;
      Var v = tape.pair_distances(layers.acts[layer], uni.pairs, true);
      pair_dist_cache.emplace(key, v);
      return v;
    };
    Var da = dist_of(pair.first);
    Var db = dist_of(pair.second);
    lis_parts.emplace_back(alpha, tape.sum(tape.abs(tape.sub(da, db))));
  }
  terms.lis = tape.weighted_sum(lis_parts);

  // Push-away: input-layer non-neighbors gated at the latent layer by
  // default, or one term per super-clique in all-pairs mode.
  std::vector<std::pair<double, Var>> push_parts;
  if (options.mu != 0) {
    auto add_push = [&](int source_layer, int target_layer) {
      auto adjacency = cliques.at(source_layer).adjacency();
      Var d_full = tape.pairwise_distances(layers.acts[target_layer], true);
      int gated = 0;
      push_parts.emplace_back(1.0, tape.push_sum(d_full, adjacency, options.push_bound, &gated));
      terms.gated_pairs += gated;
    };
    if (options.push_all_pairs) {
      for (const auto& [pair, alpha] : pairs) add_push(pair.first, pair.second);
    } else {
      add_push(0, L);
    }
  }
  terms.push = tape.weighted_sum(push_parts);

  // Reconstruction between mirrored layers.
  std::vector<std::pair<double, Var>> recon_parts;
  if (gammas && has_decoder) {
    if (static_cast<int>(gammas->gamma.size()) != L) {
      throw std::invalid_argument("build_loss: need one gamma per encoder layer 0..L-1");
    }
    for (int l = 0; l < L; ++l) {
      if (gammas->gamma[l] == 0) continue;
      Var diff = tape.sub(layers.acts[l], layers.acts[2 * L - l]);
      recon_parts.emplace_back(gammas->gamma[l], tape.sum(tape.square(diff)));
    }
  }
  terms.recon = tape.weighted_sum(recon_parts);

  terms.total = tape.weighted_sum(
      {{1.0, terms.lis}, {options.mu, terms.push}, {1.0, terms.recon}});
  return terms;
}

}  // namespace mldl::losses
