#include "mldl/trainer.hpp"

#include "mldl/config_io.hpp"
#include "mldl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <iostream>
#include <sstream>

namespace mldl::trainer {

namespace {

// Decoder parameters draw from their own stream.
constexpr std::uint64_t kDecoderSeedSalt = 0x632be59bd9b4e019ull;

}  // namespace

void TrainConfig::validate() const {
  arch.validate();
  if (decoder_arch) {
    decoder_arch->validate();
    if (decoder_arch->input_dim() != arch.output_dim() ||
        decoder_arch->output_dim() != arch.input_dim()) {
      throw std::invalid_argument("decoder architecture must invert the encoder");
    }
  }
  scheme.validate();
  if (!(lr > 0)) throw std::invalid_argument("lr must be > 0");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (!(input_scale > 0)) throw std::invalid_argument("input_scale must be > 0");
  if (!(push_bound > 0)) throw std::invalid_argument("push bound must be > 0");
  if (nbh_mode.kind == NeighborhoodMode::Kind::rBall && !(nbh_mode.value > 0)) {
    throw std::invalid_argument("r-ball radius must be > 0");
  }
  if (nbh_mode.kind == NeighborhoodMode::Kind::kNN && nbh_mode.value < 1) {
    throw std::invalid_argument("k-NN neighborhood needs k >= 1");
  }
  if (epochs < mu.end_epoch && mu.mu0 > 0) {
    std::cerr << "[mldl] warning: epochs (" << epochs << ") end before the mu schedule ("
              << mu.end_epoch << "); the push-away term never fully anneals\n";
  }
}

TrainConfig preset(const std::string& name) {
  TrainConfig c;
  c.preset_name = name;
  auto base = name;
  bool ae = false;
  if (base.size() > 3 && base.substr(base.size() - 3) == "-ae") {
    ae = true;
    base = base.substr(0, base.size() - 3);
  }
  if (base == "swiss-roll" || base == "s-curve") {
    c.arch.layer_dims = {3, 100, 100, 100, 3, 2};
    c.nbh_mode = {NeighborhoodMode::Kind::rBall, 0.23};
    c.push_bound = 3.0;
    c.mu = {0.2, 500, 1000};
    c.gammas = losses::ReconWeights::constant(1.0, 5);
    c.scheme = losses::make_scheme(ae ? losses::SchemeName::M7 : losses::SchemeName::M1, 5);
    // The r-ball radius applies to dimension-normalized distances of
    // roughly unit-scale data; raw Swiss Roll coordinates span ~[-14, 21]
    // and are brought to the S-Curve's scale here.
    c.input_scale = base == "swiss-roll" ? 10.0 : 1.0;
  } else if (base == "mnist") {
    c.arch.layer_dims = {784, 1000, 500, 250, 100, 2};
    c.nbh_mode = {NeighborhoodMode::Kind::kNN, 5};
    c.push_bound = 2.0;
    c.mu = {1.0, 500, 1000};
    c.gammas = losses::ReconWeights::constant(200.0, 5);
    c.scheme = losses::make_scheme(ae ? losses::SchemeName::M7 : losses::SchemeName::M1, 5);
  } else if (base == "spheres5500" || base == "spheres10000") {
    c.arch.layer_dims =
        base == "spheres5500" ? std::vector<int>{101, 50, 25, 2} : std::vector<int>{101, 90, 80, 70, 2};
    c.nbh_mode = {NeighborhoodMode::Kind::kNN, 15};
    c.push_bound = 3.0;
    c.mu = {0.0, 500, 1000};
    int L = c.arch.num_layers();
    c.gammas = losses::ReconWeights::constant(0.0, L);
    c.scheme.name = losses::SchemeName::Custom;
    c.scheme.alpha[{0, L}] = 1.0;
    c.scheme.reflect_to_decoder = false;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  c.lr = 1e-3;
  c.epochs = 1500;
  if (ae) c.decoder_arch = c.arch.mirrored();
  return c;
}

std::vector<std::string> preset_names() {
  return {"swiss-roll", "swiss-roll-ae", "s-curve", "s-curve-ae",
          "mnist",      "mnist-ae",      "spheres5500", "spheres5500-ae",
          "spheres10000", "spheres10000-ae"};
}

namespace {

geometry::NeighborhoodSystem build_neighborhoods(const geometry::DistanceMatrix& d,
                                                 const NeighborhoodMode& mode) {
  if (mode.kind == NeighborhoodMode::Kind::kNN) {
    return geometry::knn_neighborhood(d, static_cast<int>(mode.value));
  }
  return geometry::rball_neighborhood(d, mode.value);
}

TrainedModel train_impl(const TrainConfig& config, const PointCloud& data, bool with_decoder) {
  config.validate();
  data.validate();
  if (data.dim() != config.arch.input_dim()) {
    throw std::invalid_argument("training data dimension " + std::to_string(data.dim()) +
                                " does not match architecture input " +
                                std::to_string(config.arch.input_dim()));
  }

  TrainedModel model;
  model.config = config;
  model.train_input = data.points / config.input_scale;

  auto d_input = geometry::pairwise_distances(model.train_input, true);
  model.train_nbh = build_neighborhoods(d_input, config.nbh_mode);
  auto input_cliques = geometry::cliques_of(model.train_nbh);
  if (input_cliques.size() == 0) {
    throw std::invalid_argument("neighborhood system has no cliques; widen r or raise k");
  }
  auto shared_cliques = losses::LayerCliques::shared(input_cliques);

  net::Architecture dec_arch;
  model.encoder = net::init_params(config.arch, config.seed);
  if (with_decoder) {
    dec_arch = config.decoder_arch ? *config.decoder_arch : config.arch.mirrored();
    model.decoder = net::init_params(dec_arch, config.seed ^ kDecoderSeedSalt);
  }

  net::Adam enc_opt(model.encoder, {config.lr});
  std::optional<net::Adam> dec_opt;
  if (with_decoder) dec_opt.emplace(*model.decoder, net::AdamConfig{config.lr});

  int L = config.arch.num_layers();
  std::vector<Matrix> wg, bg;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double mu = losses::mu_at(config.mu, epoch);

    net::Tape tape;
    auto input_var = tape.constant(model.train_input);
    auto enc = net::forward_on_tape(tape, config.arch, model.encoder, input_var);
    std::optional<net::TapedNet> dec;
    if (with_decoder) {
      dec.emplace(net::forward_on_tape(tape, dec_arch, *model.decoder, enc.acts.back()));
    }
    auto layers = losses::join_taped(enc, with_decoder ? &*dec : nullptr);

    losses::LayerCliques cliques = shared_cliques;
    if (config.evolving_neighborhoods) {
      cliques.by_layer.assign(layers.acts.size(), geometry::CliqueSet{});
      for (std::size_t g = 0; g < layers.acts.size(); ++g) {
        auto d_layer = geometry::pairwise_distances(tape.value(layers.acts[g]), true);
        cliques.by_layer[g] = geometry::cliques_of(build_neighborhoods(d_layer, config.nbh_mode));
      }
    }

    losses::LossOptions options;
    options.mu = mu;
    options.push_bound = config.push_bound;
    options.push_all_pairs = config.push_all_pairs;
    auto terms = losses::build_loss(tape, layers, config.scheme, cliques,
                                    with_decoder ? &config.gammas : nullptr, options);

    EpochLog log;
    log.epoch = epoch;
    log.lis = tape.scalar(terms.lis);
    log.push = tape.scalar(terms.push);
    log.recon = tape.scalar(terms.recon);
    log.mu = mu;
    log.total = tape.scalar(terms.total);
    log.lis_per_clique = terms.clique_terms > 0 ? log.lis / terms.clique_terms : 0.0;
    log.gated_pairs = terms.gated_pairs;
    if (!std::isfinite(log.total)) {
      std::ostringstream os;
      os << "training diverged at epoch " << epoch << ": lis=" << log.lis << " push=" << log.push
         << " recon=" << log.recon << " mu=" << mu;
      throw DivergenceError(os.str());
    }
    model.history.push_back(log);

    tape.backward(terms.total);
    net::collect_grads(tape, enc, &wg, &bg);
    enc_opt.step(model.encoder, wg, bg);
    if (with_decoder) {
      net::collect_grads(tape, *dec, &wg, &bg);
      dec_opt->step(*model.decoder, wg, bg);
    }
  }

  model.final_enc_acts = net::forward_all(config.arch, model.encoder, model.train_input);
  if (with_decoder) {
    model.final_dec_acts =
        net::forward_all(dec_arch, *model.decoder, model.final_enc_acts.x_by_layer[L]);
  }
  return model;
}

}  // namespace

TrainedModel train_ml_enc(const TrainConfig& config, const PointCloud& data) {
  return train_impl(config, data, false);
}

TrainedModel train_ml_ae(const TrainConfig& config, const PointCloud& data) {
  return train_impl(config, data, true);
}

Matrix encode(const TrainedModel& model, const Matrix& raw_points) {
  Matrix scaled = raw_points / model.config.input_scale;
  return net::forward_all(model.config.arch, model.encoder, scaled).x_by_layer.back();
}

Matrix encode(const TrainedModel& model, const PointCloud& data) {
  return encode(model, data.points);
}

Sampler sampler_from_name(const std::string& name) {
  if (name == "uniform-bbox" || name == "uniform_bbox") return Sampler::UniformBbox;
  if (name == "kde-latent" || name == "kde_latent") return Sampler::KdeLatent;
  throw std::invalid_argument("unknown sampler: " + name);
}

namespace {

double mean_nn_distance(const Matrix& e) {
  int m = static_cast<int>(e.rows());
  if (m < 2) throw std::invalid_argument("embedding too small to sample around");
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      best = std::min(best, (e.row(i) - e.row(j)).norm());
    }
    total += best;
  }
  return total / m;
}

}  // namespace

PointCloud generate(const TrainedModel& model, int n, std::uint64_t seed, Sampler sampler) {
  if (!model.has_decoder()) throw std::invalid_argument("generate: model has no decoder");
  if (n < 0) throw std::invalid_argument("generate: n must be >= 0");
  const Matrix& e = model.final_enc_acts.latent();
  int dim = static_cast<int>(e.cols());

  Matrix latents(n, dim);
  Rng rng(seed);
  if (n > 0) {
    double spacing = mean_nn_distance(e);
    if (sampler == Sampler::UniformBbox) {
      Vector lo = e.colwise().minCoeff();
      Vector hi = e.colwise().maxCoeff();
      // Union of balls around the embedded points stands in for the
      // embedding's alpha shape.
      double radius = 2.0 * spacing;
      long attempts = 0;
      long max_attempts = 10000L * std::max(n, 1);
      int accepted = 0;
      Vector candidate(dim);
      while (accepted < n) {
        if (++attempts > max_attempts) {
          throw std::runtime_error("generate: rejection sampling stalled");
        }
        for (int j = 0; j < dim; ++j) candidate[j] = rng.uniform(lo[j], hi[j]);
        bool near = false;
        for (int i = 0; i < e.rows() && !near; ++i) {
          near = (e.row(i).transpose() - candidate).norm() <= radius;
        }
        if (near) latents.row(accepted++) = candidate.transpose();
      }
    } else {
      for (int i = 0; i < n; ++i) {
        int pick = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(e.rows()));
        for (int j = 0; j < dim; ++j) latents(i, j) = e(pick, j) + spacing * rng.normal();
      }
    }
  }

  net::Architecture dec_arch =
      model.config.decoder_arch ? *model.config.decoder_arch : model.config.arch.mirrored();
  Matrix decoded = net::forward_all(dec_arch, *model.decoder, latents).x_by_layer.back();

  PointCloud out;
  out.points = decoded * model.config.input_scale;
  out.params.emplace(latents);  // keep the latent draws as intrinsic coordinates
  out.meta = {"generated", seed, 0.0};
  return out;
}

metrics::MetricReport evaluate(const TrainedModel& model, const metrics::MetricConfig& mconfig) {
  int L = model.encoder_layers();
  auto d_in = geometry::pairwise_distances(model.train_input, true);

  metrics::MetricReport report;
  if (!model.has_decoder()) {
    auto d_lat = geometry::pairwise_distances(model.final_enc_acts.latent(), true);
    report = metrics::compute_report(d_in, d_lat, model.train_nbh, mconfig, {0, L});
    const Matrix& before_latent = model.final_enc_acts.x_by_layer[L - 1];
    if (before_latent.cols() == 3) report.mpe = metrics::mpe(before_latent);
  } else {
    const Matrix& recon = model.final_dec_acts->x_by_layer.back();
    auto d_out = geometry::pairwise_distances(recon, true);
    report = metrics::compute_report(d_in, d_out, model.train_nbh, mconfig, {0, 2 * L});
    report.mre = metrics::mre(model.train_input, recon);
    const Matrix& enc3 = model.final_enc_acts.x_by_layer[L - 1];
    const Matrix& dec3 = model.final_dec_acts->x_by_layer[1];
    if (enc3.cols() == 3 && dec3.cols() == 3) {
      report.mpe = 0.5 * (metrics::mpe(enc3) + metrics::mpe(dec3));
    }
  }
  return report;
}

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::string join_doubles(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  return os.str();
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stoi(cell));
  return out;
}

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

}  // namespace

ConfigText config_to_text(const TrainConfig& c) {
  ConfigText t;
  t.set("architecture", "dims", join_ints(c.arch.layer_dims));
  t.set("architecture", "leaky_slope", c.arch.leaky_slope);
  if (c.decoder_arch) t.set("architecture", "decoder_dims", join_ints(c.decoder_arch->layer_dims));
  t.set("scheme", "name", losses::scheme_name(c.scheme.name));
  {
    std::ostringstream alpha;
    alpha.precision(17);
    bool first = true;
    for (const auto& [pair, w] : c.scheme.alpha) {
      if (!first) alpha << ';';
      alpha << pair.first << '-' << pair.second << ':' << w;
      first = false;
    }
    t.set("scheme", "alpha", alpha.str());
    std::ostringstream corr;
    corr.precision(17);
    first = true;
    for (const auto& [l, w] : c.scheme.corresponding) {
      if (!first) corr << ';';
      corr << l << ':' << w;
      first = false;
    }
    t.set("scheme", "corresponding", corr.str());
    t.set("scheme", "reflect_to_decoder", static_cast<long>(c.scheme.reflect_to_decoder));
  }
  t.set("neighborhood", "kind",
        c.nbh_mode.kind == NeighborhoodMode::Kind::kNN ? std::string("knn") : std::string("rball"));
  t.set("neighborhood", "value", c.nbh_mode.value);
  t.set("neighborhood", "evolving", static_cast<long>(c.evolving_neighborhoods));
  t.set("loss", "push_bound", c.push_bound);
  t.set("loss", "push_all_pairs", static_cast<long>(c.push_all_pairs));
  t.set("loss", "gammas", join_doubles(c.gammas.gamma));
  t.set("loss", "mu0", c.mu.mu0);
  t.set("loss", "mu_start_epoch", static_cast<long>(c.mu.start_epoch));
  t.set("loss", "mu_end_epoch", static_cast<long>(c.mu.end_epoch));
  t.set("optimizer", "lr", c.lr);
  t.set("optimizer", "epochs", static_cast<long>(c.epochs));
  t.set("run", "seed", static_cast<long>(c.seed));
  t.set("run", "input_scale", c.input_scale);
  t.set("run", "preset", c.preset_name.empty() ? "custom" : c.preset_name);
  return t;
}

TrainConfig config_from_text(const ConfigText& t) {
  TrainConfig c;
  c.arch.layer_dims = split_ints(t.require("architecture", "dims"));
  c.arch.leaky_slope = t.require_double("architecture", "leaky_slope");
  if (auto dd = t.get("architecture", "decoder_dims")) {
    c.decoder_arch.emplace();
    c.decoder_arch->layer_dims = split_ints(*dd);
    c.decoder_arch->leaky_slope = c.arch.leaky_slope;
  }
  c.scheme.name = losses::scheme_from_name(t.require("scheme", "name"));
  c.scheme.alpha.clear();
  {
    std::stringstream ss(t.require("scheme", "alpha"));
    std::string item;
    while (std::getline(ss, item, ';')) {
      if (item.empty()) continue;
      auto dash = item.find('-');
      auto colon = item.find(':');
      c.scheme.alpha[{std::stoi(item.substr(0, dash)),
                      std::stoi(item.substr(dash + 1, colon - dash - 1))}] =
          std::stod(item.substr(colon + 1));
    }
    std::stringstream cs(t.require("scheme", "corresponding"));
    while (std::getline(cs, item, ';')) {
      if (item.empty()) continue;
      auto colon = item.find(':');
      c.scheme.corresponding[std::stoi(item.substr(0, colon))] = std::stod(item.substr(colon + 1));
    }
    c.scheme.reflect_to_decoder = t.require_long("scheme", "reflect_to_decoder") != 0;
  }
  c.nbh_mode.kind = t.require("neighborhood", "kind") == "knn" ? NeighborhoodMode::Kind::kNN
                                                               : NeighborhoodMode::Kind::rBall;
  c.nbh_mode.value = t.require_double("neighborhood", "value");
  c.evolving_neighborhoods = t.require_long("neighborhood", "evolving") != 0;
  c.push_bound = t.require_double("loss", "push_bound");
  c.push_all_pairs = t.require_long("loss", "push_all_pairs") != 0;
  c.gammas.gamma = split_doubles(t.require("loss", "gammas"));
  c.mu.mu0 = t.require_double("loss", "mu0");
  c.mu.start_epoch = static_cast<int>(t.require_long("loss", "mu_start_epoch"));
  c.mu.end_epoch = static_cast<int>(t.require_long("loss", "mu_end_epoch"));
  c.lr = t.require_double("optimizer", "lr");
  c.epochs = static_cast<int>(t.require_long("optimizer", "epochs"));
  c.seed = static_cast<std::uint64_t>(t.require_long("run", "seed"));
  c.input_scale = t.require_double("run", "input_scale");
  c.preset_name = t.require("run", "preset");
  return c;
}

void save_model(const TrainedModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  net::save_checkpoint(model.encoder, dir / "encoder.net");
  if (model.decoder) net::save_checkpoint(*model.decoder, dir / "decoder.net");
  config_to_text(model.config).save(dir / "config.ini");

  std::ofstream hist(dir / "loss_history.csv");
  if (!hist) throw IoError("cannot open loss_history.csv for writing");
  hist << "epoch,lis,push,recon,mu,total,lis_per_clique,gated_pairs\n";
  hist.precision(12);
  for (const auto& log : model.history) {
    hist << log.epoch << ',' << log.lis << ',' << log.push << ',' << log.recon << ',' << log.mu
         << ',' << log.total << ',' << log.lis_per_clique << ',' << log.gated_pairs << '\n';
  }

  PointCloud embedding;
  embedding.points = model.final_enc_acts.latent();
  embedding.meta = {"embedding", model.config.seed, 0.0};
  save_binary(embedding, dir / "embedding.bin");
}

TrainedModel load_model(const std::filesystem::path& dir) {
  TrainedModel model;
  model.config = config_from_text(ConfigText::load(dir / "config.ini"));
  model.encoder = net::load_checkpoint(dir / "encoder.net");
  if (std::filesystem::exists(dir / "decoder.net")) {
    model.decoder = net::load_checkpoint(dir / "decoder.net");
  }
  // Loaded models carry enough for encode() and generate(); the training-time
  // activations and neighborhoods are not persisted.
  auto embedding = load_binary(dir / "embedding.bin");
  model.final_enc_acts.x_by_layer.push_back(embedding.points);
  return model;
}

}  // namespace mldl::trainer
