#pragma once

#include "mldl/geometry.hpp"

#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace mldl::metrics {

using geometry::DistanceMatrix;
using geometry::NeighborhoodSystem;

struct MetricConfig {
  int k1 = 4;       // rank bounds for ARRC / Trust / Cont
  int k2 = 10;
  int lgd_k1 = 4;
  int lgd_k2 = 10;
  // Locality parameter for the local KL similarity; <= 0 means "derive from
  // the data": the squared mean neighbor distance in the input space.
  double sigma_lkl = 0.0;
  double kmax_success_threshold = 20.0;
  double cont_success_threshold = 0.99;
};

/// Whether local_kl normalizes latent similarities over the input-space
/// neighborhood (matched supports, the default) or over each space's own.
enum class LklNeighborhoods { InputBoth, PerSpace };

/// Local KL divergence between distributions of within-neighborhood
/// similarities u_ij = exp(-d_ij^2 / sigma), row-normalized, summed over all
/// (i, j in N_i). Zero when the two spaces agree.
double local_kl(const DistanceMatrix& d_in, const DistanceMatrix& d_lat,
                const NeighborhoodSystem& nbh_in, double sigma,
                LklNeighborhoods mode = LklNeighborhoods::InputBoth);

/// Averaged relative rank change over k in [k1, k2]; ranks run over all M-1
/// other points, ties broken by index.
double arrc(const DistanceMatrix& d_in, const DistanceMatrix& d_lat, int k1, int k2);

double trustworthiness(const DistanceMatrix& d_in, const DistanceMatrix& d_lat, int k1, int k2);

/// continuity(a, b) == trustworthiness(b, a).
double continuity(const DistanceMatrix& d_in, const DistanceMatrix& d_lat, int k1, int k2);

/// Locally geometric distortion, the primary isometry metric. Evaluation
/// neighborhoods are input-space k-NN for k in [lgd_k1, lgd_k2]; the per-point
/// normalizer #N_i comes from the training neighborhood system.
double lgd(const DistanceMatrix& d_in, const DistanceMatrix& d_lat,
           const NeighborhoodSystem& nbh_in, int lgd_k1, int lgd_k2);

/// Mean distance of 3-D points to their least-squares plane ("coplanarity").
double mpe(const Matrix& x3);

/// (K-min, K-max) of the local bi-Lipschitz constant over the given
/// neighborhoods. A zero distance on a neighbor pair in either space makes the
/// constant infinite (collapse); reported, not thrown.
std::pair<double, double> bilipschitz(const DistanceMatrix& d_in, const DistanceMatrix& d_lat,
                                      const NeighborhoodSystem& nbh_in);

/// Mean per-point Euclidean reconstruction error.
double mre(const Matrix& x, const Matrix& xhat);

struct MetricReport {
  double l_kl = 0;
  double arrc = 0;
  double trust = 0;
  double cont = 0;
  double lgd = 0;
  double k_min = 0;
  double k_max = 0;
  double mpe = std::numeric_limits<double>::quiet_NaN();  // only for 3-D layers
  double mre = std::numeric_limits<double>::quiet_NaN();  // only for autoencoders
  std::pair<int, int> layer_pair = {0, 0};
  double sigma_used = 0;
  bool success = false;
};

/// All cross-space metrics for one layer pair; mpe/mre are filled by the
/// caller where they apply. Sets the success flag from the config thresholds.
MetricReport compute_report(const DistanceMatrix& d_in, const DistanceMatrix& d_lat,
                            const NeighborhoodSystem& nbh_in, const MetricConfig& config,
                            std::pair<int, int> layer_pair);

/// Automated stand-in for the paper's by-eye success call: K-max at most
/// threshold_kmax and continuity at least cont_threshold.
bool detect_success(const MetricReport& report, double threshold_kmax,
                    double cont_threshold = 0.99);

struct AggregateSummary {
  MetricReport mean;   // per-metric means; inf propagates
  int succ = 0;
  bool tainted = false;  // any unsuccessful run in the pool
  int runs = 0;
};

AggregateSummary aggregate(const std::vector<MetricReport>& reports);

/// CSV with one row per report, fixed column order:
/// seed,layer_l,layer_lp,l_kl,arrc,trust,cont,lgd,k_min,k_max,mpe,mre,success,sigma_lkl
/// Infinities serialize as "inf".
void save_reports_csv(const std::vector<MetricReport>& reports, const std::vector<int>& seeds,
                      const std::filesystem::path& path);

std::string format_report_line(const MetricReport& report);

}  // namespace mldl::metrics
