#include "mldl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace mldl::metrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_same_size(const DistanceMatrix& a, const DistanceMatrix& b) {
  if (a.size() != b.size()) throw std::invalid_argument("metric: distance matrix size mismatch");
}

// Indices of all points != i ordered by (distance from i, index).
std::vector<int> row_order(const DistanceMatrix& d, int i) {
  int m = d.size();
  std::vector<int> idx;
  idx.reserve(m - 1);
  for (int j = 0; j < m; ++j) {
    if (j != i) idx.push_back(j);
  }
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    double da = d.d(i, a), db = d.d(i, b);
    return da < db || (da == db && a < b);
  });
  return idx;
}

// ranks[j] = 1-based closeness rank of j from i (ranks[i] unused).
void row_ranks(const DistanceMatrix& d, int i, std::vector<int>& ranks) {
  auto order = row_order(d, i);
  ranks.assign(d.size(), 0);
  for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = static_cast<int>(r) + 1;
}

}  // namespace

double local_kl(const DistanceMatrix& d_in, const DistanceMatrix& d_lat,
                const NeighborhoodSystem& nbh_in, double sigma, LklNeighborhoods mode) {
  check_same_size(d_in, d_lat);
  if (!(sigma > 0)) throw std::invalid_argument("local_kl: sigma must be > 0");
  if (nbh_in.size() != d_in.size()) throw std::invalid_argument("local_kl: neighborhood size");
  int m = d_in.size();

  // Latent-side neighborhoods for the per-space mode: same per-point count,
  // chosen by latent closeness.
  std::vector<std::vector<int>> lat_nbh;
  if (mode == LklNeighborhoods::PerSpace) {
    lat_nbh.resize(m);
    for (int i = 0; i < m; ++i) {
      std::size_t k = nbh_in.neighbors[i].size();
      auto order = row_order(d_lat, i);
      lat_nbh[i].assign(order.begin(), order.begin() + std::min(k, order.size()));
    }
  }

  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    const auto& nin = nbh_in.neighbors[i];
    if (nin.empty()) {
      throw std::invalid_argument("local_kl: empty neighborhood for point " + std::to_string(i));
    }
    const auto& nlat = mode == LklNeighborhoods::InputBoth ? nin : lat_nbh[i];
    double z_in = 0.0, z_lat = 0.0;
    for (int j : nin) z_in += std::exp(-d_in.d(i, j) * d_in.d(i, j) / sigma);
    for (int j : nlat) z_lat += std::exp(-d_lat.d(i, j) * d_lat.d(i, j) / sigma);
    for (int j : nin) {
      double u_in = std::exp(-d_in.d(i, j) * d_in.d(i, j) / sigma) / z_in;
      double u_lat = std::exp(-d_lat.d(i, j) * d_lat.d(i, j) / sigma) / z_lat;
      total += u_in * std::log(u_in / u_lat);
    }
  }
  return total;
}

double arrc(const DistanceMatrix& d_in, const DistanceMatrix& d_lat, int k1, int k2) {
  check_same_size(d_in, d_lat);
  int m = d_in.size();
  if (k1 < 1 || k1 > k2 || k2 > m - 1) throw std::invalid_argument("arrc: bad rank bounds");

  // H_k = M * sum_{k'=1..k} |M - 2k'| / k'
  std::vector<double> h(k2 + 1, 0.0);
  double acc = 0.0;
  for (int kp = 1; kp <= k2; ++kp) {
    acc += std::abs(static_cast<double>(m - 2 * kp)) / kp;
    h[kp] = m * acc;
  }

  std::vector<int> rank_in, rank_lat;
  std::vector<double> mr_sum(k2 + 1, 0.0);  // unscaled MR^(l',l)_k + MR^(l,l')_k
  for (int i = 0; i < m; ++i) {
    auto order_in = row_order(d_in, i);
    auto order_lat = row_order(d_lat, i);
    row_ranks(d_in, i, rank_in);
    row_ranks(d_lat, i, rank_lat);
    for (int k = k1; k <= k2; ++k) {
      for (int r = 0; r < k; ++r) {
        int j_in = order_in[r];  // rank r+1 in the input space
        mr_sum[k] += std::abs(rank_in[j_in] - rank_lat[j_in]) / static_cast<double>(rank_in[j_in]);
        int j_lat = order_lat[r];
        mr_sum[k] +=
            std::abs(rank_lat[j_lat] - rank_in[j_lat]) / static_cast<double>(rank_lat[j_lat]);
      }
    }
  }
  double total = 0.0;
  for (int k = k1; k <= k2; ++k) total += mr_sum[k] / h[k];
  return total / (k2 - k1 + 1);
}

namespace {

double trust_impl(const DistanceMatrix& d_a, const DistanceMatrix& d_b, int k1, int k2) {
  // Penalizes points that enter the k-NN in space b without being k-NN in
  // space a, by their space-a rank excess.
  check_same_size(d_a, d_b);
  int m = d_a.size();
  if (k1 < 1 || k1 > k2 || k2 > m - 1) throw std::invalid_argument("trust: bad rank bounds");
  if (2 * m - 3 * k2 - 1 <= 0) throw std::invalid_argument("trust: k2 too large for M");

  std::vector<double> penalty(k2 + 1, 0.0);
  std::vector<int> rank_a;
  for (int i = 0; i < m; ++i) {
    auto order_b = row_order(d_b, i);
    row_ranks(d_a, i, rank_a);
    for (int k = k1; k <= k2; ++k) {
      for (int r = 0; r < k; ++r) {
        int j = order_b[r];
        if (rank_a[j] > k) penalty[k] += rank_a[j] - k;
      }
    }
  }
  double total = 0.0;
  for (int k = k1; k <= k2; ++k) {
    total += 1.0 - 2.0 / (static_cast<double>(m) * k * (2 * m - 3 * k - 1)) * penalty[k];
  }
  return total / (k2 - k1 + 1);
}

}  // namespace

double trustworthiness(const DistanceMatrix& d_in, const DistanceMatrix& d_lat, int k1, int k2) {
  return trust_impl(d_in, d_lat, k1, k2);
}

double continuity(const DistanceMatrix& d_in, const DistanceMatrix& d_lat, int k1, int k2) {
  return trust_impl(d_lat, d_in, k1, k2);
}

double lgd(const DistanceMatrix& d_in, const DistanceMatrix& d_lat,
           const NeighborhoodSystem& nbh_in, int lgd_k1, int lgd_k2) {
  check_same_size(d_in, d_lat);
  int m = d_in.size();
  if (lgd_k1 < 1 || lgd_k1 > lgd_k2 || lgd_k2 > m - 1) {
    throw std::invalid_argument("lgd: bad rank bounds");
  }
  if (nbh_in.size() != m) throw std::invalid_argument("lgd: neighborhood size");
  for (const auto& n : nbh_in.neighbors) {
    if (n.empty()) throw std::invalid_argument("lgd: empty training neighborhood");
  }

  int span = lgd_k2 - lgd_k1 + 1;
  std::vector<double> inner(lgd_k2 + 1, 0.0);
  for (int i = 0; i < m; ++i) {
    auto order = row_order(d_in, i);
    double denom = static_cast<double>(span) * span * m * nbh_in.neighbors[i].size();
    double acc = 0.0;
    for (int r = 0; r < lgd_k2; ++r) {
      int j = order[r];
      double diff = d_in.d(i, j) - d_lat.d(i, j);
      acc += diff * diff;
      if (r + 1 >= lgd_k1) inner[r + 1] += acc / denom;
    }
  }
  double total = 0.0;
  for (int k = lgd_k1; k <= lgd_k2; ++k) total += std::sqrt(inner[k]);
  return total;
}

double mpe(const Matrix& x3) {
  if (x3.cols() != 3) throw std::invalid_argument("mpe: points must be 3-D");
  if (x3.rows() < 3) throw std::invalid_argument("mpe: need at least 3 points");
  Eigen::RowVector3d centroid = x3.colwise().mean();
  Matrix centered = x3.rowwise() - centroid;
  Eigen::Matrix3d cov = centered.transpose() * centered;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  Eigen::Vector3d normal = eig.eigenvectors().col(0);  // smallest eigenvalue
  return (centered * normal).cwiseAbs().mean();
}

std::pair<double, double> bilipschitz(const DistanceMatrix& d_in, const DistanceMatrix& d_lat,
                                      const NeighborhoodSystem& nbh_in) {
  check_same_size(d_in, d_lat);
  if (nbh_in.size() != d_in.size()) throw std::invalid_argument("bilipschitz: neighborhood size");
  double k_min = kInf;
  double k_max = 0.0;
  for (int i = 0; i < d_in.size(); ++i) {
    if (nbh_in.neighbors[i].empty()) {
      throw std::invalid_argument("bilipschitz: empty neighborhood for point " +
                                  std::to_string(i));
    }
    double worst = 0.0;
    for (int j : nbh_in.neighbors[i]) {
      double a = d_in.d(i, j), b = d_lat.d(i, j);
      double k_ij = (a == 0.0 || b == 0.0) ? kInf : std::max(a / b, b / a);
      worst = std::max(worst, k_ij);
    }
    k_min = std::min(k_min, worst);
    k_max = std::max(k_max, worst);
  }
  return {k_min, k_max};
}

double mre(const Matrix& x, const Matrix& xhat) {
  if (x.rows() != xhat.rows() || x.cols() != xhat.cols()) {
    throw std::invalid_argument("mre: shape mismatch");
  }
  if (x.rows() == 0) return 0.0;
  return (x - xhat).rowwise().norm().mean();
}

MetricReport compute_report(const DistanceMatrix& d_in, const DistanceMatrix& d_lat,
                            const NeighborhoodSystem& nbh_in, const MetricConfig& config,
                            std::pair<int, int> layer_pair) {
  MetricReport r;
  double sigma = config.sigma_lkl;
  if (!(sigma > 0)) {
    double sum = 0.0;
    long count = 0;
    for (int i = 0; i < d_in.size(); ++i) {
      for (int j : nbh_in.neighbors[i]) {
        sum += d_in.d(i, j);
        ++count;
      }
    }
    if (count == 0) throw std::invalid_argument("compute_report: no neighbor pairs");
    double mean = sum / count;
    sigma = mean * mean;
  }
  r.sigma_used = sigma;
  r.l_kl = local_kl(d_in, d_lat, nbh_in, sigma);
  r.arrc = arrc(d_in, d_lat, config.k1, config.k2);
  r.trust = trustworthiness(d_in, d_lat, config.k1, config.k2);
  r.cont = continuity(d_in, d_lat, config.k1, config.k2);
  r.lgd = lgd(d_in, d_lat, nbh_in, config.lgd_k1, config.lgd_k2);
  std::tie(r.k_min, r.k_max) = bilipschitz(d_in, d_lat, nbh_in);
  r.layer_pair = layer_pair;
  r.success = detect_success(r, config.kmax_success_threshold, config.cont_success_threshold);
  return r;
}

bool detect_success(const MetricReport& report, double threshold_kmax, double cont_threshold) {
  return report.k_max <= threshold_kmax && report.cont >= cont_threshold;
}

AggregateSummary aggregate(const std::vector<MetricReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate: no reports");
  AggregateSummary s;
  s.runs = static_cast<int>(reports.size());
  s.mean = reports.front();
  s.mean.l_kl = s.mean.arrc = s.mean.trust = s.mean.cont = 0;
  s.mean.lgd = s.mean.k_min = s.mean.k_max = 0;
  s.mean.mpe = s.mean.mre = 0;
  for (const auto& r : reports) {
    s.mean.l_kl += r.l_kl;
    s.mean.arrc += r.arrc;
    s.mean.trust += r.trust;
    s.mean.cont += r.cont;
    s.mean.lgd += r.lgd;
    s.mean.k_min += r.k_min;
    s.mean.k_max += r.k_max;
    s.mean.mpe += r.mpe;
    s.mean.mre += r.mre;
    if (r.success) ++s.succ;
  }
  double n = s.runs;
  s.mean.l_kl /= n;
  s.mean.arrc /= n;
  s.mean.trust /= n;
  s.mean.cont /= n;
  s.mean.lgd /= n;
  s.mean.k_min /= n;
  s.mean.k_max /= n;
  s.mean.mpe /= n;
  s.mean.mre /= n;
  s.tainted = s.succ < s.runs;
  s.mean.success = !s.tainted;
  return s;
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();  // "inf" / "nan" literals for non-finite values
}

}  // namespace

void save_reports_csv(const std::vector<MetricReport>& reports, const std::vector<int>& seeds,
                      const std::filesystem::path& path) {
  if (reports.size() != seeds.size()) {
    throw std::invalid_argument("save_reports_csv: one seed per report required");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "seed,layer_l,layer_lp,l_kl,arrc,trust,cont,lgd,k_min,k_max,mpe,mre,success,sigma_lkl\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out << seeds[i] << ',' << r.layer_pair.first << ',' << r.layer_pair.second << ','
        << num(r.l_kl) << ',' << num(r.arrc) << ',' << num(r.trust) << ',' << num(r.cont) << ','
        << num(r.lgd) << ',' << num(r.k_min) << ',' << num(r.k_max) << ',' << num(r.mpe) << ','
        << num(r.mre) << ',' << (r.success ? 1 : 0) << ',' << num(r.sigma_used) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::string format_report_line(const MetricReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << "pair(" << r.layer_pair.first << "," << r.layer_pair.second << ")"
     << " L-KL=" << r.l_kl << " ARRC=" << r.arrc << " Trust=" << r.trust << " Cont=" << r.cont
     << " LGD=" << r.lgd << " K-min=" << r.k_min << " K-max=" << r.k_max;
  if (std::isfinite(r.mpe)) os << " MPE=" << r.mpe;
  if (std::isfinite(r.mre)) os << " MRE=" << r.mre;
  os << (r.success ? " [success]" : " [fail]");
  return os.str();
}

}  // namespace mldl::metrics
