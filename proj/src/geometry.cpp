#include "qlat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace qlat {

namespace {

constexpr double kDuplicateJitter = 1e-12;

double row_distance(const RealMatrix& z, int i, int j) {
  double s = 0.0;
  for (int c = 0; c < z.cols; ++c) {
    const double d = z(i, c) - z(j, c);
    s += d * d;
  }
  return std::sqrt(s);
}

// Indices of the k nearest neighbors of point i (self excluded), ties
// broken by index order.
std::vector<std::pair<double, int>> nearest_neighbors(const RealMatrix& z,
                                                      int i, int k) {
  std::vector<std::pair<double, int>> d;
  d.reserve(z.rows - 1);
  for (int j = 0; j < z.rows; ++j)
    if (j != i) d.emplace_back(row_distance(z, i, j), j);
  std::partial_sort(d.begin(), d.begin() + k, d.end());
  d.resize(k);
  return d;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

// Sample standard deviation (N-1); 0 for fewer than two values.
double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / (v.size() - 1));
}

// Linear-interpolation quantile of an ascending-sorted list.
double quantile_sorted(const std::vector<double>& s, double q) {
  const double h = (s.size() - 1) * q;
  const size_t lo = static_cast<size_t>(h);
  if (lo + 1 >= s.size()) return s.back();
  const double frac = h - lo;
  return s[lo] + frac * (s[lo + 1] - s[lo]);
}

// Symmetric real matrix eigenvalues via the Hermitian solver, descending
// and clipped at the relative rank floor.
std::vector<double> sym_eig_descending(const RealMatrix& g) {
  ComplexMatrix h(g.rows, g.cols);
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) h(r, c) = 0.5 * (g(r, c) + g(c, r));
  Spectrum s = herm_eig(h);
  clip_spectrum_to_psd(s.eigenvalues);
  std::reverse(s.eigenvalues.begin(), s.eigenvalues.end());
  return s.eigenvalues;
}

// Continued fraction for the regularized incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 3e-15;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

// Regularized incomplete beta I_x(a, b) with the x^a (1-x)^b / B(a, b)
// front factor assembled in log space so deep tails degrade gracefully to
// 0 instead of overflowing intermediate terms.
double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0))
    return std::exp(ln_front) * beta_cf(a, b, x) / a;
  return 1.0 - std::exp(ln_front) * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

MleResult mle_dimension(const RealMatrix& z, int k) {
  if (k < 2 || z.rows <= k)
    throw std::invalid_argument("mle_dimension: need N > k >= 2");
  MleResult res;
  res.per_point.reserve(z.rows);
  for (int i = 0; i < z.rows; ++i) {
    std::vector<std::pair<double, int>> nn;
    nn.reserve(z.rows - 1);
    for (int j = 0; j < z.rows; ++j) {
      if (j == i) continue;
      double d = row_distance(z, i, j);
      if (d == 0.0) d = kDuplicateJitter;  // duplicate points
      nn.emplace_back(d, j);
    }
    std::partial_sort(nn.begin(), nn.begin() + k, nn.end());
    const double rk = nn[k - 1].first;
    double log_sum = 0.0;
    for (int j = 0; j < k; ++j) log_sum += std::log(nn[j].first / rk);
    if (!(log_sum < 0.0)) {
      // All k neighbors equidistant (typically full duplicates): the
      // estimate diverges, so the point is dropped and counted.
      ++res.skipped;
      continue;
    }
    res.per_point.push_back(-k / log_sum);
  }
  if (res.per_point.empty())
    throw std::invalid_argument(
        "mle_dimension: every point was degenerate (duplicate cloud)");
  res.mean = mean_of(res.per_point);
  res.stddev = sample_std(res.per_point, res.mean);
  return res;
}

std::vector<double> pca_spectrum(const RealMatrix& z) {
  if (z.rows < 2)
    throw std::invalid_argument("pca_spectrum: need at least 2 points");
  std::vector<double> mean(z.cols, 0.0);
  for (int i = 0; i < z.rows; ++i)
    for (int c = 0; c < z.cols; ++c) mean[c] += z(i, c);
  for (double& m : mean) m /= z.rows;

  RealMatrix cov(z.cols, z.cols);
  for (int i = 0; i < z.rows; ++i) {
    for (int p = 0; p < z.cols; ++p) {
      const double dp = z(i, p) - mean[p];
      if (dp == 0.0) continue;
      for (int q = p; q < z.cols; ++q)
        cov(p, q) += dp * (z(i, q) - mean[q]);
    }
  }
  const double norm = 1.0 / (z.rows - 1);
  for (int p = 0; p < z.cols; ++p)
    for (int q = p; q < z.cols; ++q) {
      cov(p, q) *= norm;
      cov(q, p) = cov(p, q);
    }

  std::vector<double> spec = sym_eig_descending(cov);
  const double total = std::accumulate(spec.begin(), spec.end(), 0.0);
  if (total <= 0.0)
    throw std::invalid_argument(
        "pca_spectrum: zero covariance (all points identical)");
  return spec;
}

int pca_dimension(const std::vector<double>& spectrum, double alpha) {
  if (spectrum.empty())
    throw std::invalid_argument("pca_dimension: empty spectrum");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("pca_dimension: alpha must be in (0, 1]");
  const double total =
      std::accumulate(spectrum.begin(), spectrum.end(), 0.0);
  if (total <= 0.0)
    throw std::invalid_argument("pca_dimension: nonpositive total variance");
  double run = 0.0;
  for (size_t m = 0; m < spectrum.size(); ++m) {
    run += spectrum[m];
    if (run / total >= alpha) return static_cast<int>(m + 1);
  }
  return static_cast<int>(spectrum.size());  // roundoff guard
}

CurvatureReport local_curvature(const RealMatrix& z, int k) {
  if (k < 1 || z.rows <= k)
    throw std::invalid_argument("local_curvature: need N > k >= 1");
  const int d = z.cols;
  const int small = std::min(d, k);
  CurvatureReport rep;
  rep.per_point.reserve(z.rows);

  for (int i = 0; i < z.rows; ++i) {
    const auto nn = nearest_neighbors(z, i, k);
    // Columns of X are neighbor offsets from the point itself; the Gram
    // matrix of the smaller side carries exactly the min(d, k) squared
    // singular values.
    RealMatrix x(d, k);
    for (int c = 0; c < k; ++c)
      for (int r = 0; r < d; ++r) x(r, c) = z(nn[c].second, r) - z(i, r);

    RealMatrix gram(small, small);
    if (d <= k) {
      for (int p = 0; p < d; ++p)
        for (int q = p; q < d; ++q) {
          double s = 0.0;
          for (int c = 0; c < k; ++c) s += x(p, c) * x(q, c);
          gram(p, q) = s;
          gram(q, p) = s;
        }
    } else {
      for (int p = 0; p < k; ++p)
        for (int q = p; q < k; ++q) {
          double s = 0.0;
          for (int r = 0; r < d; ++r) s += x(r, p) * x(r, q);
          gram(p, q) = s;
          gram(q, p) = s;
        }
    }
    const std::vector<double> lam = sym_eig_descending(gram);
    const double sig_max = std::sqrt(lam.front());
    const double sig_min = std::sqrt(lam.back());
    if (sig_max == 0.0) {
      rep.per_point.push_back(0.0);  // all neighbors coincide with the point
      ++rep.zero_sigma_count;
    } else {
      rep.per_point.push_back(sig_min / sig_max);
    }
  }

  rep.mean = mean_of(rep.per_point);
  rep.stddev = sample_std(rep.per_point, rep.mean);
  std::vector<double> sorted = rep.per_point;
  std::sort(sorted.begin(), sorted.end());
  rep.median = quantile_sorted(sorted, 0.5);
  rep.min = sorted.front();
  rep.max = sorted.back();
  rep.iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  return rep;
}

double student_t_two_sided_p(double t, int df) {
  if (df < 1) throw std::invalid_argument("student_t_two_sided_p: df < 1");
  if (!std::isfinite(t)) return kPValueFloor;
  const double x = df / (df + t * t);
  const double p = reg_inc_beta(0.5 * df, 0.5, x);
  return std::clamp(p, kPValueFloor, 1.0);
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("pearson: need two equal-length lists");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw std::invalid_argument("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return v[a] < v[b] || (v[a] == v[b] && a < b);
  });
  std::vector<double> ranks(v.size(), 0.0);
  size_t s = 0;
  while (s < idx.size()) {
    size_t e = s;
    while (e + 1 < idx.size() && v[idx[e + 1]] == v[idx[s]]) ++e;
    const double avg = 0.5 * (s + e) + 1.0;  // mean of 1-based positions
    for (size_t t = s; t <= e; ++t) ranks[idx[t]] = avg;
    s = e + 1;
  }
  return ranks;
}

CorrelationReport geodesic_correlation(const RealMatrix& z,
                                       const std::vector<DensityMatrix>& rhos,
                                       int n_pairs, Rng& rng) {
  const int n = z.rows;
  if (static_cast<int>(rhos.size()) != n)
    throw std::invalid_argument("geodesic_correlation: latents/states mismatch");
  if (n < 2 || n_pairs < 2)
    throw std::invalid_argument("geodesic_correlation: need >= 2 points and pairs");

  std::vector<std::pair<int, int>> all;
  all.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) all.emplace_back(i, j);
  const int k = std::min<size_t>(n_pairs, all.size());
  for (int s = 0; s < k; ++s) {
    const size_t pick = s + rng.below(all.size() - s);
    std::swap(all[s], all[pick]);
  }

  CorrelationReport rep;
  rep.n_pairs = k;
  rep.pairs.reserve(k);
  std::vector<double> dl(k), db(k);
  for (int s = 0; s < k; ++s) {
    DistancePair p;
    p.i = all[s].first;
    p.j = all[s].second;
    p.d_latent = row_distance(z, p.i, p.j);
    p.fidelity = fidelity(rhos[p.i], rhos[p.j]);
    p.d_bures = std::acos(std::min(1.0, std::sqrt(p.fidelity)));
    dl[s] = p.d_latent;
    db[s] = p.d_bures;
    rep.pairs.push_back(p);
  }

  const double ml = mean_of(dl);
  const double mb = mean_of(db);
  double sll = 0.0, sbb = 0.0, slb = 0.0;
  for (int s = 0; s < k; ++s) {
    sll += (dl[s] - ml) * (dl[s] - ml);
    sbb += (db[s] - mb) * (db[s] - mb);
    slb += (dl[s] - ml) * (db[s] - mb);
  }
  if (sll <= 0.0 || sbb <= 0.0) {
    rep.degenerate = true;
    rep.note = sll <= 0.0 ? "latent distances have zero variance"
                          : "Bures distances have zero variance";
    return rep;
  }

  rep.pearson_r = std::clamp(slb / std::sqrt(sll * sbb), -1.0, 1.0);
  const double r2 = rep.pearson_r * rep.pearson_r;
  const double t = r2 >= 1.0 ? std::numeric_limits<double>::infinity()
                             : rep.pearson_r * std::sqrt((k - 2) / (1.0 - r2));
  rep.pearson_p = student_t_two_sided_p(t, k - 2);
  rep.p_underflow = rep.pearson_p <= kPValueFloor;

  rep.spearman_rho = pearson(average_ranks(dl), average_ranks(db));

  // Least squares for d_latent = slope * d_bures + intercept.
  rep.slope = slb / sbb;
  rep.intercept = ml - rep.slope * mb;
  double ss_res = 0.0, abs_sum = 0.0;
  for (int s = 0; s < k; ++s) {
    const double e = dl[s] - (rep.slope * db[s] + rep.intercept);
    ss_res += e * e;
    abs_sum += std::abs(e);
  }
  rep.r_squared = 1.0 - ss_res / sll;
  rep.rmse = std::sqrt(ss_res / k);
  rep.mae = abs_sum / k;
  return rep;
}

CorrelationStrength classify_threshold(double r) {
  if (r > 0.80) return CorrelationStrength::Strong;
  if (r > 0.60) return CorrelationStrength::Moderate;
  return CorrelationStrength::Weak;
}

std::string strength_name(CorrelationStrength s) {
  switch (s) {
    case CorrelationStrength::Strong: return "Strong";
    case CorrelationStrength::Moderate: return "Moderate";
    default: return "Weak";
  }
}

std::vector<DistanceFidelityRow> distance_fidelity_table(
    const std::vector<DistancePair>& pairs) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<DistanceFidelityRow> rows = {
      {"Nearly identical", 0.0, 0.3, 0, 0.0, 0.0},
      {"Highly similar", 0.3, 0.6, 0, 0.0, 0.0},
      {"Moderately similar", 0.6, 0.9, 0, 0.0, 0.0},
      {"Distinguishable", 0.9, 1.2, 0, 0.0, 0.0},
      {"Highly distinct", 1.2, inf, 0, 0.0, 0.0},
  };
  for (const DistancePair& p : pairs) {
    for (DistanceFidelityRow& row : rows) {
      if (p.d_latent >= row.lo && p.d_latent < row.hi) {
        ++row.count;
        row.mean_bures += p.d_bures;
        row.mean_fidelity += p.fidelity;
        break;
      }
    }
  }
  for (DistanceFidelityRow& row : rows) {
    if (row.count > 0) {
      row.mean_bures /= row.count;
      row.mean_fidelity /= row.count;
    }
  }
  return rows;
}

}  // namespace qlat
