#pragma once

#include <string>
#include <vector>

#include "qlat/qcore.hpp"
#include "qlat/real_matrix.hpp"
#include "qlat/rng.hpp"

namespace qlat {

// Latent point clouds are RealMatrix with one point per row.

// Maximum-likelihood intrinsic dimension from nearest-neighbor distances:
// for each point, with sorted neighbor distances r_1 <= ... <= r_k,
//   d_i = -k / sum_{j=1}^{k} log(r_j / r_k)
// (the j = k term contributes 0; this is the Levina-Bickel estimator
// scaled by k/(k-1)). Neighbors come from exact O(N^2) distances with ties
// broken by index; a zero distance between distinct points is read as
// 1e-12 (deterministic duplicate jitter). Points whose log-sum vanishes
// (all neighbors equidistant, e.g. full duplicates) are skipped and
// counted.
struct MleResult {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (N-1) of the estimates
  std::vector<double> per_point;
  int skipped = 0;
};

MleResult mle_dimension(const RealMatrix& z, int k);

// Eigenvalues of the (N-1)-normalized sample covariance of the centered
// cloud, descending and clipped to zero below the relative rank floor.
// Throws if the cloud is a single repeated point (all-zero spectrum).
std::vector<double> pca_spectrum(const RealMatrix& z);

// Smallest m with sum of the top-m eigenvalues >= alpha of the total.
int pca_dimension(const std::vector<double>& spectrum, double alpha);

// Local flatness per point: with the k nearest neighbors centered on the
// point itself as columns of a d x k matrix, kappa = sigma_min/sigma_max
// over the min(d, k) singular values (0, flagged, when sigma_max = 0).
// Summary quartiles use linear interpolation on the sorted values.
struct CurvatureReport {
  std::vector<double> per_point;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (N-1)
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  double iqr = 0.0;
  int zero_sigma_count = 0;
};

CurvatureReport local_curvature(const RealMatrix& z, int k);

struct DistancePair {
  int i = 0;
  int j = 0;
  double d_latent = 0.0;
  double d_bures = 0.0;
  double fidelity = 0.0;
};

// Two-sided tail probability of Student's t with df degrees of freedom,
// evaluated through the regularized incomplete beta function (continued
// fraction with a log-space front factor, so extreme tails do not
// underflow prematurely). Results below 1e-300 are floored there.
inline constexpr double kPValueFloor = 1e-300;
double student_t_two_sided_p(double t, int df);

// Latent-vs-Bures correlation over uniformly sampled distinct index pairs:
// Pearson r with its two-sided p-value, Spearman via average-rank
// transform, the least-squares fit d_latent = slope * d_bures + intercept,
// and R^2 / RMSE / MAE of that fit. Zero variance in either distance list
// makes the correlations undefined; the report is then flagged degenerate
// with an explanation instead of numbers.
struct CorrelationReport {
  int n_pairs = 0;
  double pearson_r = 0.0;
  double pearson_p = 1.0;
  bool p_underflow = false;  // p hit the 1e-300 floor; print as "< 1e-300"
  double spearman_rho = 0.0;
  double r_squared = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  bool degenerate = false;
  std::string note;
  std::vector<DistancePair> pairs;
};

CorrelationReport geodesic_correlation(const RealMatrix& z,
                                       const std::vector<DensityMatrix>& rhos,
                                       int n_pairs, Rng& rng);

// Helpers shared with the report writer and tests.
double pearson(const std::vector<double>& x, const std::vector<double>& y);
std::vector<double> average_ranks(const std::vector<double>& v);

enum class CorrelationStrength { Strong, Moderate, Weak };

// r > 0.80 -> Strong, 0.60 < r <= 0.80 -> Moderate, else Weak.
CorrelationStrength classify_threshold(double r);
std::string strength_name(CorrelationStrength s);

// Latent-distance interpretation bins: [0, 0.3), [0.3, 0.6), [0.6, 0.9),
// [0.9, 1.2), [1.2, inf), each with its mean Bures angle and mean fidelity
// (zeros when empty).
struct DistanceFidelityRow {
  std::string label;
  double lo = 0.0;
  double hi = 0.0;  // infinity on the last row
  int count = 0;
  double mean_bures = 0.0;
  double mean_fidelity = 0.0;
};

std::vector<DistanceFidelityRow> distance_fidelity_table(
    const std::vector<DistancePair>& pairs);

}  // namespace qlat
