#include "qlat/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qlat {

namespace {

constexpr double kJacobiTol = 1e-14;   // relative off-diagonal target
constexpr int kJacobiMaxSweeps = 100;
constexpr double kPsdRankFloor = 1e-14;  // relative eigenvalue floor
constexpr double kFidelityReg = 1e-12;

double off_diag_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// One cyclic sweep of two-sided Jacobi rotations. For the pivot pair (p, q)
// with g = a_pq = |g| e^{i phi}, the unitary
//   R = [[c, s], [-conj(s), c]],  s = t c e^{i phi},  c = 1/sqrt(1 + t^2)
// zeroes a_pq when t solves t^2 + 2 tau t - 1 = 0, tau = (a_qq - a_pp)/(2|g|).
// The stable root t = sign(tau) / (|tau| + sqrt(1 + tau^2)) keeps |t| <= 1.
void jacobi_sweep(ComplexMatrix& a, ComplexMatrix& v) {
  const int n = a.rows;
  for (int p = 0; p < n - 1; ++p) {
    for (int q = p + 1; q < n; ++q) {
      const cplx g = a(p, q);
      const double ag = std::abs(g);
      if (ag == 0.0) continue;
      const double alpha = std::real(a(p, p));
      const double beta = std::real(a(q, q));
      const double tau = (beta - alpha) / (2.0 * ag);
      const double sign_tau = tau >= 0.0 ? 1.0 : -1.0;
      const double t = sign_tau / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
      const double c = 1.0 / std::sqrt(1.0 + t * t);
      const cplx phase = g / ag;
      const cplx s = (t * c) * phase;
      const cplx sc = std::conj(s);

      // Column transform A <- A R (and accumulate V <- V R).
      for (int k = 0; k < n; ++k) {
        const cplx akp = a(k, p), akq = a(k, q);
        a(k, p) = c * akp - sc * akq;
        a(k, q) = s * akp + c * akq;
        const cplx vkp = v(k, p), vkq = v(k, q);
        v(k, p) = c * vkp - sc * vkq;
        v(k, q) = s * vkp + c * vkq;
      }
      // Row transform A <- R^dagger A.
      for (int k = 0; k < n; ++k) {
        const cplx apk = a(p, k), aqk = a(q, k);
        a(p, k) = c * apk - s * aqk;
        a(q, k) = sc * apk + c * aqk;
      }
      // The rotation was built to annihilate this pair; drop the roundoff
      // residue and keep the diagonal exactly real.
      a(p, q) = 0.0;
      a(q, p) = 0.0;
      a(p, p) = cplx(std::real(a(p, p)), 0.0);
      a(q, q) = cplx(std::real(a(q, q)), 0.0);
    }
  }
}

ComplexMatrix sqrt_of_hermitian(const ComplexMatrix& m) {
  Spectrum s = herm_eig(m);
  clip_spectrum_to_psd(s.eigenvalues);
  std::vector<double> root(s.eigenvalues.size());
  for (size_t i = 0; i < root.size(); ++i) root[i] = std::sqrt(s.eigenvalues[i]);
  return spectral_function(s, root);
}

}  // namespace

ComplexMatrix spectral_function(const Spectrum& s, const std::vector<double>& f) {
  const int n = s.eigenvectors.rows;
  if ((int)f.size() != n)
    throw std::invalid_argument("spectral_function: value count mismatch");
  ComplexMatrix out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cplx acc = 0.0;
      for (int k = 0; k < n; ++k)
        acc += s.eigenvectors(i, k) * f[k] * std::conj(s.eigenvectors(j, k));
      out(i, j) = acc;
    }
  }
  return hermitized(out);
}

ComplexMatrix regularize_state(const ComplexMatrix& m) {
  const int d = m.rows;
  ComplexMatrix out = m;
  for (int i = 0; i < d; ++i) out(i, i) += kFidelityReg;
  const double scale = 1.0 / (1.0 + kFidelityReg * d);
  for (cplx& v : out.a) v *= scale;
  return out;
}

DensityCheck validate_density(const ComplexMatrix& m) {
  if (!m.square()) return {false, "matrix is not square"};
  const cplx t = trace(m);
  if (std::abs(std::imag(t)) > kTraceTol || std::abs(std::real(t) - 1.0) > kTraceTol)
    return {false, "trace deviates from 1 by more than 1e-9"};
  if (hermiticity_defect(m) > kHermTol)
    return {false, "hermiticity defect exceeds 1e-12"};
  const Spectrum s = herm_eig(hermitized(m));
  if (s.eigenvalues.front() < kEigNegTol)
    return {false, "smallest eigenvalue below -1e-10"};
  return {true, ""};
}

DensityMatrix checked_density(const ComplexMatrix& m) {
  const DensityCheck c = validate_density(m);
  if (!c.ok) throw std::invalid_argument("checked_density: " + c.detail);
  return DensityMatrix{m};
}

Spectrum herm_eig(const ComplexMatrix& h) {
  if (!h.square()) throw std::invalid_argument("herm_eig: matrix must be square");
  if (hermiticity_defect(h) > 1e-9)
    throw std::invalid_argument("herm_eig: hermiticity defect exceeds 1e-9");
  const int n = h.rows;
  ComplexMatrix a = hermitized(h);
  ComplexMatrix v = ComplexMatrix::identity(n);
  const double scale =
      std::max(frobenius_norm(a), std::numeric_limits<double>::min());

  int sweeps = 0;
  double off = off_diag_norm(a);
  while (off > kJacobiTol * scale) {
    if (sweeps == kJacobiMaxSweeps)
      throw numerical_error("herm_eig: Jacobi did not converge after " +
                            std::to_string(sweeps) +
                            " sweeps (off-diagonal norm " + std::to_string(off) +
                            ")");
    jacobi_sweep(a, v);
    ++sweeps;
    off = off_diag_norm(a);
  }
  // Polish: convergence is quadratic, so a couple of extra sweeps usually
  // push the off-diagonal residue down to machine precision, which keeps
  // spurious eigenvalues of rank-deficient inputs far below the rank floor.
  while (sweeps < kJacobiMaxSweeps && off > 0.0) {
    const double before = off;
    jacobi_sweep(a, v);
    ++sweeps;
    off = off_diag_norm(a);
    if (off >= 0.25 * before) break;
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return std::real(a(i, i)) < std::real(a(j, j));
  });
  Spectrum s;
  s.eigenvalues.resize(n);
  s.eigenvectors = ComplexMatrix(n, n);
  for (int k = 0; k < n; ++k) {
    s.eigenvalues[k] = std::real(a(order[k], order[k]));
    for (int i = 0; i < n; ++i) s.eigenvectors(i, k) = v(i, order[k]);
  }
  return s;
}

void clip_spectrum_to_psd(std::vector<double>& eigenvalues) {
  double top = 0.0;
  for (double e : eigenvalues) top = std::max(top, e);
  const double floor = kPsdRankFloor * top;
  for (double& e : eigenvalues) {
    if (e < floor) e = 0.0;
  }
}

ComplexMatrix sqrt_psd(const DensityMatrix& rho) {
  if (!rho.mat.square())
    throw std::invalid_argument("sqrt_psd: matrix must be square");
  return sqrt_of_hermitian(rho.mat);
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim())
    throw std::invalid_argument("fidelity: dimension mismatch");
  const ComplexMatrix s = sqrt_of_hermitian(regularize_state(rho.mat));
  const ComplexMatrix m = s * sigma.mat * s;
  Spectrum spec = herm_eig(hermitized(m));
  clip_spectrum_to_psd(spec.eigenvalues);
  // Zero eigenvalues of the regularizer, not the state: a direction where
  // rho vanishes contributes at most eps * lambda_max(sigma) <= eps to the
  // inner-product spectrum. Square-rooting such artifacts would bias the
  // trace by ~sqrt(eps) = 1e-6 per rank deficiency, breaking argument
  // symmetry and the commuting closed form far beyond their tolerances.
  for (double& mu : spec.eigenvalues) {
    if (mu <= kFidelityReg) mu = 0.0;
  }
  double root_sum = 0.0;
  for (double mu : spec.eigenvalues) root_sum += std::sqrt(mu);
  const double f = root_sum * root_sum;
  return std::clamp(f, 0.0, 1.0);
}

double bures_angle(const DensityMatrix& rho, const DensityMatrix& sigma) {
  const double root_f = std::min(1.0, std::sqrt(fidelity(rho, sigma)));
  return std::acos(root_f);
}

double bures_length(const DensityMatrix& rho, const DensityMatrix& sigma) {
  const double root_f = std::min(1.0, std::sqrt(fidelity(rho, sigma)));
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * root_f));
}

DensityMatrix apply_kraus(const DensityMatrix& rho,
                          const std::vector<ComplexMatrix>& kraus) {
  if (kraus.empty()) throw std::invalid_argument("apply_kraus: empty Kraus set");
  const int d = rho.dim();
  ComplexMatrix completeness(d, d);
  for (const ComplexMatrix& k : kraus) {
    if (k.rows != d || k.cols != d)
      throw std::invalid_argument("apply_kraus: operator shape mismatch");
    completeness = completeness + adjoint(k) * k;
  }
  if (max_abs_diff(completeness, ComplexMatrix::identity(d)) > 1e-9)
    throw std::invalid_argument(
        "apply_kraus: Kraus set is not trace preserving (sum K^dagger K != I)");
  ComplexMatrix out(d, d);
  for (const ComplexMatrix& k : kraus) out = out + k * rho.mat * adjoint(k);
  return DensityMatrix{hermitized(out)};
}

DensityMatrix project_to_physical(const ComplexMatrix& m) {
  if (!m.square())
    throw std::invalid_argument("project_to_physical: matrix must be square");
  Spectrum s = herm_eig(hermitized(m));
  double total = 0.0;
  for (double& e : s.eigenvalues) {
    e = std::max(e, 0.0);
    total += e;
  }
  if (total <= 0.0)
    throw std::invalid_argument(
        "project_to_physical: no positive spectral weight after clipping");
  std::vector<double> scaled(s.eigenvalues.size());
  for (size_t i = 0; i < scaled.size(); ++i) scaled[i] = s.eigenvalues[i] / total;
  return DensityMatrix{spectral_function(s, scaled)};
}

double purity(const DensityMatrix& rho) {
  // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
  double s = 0.0;
  for (const cplx& v : rho.mat.a) s += std::norm(v);
  return s;
}

}  // namespace qlat
