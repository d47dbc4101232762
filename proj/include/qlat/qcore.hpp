#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "qlat/complex_matrix.hpp"

namespace qlat {

// Thrown when an iterative routine fails to converge or a computation
// produces non-finite values. CLI maps this class to exit code 2;
// std::invalid_argument (precondition violations) maps to exit code 1.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Validation tolerances for density matrices.
inline constexpr double kTraceTol = 1e-9;
inline constexpr double kHermTol = 1e-12;
inline constexpr double kEigNegTol = -1e-10;

// A density matrix: Hermitian, positive semidefinite, unit trace.
// Construction is unchecked (channel outputs are valid by construction);
// use checked_density / validate_density at trust boundaries.
struct DensityMatrix {
  ComplexMatrix mat;
  int dim() const { return mat.rows; }
};

struct DensityCheck {
  bool ok = false;
  std::string detail;
};

// Checks squareness, trace within 1e-9 of one, hermiticity defect <= 1e-12,
// and smallest eigenvalue >= -1e-10.
DensityCheck validate_density(const ComplexMatrix& m);

// Throws std::invalid_argument with the failed check if m is not a valid
// density matrix.
DensityMatrix checked_density(const ComplexMatrix& m);

// Eigendecomposition of a Hermitian matrix. Eigenvalues ascending,
// eigenvector k stored in column k of `eigenvectors`.
struct Spectrum {
  std::vector<double> eigenvalues;
  ComplexMatrix eigenvectors;
};

// Cyclic complex Jacobi eigensolver. Each rotation zeroes one off-diagonal
// pair; sweeps repeat until the off-diagonal Frobenius norm falls below
// 1e-14 relative to the input norm (plus a short polish phase), at most 100
// sweeps. Throws std::invalid_argument for non-square or non-Hermitian
// (defect > 1e-9) input and numerical_error on non-convergence.
Spectrum herm_eig(const ComplexMatrix& h);

// Clips a Hermitian spectrum to the PSD cone: negatives go to zero, and
// eigenvalues below 1e-14 * max eigenvalue are treated as numerical zeros
// of the eigensolver and zeroed as well. Without the relative floor,
// rank-deficient inputs leave O(sqrt(eps)) ~ 1e-8 junk in quantities like
// tr sqrt(M) because sqrt amplifies eps-sized eigenvalue noise.
void clip_spectrum_to_psd(std::vector<double>& eigenvalues);

// V f(Lambda) V^dagger for a spectrum and per-eigenvalue values f.
ComplexMatrix spectral_function(const Spectrum& s, const std::vector<double>& f);

// (m + 1e-12 I) / (1 + 1e-12 d): the regularizer applied to the first
// fidelity argument before its square roots, renormalized to unit trace.
ComplexMatrix regularize_state(const ComplexMatrix& m);

// Principal PSD square root via the spectral decomposition.
ComplexMatrix sqrt_psd(const DensityMatrix& rho);

// Uhlmann fidelity F(rho, sigma) = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
// rho is regularized to (rho + 1e-12 I) / (1 + 1e-12 d) before the square
// root; the eigenvalues of the inner product matrix are PSD-clipped before
// their square roots and the result is clipped to [0, 1].
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

// Bures angle arccos(sqrt(F)); the geodesic distance used everywhere
// downstream (losses, correlation reports).
double bures_angle(const DensityMatrix& rho, const DensityMatrix& sigma);

// Bures length sqrt(2 - 2 sqrt(F)); exposed alongside the angle but not
// used by the losses or reports.
double bures_length(const DensityMatrix& rho, const DensityMatrix& sigma);

// Applies a Kraus channel sum_k K rho K^dagger. Throws std::invalid_argument
// if sum_k K^dagger K deviates from identity by more than 1e-9.
DensityMatrix apply_kraus(const DensityMatrix& rho,
                          const std::vector<ComplexMatrix>& kraus);

// Nearest-physical projection: hermitize, clip negative eigenvalues to
// zero, renormalize the trace to one. Idempotent on valid inputs. Throws
// std::invalid_argument when nothing positive remains after clipping.
DensityMatrix project_to_physical(const ComplexMatrix& m);

// tr(rho^2); for a Hermitian matrix this equals the squared Frobenius norm.
double purity(const DensityMatrix& rho);

}  // namespace qlat
