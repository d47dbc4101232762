#pragma once

#include <complex>
#include <vector>

namespace qlat {

using cplx = std::complex<double>;

// Dense row-major complex matrix. Everything in this project is tiny
// (4x4 density matrices, <=32x32 Gram matrices), so there is no attempt
// at blocking, views or expression templates; plain value semantics.
struct ComplexMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<cplx> a;

  ComplexMatrix() = default;
  ComplexMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}

  cplx& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  const cplx& operator()(int r, int c) const {
    return a[static_cast<size_t>(r) * cols + c];
  }

  bool square() const { return rows == cols && rows > 0; }

  static ComplexMatrix zero(int r, int c) { return ComplexMatrix(r, c); }
  static ComplexMatrix identity(int n);
};

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(cplx s, const ComplexMatrix& a);
ComplexMatrix operator*(double s, const ComplexMatrix& a);

// Conjugate transpose.
ComplexMatrix adjoint(const ComplexMatrix& a);

cplx trace(const ComplexMatrix& a);

// Kronecker product; the first factor owns the most significant index bits,
// so tensor(X, I) applied to |00> gives |10>.
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);

double frobenius_norm(const ComplexMatrix& a);

// max_ij |a_ij - b_ij|
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

// max_ij |a_ij - conj(a_ji)|; zero for an exactly Hermitian matrix.
double hermiticity_defect(const ComplexMatrix& a);

// (A + A^dagger)/2
ComplexMatrix hermitized(const ComplexMatrix& a);

// Frobenius inner product Re tr(A^dagger B).
double real_inner(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace qlat
