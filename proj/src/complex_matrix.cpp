#include "qlat/complex_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qlat {

namespace {

void check_same_shape(const ComplexMatrix& a, const ComplexMatrix& b,
                      const char* op) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
  }
}

}  // namespace

ComplexMatrix ComplexMatrix::identity(int n) {
  ComplexMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
  check_same_shape(a, b, "operator+");
  ComplexMatrix out(a.rows, a.cols);
  for (size_t i = 0; i < a.a.size(); ++i) out.a[i] = a.a[i] + b.a[i];
  return out;
}

ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
  check_same_shape(a, b, "operator-");
  ComplexMatrix out(a.rows, a.cols);
  for (size_t i = 0; i < a.a.size(); ++i) out.a[i] = a.a[i] - b.a[i];
  return out;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("operator*: shape mismatch");
  ComplexMatrix out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int k = 0; k < a.cols; ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx(0.0, 0.0)) continue;
      for (int j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

ComplexMatrix operator*(cplx s, const ComplexMatrix& a) {
  ComplexMatrix out(a.rows, a.cols);
  for (size_t i = 0; i < a.a.size(); ++i) out.a[i] = s * a.a[i];
  return out;
}

ComplexMatrix operator*(double s, const ComplexMatrix& a) {
  return cplx(s, 0.0) * a;
}

ComplexMatrix adjoint(const ComplexMatrix& a) {
  ComplexMatrix out(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out(j, i) = std::conj(a(i, j));
  return out;
}

cplx trace(const ComplexMatrix& a) {
  if (!a.square()) throw std::invalid_argument("trace: matrix must be square");
  cplx t = 0.0;
  for (int i = 0; i < a.rows; ++i) t += a(i, i);
  return t;
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows * b.rows, a.cols * b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) {
      const cplx aij = a(i, j);
      for (int k = 0; k < b.rows; ++k)
        for (int l = 0; l < b.cols; ++l)
          out(i * b.rows + k, j * b.cols + l) = aij * b(k, l);
    }
  return out;
}

double frobenius_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (const cplx& v : a.a) s += std::norm(v);
  return std::sqrt(s);
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  check_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (size_t i = 0; i < a.a.size(); ++i)
    m = std::max(m, std::abs(a.a[i] - b.a[i]));
  return m;
}

double hermiticity_defect(const ComplexMatrix& a) {
  if (!a.square()) throw std::invalid_argument("hermiticity_defect: not square");
  double m = 0.0;
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j)
      m = std::max(m, std::abs(a(i, j) - std::conj(a(j, i))));
  return m;
}

ComplexMatrix hermitized(const ComplexMatrix& a) {
  if (!a.square()) throw std::invalid_argument("hermitized: not square");
  ComplexMatrix out(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j)
      out(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
  return out;
}

double real_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  check_same_shape(a, b, "real_inner");
  double s = 0.0;
  for (size_t i = 0; i < a.a.size(); ++i)
    s += std::real(std::conj(a.a[i]) * b.a[i]);
  return s;
}

}  // namespace qlat
