#pragma once

#include <stdexcept>
#include <vector>

namespace qlat {

// Dense row-major real matrix; plumbing for encoder weights and latent
// point clouds.
struct RealMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  RealMatrix() = default;
  RealMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}

  double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  const double& operator()(int r, int c) const {
    return a[static_cast<size_t>(r) * cols + c];
  }
};

inline std::vector<double> mul(const RealMatrix& m, const std::vector<double>& v) {
  if (static_cast<int>(v.size()) != m.cols)
    throw std::invalid_argument("mul: size mismatch");
  std::vector<double> out(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    double acc = 0.0;
    for (int j = 0; j < m.cols; ++j) acc += m(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

inline std::vector<double> mul_transpose(const RealMatrix& m,
                                         const std::vector<double>& v) {
  if (static_cast<int>(v.size()) != m.rows)
    throw std::invalid_argument("mul_transpose: size mismatch");
  std::vector<double> out(m.cols, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    for (int j = 0; j < m.cols; ++j) out[j] += m(i, j) * vi;
  }
  return out;
}

}  // namespace qlat
