#include "qlat/model.hpp"

#include <cmath>
#include <stdexcept>

#include "qlat/measurement.hpp"

namespace qlat {

namespace {

ComplexMatrix rx(double t) {
  ComplexMatrix m(2, 2);
  const double c = std::cos(0.5 * t), s = std::sin(0.5 * t);
  m(0, 0) = c;
  m(0, 1) = cplx(0.0, -s);
  m(1, 0) = cplx(0.0, -s);
  m(1, 1) = c;
  return m;
}

ComplexMatrix ry(double t) {
  ComplexMatrix m(2, 2);
  const double c = std::cos(0.5 * t), s = std::sin(0.5 * t);
  m(0, 0) = c;
  m(0, 1) = -s;
  m(1, 0) = s;
  m(1, 1) = c;
  return m;
}

ComplexMatrix rz(double t) {
  ComplexMatrix m(2, 2);
  m(0, 0) = std::exp(cplx(0.0, -0.5 * t));
  m(1, 1) = std::exp(cplx(0.0, 0.5 * t));
  return m;
}

const ComplexMatrix& cnot01() {
  // Control qubit 0 (most significant bit), target qubit 1.
  static const ComplexMatrix k = [] {
    ComplexMatrix m(4, 4);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(2, 3) = 1.0;
    m(3, 2) = 1.0;
    return m;
  }();
  return k;
}

RealMatrix gaussian_matrix(Rng& rng, int rows, int cols, double stddev) {
  RealMatrix m(rows, cols);
  for (double& v : m.a) v = rng.gaussian() * stddev;
  return m;
}

std::vector<double> relu(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
  return out;
}

std::vector<double> affine(const RealMatrix& w, const std::vector<double>& x,
                           const std::vector<double>& b) {
  std::vector<double> out = mul(w, x);
  for (size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

}  // namespace

ModelArch ModelParams::arch() const {
  return ModelArch{enc.w1.cols, enc.w1.rows, enc.w2.rows, enc.w3.rows};
}

int theta_dim_for(DecoderMode mode) {
  return kNumAngles + (mode == DecoderMode::Corrected ? 2 : 0);
}

ModelParams init_params(Rng& rng, DecoderMode mode, const ModelArch& arch) {
  ModelParams p;
  p.mode = mode;
  p.enc.w1 = gaussian_matrix(rng, arch.hidden1, arch.input,
                             std::sqrt(2.0 / arch.input));
  p.enc.w2 = gaussian_matrix(rng, arch.hidden2, arch.hidden1,
                             std::sqrt(2.0 / arch.hidden1));
  p.enc.w3 = gaussian_matrix(rng, arch.latent, arch.hidden2,
                             std::sqrt(2.0 / arch.hidden2));
  p.enc.b1.assign(arch.hidden1, 0.0);
  p.enc.b2.assign(arch.hidden2, 0.0);
  p.enc.b3.assign(arch.latent, 0.0);
  p.map.w4 = gaussian_matrix(rng, theta_dim_for(mode), arch.latent,
                             std::sqrt(1.0 / arch.latent));
  p.map.b4.assign(theta_dim_for(mode), 0.0);
  return p;
}

std::vector<double> encode(const std::vector<double>& x, const EncoderParams& p) {
  return affine(p.w3, relu(affine(p.w2, relu(affine(p.w1, x, p.b1)), p.b2)),
                p.b3);
}

EncoderContext encode_ctx(const std::vector<double>& x, const EncoderParams& p) {
  EncoderContext c;
  c.x = x;
  c.a1 = affine(p.w1, x, p.b1);
  c.h1 = relu(c.a1);
  c.a2 = affine(p.w2, c.h1, p.b2);
  c.h2 = relu(c.a2);
  c.z = affine(p.w3, c.h2, p.b3);
  return c;
}

CircuitParams latent_to_params(const std::vector<double>& z,
                               const LatentMapParams& p, DecoderMode mode) {
  const std::vector<double> theta = affine(p.w4, z, p.b4);
  if (static_cast<int>(theta.size()) != theta_dim_for(mode))
    throw std::invalid_argument("latent_to_params: W4 rows do not match mode");
  CircuitParams out;
  out.angles.assign(theta.begin(), theta.begin() + kNumAngles);
  out.noise_logits.assign(theta.begin() + kNumAngles, theta.end());
  return out;
}

ComplexMatrix build_unitary(const std::vector<double>& angles) {
  if (static_cast<int>(angles.size()) != kNumAngles)
    throw std::invalid_argument("build_unitary: expected 36 angles");
  ComplexMatrix u = ComplexMatrix::identity(4);
  for (int layer = 0; layer < kCircuitLayers; ++layer) {
    const int base = 6 * layer;
    const ComplexMatrix r0 =
        rz(angles[base + 2]) * ry(angles[base + 1]) * rx(angles[base + 0]);
    const ComplexMatrix r1 =
        rz(angles[base + 5]) * ry(angles[base + 4]) * rx(angles[base + 3]);
    u = u * (cnot01() * tensor(r0, r1));
  }
  return u;
}

ComplexMatrix qubit_mix(const ComplexMatrix& m, int qubit) {
  if (!m.square()) throw std::invalid_argument("qubit_mix: not square");
  int n = 0;
  while ((1 << n) < m.rows) ++n;
  if ((1 << n) != m.rows || qubit < 0 || qubit >= n)
    throw std::invalid_argument("qubit_mix: bad dimension or qubit index");
  const int mask = 1 << (n - 1 - qubit);  // qubit 0 owns the top bit
  ComplexMatrix out(m.rows, m.cols);
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      if ((r & mask) != (c & mask)) continue;  // off-diagonal in the qubit: 0
      const int r0 = r & ~mask, c0 = c & ~mask;
      out(r, c) = 0.5 * (m(r0, c0) + m(r0 | mask, c0 | mask));
    }
  }
  return out;
}

DensityMatrix depolarize_qubit(const DensityMatrix& rho, int qubit, double p) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("depolarize_qubit: p outside [0, 1]");
  const ComplexMatrix mixed = qubit_mix(rho.mat, qubit);
  ComplexMatrix out(rho.dim(), rho.dim());
  for (size_t i = 0; i < out.a.size(); ++i)
    out.a[i] = (1.0 - p) * rho.mat.a[i] + p * mixed.a[i];
  return DensityMatrix{std::move(out)};
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

DensityMatrix decode(const CircuitParams& theta, DecoderMode mode) {
  const ComplexMatrix u = build_unitary(theta.angles);
  if (mode == DecoderMode::Literal) {
    // Conjugating the maximally mixed state: U (I/4) U^dagger = I/4. The
    // multiplication is carried out rather than short-circuited so the
    // degeneracy is an observed output, not an assumption.
    const ComplexMatrix quarter = 0.25 * ComplexMatrix::identity(4);
    return DensityMatrix{hermitized(u * quarter * adjoint(u))};
  }
  if (theta.noise_logits.size() != 2)
    throw std::invalid_argument("decode: corrected mode needs 2 noise logits");
  ComplexMatrix rho0(4, 4);
  rho0(0, 0) = 1.0;  // |00><00|
  DensityMatrix rho{hermitized(u * rho0 * adjoint(u))};
  rho = depolarize_qubit(rho, 0, sigmoid(theta.noise_logits[0]));
  rho = depolarize_qubit(rho, 1, sigmoid(theta.noise_logits[1]));
  return rho;
}

ForwardResult forward(const std::vector<double>& x, const ModelParams& params) {
  ForwardResult r;
  r.enc = encode_ctx(x, params.enc);
  r.theta = latent_to_params(r.enc.z, params.map, params.mode);
  r.rho_pred = decode(r.theta, params.mode);
  r.x_hat = expectations(r.rho_pred);
  return r;
}

int param_count(const ModelArch& arch, DecoderMode mode) {
  const int t = theta_dim_for(mode);
  return arch.hidden1 * arch.input + arch.hidden1 +
         arch.hidden2 * arch.hidden1 + arch.hidden2 +
         arch.latent * arch.hidden2 + arch.latent + t * arch.latent + t;
}

namespace {

void append(std::vector<double>& out, const RealMatrix& m) {
  out.insert(out.end(), m.a.begin(), m.a.end());
}

void append(std::vector<double>& out, const std::vector<double>& v) {
  out.insert(out.end(), v.begin(), v.end());
}

size_t take(const std::vector<double>& flat, size_t pos, RealMatrix& m, int r,
            int c) {
  m = RealMatrix(r, c);
  std::copy(flat.begin() + pos, flat.begin() + pos + m.a.size(), m.a.begin());
  return pos + m.a.size();
}

size_t take(const std::vector<double>& flat, size_t pos, std::vector<double>& v,
            int n) {
  v.assign(flat.begin() + pos, flat.begin() + pos + n);
  return pos + n;
}

}  // namespace

std::vector<double> to_flat(const ModelParams& params) {
  std::vector<double> flat;
  flat.reserve(param_count(params.arch(), params.mode));
  append(flat, params.enc.w1);
  append(flat, params.enc.b1);
  append(flat, params.enc.w2);
  append(flat, params.enc.b2);
  append(flat, params.enc.w3);
  append(flat, params.enc.b3);
  append(flat, params.map.w4);
  append(flat, params.map.b4);
  return flat;
}

ModelParams from_flat(const std::vector<double>& flat, const ModelArch& arch,
                      DecoderMode mode) {
  if (static_cast<int>(flat.size()) != param_count(arch, mode))
    throw std::invalid_argument("from_flat: size does not match arch");
  ModelParams p;
  p.mode = mode;
  size_t pos = 0;
  pos = take(flat, pos, p.enc.w1, arch.hidden1, arch.input);
  pos = take(flat, pos, p.enc.b1, arch.hidden1);
  pos = take(flat, pos, p.enc.w2, arch.hidden2, arch.hidden1);
  pos = take(flat, pos, p.enc.b2, arch.hidden2);
  pos = take(flat, pos, p.enc.w3, arch.latent, arch.hidden2);
  pos = take(flat, pos, p.enc.b3, arch.latent);
  pos = take(flat, pos, p.map.w4, theta_dim_for(mode), arch.latent);
  pos = take(flat, pos, p.map.b4, theta_dim_for(mode));
  return p;
}

}  // namespace qlat
