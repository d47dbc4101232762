#include "qlat/stategen.hpp"

#include <cmath>
#include <stdexcept>

namespace qlat {

namespace {

constexpr double kPurityTol = 0.01;
constexpr int kBisectMaxIter = 60;
constexpr int kMaxAttempts = 8;
constexpr int kBracketScanSteps = 32;
constexpr double kThermalBetaMax = 50.0;

DensityMatrix pure_from_vector(const std::vector<cplx>& psi) {
  const int d = static_cast<int>(psi.size());
  ComplexMatrix rho(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) rho(i, j) = psi[i] * std::conj(psi[j]);
  return DensityMatrix{std::move(rho)};
}

DensityMatrix bell_phi_plus() {
  constexpr double kInvRoot2 = 0.7071067811865476;
  std::vector<cplx> psi(4, 0.0);
  psi[0] = kInvRoot2;  // |00>
  psi[3] = kInvRoot2;  // |11>
  return pure_from_vector(psi);
}

// (1-p) rho_pure + (p/d) I.
DensityMatrix mix_with_identity(const DensityMatrix& pure, double p) {
  const int d = pure.dim();
  ComplexMatrix out = (1.0 - p) * pure.mat;
  for (int i = 0; i < d; ++i) out(i, i) += p / d;
  return DensityMatrix{std::move(out)};
}

// Lifts a single-qubit Kraus set to `qubit` of a 2-qubit register.
std::vector<ComplexMatrix> lift_to_qubit(const std::vector<ComplexMatrix>& ks,
                                         int qubit) {
  const ComplexMatrix eye = ComplexMatrix::identity(2);
  std::vector<ComplexMatrix> out;
  out.reserve(ks.size());
  for (const ComplexMatrix& k : ks)
    out.push_back(qubit == 0 ? tensor(k, eye) : tensor(eye, k));
  return out;
}

std::vector<ComplexMatrix> amplitude_damping_kraus(double gamma) {
  ComplexMatrix k0(2, 2), k1(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - gamma);
  k1(0, 1) = std::sqrt(gamma);
  return {k0, k1};
}

std::vector<ComplexMatrix> phase_damping_kraus(double gamma) {
  ComplexMatrix k0(2, 2), k1(2, 2), k2(2, 2);
  k0(0, 0) = std::sqrt(1.0 - gamma);
  k0(1, 1) = std::sqrt(1.0 - gamma);
  k1(0, 0) = std::sqrt(gamma);
  k2(1, 1) = std::sqrt(gamma);
  return {k0, k1, k2};
}

DensityMatrix damp_both_qubits(const DensityMatrix& rho,
                               const std::vector<ComplexMatrix>& one_qubit_set) {
  DensityMatrix out = apply_kraus(rho, lift_to_qubit(one_qubit_set, 0));
  return apply_kraus(out, lift_to_qubit(one_qubit_set, 1));
}

DensityMatrix thermal_state(const ComplexMatrix& h, double beta) {
  Spectrum s = herm_eig(h);
  // Shift by the smallest eigenvalue so the largest Boltzmann weight is 1;
  // avoids overflow for large beta.
  const double e0 = s.eigenvalues.front();
  std::vector<double> w(s.eigenvalues.size());
  double z = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(-beta * (s.eigenvalues[i] - e0));
    z += w[i];
  }
  const int d = h.rows;
  ComplexMatrix out(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      cplx acc = 0.0;
      for (int k = 0; k < d; ++k)
        acc += s.eigenvectors(i, k) * (w[k] / z) * std::conj(s.eigenvectors(j, k));
      out(i, j) = acc;
    }
  return DensityMatrix{hermitized(out)};
}

}  // namespace

std::string channel_name(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::Depolarized: return "depolarized";
    case ChannelKind::Werner: return "werner";
    case ChannelKind::Isotropic: return "isotropic";
    case ChannelKind::AmplitudeDamped: return "amplitude_damped";
    case ChannelKind::PhaseDamped: return "phase_damped";
    case ChannelKind::Thermal: return "thermal";
    case ChannelKind::SeparableProduct: return "separable_product";
  }
  throw std::invalid_argument("channel_name: unknown kind");
}

ChannelKind channel_from_name(const std::string& name) {
  for (int i = 0; i < kNumChannels; ++i) {
    const ChannelKind kind = static_cast<ChannelKind>(i);
    if (channel_name(kind) == name) return kind;
  }
  throw std::invalid_argument("channel_from_name: unknown channel '" + name + "'");
}

DensityMatrix haar_pure(int n_qubits, Rng& rng) {
  if (n_qubits < 1) throw std::invalid_argument("haar_pure: n_qubits < 1");
  const int d = 1 << n_qubits;
  std::vector<cplx> psi(d);
  double norm2 = 0.0;
  for (cplx& v : psi) {
    v = rng.complex_gaussian();
    norm2 += std::norm(v);
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (cplx& v : psi) v *= inv;
  return pure_from_vector(psi);
}

ComplexMatrix gue_hamiltonian(int dim, Rng& rng) {
  if (dim < 2) throw std::invalid_argument("gue_hamiltonian: dim < 2");
  ComplexMatrix a(dim, dim);
  for (cplx& v : a.a) v = rng.complex_gaussian();
  ComplexMatrix h(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      h(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
  for (int i = 0; i < dim; ++i) h(i, i) = cplx(std::real(h(i, i)), 0.0);
  return h;
}

ChannelInstance sample_channel_instance(ChannelKind kind, Rng& rng) {
  ChannelInstance inst;
  inst.kind = kind;
  switch (kind) {
    case ChannelKind::Depolarized:
    case ChannelKind::Isotropic:
    case ChannelKind::AmplitudeDamped:
    case ChannelKind::PhaseDamped:
      inst.pure = haar_pure(2, rng);
      break;
    case ChannelKind::Werner:
      inst.pure = bell_phi_plus();
      break;
    case ChannelKind::Thermal:
      inst.hamiltonian = gue_hamiltonian(4, rng);
      break;
    case ChannelKind::SeparableProduct:
      inst.factors.push_back(haar_pure(1, rng));
      inst.factors.push_back(haar_pure(1, rng));
      break;
  }
  return inst;
}

void channel_param_range(ChannelKind kind, double& lo, double& hi) {
  lo = 0.0;
  hi = kind == ChannelKind::Thermal ? kThermalBetaMax : 1.0;
}

DensityMatrix realize(const ChannelInstance& instance, double param) {
  switch (instance.kind) {
    case ChannelKind::Depolarized:
    case ChannelKind::Isotropic:
      return mix_with_identity(instance.pure, param);
    case ChannelKind::Werner: {
      // param |Phi+><Phi+| + (1-param)/4 I.
      DensityMatrix bell = bell_phi_plus();
      ComplexMatrix out = param * bell.mat;
      for (int i = 0; i < 4; ++i) out(i, i) += (1.0 - param) / 4.0;
      return DensityMatrix{std::move(out)};
    }
    case ChannelKind::AmplitudeDamped:
      return damp_both_qubits(instance.pure, amplitude_damping_kraus(param));
    case ChannelKind::PhaseDamped:
      return damp_both_qubits(instance.pure, phase_damping_kraus(param));
    case ChannelKind::Thermal:
      return thermal_state(instance.hamiltonian, param);
    case ChannelKind::SeparableProduct: {
      // Both factors share the depolarization parameter; a factor purity of
      // sqrt(t) makes the product purity t.
      const DensityMatrix f0 = mix_with_identity(instance.factors[0], param);
      const DensityMatrix f1 = mix_with_identity(instance.factors[1], param);
      return DensityMatrix{tensor(f0.mat, f1.mat)};
    }
  }
  throw std::invalid_argument("realize: unknown channel kind");
}

DensityMatrix make_state(ChannelKind kind, double param, Rng& rng) {
  double lo, hi;
  channel_param_range(kind, lo, hi);
  if (param < lo || param > hi)
    throw std::invalid_argument("make_state: parameter outside channel range");
  return realize(sample_channel_instance(kind, rng), param);
}

double depolarized_purity(double p, int dim) {
  const double d = dim;
  return (1.0 - p) * (1.0 - p) + 2.0 * p * (1.0 - p) / d + p * p / d;
}

double werner_purity(double p) {
  return p * p + p * (1.0 - p) / 2.0 + (1.0 - p) * (1.0 - p) / 4.0;
}

PuritySolution solve_purity(ChannelKind kind, double target, Rng& rng) {
  if (target <= 0.25 || target > 1.0)
    throw std::invalid_argument("solve_purity: target outside (0.25, 1]");
  double lo, hi;
  channel_param_range(kind, lo, hi);

  for (int attempt = 1; attempt <= kMaxAttempts; ++attempt) {
    const ChannelInstance inst = sample_channel_instance(kind, rng);
    const auto miss = [&](double x) { return purity(realize(inst, x)) - target; };

    double a = lo, b = hi;
    double fa = miss(a), fb = miss(b);
    bool bracketed = false;
    if (std::abs(fa) <= 1e-12) {
      const DensityMatrix rho = realize(inst, a);
      return {a, rho, purity(rho), attempt};
    }
    if (std::abs(fb) <= 1e-12) {
      const DensityMatrix rho = realize(inst, b);
      return {b, rho, purity(rho), attempt};
    }
    if (fa * fb < 0.0) {
      bracketed = true;
    } else {
      // Scan for the first sign change; needed when both endpoints sit on
      // the same side of the target (amplitude damping returns to purity 1
      // at gamma = 1, so its purity dips and comes back).
      double prev_x = a, prev_f = fa;
      for (int s = 1; s <= kBracketScanSteps; ++s) {
        const double x = lo + (hi - lo) * s / kBracketScanSteps;
        const double f = miss(x);
        if (prev_f * f <= 0.0) {
          a = prev_x;
          fa = prev_f;
          b = x;
          fb = f;
          bracketed = true;
          break;
        }
        prev_x = x;
        prev_f = f;
      }
    }
    if (!bracketed) continue;  // target unreachable for this draw; resample

    bool monotone = true;
    for (int it = 0; it < kBisectMaxIter; ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = miss(mid);
      // Bisection assumes the purity is monotone across the bracket; the
      // midpoint value must then lie between the endpoint values.
      if (fm < std::min(fa, fb) - 1e-9 || fm > std::max(fa, fb) + 1e-9) {
        monotone = false;
        break;
      }
      if (std::abs(fm) <= 1e-6) {
        const DensityMatrix rho = realize(inst, mid);
        return {mid, rho, purity(rho), attempt};
      }
      if (fa * fm <= 0.0) {
        b = mid;
        fb = fm;
      } else {
        a = mid;
        fa = fm;
      }
    }
    if (!monotone) continue;  // resample fresh random objects

    const double mid = 0.5 * (a + b);
    const DensityMatrix rho = realize(inst, mid);
    const double u = purity(rho);
    if (std::abs(u - target) <= kPurityTol) return {mid, rho, u, attempt};
  }
  throw numerical_error("solve_purity: target purity " + std::to_string(target) +
                        " unreachable for channel " + channel_name(kind) +
                        " after " + std::to_string(kMaxAttempts) + " attempts");
}

std::vector<StateRecord> sample_dataset(int n_states, double purity_lo,
                                        double purity_hi, uint64_t seed,
                                        uint64_t first_stream) {
  if (n_states < 1) throw std::invalid_argument("sample_dataset: n_states < 1");
  if (!(purity_lo > 0.25) || !(purity_hi <= 1.0) || !(purity_lo <= purity_hi))
    throw std::invalid_argument("sample_dataset: invalid purity range");
  std::vector<StateRecord> records;
  records.reserve(n_states);
  for (int i = 0; i < n_states; ++i) {
    const uint64_t stream = first_stream + static_cast<uint64_t>(i);
    Rng rng(seed, stream);
    StateRecord rec;
    rec.id = stream;
    rec.channel = static_cast<ChannelKind>(stream % kNumChannels);
    const double target = rng.uniform(purity_lo, purity_hi);
    const PuritySolution sol = solve_purity(rec.channel, target, rng);
    rec.parameter = sol.parameter;
    rec.purity = sol.purity;
    rec.rho = sol.rho;
    const DensityCheck check = validate_density(rec.rho.mat);
    if (!check.ok)
      throw numerical_error("sample_dataset: record " + std::to_string(i) +
                            " failed validity: " + check.detail);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace qlat
