#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qlat/qcore.hpp"
#include "qlat/rng.hpp"

namespace qlat {

enum class ChannelKind {
  Depolarized,
  Werner,
  Isotropic,
  AmplitudeDamped,
  PhaseDamped,
  Thermal,
  SeparableProduct,
};

inline constexpr int kNumChannels = 7;

std::string channel_name(ChannelKind kind);
ChannelKind channel_from_name(const std::string& name);

// One generated state: the channel that produced it, the channel parameter
// the purity search settled on, the achieved purity, the density matrix,
// and (once measured) its Pauli expectation vector.
struct StateRecord {
  uint64_t id = 0;
  ChannelKind channel = ChannelKind::Depolarized;
  double parameter = 0.0;
  double purity = 0.0;
  DensityMatrix rho;
  std::vector<double> pauli;
};

// Haar-random pure state of `n_qubits` qubits as a density matrix:
// normalized vector of i.i.d. standard complex Gaussians.
DensityMatrix haar_pure(int n_qubits, Rng& rng);

// GUE draw H = (A + A^dagger)/2 with A_ij i.i.d. CN(0,1); Hermitian with
// exactly real diagonal.
ComplexMatrix gue_hamiltonian(int dim, Rng& rng);

// The random ingredients of one channel draw, sampled once and then held
// fixed while the parameter is tuned.
struct ChannelInstance {
  ChannelKind kind = ChannelKind::Depolarized;
  DensityMatrix pure;                  // 2-qubit Haar input where applicable
  ComplexMatrix hamiltonian;           // Thermal only
  std::vector<DensityMatrix> factors;  // SeparableProduct: 1-qubit pures
};

ChannelInstance sample_channel_instance(ChannelKind kind, Rng& rng);

// Parameter range searched for each channel: [0, 1] for mixing/damping
// probabilities, [0, 50] for the thermal inverse temperature.
void channel_param_range(ChannelKind kind, double& lo, double& hi);

// Builds the state of `instance` at the given channel parameter.
DensityMatrix realize(const ChannelInstance& instance, double param);

// Fresh random ingredients + realize in one call.
DensityMatrix make_state(ChannelKind kind, double param, Rng& rng);

// Closed-form purities used as search oracles in tests. Both are exact for
// pure inputs: tr(rho^2) = (1-p)^2 + 2p(1-p)/d + p^2/d for the depolarized
// family and p^2 + p(1-p)/2 + (1-p)^2/4 for the Werner family.
double depolarized_purity(double p, int dim);
double werner_purity(double p);

struct PuritySolution {
  double parameter = 0.0;
  DensityMatrix rho;
  double purity = 0.0;
  int attempts = 0;
};

// Finds a channel parameter whose state purity matches `target` within
// 0.01 by bisection over the channel parameter. The random objects are
// sampled once per attempt and held fixed during the search; the bracket
// is located by a coarse scan when the endpoints do not straddle the
// target (amplitude damping is not monotone over the full range).
// Monotonicity inside the bracket is asserted during bisection; on
// violation or an unreachable target, fresh random objects are drawn, up
// to 8 attempts, after which numerical_error is thrown.
PuritySolution solve_purity(ChannelKind kind, double target, Rng& rng);

// Draws n_states records, channels assigned round-robin in enum order so
// counts differ by at most one, purity targets uniform in [purity_lo,
// purity_hi]. Record i consumes the dedicated stream (seed, first_stream +
// i) and takes that stream index as its id, so any record can be
// regenerated independently and a validation set can continue where the
// training set stopped. Pauli vectors are left empty.
std::vector<StateRecord> sample_dataset(int n_states, double purity_lo,
                                        double purity_hi, uint64_t seed,
                                        uint64_t first_stream = 0);

}  // namespace qlat
