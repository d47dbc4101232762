#pragma once

#include <vector>

#include "qlat/qcore.hpp"
#include "qlat/real_matrix.hpp"
#include "qlat/rng.hpp"

namespace qlat {

// How circuit outputs are turned into a predicted state.
//  - Literal: the circuit conjugates the maximally mixed state,
//    U (I/4) U^dagger, which is I/4 for every unitary: the decoder is
//    constant and all predicted expectations are identically zero. Kept
//    as a selectable mode precisely because that degeneracy is a result.
//  - Corrected: the circuit acts on |00><00| and two learned logits set
//    per-qubit depolarization probabilities, making purity tunable.
enum class DecoderMode { Literal, Corrected };

enum class GradMethod { ShiftRule, FiniteDifference };

inline constexpr int kCircuitLayers = 6;
inline constexpr int kNumAngles = 36;  // 6 layers x 2 qubits x (RX, RY, RZ)

// Layer widths of the classical encoder; defaults are the production
// shapes, but every operation works for arbitrary widths (tests use a
// shrunken 15 -> 8 -> 6 -> 4 model).
struct ModelArch {
  int input = 15;
  int hidden1 = 256;
  int hidden2 = 128;
  int latent = 20;
};

struct EncoderParams {
  RealMatrix w1, w2, w3;
  std::vector<double> b1, b2, b3;
};

struct LatentMapParams {
  RealMatrix w4;  // (36 or 38) x latent
  std::vector<double> b4;
};

struct ModelParams {
  EncoderParams enc;
  LatentMapParams map;
  DecoderMode mode = DecoderMode::Corrected;

  ModelArch arch() const;
  int theta_dim() const { return map.w4.rows; }
};

// Circuit inputs produced by the latent map: 36 rotation angles plus, in
// Corrected mode, two noise logits that decode applies a sigmoid to.
struct CircuitParams {
  std::vector<double> angles;        // size 36
  std::vector<double> noise_logits;  // size 0 (Literal) or 2
};

int theta_dim_for(DecoderMode mode);

// He-style init: zero-mean Gaussian with variance 2/fan_in for the three
// encoder layers, variance 1/latent for the latent map, all biases zero.
// Weights are drawn row-major in layer order, so the draw sequence is
// reproducible from (rng state, arch, mode).
ModelParams init_params(Rng& rng, DecoderMode mode, const ModelArch& arch = {});

// Intermediate encoder values kept for backpropagation.
struct EncoderContext {
  std::vector<double> x, a1, h1, a2, h2, z;
};

std::vector<double> encode(const std::vector<double>& x, const EncoderParams& p);
EncoderContext encode_ctx(const std::vector<double>& x, const EncoderParams& p);

// theta = W4 z + b4, split into angles [0..35] and noise logits [36..].
CircuitParams latent_to_params(const std::vector<double>& z,
                               const LatentMapParams& p, DecoderMode mode);

// Six-layer hardware-efficient ansatz on 2 qubits. As a matrix product,
//   U = [CNOT R^(0)] [CNOT R^(1)] ... [CNOT R^(5)],
// with R^(l) = R_0^(l) (x) R_1^(l) and per-qubit R_j^(l) =
// RZ(theta[6l+3j+2]) RY(theta[6l+3j+1]) RX(theta[6l+3j]); within a layer
// the rotations act on the state before the CNOT (control qubit 0, target
// qubit 1). All-zero angles give the identity (the six CNOTs cancel in
// pairs).
ComplexMatrix build_unitary(const std::vector<double>& angles);

// I/2 on `qubit` tensored with the partial trace over it; the p = 1 limit
// of the depolarizing channel.
ComplexMatrix qubit_mix(const ComplexMatrix& m, int qubit);

// (1-p) rho + p (I/2 (x) tr_qubit rho): full single-qubit depolarization
// with probability p. Affine in p, which the training module exploits for
// the noise-logit gradients.
DensityMatrix depolarize_qubit(const DensityMatrix& rho, int qubit, double p);

double sigmoid(double x);

// Applies the decoder for the given mode. Literal conjugates I/4 and
// is therefore constant; Corrected prepares U|00><00|U^dagger followed by
// per-qubit depolarization with p_j = sigmoid(noise_logits[j]).
DensityMatrix decode(const CircuitParams& theta, DecoderMode mode);

struct ForwardResult {
  EncoderContext enc;
  CircuitParams theta;
  DensityMatrix rho_pred;
  std::vector<double> x_hat;
};

// encode -> latent_to_params -> decode -> expectations.
ForwardResult forward(const std::vector<double>& x, const ModelParams& params);

// Flattened parameter order: W1, b1, W2, b2, W3, b3, W4, b4, matrices
// row-major. This is the layout of optimizer state and checkpoints.
int param_count(const ModelArch& arch, DecoderMode mode);
std::vector<double> to_flat(const ModelParams& params);
ModelParams from_flat(const std::vector<double>& flat, const ModelArch& arch,
                      DecoderMode mode);

}  // namespace qlat
