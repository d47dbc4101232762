#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "qlat/model.hpp"
#include "qlat/qcore.hpp"
#include "qlat/rng.hpp"

namespace qlat {

struct TrainSample {
  std::vector<double> x;  // Pauli expectation vector of the true state
  DensityMatrix rho;      // the true state itself
};

struct TrainConfig {
  int epochs_max = 300;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double lambda_metric = 0.06;
  int pairs_per_batch = 50;
  int patience = 60;
  uint64_t seed = 0;
  DecoderMode mode = DecoderMode::Corrected;
  GradMethod grad_method = GradMethod::ShiftRule;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double recon_loss = 0.0;
  double metric_loss = 0.0;
  double total_loss = 0.0;
  double val_fidelity = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_val_fidelity = 0.0;
};

// One sampled latent/Bures pair. Pairs with d_bures <= 1e-6 are flagged
// invalid and contribute neither loss nor gradient.
struct PairSample {
  int i = 0;
  int j = 0;
  double d_latent = 0.0;
  double d_bures = 0.0;
  bool valid = false;
};

inline constexpr double kBuresExclusionTol = 1e-6;
inline constexpr double kMetricEps = 1e-8;

// mean_i (1 - F(true_i, pred_i)).
double recon_loss(const std::vector<DensityMatrix>& truths,
                  const std::vector<DensityMatrix>& preds);

struct MetricLossResult {
  double value = 0.0;
  int k_valid = 0;  // 0 means no usable pair; value is 0 and flagged
  std::vector<PairSample> pairs;
};

// Samples `n_pairs` distinct index pairs uniformly without replacement
// (capped at C(B,2)) and returns (1/K_valid) sum (d_L/(d_B + 1e-8) - 1)^2
// over the valid ones.
MetricLossResult metric_loss(const std::vector<std::vector<double>>& latents,
                             const std::vector<DensityMatrix>& rhos,
                             int n_pairs, Rng& rng);

double total_loss(double recon, double metric, double lambda);

// d/d(rho_pred) of F(rho_true, rho_pred): with S = sqrt(regularized
// rho_true) and M = S rho_pred S, the gradient is G = tr(sqrt(M)) *
// S M^{-1/2} S, so F(pred + delta) ~ F + Re<G, delta>. The inverse square
// root floors eigenvalues at 1e-12.
ComplexMatrix fidelity_grad_pred(const DensityMatrix& rho_true,
                                 const DensityMatrix& rho_pred);

// Gradient of Re<upstream, rho_pred(theta)> with respect to every circuit
// parameter. Angles use the exact parameter-shift rule at the channel
// level, d rho/d theta_k = (rho(theta_k + pi/2) - rho(theta_k - pi/2))/2;
// noise logits use the affine dependence of the depolarizing channel on p
// chained with the sigmoid derivative. GradMethod::FiniteDifference
// replaces both with central differences (step 1e-5) as a self-check.
std::vector<double> circuit_grad(const CircuitParams& theta,
                                 const ComplexMatrix& upstream,
                                 DecoderMode mode,
                                 GradMethod method = GradMethod::ShiftRule);

// Accumulates parameter gradients (flat layout, see to_flat) for one
// sample given d(loss)/d(theta) and any extra d(loss)/d(z) contribution
// (the metric-loss term). Uses the stored forward context; ReLU
// subgradient at exactly zero is taken as zero.
void accumulate_param_grads(const EncoderContext& ctx,
                            const ModelParams& params,
                            const std::vector<double>& dtheta,
                            const std::vector<double>& dz_extra,
                            std::vector<double>& grads);

struct EvalResult {
  double mean_fidelity = 0.0;
  double median_fidelity = 0.0;
  std::vector<double> per_state;
};

EvalResult evaluate(const ModelParams& params,
                    const std::vector<TrainSample>& data);

// Full-batch Adam training with early stopping on validation mean
// fidelity (strict improvement; stops after `patience` stale epochs) and
// an optional CSV sink receiving one history row per epoch. Returns the
// parameters of the best validation epoch. Sample order, pair draws and
// initialization derive deterministically from config.seed; gradient
// accumulation is serial in sample order, so reruns are bitwise
// reproducible. Non-finite losses or gradients abort with a
// numerical_error naming the epoch, batch and parameter norm.
std::pair<ModelParams, TrainHistory> train(
    const std::vector<TrainSample>& train_set,
    const std::vector<TrainSample>& val_set, const TrainConfig& config,
    std::ostream* history_csv = nullptr);

}  // namespace qlat
