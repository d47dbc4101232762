#include "qlat/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>

namespace qlat {

namespace {

constexpr double kHalfPi = 1.5707963267948966;
constexpr double kFdStep = 1e-5;
constexpr double kInvSqrtFloor = 1e-12;  // eigenvalue floor inside M^{-1/2}

// Stream ids for the independent random sequences a run consumes. Keeping
// them disjoint means adding draws to one phase never perturbs another.
constexpr uint64_t kInitStream = 0;
constexpr uint64_t kShuffleStreamBase = 1ull << 16;  // + epoch
constexpr uint64_t kPairStreamBase = 1ull << 32;     // + epoch * 2^16 + batch

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Shared pair-sampling core; `bures_of` supplies d_B for an index pair so
// the training loop can reuse cached distances between fixed states.
MetricLossResult metric_core(const std::vector<std::vector<double>>& latents,
                             int n_pairs, Rng& rng,
                             const std::function<double(int, int)>& bures_of) {
  MetricLossResult res;
  const int b = static_cast<int>(latents.size());
  if (b < 2 || n_pairs <= 0) return res;

  std::vector<std::pair<int, int>> all;
  all.reserve(static_cast<size_t>(b) * (b - 1) / 2);
  for (int i = 0; i < b; ++i)
    for (int j = i + 1; j < b; ++j) all.emplace_back(i, j);

  // Partial Fisher-Yates: the first k entries are a uniform sample of
  // distinct pairs.
  const int k = std::min<size_t>(n_pairs, all.size());
  for (int s = 0; s < k; ++s) {
    const size_t pick = s + rng.below(all.size() - s);
    std::swap(all[s], all[pick]);
  }

  double sum = 0.0;
  res.pairs.reserve(k);
  for (int s = 0; s < k; ++s) {
    PairSample p;
    p.i = all[s].first;
    p.j = all[s].second;
    p.d_latent = euclidean(latents[p.i], latents[p.j]);
    p.d_bures = bures_of(p.i, p.j);
    p.valid = p.d_bures > kBuresExclusionTol;
    if (p.valid) {
      const double r = p.d_latent / (p.d_bures + kMetricEps);
      sum += (r - 1.0) * (r - 1.0);
      ++res.k_valid;
    }
    res.pairs.push_back(p);
  }
  res.value = res.k_valid > 0 ? sum / res.k_valid : 0.0;
  return res;
}

// d(Re<upstream, rho(theta)>)/d(component k) by a central difference.
double fd_component(const CircuitParams& theta, const ComplexMatrix& upstream,
                    DecoderMode mode, int k) {
  CircuitParams tp = theta;
  CircuitParams tm = theta;
  double& vp = k < kNumAngles ? tp.angles[k] : tp.noise_logits[k - kNumAngles];
  double& vm = k < kNumAngles ? tm.angles[k] : tm.noise_logits[k - kNumAngles];
  vp += kFdStep;
  vm -= kFdStep;
  const double fp = real_inner(upstream, decode(tp, mode).mat);
  const double fm = real_inner(upstream, decode(tm, mode).mat);
  return (fp - fm) / (2.0 * kFdStep);
}

struct ParamLayout {
  int ow1, ob1, ow2, ob2, ow3, ob3, ow4, ob4, total;

  ParamLayout(const ModelArch& a, DecoderMode mode) {
    const int t = theta_dim_for(mode);
    ow1 = 0;
    ob1 = ow1 + a.hidden1 * a.input;
    ow2 = ob1 + a.hidden1;
    ob2 = ow2 + a.hidden2 * a.hidden1;
    ow3 = ob2 + a.hidden2;
    ob3 = ow3 + a.latent * a.hidden2;
    ow4 = ob3 + a.latent;
    ob4 = ow4 + t * a.latent;
    total = ob4 + t;
  }
};

// grads[off .. off + |d| * |in|] += d (x) in, row-major.
void add_outer(std::vector<double>& grads, int off,
               const std::vector<double>& d, const std::vector<double>& in) {
  int p = off;
  for (double di : d) {
    if (di == 0.0) {
      p += static_cast<int>(in.size());
      continue;
    }
    for (double iv : in) grads[p++] += di * iv;
  }
}

void add_vec(std::vector<double>& grads, int off, const std::vector<double>& d) {
  for (size_t i = 0; i < d.size(); ++i) grads[off + i] += d[i];
}

std::string diag_suffix(int epoch, int batch, const std::vector<double>& flat) {
  double s = 0.0;
  for (double v : flat) s += v * v;
  return " (epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) +
         ", parameter norm " + std::to_string(std::sqrt(s)) + ")";
}

}  // namespace

double recon_loss(const std::vector<DensityMatrix>& truths,
                  const std::vector<DensityMatrix>& preds) {
  if (truths.empty() || truths.size() != preds.size())
    throw std::invalid_argument("recon_loss: batch size mismatch or empty");
  double s = 0.0;
  for (size_t i = 0; i < truths.size(); ++i)
    s += 1.0 - fidelity(truths[i], preds[i]);
  return s / truths.size();
}

MetricLossResult metric_loss(const std::vector<std::vector<double>>& latents,
                             const std::vector<DensityMatrix>& rhos,
                             int n_pairs, Rng& rng) {
  if (latents.size() != rhos.size())
    throw std::invalid_argument("metric_loss: latents/states size mismatch");
  return metric_core(latents, n_pairs, rng, [&](int i, int j) {
    return bures_angle(rhos[i], rhos[j]);
  });
}

double total_loss(double recon, double metric, double lambda) {
  return recon + lambda * metric;
}

ComplexMatrix fidelity_grad_pred(const DensityMatrix& rho_true,
                                 const DensityMatrix& rho_pred) {
  if (rho_true.dim() != rho_pred.dim())
    throw std::invalid_argument("fidelity_grad_pred: dimension mismatch");
  const ComplexMatrix s =
      sqrt_psd(DensityMatrix{regularize_state(rho_true.mat)});
  const ComplexMatrix m = hermitized(s * rho_pred.mat * s);
  const Spectrum spec = herm_eig(m);

  std::vector<double> clipped = spec.eigenvalues;
  clip_spectrum_to_psd(clipped);
  double tr_root = 0.0;
  for (double mu : clipped) tr_root += std::sqrt(mu);

  std::vector<double> inv_root(spec.eigenvalues.size());
  for (size_t i = 0; i < inv_root.size(); ++i)
    inv_root[i] = 1.0 / std::sqrt(std::max(spec.eigenvalues[i], kInvSqrtFloor));
  const ComplexMatrix m_inv_half = spectral_function(spec, inv_root);
  return hermitized(tr_root * (s * m_inv_half * s));
}

std::vector<double> circuit_grad(const CircuitParams& theta,
                                 const ComplexMatrix& upstream,
                                 DecoderMode mode, GradMethod method) {
  if (static_cast<int>(theta.angles.size()) != kNumAngles)
    throw std::invalid_argument("circuit_grad: expected 36 angles");
  const size_t want_logits = mode == DecoderMode::Corrected ? 2 : 0;
  if (theta.noise_logits.size() != want_logits)
    throw std::invalid_argument("circuit_grad: noise logit count mismatch");
  if (upstream.rows != 4 || upstream.cols != 4)
    throw std::invalid_argument("circuit_grad: upstream must be 4x4");

  const int t_dim = theta_dim_for(mode);
  std::vector<double> g(t_dim, 0.0);

  if (method == GradMethod::FiniteDifference) {
    for (int k = 0; k < t_dim; ++k) g[k] = fd_component(theta, upstream, mode, k);
    return g;
  }

  // Rotation angles enter only through the unitary; the shift rule
  //   d rho / d theta_k = (rho(theta_k + pi/2) - rho(theta_k - pi/2)) / 2
  // is exact and survives the (linear) depolarizing stage unchanged.
  for (int k = 0; k < kNumAngles; ++k) {
    CircuitParams tp = theta;
    CircuitParams tm = theta;
    tp.angles[k] += kHalfPi;
    tm.angles[k] -= kHalfPi;
    const ComplexMatrix diff = decode(tp, mode).mat - decode(tm, mode).mat;
    g[k] = 0.5 * real_inner(upstream, diff);
  }

  if (mode == DecoderMode::Corrected) {
    // The output is affine in each depolarization probability, so
    // d rho_out / d p_j is the remaining pipeline applied to
    // (mix_j - id)(input of stage j); chain with dp/dlogit = p (1 - p).
    const ComplexMatrix u = build_unitary(theta.angles);
    ComplexMatrix ground(4, 4);
    ground(0, 0) = 1.0;
    const DensityMatrix rho_u{hermitized(u * ground * adjoint(u))};
    const double p0 = sigmoid(theta.noise_logits[0]);
    const double p1 = sigmoid(theta.noise_logits[1]);

    const ComplexMatrix diff0 = qubit_mix(rho_u.mat, 0) - rho_u.mat;
    const ComplexMatrix through1 =
        (1.0 - p1) * diff0 + p1 * qubit_mix(diff0, 1);
    g[kNumAngles + 0] = real_inner(upstream, through1) * p0 * (1.0 - p0);

    const DensityMatrix after0 = depolarize_qubit(rho_u, 0, p0);
    const ComplexMatrix diff1 = qubit_mix(after0.mat, 1) - after0.mat;
    g[kNumAngles + 1] = real_inner(upstream, diff1) * p1 * (1.0 - p1);
  }
  return g;
}

void accumulate_param_grads(const EncoderContext& ctx,
                            const ModelParams& params,
                            const std::vector<double>& dtheta,
                            const std::vector<double>& dz_extra,
                            std::vector<double>& grads) {
  const ModelArch arch = params.arch();
  const ParamLayout lay(arch, params.mode);
  if (static_cast<int>(grads.size()) != lay.total)
    throw std::invalid_argument("accumulate_param_grads: grads size mismatch");
  if (static_cast<int>(dtheta.size()) != params.theta_dim())
    throw std::invalid_argument("accumulate_param_grads: dtheta size mismatch");
  if (!dz_extra.empty() && static_cast<int>(dz_extra.size()) != arch.latent)
    throw std::invalid_argument("accumulate_param_grads: dz_extra size mismatch");

  // Latent map: theta = W4 z + b4.
  add_outer(grads, lay.ow4, dtheta, ctx.z);
  add_vec(grads, lay.ob4, dtheta);
  std::vector<double> dz = mul_transpose(params.map.w4, dtheta);
  for (size_t i = 0; i < dz_extra.size(); ++i) dz[i] += dz_extra[i];

  // Output layer of the encoder is linear: z = W3 h2 + b3.
  add_outer(grads, lay.ow3, dz, ctx.h2);
  add_vec(grads, lay.ob3, dz);

  std::vector<double> da2 = mul_transpose(params.enc.w3, dz);
  for (size_t i = 0; i < da2.size(); ++i)
    if (ctx.a2[i] <= 0.0) da2[i] = 0.0;  // ReLU; subgradient 0 at the kink
  add_outer(grads, lay.ow2, da2, ctx.h1);
  add_vec(grads, lay.ob2, da2);

  std::vector<double> da1 = mul_transpose(params.enc.w2, da2);
  for (size_t i = 0; i < da1.size(); ++i)
    if (ctx.a1[i] <= 0.0) da1[i] = 0.0;
  add_outer(grads, lay.ow1, da1, ctx.x);
  add_vec(grads, lay.ob1, da1);
}

EvalResult evaluate(const ModelParams& params,
                    const std::vector<TrainSample>& data) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty data");
  EvalResult r;
  r.per_state.reserve(data.size());
  for (const TrainSample& s : data) {
    const ForwardResult f = forward(s.x, params);
    r.per_state.push_back(fidelity(s.rho, f.rho_pred));
  }
  r.mean_fidelity =
      std::accumulate(r.per_state.begin(), r.per_state.end(), 0.0) /
      r.per_state.size();
  std::vector<double> sorted = r.per_state;
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  r.median_fidelity = n % 2 == 1 ? sorted[n / 2]
                                 : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return r;
}

std::pair<ModelParams, TrainHistory> train(
    const std::vector<TrainSample>& train_set,
    const std::vector<TrainSample>& val_set, const TrainConfig& config,
    std::ostream* history_csv) {
  if (train_set.empty() || val_set.empty())
    throw std::invalid_argument("train: train and validation sets must be nonempty");
  if (config.batch_size < 1 || config.epochs_max < 1 || config.patience < 1 ||
      config.pairs_per_batch < 0)
    throw std::invalid_argument("train: nonpositive size, epoch or patience setting");
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.lambda_metric))
    throw std::invalid_argument("train: bad learning rate or lambda");
  for (const TrainSample& s : train_set)
    if (s.x.size() != 15 || s.rho.dim() != 4)
      throw std::invalid_argument("train: samples must be 2-qubit (15 expectations)");

  Rng init_rng(config.seed, kInitStream);
  ModelParams params = init_params(init_rng, config.mode);
  const ModelArch arch = params.arch();
  const int pcount = param_count(arch, config.mode);

  std::vector<double> adam_m(pcount, 0.0);
  std::vector<double> adam_v(pcount, 0.0);
  long step = 0;

  TrainHistory hist;
  hist.best_val_fidelity = -std::numeric_limits<double>::infinity();
  ModelParams best = params;

  // Bures distances between fixed training states never change; cache them
  // across epochs keyed by the (unordered) global index pair.
  std::unordered_map<uint64_t, double> bures_cache;
  const auto cached_bures = [&](int gi, int gj) {
    const uint64_t lo = std::min(gi, gj);
    const uint64_t hi = std::max(gi, gj);
    const uint64_t key = (lo << 32) | hi;
    const auto it = bures_cache.find(key);
    if (it != bures_cache.end()) return it->second;
    const double d = bures_angle(train_set[lo].rho, train_set[hi].rho);
    bures_cache.emplace(key, d);
    return d;
  };

  const int n = static_cast<int>(train_set.size());
  std::vector<int> order(n);

  for (int epoch = 1; epoch <= config.epochs_max; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(config.seed, kShuffleStreamBase + epoch);
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.below(i + 1));
      std::swap(order[i], order[j]);
    }

    double recon_sum = 0.0;
    double metric_sum = 0.0;
    int batch_index = 0;

    for (int start = 0; start < n; start += config.batch_size, ++batch_index) {
      const int bsz = std::min(config.batch_size, n - start);
      std::vector<ForwardResult> fwd(bsz);
      std::vector<std::vector<double>> latents(bsz);
      double batch_recon = 0.0;
      for (int b = 0; b < bsz; ++b) {
        const TrainSample& s = train_set[order[start + b]];
        fwd[b] = forward(s.x, params);
        latents[b] = fwd[b].enc.z;
        batch_recon += 1.0 - fidelity(s.rho, fwd[b].rho_pred);
      }
      batch_recon /= bsz;

      Rng pair_rng(config.seed, kPairStreamBase +
                                    (static_cast<uint64_t>(epoch) << 16) +
                                    static_cast<uint64_t>(batch_index));
      const MetricLossResult ml =
          metric_core(latents, config.pairs_per_batch, pair_rng,
                      [&](int i, int j) {
                        return cached_bures(order[start + i], order[start + j]);
                      });
      if (!std::isfinite(batch_recon) || !std::isfinite(ml.value))
        throw numerical_error("train: non-finite loss" +
                              diag_suffix(epoch, batch_index, to_flat(params)));

      // d(metric term)/dz: for each valid pair, with r = d_L/(d_B + eps),
      //   d/d z_i = (2 lambda / K_valid) (r - 1)/(d_B + eps) (z_i - z_j)/d_L.
      std::vector<std::vector<double>> dz_extra(
          bsz, std::vector<double>(arch.latent, 0.0));
      if (config.lambda_metric != 0.0 && ml.k_valid > 0) {
        const double scale = 2.0 * config.lambda_metric / ml.k_valid;
        for (const PairSample& p : ml.pairs) {
          if (!p.valid || p.d_latent <= 0.0) continue;
          const double denom = p.d_bures + kMetricEps;
          const double coef =
              scale * (p.d_latent / denom - 1.0) / (denom * p.d_latent);
          for (int t = 0; t < arch.latent; ++t) {
            const double step_t = coef * (latents[p.i][t] - latents[p.j][t]);
            dz_extra[p.i][t] += step_t;
            dz_extra[p.j][t] -= step_t;
          }
        }
      }

      std::vector<double> grads(pcount, 0.0);
      for (int b = 0; b < bsz; ++b) {
        const TrainSample& s = train_set[order[start + b]];
        // batch recon = (1/B) sum (1 - F), so each sample contributes
        // -(1/B) dF/d(rho_pred) upstream of the circuit parameters.
        const ComplexMatrix upstream =
            (-1.0 / bsz) * fidelity_grad_pred(s.rho, fwd[b].rho_pred);
        const std::vector<double> dtheta =
            circuit_grad(fwd[b].theta, upstream, config.mode, config.grad_method);
        accumulate_param_grads(fwd[b].enc, params, dtheta, dz_extra[b], grads);
      }

      double grad_sq = 0.0;
      for (double g : grads) grad_sq += g * g;
      if (!std::isfinite(grad_sq))
        throw numerical_error("train: non-finite gradient" +
                              diag_suffix(epoch, batch_index, to_flat(params)));

      ++step;
      std::vector<double> flat = to_flat(params);
      const double c1 = 1.0 - std::pow(config.adam_beta1, step);
      const double c2 = 1.0 - std::pow(config.adam_beta2, step);
      for (int i = 0; i < pcount; ++i) {
        adam_m[i] = config.adam_beta1 * adam_m[i] +
                    (1.0 - config.adam_beta1) * grads[i];
        adam_v[i] = config.adam_beta2 * adam_v[i] +
                    (1.0 - config.adam_beta2) * grads[i] * grads[i];
        flat[i] -= config.learning_rate * (adam_m[i] / c1) /
                   (std::sqrt(adam_v[i] / c2) + config.adam_eps);
      }
      params = from_flat(flat, arch, config.mode);

      recon_sum += batch_recon * bsz;
      metric_sum += ml.value * bsz;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.recon_loss = recon_sum / n;
    rec.metric_loss = metric_sum / n;
    rec.total_loss = total_loss(rec.recon_loss, rec.metric_loss,
                                config.lambda_metric);
    rec.val_fidelity = evaluate(params, val_set).mean_fidelity;
    if (!std::isfinite(rec.val_fidelity))
      throw numerical_error("train: non-finite validation fidelity" +
                            diag_suffix(epoch, -1, to_flat(params)));
    hist.epochs.push_back(rec);

    if (history_csv != nullptr) {
      char row[256];
      std::snprintf(row, sizeof(row), "%d,%.17g,%.17g,%.17g,%.17g\n", rec.epoch,
                    rec.recon_loss, rec.metric_loss, rec.total_loss,
                    rec.val_fidelity);
      (*history_csv) << row;
    }

    if (rec.val_fidelity > hist.best_val_fidelity) {
      hist.best_val_fidelity = rec.val_fidelity;
      hist.best_epoch = epoch;
      best = params;
    }
    if (epoch - hist.best_epoch >= config.patience) break;
  }
  return {std::move(best), hist};
}

}  // namespace qlat
