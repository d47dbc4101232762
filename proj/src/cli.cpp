#include "qlat/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qlat/geometry.hpp"
#include "qlat/measurement.hpp"

namespace qlat {

namespace {

// Pair sampling during analysis draws from its own stream so adding draws
// elsewhere never changes which pairs a report is built on.
constexpr uint64_t kAnalysisPairStream = 0xA11A1u;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw std::invalid_argument("cannot create output directory: " + dir +
                                " (" + ec.message() + ")");
}

std::vector<TrainSample> to_samples(const Dataset& ds) {
  std::vector<TrainSample> out;
  out.reserve(ds.records.size());
  for (const StateRecord& rec : ds.records)
    out.push_back(TrainSample{rec.pauli, rec.rho});
  return out;
}

// Latent embedding of every record, one row per state.
RealMatrix embed_latents(const ModelParams& params,
                         const std::vector<StateRecord>& records) {
  const int latent = params.arch().latent;
  RealMatrix z(static_cast<int>(records.size()), latent);
  for (size_t i = 0; i < records.size(); ++i) {
    if (static_cast<int>(records[i].pauli.size()) != params.arch().input)
      throw std::invalid_argument(
          "record " + std::to_string(records[i].id) +
          " has an expectation vector incompatible with the checkpoint");
    const std::vector<double> zi = encode(records[i].pauli, params.enc);
    for (int c = 0; c < latent; ++c) z(static_cast<int>(i), c) = zi[c];
  }
  return z;
}

std::vector<DensityMatrix> states_of(const std::vector<StateRecord>& records) {
  std::vector<DensityMatrix> rhos;
  rhos.reserve(records.size());
  for (const StateRecord& rec : records) rhos.push_back(rec.rho);
  return rhos;
}

std::vector<StateRecord> combined_records(const RunConfig& cfg) {
  if (cfg.train_path.empty() || cfg.val_path.empty())
    throw std::invalid_argument("--train and --val dataset paths are required");
  Dataset tr = load_dataset(cfg.train_path);
  Dataset va = load_dataset(cfg.val_path);
  std::vector<StateRecord> all = std::move(tr.records);
  all.insert(all.end(), std::make_move_iterator(va.records.begin()),
             std::make_move_iterator(va.records.end()));
  return all;
}

void print_channel_counts(const std::vector<StateRecord>& records,
                          std::ostream& out) {
  std::vector<int> counts(kNumChannels, 0);
  for (const StateRecord& rec : records)
    ++counts[static_cast<int>(rec.channel)];
  out << "channel counts:\n";
  for (int c = 0; c < kNumChannels; ++c)
    out << "  " << channel_name(static_cast<ChannelKind>(c)) << ": "
        << counts[c] << "\n";
}

void print_purity_histogram(const std::vector<StateRecord>& records,
                            double lo, double hi, std::ostream& out) {
  constexpr int kBins = 10;
  std::vector<int> bins(kBins, 0);
  double pmin = 1.0, pmax = 0.0, psum = 0.0;
  for (const StateRecord& rec : records) {
    const double t = (rec.purity - lo) / (hi - lo);
    const int b = std::clamp(static_cast<int>(t * kBins), 0, kBins - 1);
    ++bins[b];
    pmin = std::min(pmin, rec.purity);
    pmax = std::max(pmax, rec.purity);
    psum += rec.purity;
  }
  char line[160];
  std::snprintf(line, sizeof(line),
                "purity: min %.6f  mean %.6f  max %.6f\n", pmin,
                psum / records.size(), pmax);
  out << line;
  for (int b = 0; b < kBins; ++b) {
    const double blo = lo + (hi - lo) * b / kBins;
    const double bhi = lo + (hi - lo) * (b + 1) / kBins;
    std::snprintf(line, sizeof(line), "  [%.3f, %.3f%s: %d\n", blo, bhi,
                  b == kBins - 1 ? "]" : ")", bins[b]);
    out << line;
  }
}

AnalysisReport run_analysis(const ModelParams& params,
                            const std::vector<StateRecord>& records,
                            const RunConfig& cfg) {
  const RealMatrix z = embed_latents(params, records);
  const std::vector<DensityMatrix> rhos = states_of(records);

  AnalysisReport rep;
  rep.seed = cfg.seed;
  rep.k_mle = cfg.k_mle;
  rep.k_curv = cfg.k_curv;
  Rng pair_rng(cfg.seed, kAnalysisPairStream);
  rep.corr = geodesic_correlation(z, rhos, cfg.n_pairs, pair_rng);
  rep.mle = mle_dimension(z, cfg.k_mle);
  rep.pca_spec = pca_spectrum(z);
  rep.d_pca_95 = pca_dimension(rep.pca_spec, 0.95);
  rep.d_pca_99 = pca_dimension(rep.pca_spec, 0.99);
  rep.curv = local_curvature(z, cfg.k_curv);
  rep.table = distance_fidelity_table(rep.corr.pairs);
  return rep;
}

void print_report_summary(const AnalysisReport& rep, std::ostream& out) {
  char line[256];
  if (rep.corr.degenerate) {
    out << "correlation: undefined (" << rep.corr.note << ")\n";
  } else {
    char ptxt[40];
    if (rep.corr.p_underflow)
      std::snprintf(ptxt, sizeof(ptxt), "< 1e-300");
    else
      std::snprintf(ptxt, sizeof(ptxt), "%.3g", rep.corr.pearson_p);
    std::snprintf(line, sizeof(line),
                  "correlation (%d pairs): pearson r %.4f (%s), p %s, "
                  "spearman %.4f, R^2 %.4f\n",
                  rep.corr.n_pairs, rep.corr.pearson_r,
                  strength_name(classify_threshold(rep.corr.pearson_r)).c_str(),
                  ptxt, rep.corr.spearman_rho, rep.corr.r_squared);
    out << line;
    std::snprintf(line, sizeof(line),
                  "fit: d_latent = %.4f * d_bures + %.4f (rmse %.4f, mae %.4f)\n",
                  rep.corr.slope, rep.corr.intercept, rep.corr.rmse,
                  rep.corr.mae);
    out << line;
  }
  std::snprintf(line, sizeof(line),
                "dimension: MLE (k=%d) %.2f +/- %.2f, PCA d(95%%) %d, d(99%%) %d\n",
                rep.k_mle, rep.mle.mean, rep.mle.stddev, rep.d_pca_95,
                rep.d_pca_99);
  out << line;
  std::snprintf(line, sizeof(line),
                "curvature (k=%d): mean %.4f +/- %.4f, median %.4f\n",
                rep.k_curv, rep.curv.mean, rep.curv.stddev, rep.curv.median);
  out << line;
}

}  // namespace

TrainConfig to_train_config(const RunConfig& cfg) {
  TrainConfig tc;
  tc.epochs_max = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.learning_rate = cfg.learning_rate;
  tc.lambda_metric = cfg.lambda_metric;
  tc.pairs_per_batch = cfg.pairs_per_batch;
  tc.patience = cfg.patience;
  tc.seed = cfg.seed;
  tc.mode = decoder_mode_from_name(cfg.decoder);
  tc.grad_method = grad_method_from_name(cfg.grad_method);
  return tc;
}

void cmd_generate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.n_train < 1 || cfg.n_val < 1)
    throw std::invalid_argument("generate: need at least one state per split");
  ensure_dir(cfg.out_dir);

  std::vector<StateRecord> train = sample_dataset(
      cfg.n_train, cfg.purity_lo, cfg.purity_hi, cfg.seed, 0);
  std::vector<StateRecord> val =
      sample_dataset(cfg.n_val, cfg.purity_lo, cfg.purity_hi, cfg.seed,
                     static_cast<uint64_t>(cfg.n_train));
  for (StateRecord& rec : train) rec.pauli = expectations(rec.rho);
  for (StateRecord& rec : val) rec.pauli = expectations(rec.rho);

  DatasetHeader header;
  header.seed = cfg.seed;
  header.purity_lo = cfg.purity_lo;
  header.purity_hi = cfg.purity_hi;
  header.pauli_order = measurement_word_order(2);
  save_dataset(cfg.out_dir + "/train.jsonl", header, train);
  save_dataset(cfg.out_dir + "/val.jsonl", header, val);

  std::vector<StateRecord> all = train;
  all.insert(all.end(), val.begin(), val.end());
  out << "wrote " << train.size() << " train and " << val.size()
      << " validation states to " << cfg.out_dir << "\n";
  print_channel_counts(all, out);
  print_purity_histogram(all, cfg.purity_lo, cfg.purity_hi, out);
}

void cmd_train(const RunConfig& cfg, std::ostream& out) {
  if (cfg.train_path.empty() || cfg.val_path.empty())
    throw std::invalid_argument("train: --train and --val dataset paths are required");
  const Dataset dtr = load_dataset(cfg.train_path);
  const Dataset dva = load_dataset(cfg.val_path);
  const TrainConfig tc = to_train_config(cfg);
  ensure_dir(cfg.out_dir);

  std::ostringstream rows;
  const auto [params, hist] =
      train(to_samples(dtr), to_samples(dva), tc, &rows);

  Checkpoint ck;
  ck.mode = tc.mode;
  ck.arch = params.arch();
  ck.params = to_flat(params);
  ck.config = tc;
  ck.best_epoch = hist.best_epoch;
  ck.best_val_fidelity = hist.best_val_fidelity;
  ck.epochs_run = static_cast<int>(hist.epochs.size());
  save_checkpoint(cfg.out_dir + "/checkpoint.json", ck);
  atomic_write_text(cfg.out_dir + "/history.csv",
                    std::string(kHistoryCsvHeader) + "\n" + rows.str());

  char line[200];
  std::snprintf(line, sizeof(line),
                "trained %d epoch(s); best epoch %d with validation mean "
                "fidelity %.6f\n",
                ck.epochs_run, ck.best_epoch, ck.best_val_fidelity);
  out << line;
  const EpochRecord& last = hist.epochs.back();
  std::snprintf(line, sizeof(line),
                "final losses: recon %.6f, metric %.6f, total %.6f\n",
                last.recon_loss, last.metric_loss, last.total_loss);
  out << line;
}

void cmd_analyze(const RunConfig& cfg, std::ostream& out) {
  if (cfg.checkpoint_path.empty())
    throw std::invalid_argument("analyze: --checkpoint is required");
  const Checkpoint ck = load_checkpoint(cfg.checkpoint_path);
  const ModelParams params = checkpoint_params(ck);
  const std::vector<StateRecord> records = combined_records(cfg);
  ensure_dir(cfg.out_dir);

  const AnalysisReport rep = run_analysis(params, records, cfg);
  save_report(cfg.out_dir, rep);
  out << "analyzed " << records.size() << " states; report in " << cfg.out_dir
      << "\n";
  print_report_summary(rep, out);
}

void cmd_sweep_lambda(const RunConfig& cfg, std::ostream& out) {
  if (cfg.lambda_values.empty())
    throw std::invalid_argument("sweep-lambda: at least one --values entry is required");
  if (cfg.train_path.empty() || cfg.val_path.empty())
    throw std::invalid_argument("sweep-lambda: --train and --val dataset paths are required");
  const Dataset dtr = load_dataset(cfg.train_path);
  const Dataset dva = load_dataset(cfg.val_path);
  const std::vector<TrainSample> tr = to_samples(dtr);
  const std::vector<TrainSample> va = to_samples(dva);
  std::vector<StateRecord> all = dtr.records;
  all.insert(all.end(), dva.records.begin(), dva.records.end());
  ensure_dir(cfg.out_dir);

  std::string csv = "lambda,val_fidelity,pearson_r\n";
  for (double lambda : cfg.lambda_values) {
    TrainConfig tc = to_train_config(cfg);
    tc.lambda_metric = lambda;
    const auto [params, hist] = train(tr, va, tc, nullptr);

    // The same analysis stream for every lambda, so each run scores the
    // identical pair sample and the r values are directly comparable.
    const RealMatrix z = embed_latents(params, all);
    Rng pair_rng(cfg.seed, kAnalysisPairStream);
    const CorrelationReport corr =
        geodesic_correlation(z, states_of(all), cfg.n_pairs, pair_rng);

    char row[120];
    std::snprintf(row, sizeof(row), "%.17g,%.17g,%.17g\n", lambda,
                  hist.best_val_fidelity, corr.pearson_r);
    csv += row;
    std::snprintf(row, sizeof(row),
                  "lambda %.4f: val fidelity %.6f, pearson r %.6f\n", lambda,
                  hist.best_val_fidelity, corr.pearson_r);
    out << row;
  }
  atomic_write_text(cfg.out_dir + "/sweep.csv", csv);
}

}  // namespace qlat
