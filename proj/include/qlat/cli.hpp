#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qlat/io.hpp"

namespace qlat {

// Every setting of every command with its default. Fields are filled from
// (in increasing precedence) built-in defaults, the QLAT_SEED environment
// variable (seed only), a --config file, and command-line flags.
struct RunConfig {
  uint64_t seed = 0;
  std::string out_dir = ".";

  // generate
  int n_train = 2000;
  int n_val = 500;
  double purity_lo = 0.85;
  double purity_hi = 0.95;

  // train
  std::string train_path;
  std::string val_path;
  int epochs = 300;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double lambda_metric = 0.06;
  int pairs_per_batch = 50;
  int patience = 60;
  std::string decoder = "corrected";   // or "literal"
  std::string grad_method = "shift";   // or "fd"

  // analyze
  std::string checkpoint_path;
  int k_mle = 15;
  int k_curv = 25;
  int n_pairs = 500;

  // sweep-lambda
  std::vector<double> lambda_values;
};

TrainConfig to_train_config(const RunConfig& cfg);

// Commands write their primary outputs under cfg.out_dir and a human
// summary to `out`. They throw std::invalid_argument on usage problems and
// numerical_error on numerical failures; exit-code mapping lives in the
// binary front end.

// Writes train.jsonl and val.jsonl; prints channel counts and a purity
// histogram.
void cmd_generate(const RunConfig& cfg, std::ostream& out);

// Trains on train_path/val_path; writes checkpoint.json and history.csv.
void cmd_train(const RunConfig& cfg, std::ostream& out);

// Loads a checkpoint, embeds the combined train+validation states, and
// writes report.json plus companion CSVs.
void cmd_analyze(const RunConfig& cfg, std::ostream& out);

// One train+correlation run per lambda value; writes sweep.csv with a
// (lambda, val fidelity, pearson r) row per value.
void cmd_sweep_lambda(const RunConfig& cfg, std::ostream& out);

}  // namespace qlat
