#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qlat/geometry.hpp"
#include "qlat/model.hpp"
#include "qlat/stategen.hpp"
#include "qlat/training.hpp"

namespace qlat {

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr int kCheckpointFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;

inline constexpr const char* kHistoryCsvHeader =
    "epoch,recon_loss,metric_loss,total_loss,val_fidelity";

std::string decoder_mode_name(DecoderMode m);
DecoderMode decoder_mode_from_name(const std::string& s);
std::string grad_method_name(GradMethod g);
GradMethod grad_method_from_name(const std::string& s);

// Writes to `path`.tmp first and renames into place, so a crash never
// leaves a half-written file behind. Unwritable paths raise
// std::invalid_argument.
void atomic_write_text(const std::string& path, const std::string& content);

struct DatasetHeader {
  int format_version = kDatasetFormatVersion;
  int n_qubits = 2;
  uint64_t seed = 0;
  double purity_lo = 0.0;
  double purity_hi = 0.0;
  std::vector<std::string> pauli_order;  // canonical measurement word order
};

struct Dataset {
  DatasetHeader header;
  std::vector<StateRecord> records;
};

// Dataset files are line-delimited: a header object on the first line and
// one record object per following line. Complex entries are [re, im]
// pairs; all reals carry full round-trip decimal precision, so identical
// states serialize to identical bytes. Loading re-validates every state
// and the header's Pauli word order.
void save_dataset(const std::string& path, const DatasetHeader& header,
                  const std::vector<StateRecord>& records);
Dataset load_dataset(const std::string& path);

struct Checkpoint {
  int format_version = kCheckpointFormatVersion;
  DecoderMode mode = DecoderMode::Corrected;
  ModelArch arch;
  std::vector<double> params;  // to_flat layout (W1,b1,W2,b2,W3,b3,W4,b4)
  TrainConfig config;
  int best_epoch = 0;
  double best_val_fidelity = 0.0;
  int epochs_run = 0;
};

// Single structured-text object; round-trips bitwise.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

ModelParams checkpoint_params(const Checkpoint& ckpt);

// Everything cmd_analyze gathers: correlation, dimension, curvature and
// the distance-fidelity table, plus the knobs that produced them.
struct AnalysisReport {
  uint64_t seed = 0;
  int k_mle = 0;
  int k_curv = 0;
  CorrelationReport corr;
  MleResult mle;
  std::vector<double> pca_spec;
  int d_pca_95 = 0;
  int d_pca_99 = 0;
  CurvatureReport curv;
  std::vector<DistanceFidelityRow> table;
};

// report.json plus companion CSVs (pairs.csv, pca_spectrum.csv,
// curvature.csv, distance_fidelity.csv) inside `dir`.
void save_report(const std::string& dir, const AnalysisReport& rep);

}  // namespace qlat
