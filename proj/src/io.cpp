#include "qlat/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "qlat/measurement.hpp"

namespace qlat {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json rho_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows; ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols; ++c)
      row.push_back(json::array({std::real(m(r, c)), std::imag(m(r, c))}));
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix rho_from_json(const json& rows) {
  const int n = static_cast<int>(rows.size());
  ComplexMatrix m(n, n);
  for (int r = 0; r < n; ++r) {
    if (static_cast<int>(rows[r].size()) != n)
      throw std::invalid_argument("dataset: non-square state matrix");
    for (int c = 0; c < n; ++c)
      m(r, c) = cplx(rows[r][c][0].get<double>(), rows[r][c][1].get<double>());
  }
  return m;
}

json parse_line(const std::string& line, const std::string& what) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded())
    throw std::invalid_argument("failed to parse " + what);
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::string decoder_mode_name(DecoderMode m) {
  return m == DecoderMode::Literal ? "literal" : "corrected";
}

DecoderMode decoder_mode_from_name(const std::string& s) {
  if (s == "literal") return DecoderMode::Literal;
  if (s == "corrected") return DecoderMode::Corrected;
  throw std::invalid_argument("unknown decoder mode: " + s);
}

std::string grad_method_name(GradMethod g) {
  return g == GradMethod::ShiftRule ? "shift" : "fd";
}

GradMethod grad_method_from_name(const std::string& s) {
  if (s == "shift") return GradMethod::ShiftRule;
  if (s == "fd") return GradMethod::FiniteDifference;
  throw std::invalid_argument("unknown gradient method: " + s);
}

void atomic_write_text(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot write file: " + path);
    out << content;
    out.flush();
    if (!out) throw std::invalid_argument("write failed: " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::invalid_argument("cannot move temp file into place: " + path);
}

void save_dataset(const std::string& path, const DatasetHeader& header,
                  const std::vector<StateRecord>& records) {
  json head;
  head["kind"] = "dataset";
  head["format_version"] = header.format_version;
  head["n_qubits"] = header.n_qubits;
  head["n_states"] = records.size();
  head["seed"] = header.seed;
  head["purity_lo"] = header.purity_lo;
  head["purity_hi"] = header.purity_hi;
  head["pauli_order"] = header.pauli_order;

  std::string out = head.dump();
  out.push_back('\n');
  for (const StateRecord& rec : records) {
    json j;
    j["id"] = rec.id;
    j["channel"] = channel_name(rec.channel);
    j["parameter"] = rec.parameter;
    j["purity"] = rec.purity;
    j["pauli"] = rec.pauli;
    j["rho"] = rho_to_json(rec.rho.mat);
    out += j.dump();
    out.push_back('\n');
  }
  atomic_write_text(path, out);
}

Dataset load_dataset(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("dataset file is empty: " + path);
  const json head = parse_line(line, "dataset header");
  if (head.value("kind", "") != "dataset" ||
      head.value("format_version", -1) != kDatasetFormatVersion)
    throw std::invalid_argument("not a version-" +
                                std::to_string(kDatasetFormatVersion) +
                                " dataset file: " + path);

  Dataset ds;
  ds.header.format_version = head["format_version"].get<int>();
  ds.header.n_qubits = head["n_qubits"].get<int>();
  ds.header.seed = head["seed"].get<uint64_t>();
  ds.header.purity_lo = head["purity_lo"].get<double>();
  ds.header.purity_hi = head["purity_hi"].get<double>();
  ds.header.pauli_order = head["pauli_order"].get<std::vector<std::string>>();

  if (ds.header.n_qubits != 2)
    throw std::invalid_argument("dataset: only 2-qubit files are supported");
  const std::vector<std::string> canon = measurement_word_order(2);
  if (ds.header.pauli_order.size() != canon.size())
    throw std::invalid_argument("dataset: wrong Pauli word count in header");
  for (size_t i = 0; i < canon.size(); ++i)
    if (ds.header.pauli_order[i] != canon[i])
      throw std::invalid_argument("dataset: Pauli order mismatch at word " +
                                  std::to_string(i));

  const size_t n_states = head["n_states"].get<size_t>();
  ds.records.reserve(n_states);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = parse_line(line, "dataset record");
    StateRecord rec;
    rec.id = j["id"].get<uint64_t>();
    rec.channel = channel_from_name(j["channel"].get<std::string>());
    rec.parameter = j["parameter"].get<double>();
    rec.purity = j["purity"].get<double>();
    rec.pauli = j["pauli"].get<std::vector<double>>();
    rec.rho = DensityMatrix{rho_from_json(j["rho"])};
    if (rec.pauli.size() != canon.size())
      throw std::invalid_argument("dataset: record " + std::to_string(rec.id) +
                                  " has wrong expectation count");
    const DensityCheck check = validate_density(rec.rho.mat);
    if (!check.ok)
      throw std::invalid_argument("dataset: record " + std::to_string(rec.id) +
                                  " is not a valid state: " + check.detail);
    ds.records.push_back(std::move(rec));
  }
  if (ds.records.size() != n_states)
    throw std::invalid_argument("dataset: header claims " +
                                std::to_string(n_states) + " states, found " +
                                std::to_string(ds.records.size()));
  return ds;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json j;
  j["kind"] = "checkpoint";
  j["format_version"] = ckpt.format_version;
  j["decoder_mode"] = decoder_mode_name(ckpt.mode);
  j["arch"] = {{"input", ckpt.arch.input},
               {"hidden1", ckpt.arch.hidden1},
               {"hidden2", ckpt.arch.hidden2},
               {"latent", ckpt.arch.latent}};
  j["params"] = ckpt.params;
  j["train_config"] = {
      {"epochs_max", ckpt.config.epochs_max},
      {"batch_size", ckpt.config.batch_size},
      {"learning_rate", ckpt.config.learning_rate},
      {"adam_beta1", ckpt.config.adam_beta1},
      {"adam_beta2", ckpt.config.adam_beta2},
      {"adam_eps", ckpt.config.adam_eps},
      {"lambda_metric", ckpt.config.lambda_metric},
      {"pairs_per_batch", ckpt.config.pairs_per_batch},
      {"patience", ckpt.config.patience},
      {"seed", ckpt.config.seed},
      {"decoder_mode", decoder_mode_name(ckpt.config.mode)},
      {"grad_method", grad_method_name(ckpt.config.grad_method)},
  };
  j["best_epoch"] = ckpt.best_epoch;
  j["best_val_fidelity"] = ckpt.best_val_fidelity;
  j["epochs_run"] = ckpt.epochs_run;
  atomic_write_text(path, j.dump() + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  const json j = parse_line(read_file(path), "checkpoint");
  if (j.value("kind", "") != "checkpoint" ||
      j.value("format_version", -1) != kCheckpointFormatVersion)
    throw std::invalid_argument("not a version-" +
                                std::to_string(kCheckpointFormatVersion) +
                                " checkpoint file: " + path);
  Checkpoint c;
  c.format_version = j["format_version"].get<int>();
  c.mode = decoder_mode_from_name(j["decoder_mode"].get<std::string>());
  c.arch.input = j["arch"]["input"].get<int>();
  c.arch.hidden1 = j["arch"]["hidden1"].get<int>();
  c.arch.hidden2 = j["arch"]["hidden2"].get<int>();
  c.arch.latent = j["arch"]["latent"].get<int>();
  c.params = j["params"].get<std::vector<double>>();
  const json& t = j["train_config"];
  c.config.epochs_max = t["epochs_max"].get<int>();
  c.config.batch_size = t["batch_size"].get<int>();
  c.config.learning_rate = t["learning_rate"].get<double>();
  c.config.adam_beta1 = t["adam_beta1"].get<double>();
  c.config.adam_beta2 = t["adam_beta2"].get<double>();
  c.config.adam_eps = t["adam_eps"].get<double>();
  c.config.lambda_metric = t["lambda_metric"].get<double>();
  c.config.pairs_per_batch = t["pairs_per_batch"].get<int>();
  c.config.patience = t["patience"].get<int>();
  c.config.seed = t["seed"].get<uint64_t>();
  c.config.mode = decoder_mode_from_name(t["decoder_mode"].get<std::string>());
  c.config.grad_method =
      grad_method_from_name(t["grad_method"].get<std::string>());
  c.best_epoch = j["best_epoch"].get<int>();
  c.best_val_fidelity = j["best_val_fidelity"].get<double>();
  c.epochs_run = j["epochs_run"].get<int>();
  if (static_cast<int>(c.params.size()) != param_count(c.arch, c.mode))
    throw std::invalid_argument(
        "checkpoint: parameter count does not match the stored shapes");
  return c;
}

ModelParams checkpoint_params(const Checkpoint& ckpt) {
  return from_flat(ckpt.params, ckpt.arch, ckpt.mode);
}

void save_report(const std::string& dir, const AnalysisReport& rep) {
  json j;
  j["kind"] = "analysis_report";
  j["format_version"] = kReportFormatVersion;
  j["seed"] = rep.seed;

  json corr;
  corr["n_pairs"] = rep.corr.n_pairs;
  corr["degenerate"] = rep.corr.degenerate;
  if (rep.corr.degenerate) {
    corr["note"] = rep.corr.note;
  } else {
    corr["pearson_r"] = rep.corr.pearson_r;
    corr["pearson_p"] = rep.corr.pearson_p;
    corr["pearson_p_text"] = rep.corr.p_underflow
                                 ? std::string("< 1e-300")
                                 : format_double(rep.corr.pearson_p);
    corr["spearman_rho"] = rep.corr.spearman_rho;
    corr["r_squared"] = rep.corr.r_squared;
    corr["slope"] = rep.corr.slope;
    corr["intercept"] = rep.corr.intercept;
    corr["rmse"] = rep.corr.rmse;
    corr["mae"] = rep.corr.mae;
    corr["strength"] = strength_name(classify_threshold(rep.corr.pearson_r));
  }
  j["correlation"] = std::move(corr);

  j["dimension"] = {{"k_mle", rep.k_mle},
                    {"mle_mean", rep.mle.mean},
                    {"mle_std", rep.mle.stddev},
                    {"mle_skipped", rep.mle.skipped},
                    {"pca_spectrum", rep.pca_spec},
                    {"d_pca_95", rep.d_pca_95},
                    {"d_pca_99", rep.d_pca_99}};

  j["curvature"] = {{"k_curv", rep.k_curv},
                    {"mean", rep.curv.mean},
                    {"std", rep.curv.stddev},
                    {"median", rep.curv.median},
                    {"min", rep.curv.min},
                    {"max", rep.curv.max},
                    {"iqr", rep.curv.iqr},
                    {"zero_sigma_count", rep.curv.zero_sigma_count}};

  json bins = json::array();
  for (const DistanceFidelityRow& row : rep.table) {
    json b;
    b["label"] = row.label;
    b["lo"] = row.lo;
    if (std::isfinite(row.hi))
      b["hi"] = row.hi;
    else
      b["hi"] = nullptr;
    b["count"] = row.count;
    b["mean_bures"] = row.mean_bures;
    b["mean_fidelity"] = row.mean_fidelity;
    bins.push_back(std::move(b));
  }
  j["distance_fidelity"] = std::move(bins);

  atomic_write_text(dir + "/report.json", j.dump(2) + "\n");

  std::string pairs_csv = "i,j,d_latent,d_bures,fidelity\n";
  for (const DistancePair& p : rep.corr.pairs) {
    char row[160];
    std::snprintf(row, sizeof(row), "%d,%d,%.17g,%.17g,%.17g\n", p.i, p.j,
                  p.d_latent, p.d_bures, p.fidelity);
    pairs_csv += row;
  }
  atomic_write_text(dir + "/pairs.csv", pairs_csv);

  std::string pca_csv = "component,eigenvalue\n";
  for (size_t i = 0; i < rep.pca_spec.size(); ++i) {
    char row[64];
    std::snprintf(row, sizeof(row), "%zu,%.17g\n", i + 1, rep.pca_spec[i]);
    pca_csv += row;
  }
  atomic_write_text(dir + "/pca_spectrum.csv", pca_csv);

  std::string curv_csv = "index,kappa\n";
  for (size_t i = 0; i < rep.curv.per_point.size(); ++i) {
    char row[64];
    std::snprintf(row, sizeof(row), "%zu,%.17g\n", i, rep.curv.per_point[i]);
    curv_csv += row;
  }
  atomic_write_text(dir + "/curvature.csv", curv_csv);

  std::string bins_csv = "label,lo,hi,count,mean_bures,mean_fidelity\n";
  for (const DistanceFidelityRow& row : rep.table) {
    char line[200];
    if (std::isfinite(row.hi))
      std::snprintf(line, sizeof(line), "%s,%.17g,%.17g,%d,%.17g,%.17g\n",
                    row.label.c_str(), row.lo, row.hi, row.count,
                    row.mean_bures, row.mean_fidelity);
    else
      std::snprintf(line, sizeof(line), "%s,%.17g,inf,%d,%.17g,%.17g\n",
                    row.label.c_str(), row.lo, row.count, row.mean_bures,
                    row.mean_fidelity);
    bins_csv += line;
  }
  atomic_write_text(dir + "/distance_fidelity.csv", bins_csv);
}

}  // namespace qlat
