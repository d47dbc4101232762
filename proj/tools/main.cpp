#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "qlat/cli.hpp"

namespace {

// The --config file is applied before flag parsing so that flags win; it
// has to be fished out of argv by hand for that.
std::string find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return "";
}

uint64_t parse_seed(const std::string& text, const std::string& origin) {
  try {
    size_t used = 0;
    const uint64_t v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(origin + " is not a valid seed: " + text);
  }
}

// Config files are flat JSON objects keyed like the long flags with
// underscores (e.g. {"n_train": 100, "lambda_metric": 0.0}).
void apply_config_file(const std::string& path, qlat::RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw std::invalid_argument("config file is not a JSON object: " + path);

  for (const auto& [key, value] : j.items()) {
    if (key == "seed") cfg.seed = value.get<uint64_t>();
    else if (key == "out_dir") cfg.out_dir = value.get<std::string>();
    else if (key == "n_train") cfg.n_train = value.get<int>();
    else if (key == "n_val") cfg.n_val = value.get<int>();
    else if (key == "purity_lo") cfg.purity_lo = value.get<double>();
    else if (key == "purity_hi") cfg.purity_hi = value.get<double>();
    else if (key == "train") cfg.train_path = value.get<std::string>();
    else if (key == "val") cfg.val_path = value.get<std::string>();
    else if (key == "epochs") cfg.epochs = value.get<int>();
    else if (key == "batch_size") cfg.batch_size = value.get<int>();
    else if (key == "lr") cfg.learning_rate = value.get<double>();
    else if (key == "lambda_metric") cfg.lambda_metric = value.get<double>();
    else if (key == "pairs_per_batch") cfg.pairs_per_batch = value.get<int>();
    else if (key == "patience") cfg.patience = value.get<int>();
    else if (key == "decoder") cfg.decoder = value.get<std::string>();
    else if (key == "grad_method") cfg.grad_method = value.get<std::string>();
    else if (key == "checkpoint") cfg.checkpoint_path = value.get<std::string>();
    else if (key == "pairs") cfg.n_pairs = value.get<int>();
    else if (key == "k_mle") cfg.k_mle = value.get<int>();
    else if (key == "k_curv") cfg.k_curv = value.get<int>();
    else if (key == "values") cfg.lambda_values = value.get<std::vector<double>>();
    else throw std::invalid_argument("unknown config key: " + key);
  }
}

void add_common(CLI::App* cmd, qlat::RunConfig& cfg, std::string& config_sink) {
  cmd->add_option("--config", config_sink,
                  "JSON config file; flags override its values");
  cmd->add_option("--seed", cfg.seed, "base random seed");
  cmd->add_option("--out-dir", cfg.out_dir, "output directory");
}

void add_train_options(CLI::App* cmd, qlat::RunConfig& cfg) {
  cmd->add_option("--train", cfg.train_path, "training dataset file");
  cmd->add_option("--val", cfg.val_path, "validation dataset file");
  cmd->add_option("--epochs", cfg.epochs, "maximum training epochs");
  cmd->add_option("--batch-size", cfg.batch_size, "minibatch size");
  cmd->add_option("--lr", cfg.learning_rate, "Adam learning rate");
  cmd->add_option("--lambda-metric", cfg.lambda_metric,
                  "weight of the metric-preservation loss");
  cmd->add_option("--pairs-per-batch", cfg.pairs_per_batch,
                  "state pairs sampled per batch for the metric loss");
  cmd->add_option("--patience", cfg.patience,
                  "epochs without validation improvement before stopping");
  cmd->add_option("--decoder", cfg.decoder, "decoder mode: corrected|literal")
      ->check(CLI::IsMember({"corrected", "literal"}));
  cmd->add_option("--grad-method", cfg.grad_method,
                  "circuit gradients: shift|fd")
      ->check(CLI::IsMember({"shift", "fd"}));
}

int run(int argc, char** argv) {
  qlat::RunConfig cfg;
  if (const char* env = std::getenv("QLAT_SEED"))
    cfg.seed = parse_seed(env, "QLAT_SEED");
  const std::string config_path = find_config_arg(argc, argv);
  if (!config_path.empty()) apply_config_file(config_path, cfg);

  CLI::App app{"geometric latent-space tomography of 2-qubit mixed states"};
  app.require_subcommand(1);
  std::string config_sink;

  CLI::App* gen = app.add_subcommand(
      "generate", "sample a purity-controlled mixed-state dataset");
  add_common(gen, cfg, config_sink);
  gen->add_option("--n-train", cfg.n_train, "training set size");
  gen->add_option("--n-val", cfg.n_val, "validation set size");
  gen->add_option("--purity-lo", cfg.purity_lo, "purity target lower bound");
  gen->add_option("--purity-hi", cfg.purity_hi, "purity target upper bound");

  CLI::App* tr = app.add_subcommand(
      "train", "train the encoder/circuit model on a dataset");
  add_common(tr, cfg, config_sink);
  add_train_options(tr, cfg);

  CLI::App* an = app.add_subcommand(
      "analyze", "geometric diagnostics of a trained latent space");
  add_common(an, cfg, config_sink);
  an->add_option("--checkpoint", cfg.checkpoint_path, "checkpoint file");
  an->add_option("--train", cfg.train_path, "training dataset file");
  an->add_option("--val", cfg.val_path, "validation dataset file");
  an->add_option("--pairs", cfg.n_pairs, "random pairs for correlation");
  an->add_option("--k-mle", cfg.k_mle, "neighbors for the MLE dimension");
  an->add_option("--k-curv", cfg.k_curv, "neighbors for local curvature");

  CLI::App* sw = app.add_subcommand(
      "sweep-lambda", "train+score once per metric-loss weight");
  add_common(sw, cfg, config_sink);
  add_train_options(sw, cfg);
  sw->add_option("--values", cfg.lambda_values,
                 "comma-separated lambda values")
      ->delimiter(',');
  sw->add_option("--pairs", cfg.n_pairs, "random pairs for correlation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the parse error
    return code == 0 ? 0 : 1;
  }

  if (gen->parsed()) qlat::cmd_generate(cfg, std::cout);
  else if (tr->parsed()) qlat::cmd_train(cfg, std::cout);
  else if (an->parsed()) qlat::cmd_analyze(cfg, std::cout);
  else if (sw->parsed()) qlat::cmd_sweep_lambda(cfg, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const qlat::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
