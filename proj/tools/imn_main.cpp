#include <cstdint>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "imn/commands.hpp"

namespace {

// The config file must be applied to the option structs before CLI11 parses
// the flags (flag > file > default), so --config is located by a pre-scan.
std::string config_path_from_args(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string_view arg = argv[i];
    if (arg == "--config") {
      if (i + 1 >= argc) throw std::invalid_argument("--config requires a path");
      return argv[i + 1];
    }
    if (arg.rfind("--config=", 0) == 0) return std::string(arg.substr(9));
  }
  return {};
}

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  nlohmann::json doc;
  in >> doc;
  return doc;
}

void add_train_flags(CLI::App& cmd, imn::TrainConfig& cfg) {
  cmd.add_option("--epochs", cfg.epochs, "Training epochs")->capture_default_str();
  cmd.add_option("--batch-size", cfg.batch_size, "Minibatch size")->capture_default_str();
  cmd.add_option("--peak-lr", cfg.peak_lr, "Peak learning rate")->capture_default_str();
  cmd.add_option("--weight-decay", cfg.weight_decay, "Decoupled weight decay")
      ->capture_default_str();
  cmd.add_option("--warmup-epochs", cfg.warmup_epochs, "Linear warmup epochs")
      ->capture_default_str();
  cmd.add_option("--lambda-l1", cfg.lambda_l1, "L1 penalty on generated coefficients")
      ->capture_default_str();
  cmd.add_option("--cycles", cfg.n_cycles, "Cosine annealing cycles (snapshots)")
      ->capture_default_str();
  cmd.add_option("--min-lr", cfg.min_lr, "Learning rate floor of each cycle")
      ->capture_default_str();
}

void add_net_flags(CLI::App& cmd, int& n_blocks, int& hidden_width, double& dropout_p) {
  cmd.add_option("--blocks", n_blocks, "Residual blocks in the hypernetwork")
      ->capture_default_str();
  cmd.add_option("--hidden", hidden_width, "Hidden width of the hypernetwork")
      ->capture_default_str();
  cmd.add_option("--dropout", dropout_p, "Dropout probability inside residual blocks")
      ->capture_default_str();
}

int run(int argc, char** argv) {
  imn::GenerateOptions gen_opts;
  imn::TrainOptions train_opts;
  imn::ExplainOptions explain_opts;
  imn::BenchmarkOptions bench_opts;

  const std::string config_path = config_path_from_args(argc, argv);
  bool config_has_seeds = false;
  if (!config_path.empty()) {
    const nlohmann::json doc = load_config_file(config_path);
    const std::string sub = (argc >= 2 && argv[1][0] != '-') ? argv[1] : "";
    if (sub == "generate") {
      imn::apply_config(doc, gen_opts);
    } else if (sub == "train") {
      imn::apply_config(doc, train_opts);
    } else if (sub == "explain") {
      imn::apply_config(doc, explain_opts);
    } else if (sub == "benchmark") {
      imn::apply_config(doc, bench_opts);
      config_has_seeds = doc.contains("seeds");
    }
  }

  CLI::App app{"Interpretable mesomorphic networks: per-instance linear models generated by a "
               "deep hypernetwork"};
  app.require_subcommand(1);
  std::string config_sink;  // consumed by the pre-scan above

  CLI::App* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  gen->add_option("--kind", gen_opts.kind,
                  "half-moons | gaussian-linear | gaussian-nonlinear-additive | "
                  "gaussian-piecewise")
      ->capture_default_str();
  gen->add_option("--n", gen_opts.n, "Instances")->capture_default_str();
  gen->add_option("--noise", gen_opts.noise, "Half-moons noise std")->capture_default_str();
  gen->add_option("--m", gen_opts.m, "Features (gaussian kinds)")->capture_default_str();
  gen->add_option("--rho", gen_opts.rho, "Equicorrelation (gaussian kinds)")
      ->capture_default_str();
  gen->add_option("--seed", gen_opts.seed, "RNG seed")->capture_default_str();
  gen->add_option("--out", gen_opts.out_dir, "Output directory")->capture_default_str();
  gen->add_option("--config", config_sink, "JSON config file (flags override it)");

  CLI::App* train = app.add_subcommand("train", "Train a model on a CSV dataset");
  train->add_option("--data", train_opts.data_path, "Input CSV");
  train->add_option("--schema", train_opts.schema_path,
                    "Schema JSON (inferred from the data when omitted)");
  train->add_option("--target", train_opts.target_column, "Target column name")
      ->capture_default_str();
  train->add_option("--task", train_opts.task, "binary | multiclass | regression")
      ->capture_default_str();
  train->add_option("--val-fraction", train_opts.val_fraction, "Validation share of the rows")
      ->capture_default_str();
  train->add_option("--shrinkage", train_opts.shrinkage, "Target-encoding shrinkage")
      ->capture_default_str();
  add_net_flags(*train, train_opts.n_blocks, train_opts.hidden_width, train_opts.dropout_p);
  add_train_flags(*train, train_opts.train);
  train->add_option("--seed", train_opts.train.seed, "RNG seed")->capture_default_str();
  train->add_option("--out", train_opts.out_dir, "Output directory")->capture_default_str();
  train->add_option("--config", config_sink, "JSON config file (flags override it)");

  CLI::App* explain = app.add_subcommand("explain", "Explain a trained model");
  explain->add_option("--checkpoint", explain_opts.checkpoint_path, "Checkpoint JSON");
  explain->add_option("--data", explain_opts.data_path, "Input CSV");
  explain->add_option("--mode", explain_opts.mode, "local | global | boundary | neighborhood")
      ->capture_default_str();
  explain->add_option("--instance", explain_opts.instance, "Row index (local mode)")
      ->capture_default_str();
  explain->add_option("--k", explain_opts.k_per_class, "Neighbors per class (neighborhood mode)")
      ->capture_default_str();
  explain->add_option("--grid-n", explain_opts.grid_n, "Grid resolution (boundary mode)")
      ->capture_default_str();
  std::uint64_t explain_seed = 0;
  explain->add_option("--seed", explain_seed, "Accepted for uniformity; explain is deterministic");
  explain->add_option("--out", explain_opts.out_dir, "Output directory")->capture_default_str();
  explain->add_option("--config", config_sink, "JSON config file (flags override it)");

  CLI::App* bench = app.add_subcommand("benchmark", "Run an evaluation suite");
  bench->add_option("--suite", bench_opts.suite, "xai | whitebox")->capture_default_str();
  bench->add_option("--kinds", bench_opts.kinds, "Dataset kinds (suite default when omitted)");
  bench->add_option("--rhos", bench_opts.rhos, "Equicorrelation values (xai suite)")
      ->capture_default_str();
  CLI::Option* seeds_opt =
      bench->add_option("--seeds", bench_opts.seeds, "One run per seed")->capture_default_str();
  bench->add_option("--m", bench_opts.m, "Features per generated dataset")->capture_default_str();
  bench->add_option("--n", bench_opts.n, "Instances per generated dataset")
      ->capture_default_str();
  bench->add_option("--eval-n", bench_opts.eval_n, "Instances scored by per-instance metrics")
      ->capture_default_str();
  bench->add_option("--n-perturb", bench_opts.n_perturb, "Perturbations per infidelity instance")
      ->capture_default_str();
  add_net_flags(*bench, bench_opts.n_blocks, bench_opts.hidden_width, bench_opts.dropout_p);
  add_train_flags(*bench, bench_opts.train);
  CLI::Option* bench_seed_opt =
      bench->add_option("--seed", bench_opts.train.seed, "Shorthand for --seeds <seed>")
          ->capture_default_str();
  bench->add_option("--out", bench_opts.out_dir, "Output directory")->capture_default_str();
  bench->add_option("--config", config_sink, "JSON config file (flags override it)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }

  if (*gen) return imn::cmd_generate(gen_opts);
  if (*train) return imn::cmd_train(train_opts);
  if (*explain) return imn::cmd_explain(explain_opts);
  if (*bench) {
    if (bench_seed_opt->count() > 0 && seeds_opt->count() == 0 && !config_has_seeds)
      bench_opts.seeds = {bench_opts.train.seed};
    return imn::cmd_benchmark(bench_opts);
  }
  return 1;  // unreachable: require_subcommand
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
}
