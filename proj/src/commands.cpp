#include "imn/commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "imn/baselines.hpp"
#include "imn/checkpoint.hpp"
#include "imn/explain.hpp"
#include "imn/format.hpp"
#include "imn/preprocess.hpp"
#include "imn/rng.hpp"
#include "imn/synth.hpp"
#include "imn/table.hpp"
#include "imn/xai_metrics.hpp"

namespace imn {

namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out = open_out(path);
  for (int j = 0; j < data.m(); ++j) out << data.feature_names[static_cast<std::size_t>(j)] << ',';
  out << "target\n";
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.m(); ++j) out << format_double(data.x(i, j)) << ',';
    if (data.is_classification())
      out << data.y_class[static_cast<std::size_t>(i)] << '\n';
    else
      out << format_double(data.y_value(i)) << '\n';
  }
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

// Config-merge plumbing: read one typed value per known key, reject the rest.
class ConfigReader {
 public:
  explicit ConfigReader(const nlohmann::json& doc) : doc_(doc) {
    if (!doc.is_object()) throw std::invalid_argument("config: document must be a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.push_back(key);
    const auto it = doc_.find(key);
    if (it != doc_.end()) out = it->get<T>();
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items()) {
      (void)value;
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
        throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }

 private:
  const nlohmann::json& doc_;
  std::vector<std::string> seen_;
};

void read_train_config(ConfigReader& reader, TrainConfig& cfg) {
  reader.get("epochs", cfg.epochs);
  reader.get("batch-size", cfg.batch_size);
  reader.get("peak-lr", cfg.peak_lr);
  reader.get("weight-decay", cfg.weight_decay);
  reader.get("warmup-epochs", cfg.warmup_epochs);
  reader.get("lambda-l1", cfg.lambda_l1);
  reader.get("cycles", cfg.n_cycles);
  reader.get("min-lr", cfg.min_lr);
  reader.get("seed", cfg.seed);
}

}  // namespace

void apply_config(const nlohmann::json& config, GenerateOptions& opts) {
  ConfigReader reader(config);
  reader.get("kind", opts.kind);
  reader.get("n", opts.n);
  reader.get("noise", opts.noise);
  reader.get("m", opts.m);
  reader.get("rho", opts.rho);
  reader.get("seed", opts.seed);
  reader.get("out", opts.out_dir);
  reader.finish();
}

void apply_config(const nlohmann::json& config, TrainOptions& opts) {
  ConfigReader reader(config);
  reader.get("data", opts.data_path);
  reader.get("schema", opts.schema_path);
  reader.get("target", opts.target_column);
  reader.get("task", opts.task);
  reader.get("val-fraction", opts.val_fraction);
  reader.get("shrinkage", opts.shrinkage);
  reader.get("blocks", opts.n_blocks);
  reader.get("hidden", opts.hidden_width);
  reader.get("dropout", opts.dropout_p);
  read_train_config(reader, opts.train);
  reader.get("out", opts.out_dir);
  reader.finish();
}

void apply_config(const nlohmann::json& config, ExplainOptions& opts) {
  ConfigReader reader(config);
  reader.get("checkpoint", opts.checkpoint_path);
  reader.get("data", opts.data_path);
  reader.get("mode", opts.mode);
  reader.get("instance", opts.instance);
  reader.get("k", opts.k_per_class);
  reader.get("grid-n", opts.grid_n);
  reader.get("out", opts.out_dir);
  reader.finish();
}

void apply_config(const nlohmann::json& config, BenchmarkOptions& opts) {
  ConfigReader reader(config);
  reader.get("suite", opts.suite);
  reader.get("kinds", opts.kinds);
  reader.get("rhos", opts.rhos);
  reader.get("seeds", opts.seeds);
  reader.get("m", opts.m);
  reader.get("n", opts.n);
  reader.get("eval-n", opts.eval_n);
  reader.get("n-perturb", opts.n_perturb);
  reader.get("blocks", opts.n_blocks);
  reader.get("hidden", opts.hidden_width);
  reader.get("dropout", opts.dropout_p);
  read_train_config(reader, opts.train);
  reader.get("out", opts.out_dir);
  reader.finish();
}

int cmd_generate(const GenerateOptions& opts) {
  ensure_dir(opts.out_dir);
  const std::string csv_path = (fs::path(opts.out_dir) / (opts.kind + ".csv")).string();

  if (opts.kind == "half-moons") {
    const Dataset data = gen_half_moons(opts.n, opts.noise, opts.seed);
    write_dataset_csv(csv_path, data);
    std::cout << "wrote " << csv_path << ": " << data.n() << " rows, " << data.m()
              << " feature columns\n";
    return 0;
  }

  const XaiKind kind = xai_kind_from_name(opts.kind);
  XaiDatasetSpec spec;
  spec.kind = kind;
  spec.m = opts.m;
  spec.n = opts.n;
  spec.rho = opts.rho;
  spec.seed = opts.seed;
  const XaiData generated = gen_xai_dataset(spec);
  write_dataset_csv(csv_path, generated.data);

  nlohmann::json truth{{"kind", opts.kind},
                       {"m", opts.m},
                       {"n", opts.n},
                       {"rho", opts.rho},
                       {"seed", opts.seed},
                       {"feature_names", generated.data.feature_names}};
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < generated.ground_truth.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < generated.ground_truth.cols(); ++j)
      row.push_back(generated.ground_truth(i, j));
    rows.push_back(std::move(row));
  }
  truth["attributions"] = std::move(rows);
  switch (kind) {
    case XaiKind::kLinear: {
      truth["weights"] = std::vector<double>(
          generated.linear_weights.data(),
          generated.linear_weights.data() + generated.linear_weights.size());
      break;
    }
    case XaiKind::kNonlinearAdditive: {
      static const char* kFunctionNames[] = {"sin", "tanh", "square", "identity"};
      std::vector<std::string> names;
      for (int k : generated.function_kinds) names.emplace_back(kFunctionNames[k]);
      truth["functions"] = names;
      break;
    }
    case XaiKind::kPiecewise: {
      truth["thresholds"] = std::vector<double>(
          generated.thresholds.data(), generated.thresholds.data() + generated.thresholds.size());
      truth["coefficients"] =
          std::vector<double>(generated.coefficients.data(),
                              generated.coefficients.data() + generated.coefficients.size());
      break;
    }
  }
  const std::string truth_path =
      (fs::path(opts.out_dir) / (opts.kind + "-ground-truth.json")).string();
  std::ofstream out = open_out(truth_path);
  out << truth.dump(2) << '\n';

  std::cout << "wrote " << csv_path << ": " << generated.data.n() << " rows, "
            << generated.data.m() << " feature columns\n";
  std::cout << "wrote " << truth_path << '\n';
  return 0;
}

namespace {

// Schema rebuilt from a fitted preprocessor, so explain-time loading never
// depends on inference heuristics.
TableSchema schema_from_state(const PreprocessorState& state) {
  TableSchema schema;
  std::size_t state_col = 0;
  const std::size_t total = state.columns.size() + 1;
  for (std::size_t j = 0; j < total; ++j) {
    if (static_cast<int>(j) == state.target_column) {
      schema.columns.push_back({state.target_name, ColumnKind::kTarget});
    } else {
      const auto& col = state.columns[state_col++];
      schema.columns.push_back(
          {col.name, col.numeric ? ColumnKind::kNumeric : ColumnKind::kCategorical});
    }
  }
  schema.validate();
  return schema;
}

struct ClassificationScores {
  double accuracy = 0.0;
  double auroc = 0.0;
};

ClassificationScores score_split(const SnapshotEnsemble& ens, const Dataset& data) {
  return {ensemble_accuracy(ens, data), ensemble_auroc(ens, data)};
}

double ensemble_rmse(const SnapshotEnsemble& ens, const Dataset& data) {
  double total = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const double diff = ensemble_value(ens, data.x.row(i).transpose()) - data.y_value(i);
    total += diff * diff;
  }
  return std::sqrt(total / static_cast<double>(data.n()));
}

}  // namespace

int cmd_train(const TrainOptions& opts) {
  if (opts.data_path.empty()) throw std::invalid_argument("train: --data is required");
  const TaskKind task = task_from_name(opts.task);
  const TableSchema schema = opts.schema_path.empty()
                                 ? infer_schema(opts.data_path, opts.target_column)
                                 : schema_from_json_file(opts.schema_path);
  const RawTable table = load_csv(opts.data_path, schema);
  const int target_col = schema.target_index();
  const auto n_rows = static_cast<int>(table.n_rows());

  // Row-level split before any fitting, stratified on raw labels for
  // classification tasks.
  std::vector<int> label_ids;
  int n_distinct = 0;
  const bool classification = task != TaskKind::kRegression;
  if (classification) {
    std::vector<std::string> distinct;
    for (const auto& row : table.rows) distinct.push_back(row[static_cast<std::size_t>(target_col)]);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    n_distinct = static_cast<int>(distinct.size());
    label_ids.reserve(table.n_rows());
    for (const auto& row : table.rows) {
      const auto& cell = row[static_cast<std::size_t>(target_col)];
      if (cell.empty())
        throw std::runtime_error("train: missing target value in " + opts.data_path);
      const auto it = std::lower_bound(distinct.begin(), distinct.end(), cell);
      label_ids.push_back(static_cast<int>(it - distinct.begin()));
    }
  }
  const auto [train_rows, val_rows] =
      split_indices(n_rows, classification ? &label_ids : nullptr, n_distinct,
                    opts.val_fraction, opts.train.seed, classification);

  const PreprocessorState state = fit_preprocessor(table, train_rows, task, opts.shrinkage);
  const Dataset full = transform(table, state);
  const Dataset train_data = full.rows(train_rows);
  const Dataset val_data = full.rows(val_rows);

  NetConfig net_cfg;
  net_cfg.input_dim = train_data.m();
  net_cfg.n_blocks = opts.n_blocks;
  net_cfg.hidden_width = opts.hidden_width;
  net_cfg.dropout_p = opts.dropout_p;
  net_cfg.n_classes = classification ? train_data.n_classes : 1;
  net_cfg.seed = splitmix64(opts.train.seed);

  const TrainResult result = train(train_data, opts.train, net_cfg, &val_data);

  ensure_dir(opts.out_dir);
  const std::string ckpt_path = (fs::path(opts.out_dir) / "checkpoint.json").string();
  save_checkpoint({result.ensemble, opts.train, state}, ckpt_path);

  const std::string log_path = (fs::path(opts.out_dir) / "train_log.ndjson").string();
  {
    std::ofstream log = open_out(log_path);
    for (const EpochLog& entry : result.log) {
      nlohmann::json j{{"epoch", entry.epoch}, {"lr", entry.lr}, {"train_loss", entry.train_loss}};
      if (entry.has_val_auroc) j["val_auroc"] = entry.val_auroc;
      log << j.dump() << '\n';
    }
  }

  nlohmann::json summary{{"n_train", train_data.n()},
                         {"n_val", val_data.n()},
                         {"n_features", train_data.m()},
                         {"n_snapshots", result.ensemble.size()},
                         {"final_train_loss", result.log.back().train_loss}};
  if (classification) {
    const ClassificationScores train_scores = score_split(result.ensemble, train_data);
    const ClassificationScores val_scores = score_split(result.ensemble, val_data);
    summary["train_accuracy"] = train_scores.accuracy;
    summary["train_auroc"] = train_scores.auroc;
    summary["val_accuracy"] = val_scores.accuracy;
    summary["val_auroc"] = val_scores.auroc;
  } else {
    summary["train_rmse"] = ensemble_rmse(result.ensemble, train_data);
    summary["val_rmse"] = ensemble_rmse(result.ensemble, val_data);
  }
  const std::string summary_path = (fs::path(opts.out_dir) / "summary.json").string();
  open_out(summary_path) << summary.dump(2) << '\n';

  std::cout << summary.dump(2) << '\n';
  std::cout << "wrote " << ckpt_path << '\n';
  return 0;
}

int cmd_explain(const ExplainOptions& opts) {
  const Checkpoint ckpt = load_checkpoint(opts.checkpoint_path);
  if (!ckpt.preprocessor.has_value())
    throw std::runtime_error("explain: checkpoint has no preprocessor state");
  const PreprocessorState& state = *ckpt.preprocessor;
  const RawTable table = load_csv(opts.data_path, schema_from_state(state));
  const Dataset data = transform(table, state);
  if (data.m() != ckpt.ensemble.config.input_dim)
    throw std::runtime_error("explain: data dimensionality does not match the checkpoint");
  ensure_dir(opts.out_dir);
  const SnapshotEnsemble& ens = ckpt.ensemble;

  if (opts.mode == "local") {
    if (opts.instance < 0 || opts.instance >= data.n())
      throw std::invalid_argument("explain: instance index " + std::to_string(opts.instance) +
                                  " out of range [0, " + std::to_string(data.n()) + ")");
    const Eigen::VectorXd x = data.x.row(opts.instance).transpose();
    const Attribution attr = local_attribution(ens, x);
    const Eigen::VectorXd proba = ensemble_proba(ens, x);

    std::vector<int> order(static_cast<std::size_t>(data.m()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double ia = std::abs(attr.impacts(a)), ib = std::abs(attr.impacts(b));
      if (ia != ib) return ia > ib;
      return a < b;
    });

    nlohmann::json features = nlohmann::json::array();
    for (int j : order) {
      features.push_back({{"feature", data.feature_names[static_cast<std::size_t>(j)]},
                          {"value", x(j)},
                          {"impact", attr.impacts(j)}});
    }
    nlohmann::json doc{{"instance", opts.instance},
                       {"class", attr.target_class},
                       {"probability", proba(attr.target_class)},
                       {"logit", attr.logit},
                       {"bias", attr.bias},
                       {"impacts", std::move(features)}};
    const std::string path = (fs::path(opts.out_dir) / "explain_local.json").string();
    open_out(path) << doc.dump(2) << '\n';
    std::cout << doc.dump(2) << '\n';
    return 0;
  }

  if (opts.mode == "global") {
    const GlobalImportance gi = global_importance(ens, data);
    const std::string path = (fs::path(opts.out_dir) / "importance.csv").string();
    std::ofstream out = open_out(path);
    out << "rank,feature,importance\n";
    for (std::size_t r = 0; r < gi.ranking.size(); ++r) {
      const int j = gi.ranking[r];
      out << r + 1 << ',' << gi.feature_names[static_cast<std::size_t>(j)] << ','
          << format_double(gi.importance(j)) << '\n';
    }
    const std::size_t shown = std::min<std::size_t>(10, gi.ranking.size());
    for (std::size_t r = 0; r < shown; ++r) {
      const int j = gi.ranking[r];
      std::cout << r + 1 << ". " << gi.feature_names[static_cast<std::size_t>(j)] << "  "
                << format_double(gi.importance(j)) << '\n';
    }
    std::cout << "wrote " << path << '\n';
    return 0;
  }

  if (opts.mode == "boundary") {
    if (data.m() != 2)
      throw std::invalid_argument("explain: boundary mode requires exactly 2 features, data has " +
                                  std::to_string(data.m()));
    std::array<double, 4> box{};
    for (int d = 0; d < 2; ++d) {
      const double lo = data.x.col(d).minCoeff();
      const double hi = data.x.col(d).maxCoeff();
      const double margin = 0.1 * std::max(hi - lo, 1e-9);
      box[static_cast<std::size_t>(2 * d)] = lo - margin;
      box[static_cast<std::size_t>(2 * d + 1)] = hi + margin;
    }
    const auto points = decision_boundary(ens, box, opts.grid_n);
    const std::string path = (fs::path(opts.out_dir) / "boundary.csv").string();
    std::ofstream out = open_out(path);
    out << "x0,x1,prob\n";
    for (const BoundaryPoint& p : points)
      out << format_double(p.x0) << ',' << format_double(p.x1) << ',' << format_double(p.prob)
          << '\n';
    std::cout << "boundary points: " << points.size() << '\n';
    std::cout << "wrote " << path << '\n';
    return 0;
  }

  if (opts.mode == "neighborhood") {
    const NeighborhoodResult result = neighborhood_accuracy(ens, data, opts.k_per_class);
    const std::string path = (fs::path(opts.out_dir) / "neighborhood.csv").string();
    std::ofstream out = open_out(path);
    out << "instance,accuracy\n";
    for (std::size_t i = 0; i < result.per_instance.size(); ++i)
      out << i << ',' << format_double(result.per_instance[i]) << '\n';
    std::cout << "mean neighborhood accuracy (k_per_class=" << opts.k_per_class
              << "): " << format_double(result.mean_accuracy) << '\n';
    std::cout << "wrote " << path << '\n';
    return 0;
  }

  throw std::invalid_argument("explain: unknown mode '" + opts.mode +
                              "' (expected local|global|boundary|neighborhood)");
}

namespace {

struct XaiCell {
  Dataset train;
  Dataset val;
  Eigen::VectorXd baseline;
  SnapshotEnsemble ensemble;
};

XaiCell train_xai_cell(XaiKind kind, const BenchmarkOptions& opts, double rho,
                       std::uint64_t seed) {
  XaiDatasetSpec spec;
  spec.kind = kind;
  spec.m = opts.m;
  spec.n = opts.n;
  spec.rho = rho;
  spec.seed = seed;
  const XaiData generated = gen_xai_dataset(spec);

  XaiCell cell;
  std::tie(cell.train, cell.val) = split(generated.data, 1.0 / 11.0, seed, true);
  cell.baseline = standardize(cell.train, &cell.val);

  TrainConfig cfg = opts.train;
  cfg.seed = seed;
  NetConfig net_cfg;
  net_cfg.input_dim = cell.train.m();
  net_cfg.n_blocks = opts.n_blocks;
  net_cfg.hidden_width = opts.hidden_width;
  net_cfg.dropout_p = opts.dropout_p;
  net_cfg.n_classes = 2;
  net_cfg.seed = splitmix64(seed);
  cell.ensemble = train(cell.train, cfg, net_cfg).ensemble;
  return cell;
}

}  // namespace

int cmd_benchmark(const BenchmarkOptions& opts) {
  ensure_dir(opts.out_dir);

  if (opts.suite == "xai") {
    const std::vector<std::string> kinds =
        opts.kinds.empty() ? std::vector<std::string>{"gaussian-linear"} : opts.kinds;
    std::vector<MetricReport> reports;

    for (const std::string& kind_name : kinds) {
      const XaiKind kind = xai_kind_from_name(kind_name);
      for (double rho : opts.rhos) {
        for (std::uint64_t seed : opts.seeds) {
          try {
            const XaiCell cell = train_xai_cell(kind, opts, rho, seed);
            const int eval_n = std::min(opts.eval_n, cell.train.n());
            const Eigen::MatrixXd xs = cell.train.x.topRows(eval_n);
            const ModelFactory factory = imn_model_factory(cell.ensemble);

            const std::vector<Explainer> explainers{imn_explainer(cell.ensemble),
                                                    random_explainer(splitmix64(seed + 1))};
            for (const Explainer& explainer : explainers) {
              // One report row per metric; a failing metric yields a NaN row
              // and the run continues.
              auto report = [&](const std::string& metric, int count, auto&& compute) {
                double value = std::numeric_limits<double>::quiet_NaN();
                try {
                  value = compute();
                } catch (const std::exception& err) {
                  std::cerr << "benchmark metric failed (" << kind_name << ", rho=" << rho
                            << ", seed=" << seed << ", " << explainer.name << ", " << metric
                            << "): " << err.what() << '\n';
                }
                reports.push_back({kind_name, rho, explainer.name, metric, value, count, seed});
                std::cout << kind_name << " rho=" << format_double(rho) << " seed=" << seed << " "
                          << explainer.name << " " << metric << " = " << format_double(value)
                          << '\n';
              };
              report("faithfulness", eval_n,
                     [&] { return faithfulness(factory, explainer, xs, cell.baseline); });
              report("monotonicity", eval_n,
                     [&] { return monotonicity(factory, explainer, xs, cell.baseline); });
              report("infidelity", eval_n,
                     [&] { return infidelity(factory, explainer, xs, 0.1, opts.n_perturb, seed); });
              report("shapley-corr", eval_n,
                     [&] { return shapley_corr(factory, explainer, xs, cell.baseline); });
              report("roar-monotonicity", cell.train.n(), [&] {
                std::vector<double> importance(static_cast<std::size_t>(cell.train.m()), 0.0);
                for (int i = 0; i < eval_n; ++i) {
                  const Eigen::VectorXd attr =
                      explainer.attribute(xs.row(i).transpose(), i).cwiseAbs();
                  for (int j = 0; j < cell.train.m(); ++j)
                    importance[static_cast<std::size_t>(j)] += attr(j);
                }
                TrainConfig roar_cfg = opts.train;
                roar_cfg.epochs = 50;
                roar_cfg.warmup_epochs = 5;
                roar_cfg.n_cycles = 1;
                roar_cfg.seed = seed;
                NetConfig roar_net;
                roar_net.input_dim = cell.train.m();
                roar_net.n_blocks = opts.n_blocks;
                roar_net.hidden_width = opts.hidden_width;
                roar_net.dropout_p = opts.dropout_p;
                roar_net.n_classes = 2;
                roar_net.seed = splitmix64(seed + 2);
                const auto curve = roar_monotonicity(cell.train, cell.val, importance,
                                                     {0.2, 0.4, 0.6, 0.8}, roar_cfg, roar_net);
                return roar_monotonicity_score(curve);
              });
            }
          } catch (const std::exception& err) {
            std::cerr << "benchmark cell failed (" << kind_name << ", rho=" << rho
                      << ", seed=" << seed << "): " << err.what() << '\n';
            reports.push_back({kind_name, rho, "imn", "error",
                               std::numeric_limits<double>::quiet_NaN(), 0, seed});
          }
        }
      }
    }

    const std::string csv_path = (fs::path(opts.out_dir) / "xai_metrics.csv").string();
    std::ofstream csv = open_out(csv_path);
    csv << metric_report_csv_header() << '\n';
    for (const MetricReport& r : reports) csv << metric_report_csv_row(r) << '\n';
    const std::string ndjson_path = (fs::path(opts.out_dir) / "xai_metrics.ndjson").string();
    std::ofstream ndjson = open_out(ndjson_path);
    for (const MetricReport& r : reports) ndjson << metric_report_json_line(r) << '\n';
    std::cout << "wrote " << csv_path << " and " << ndjson_path << '\n';
    return 0;
  }

  if (opts.suite == "whitebox") {
    const std::vector<std::string> kinds =
        opts.kinds.empty() ? std::vector<std::string>{"half-moons", "gaussian-nonlinear-additive"}
                           : opts.kinds;
    const std::string csv_path = (fs::path(opts.out_dir) / "whitebox.csv").string();
    std::ofstream csv = open_out(csv_path);
    csv << "dataset,method,split,seed,auroc,gain\n";

    for (const std::string& kind_name : kinds) {
      for (std::uint64_t seed : opts.seeds) {
        try {
          Dataset all;
          if (kind_name == "half-moons") {
            all = gen_half_moons(opts.n, 0.1, seed);
          } else {
            XaiDatasetSpec spec;
            spec.kind = xai_kind_from_name(kind_name);
            spec.m = opts.m;
            spec.n = opts.n;
            spec.rho = 0.0;
            spec.seed = seed;
            all = gen_xai_dataset(spec).data;
          }
          auto [train_data, val_data] = split(all, 1.0 / 11.0, seed, true);
          standardize(train_data, &val_data);

          TrainConfig cfg = opts.train;
          cfg.seed = seed;
          NetConfig net_cfg;
          net_cfg.input_dim = train_data.m();
          net_cfg.n_blocks = opts.n_blocks;
          net_cfg.hidden_width = opts.hidden_width;
          net_cfg.dropout_p = opts.dropout_p;
          net_cfg.n_classes = train_data.n_classes;
          net_cfg.seed = splitmix64(seed);
          const SnapshotEnsemble ens = train(train_data, cfg, net_cfg).ensemble;

          const LogisticRegression logreg = train_logreg(train_data, 1e-4, 0.5, 2000);
          const DecisionTree tree = train_cart(train_data, 5);

          struct Row {
            std::string method;
            double train_auroc, val_auroc;
          };
          const std::vector<Row> rows{
              {"imn", ensemble_auroc(ens, train_data), ensemble_auroc(ens, val_data)},
              {"logreg", model_auroc(logreg, train_data), model_auroc(logreg, val_data)},
              {"cart", model_auroc(tree, train_data), model_auroc(tree, val_data)}};
          const double tree_train = rows[2].train_auroc;
          const double tree_val = rows[2].val_auroc;
          for (const Row& row : rows) {
            csv << kind_name << ',' << row.method << ",train," << seed << ','
                << format_double(row.train_auroc) << ',' << format_double(gain(row.train_auroc, tree_train))
                << '\n';
            csv << kind_name << ',' << row.method << ",val," << seed << ','
                << format_double(row.val_auroc) << ',' << format_double(gain(row.val_auroc, tree_val))
                << '\n';
            std::cout << kind_name << " seed=" << seed << " " << row.method
                      << " val auroc=" << format_double(row.val_auroc) << '\n';
          }
        } catch (const std::exception& err) {
          std::cerr << "benchmark cell failed (" << kind_name << ", seed=" << seed
                    << "): " << err.what() << '\n';
          csv << kind_name << ",error,val," << seed << ",nan,nan\n";
        }
      }
    }
    std::cout << "wrote " << csv_path << '\n';
    return 0;
  }

  throw std::invalid_argument("benchmark: unknown suite '" + opts.suite +
                              "' (expected xai|whitebox)");
}

}  // namespace imn
