#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "imn/train.hpp"

namespace imn {

struct GenerateOptions {
  std::string kind = "half-moons";
  int n = 1000;
  double noise = 0.1;   // half-moons only
  int m = 5;            // gaussian kinds only
  double rho = 0.0;     // gaussian kinds only
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

struct TrainOptions {
  std::string data_path;
  std::string schema_path;  // optional schema JSON; inferred when empty
  std::string target_column = "target";
  std::string task = "binary";
  double val_fraction = 1.0 / 11.0;
  double shrinkage = 10.0;
  int n_blocks = 2;
  int hidden_width = 128;
  double dropout_p = 0.25;
  TrainConfig train;
  std::string out_dir = ".";
};

struct ExplainOptions {
  std::string checkpoint_path;
  std::string data_path;
  std::string mode = "global";  // local | global | boundary | neighborhood
  int instance = 0;             // local
  int k_per_class = 5;          // neighborhood
  int grid_n = 200;             // boundary
  std::string out_dir = ".";
};

struct BenchmarkOptions {
  std::string suite = "xai";      // xai | whitebox
  std::vector<std::string> kinds; // empty = suite default
  std::vector<double> rhos = {0.0};
  std::vector<std::uint64_t> seeds = {0};
  int m = 5;
  int n = 500;
  int eval_n = 100;    // instances scored by the per-instance metrics
  int n_perturb = 1000;
  TrainConfig train;
  int n_blocks = 2;
  int hidden_width = 128;
  double dropout_p = 0.25;
  std::string out_dir = ".";
};

// Applies a JSON config document to the options in place. Keys use the CLI
// flag spelling; unknown keys are rejected. The caller applies the file
// before parsing flags, which realizes the flag > file > default precedence.
void apply_config(const nlohmann::json& config, GenerateOptions& opts);
void apply_config(const nlohmann::json& config, TrainOptions& opts);
void apply_config(const nlohmann::json& config, ExplainOptions& opts);
void apply_config(const nlohmann::json& config, BenchmarkOptions& opts);

int cmd_generate(const GenerateOptions& opts);
int cmd_train(const TrainOptions& opts);
int cmd_explain(const ExplainOptions& opts);
int cmd_benchmark(const BenchmarkOptions& opts);

}  // namespace imn
