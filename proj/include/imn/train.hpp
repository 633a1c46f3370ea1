#pragma once

#include <cstdint>
#include <vector>

#include "imn/dataset.hpp"
#include "imn/net.hpp"

namespace imn {

struct TrainConfig {
  int epochs = 500;
  int batch_size = 64;
  double peak_lr = 0.01;
  double weight_decay = 0.01;
  int warmup_epochs = 5;
  double lambda_l1 = 0.1;
  int n_cycles = 5;
  double min_lr = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
  int cycle_epochs() const { return (epochs - warmup_epochs) / n_cycles; }
};

// Learning rate at a global 0-based step: linear warmup to peak_lr over the
// warmup epochs, then cosine decay from peak_lr to min_lr within each of the
// n_cycles equal cycles, restarting at peak_lr.
double lr_at(long step, long steps_per_epoch, const TrainConfig& cfg);

struct AdamState {
  ParamSet m;
  ParamSet v;
  long step = 0;

  static AdamState zeros(const NetConfig& config);
};

// One update with bias-corrected moments and decoupled weight decay (applied
// to weights only, never biases). Throws on a non-finite gradient, naming the
// offending layer.
void adam_step(ModelParams& params, AdamState& state, const ModelGrads& grads, double lr,
               const TrainConfig& cfg);

struct EpochLog {
  int epoch = 0;        // 1-based
  double lr = 0.0;      // at the last step of the epoch
  double train_loss = 0.0;
  double val_auroc = 0.0;
  bool has_val_auroc = false;
};

// Parameter snapshots captured at the end of each cosine cycle. The ensemble
// prediction averages the generated linear coefficients, so it is itself a
// per-instance linear model.
struct SnapshotEnsemble {
  NetConfig config;
  std::vector<ParamSet> snapshots;

  std::size_t size() const { return snapshots.size(); }
};

struct TrainResult {
  SnapshotEnsemble ensemble;
  std::vector<EpochLog> log;
};

// val_set, when given, only adds a per-epoch AUROC to the log; it never
// influences the optimization.
TrainResult train(const Dataset& train_set, const TrainConfig& cfg, const NetConfig& net_cfg,
                  const Dataset* val_set = nullptr);

GeneratedLinearModel ensemble_generate(const SnapshotEnsemble& ens, const Eigen::VectorXd& x);
Eigen::VectorXd ensemble_proba(const SnapshotEnsemble& ens, const Eigen::VectorXd& x);
int ensemble_predict(const SnapshotEnsemble& ens, const Eigen::VectorXd& x);
double ensemble_value(const SnapshotEnsemble& ens, const Eigen::VectorXd& x);  // regression
double ensemble_accuracy(const SnapshotEnsemble& ens, const Dataset& data);

// Binary: AUROC of the positive-class probability. Multiclass: macro
// one-vs-rest.
double ensemble_auroc(const SnapshotEnsemble& ens, const Dataset& data);

}  // namespace imn
