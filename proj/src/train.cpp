#include "imn/train.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "imn/baselines.hpp"
#include "imn/rng.hpp"

namespace imn {

void TrainConfig::validate() const {
  if (epochs <= 0) throw std::invalid_argument("train: epochs must be positive");
  if (batch_size <= 0) throw std::invalid_argument("train: batch_size must be positive");
  if (peak_lr <= 0.0) throw std::invalid_argument("train: peak_lr must be positive");
  if (weight_decay < 0.0) throw std::invalid_argument("train: weight_decay must be non-negative");
  if (warmup_epochs < 0 || warmup_epochs >= epochs)
    throw std::invalid_argument("train: warmup_epochs must lie in [0, epochs)");
  if (lambda_l1 < 0.0) throw std::invalid_argument("train: lambda_l1 must be non-negative");
  if (n_cycles < 1) throw std::invalid_argument("train: n_cycles must be at least 1");
  if ((epochs - warmup_epochs) % n_cycles != 0)
    throw std::invalid_argument("train: epochs - warmup_epochs must be divisible by n_cycles");
  if (min_lr < 0.0 || min_lr > peak_lr)
    throw std::invalid_argument("train: min_lr must lie in [0, peak_lr]");
}

double lr_at(long step, long steps_per_epoch, const TrainConfig& cfg) {
  if (step < 0 || steps_per_epoch <= 0) throw std::invalid_argument("train: bad step arguments");
  const long warmup_steps = static_cast<long>(cfg.warmup_epochs) * steps_per_epoch;
  if (step < warmup_steps)
    return cfg.peak_lr * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
  const long cycle_steps = static_cast<long>(cfg.cycle_epochs()) * steps_per_epoch;
  const long t = (step - warmup_steps) % cycle_steps;
  return cfg.min_lr + 0.5 * (cfg.peak_lr - cfg.min_lr) *
                          (1.0 + std::cos(kPi * static_cast<double>(t) /
                                          static_cast<double>(cycle_steps)));
}

AdamState AdamState::zeros(const NetConfig& config) {
  return {ParamSet::zeros(config), ParamSet::zeros(config), 0};
}

void adam_step(ModelParams& params, AdamState& state, const ModelGrads& grads, double lr,
               const TrainConfig& cfg) {
  auto layer_params = params.p.layers();
  auto layer_m = state.m.layers();
  auto layer_v = state.v.layers();
  auto layer_g = grads.layers();
  const auto names = ParamSet::layer_names(params.config.n_blocks);

  for (std::size_t i = 0; i < layer_g.size(); ++i) {
    if (!layer_g[i]->w.allFinite() || !layer_g[i]->b.allFinite())
      throw std::runtime_error("train: non-finite gradient in layer " + names[i]);
  }

  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

  auto update = [&](auto& p, auto& m, auto& v, const auto& g, bool decay) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    auto delta = (lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps)).eval();
    if (decay && cfg.weight_decay > 0.0) delta += lr * cfg.weight_decay * p.array();
    p.array() -= delta;
  };

  for (std::size_t i = 0; i < layer_params.size(); ++i) {
    update(layer_params[i]->w, layer_m[i]->w, layer_v[i]->w, layer_g[i]->w, true);
    update(layer_params[i]->b, layer_m[i]->b, layer_v[i]->b, layer_g[i]->b, false);
  }
}

TrainResult train(const Dataset& train_set, const TrainConfig& cfg, const NetConfig& net_cfg,
                  const Dataset* val_set) {
  cfg.validate();
  net_cfg.validate();
  train_set.validate();
  if (net_cfg.input_dim != train_set.m())
    throw std::invalid_argument("train: net input_dim does not match dataset feature count");
  const int expected_classes = train_set.is_classification() ? train_set.n_classes : 1;
  if (net_cfg.n_classes != expected_classes)
    throw std::invalid_argument("train: net n_classes does not match dataset");

  ModelParams params = init_params(net_cfg);
  AdamState opt = AdamState::zeros(net_cfg);
  Rng rng(cfg.seed);

  const int n = train_set.n();
  const long steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.ensemble.config = net_cfg;
  long global_step = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    double last_lr = 0.0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int stop = std::min(n, start + cfg.batch_size);
      const std::vector<int> idx(order.begin() + start, order.begin() + stop);
      const Batch batch = batch_from(train_set, idx);
      const std::uint64_t dropout_seed = rng.next_u64();
      auto [loss, grads] =
          loss_and_grad(params, batch, cfg.lambda_l1, ForwardMode::train_with_dropout(dropout_seed));
      if (!std::isfinite(loss))
        throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch));
      last_lr = lr_at(global_step, steps_per_epoch, cfg);
      adam_step(params, opt, grads, last_lr, cfg);
      epoch_loss += loss * static_cast<double>(batch.size());
      ++global_step;
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.lr = last_lr;
    entry.train_loss = epoch_loss / static_cast<double>(n);
    if (val_set != nullptr && val_set->is_classification() && val_set->n() > 0) {
      SnapshotEnsemble current{net_cfg, {params.p}};
      entry.val_auroc = ensemble_auroc(current, *val_set);
      entry.has_val_auroc = true;
    }
    result.log.push_back(entry);

    const bool past_warmup = epoch > cfg.warmup_epochs;
    if (past_warmup && (epoch - cfg.warmup_epochs) % cfg.cycle_epochs() == 0)
      result.ensemble.snapshots.push_back(params.p);
  }

  return result;
}

GeneratedLinearModel ensemble_generate(const SnapshotEnsemble& ens, const Eigen::VectorXd& x) {
  if (ens.snapshots.empty()) throw std::invalid_argument("ensemble: no snapshots");
  GeneratedLinearModel acc;
  for (std::size_t i = 0; i < ens.snapshots.size(); ++i) {
    ModelParams params{ens.config, ens.snapshots[i]};
    GeneratedLinearModel lin = generate_linear_eval(params, x);
    if (i == 0) {
      acc = std::move(lin);
    } else {
      acc.weights += lin.weights;
      acc.bias += lin.bias;
    }
  }
  const double inv = 1.0 / static_cast<double>(ens.snapshots.size());
  acc.weights *= inv;
  acc.bias *= inv;
  return acc;
}

Eigen::VectorXd ensemble_proba(const SnapshotEnsemble& ens, const Eigen::VectorXd& x) {
  return softmax(predict_logits(ensemble_generate(ens, x), x));
}

int ensemble_predict(const SnapshotEnsemble& ens, const Eigen::VectorXd& x) {
  const Eigen::VectorXd z = predict_logits(ensemble_generate(ens, x), x);
  Eigen::Index best = 0;
  z.maxCoeff(&best);
  return static_cast<int>(best);
}

double ensemble_value(const SnapshotEnsemble& ens, const Eigen::VectorXd& x) {
  if (ens.config.n_classes != 1)
    throw std::invalid_argument("ensemble: value output requires a regression model");
  return predict_logits(ensemble_generate(ens, x), x)(0);
}

double ensemble_accuracy(const SnapshotEnsemble& ens, const Dataset& data) {
  if (!data.is_classification())
    throw std::invalid_argument("ensemble: accuracy requires a classification dataset");
  int correct = 0;
  for (int i = 0; i < data.n(); ++i) {
    if (ensemble_predict(ens, data.x.row(i).transpose()) == data.y_class[static_cast<std::size_t>(i)])
      ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.n());
}

double ensemble_auroc(const SnapshotEnsemble& ens, const Dataset& data) {
  if (!data.is_classification())
    throw std::invalid_argument("ensemble: auroc requires a classification dataset");
  const int n = data.n();
  Eigen::MatrixXd scores(n, data.n_classes);
  for (int i = 0; i < n; ++i)
    scores.row(i) = ensemble_proba(ens, data.x.row(i).transpose()).transpose();
  if (data.n_classes == 2) {
    std::vector<double> s(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = scores(i, 1);
    return auroc(s, data.y_class);
  }
  return auroc_macro_ovr(scores, data.y_class, data.n_classes);
}

}  // namespace imn
