#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "imn/dataset.hpp"

namespace imn {

// Residual MLP hypernetwork. For an input row x it emits the coefficients of
// a linear model in x itself; that linear model's logits are the prediction.
struct NetConfig {
  int input_dim = 0;        // M
  int n_blocks = 2;
  int hidden_width = 128;
  double dropout_p = 0.25;
  int n_classes = 2;        // C; 1 means regression
  std::uint64_t seed = 0;

  int head_dim() const { return n_classes * (input_dim + 1); }
  void validate() const;
};

struct DenseLayer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;  // out
};

// One parameter (or gradient, or optimizer-moment) set with the layout fixed
// by a NetConfig: input projection, two dense layers per residual block, and
// the weight-emitting head.
struct ParamSet {
  DenseLayer input;
  std::vector<DenseLayer> blocks;  // 2 * n_blocks entries
  DenseLayer head;

  std::vector<DenseLayer*> layers();
  std::vector<const DenseLayer*> layers() const;
  static std::vector<std::string> layer_names(int n_blocks);
  static ParamSet zeros(const NetConfig& config);
  std::size_t n_scalars() const;
  bool all_finite() const;
};

struct ModelParams {
  NetConfig config;
  ParamSet p;
};

using ModelGrads = ParamSet;

// Glorot-uniform weights, zero biases, deterministic per config.seed.
ModelParams init_params(const NetConfig& config);

// Per-instance linear model emitted by the hypernetwork.
struct GeneratedLinearModel {
  Eigen::MatrixXd weights;  // C x M
  Eigen::VectorXd bias;     // C
};

// eval: no dropout. train: inverted dropout on each residual branch, masks
// drawn from the given seed.
struct ForwardMode {
  bool train = false;
  std::uint64_t dropout_seed = 0;

  static ForwardMode eval() { return {false, 0}; }
  static ForwardMode train_with_dropout(std::uint64_t seed) { return {true, seed}; }
};

// Cached activations for one batch, sufficient for the exact backward pass.
struct ForwardTrace {
  Eigen::MatrixXd x;        // B x M
  Eigen::MatrixXd z0, h0;   // B x H
  struct BlockTrace {
    Eigen::MatrixXd h_in, u1, a1, u2, a2;
    Eigen::MatrixXd mask;   // scaled keep-mask; empty in eval mode
  };
  std::vector<BlockTrace> blocks;
  Eigen::MatrixXd h_final;  // B x H
  Eigen::MatrixXd out;      // B x C*(M+1)
};

ForwardTrace forward(const ModelParams& params, const Eigen::MatrixXd& x_batch,
                     const ForwardMode& mode);

// Splits one head-output row (row-major: per class M weights then the bias)
// into a linear model.
GeneratedLinearModel reshape_head_row(const NetConfig& config,
                                      const Eigen::VectorXd& head_row);

std::pair<GeneratedLinearModel, ForwardTrace> generate_linear(
    const ModelParams& params, const Eigen::VectorXd& x, const ForwardMode& mode);

GeneratedLinearModel generate_linear_eval(const ModelParams& params,
                                          const Eigen::VectorXd& x);

// z_c = sum_m weights(c,m) x_m + bias(c), accumulated in ascending m.
Eigen::VectorXd predict_logits(const GeneratedLinearModel& lin, const Eigen::VectorXd& x);

// Max-subtracted, normalized exponentials.
Eigen::VectorXd softmax(const Eigen::VectorXd& z);

// Composed prediction: softmax of the generated linear model applied to x.
Eigen::VectorXd predict_proba(const ModelParams& params, const Eigen::VectorXd& x);

// Targets for one batch; exactly one of the two vectors is used.
struct Batch {
  Eigen::MatrixXd x;
  std::vector<int> y_class;
  Eigen::VectorXd y_value;

  bool classification() const { return !y_class.empty(); }
  Eigen::Index size() const { return x.rows(); }
};

Batch batch_from(const Dataset& data, const std::vector<int>& indices);

// Mean cross-entropy (classification) or mean squared error (regression)
// plus lambda_l1 times the mean L1 norm of the generated coefficients.
double batch_loss(const ModelParams& params, const Batch& batch, double lambda_l1,
                  const ForwardMode& mode);

// Exact reverse-mode gradient of batch_loss; the L1 subgradient at zero is 0.
// When paired with a forward pass, the dropout seed reproduces its masks.
ModelGrads grad(const ModelParams& params, const Batch& batch, double lambda_l1,
                const ForwardMode& mode);

std::pair<double, ModelGrads> loss_and_grad(const ModelParams& params, const Batch& batch,
                                            double lambda_l1, const ForwardMode& mode);

// Exact GELU, x * Phi(x), and its derivative.
double gelu(double x);
double gelu_derivative(double x);

}  // namespace imn
