#include "imn/net.hpp"

#include <cmath>
#include <stdexcept>

#include "imn/rng.hpp"

namespace imn {

void NetConfig::validate() const {
  if (input_dim <= 0) throw std::invalid_argument("net: input_dim must be positive");
  if (n_blocks < 0) throw std::invalid_argument("net: n_blocks must be non-negative");
  if (hidden_width <= 0) throw std::invalid_argument("net: hidden_width must be positive");
  if (dropout_p < 0.0 || dropout_p >= 1.0)
    throw std::invalid_argument("net: dropout_p must lie in [0, 1)");
  if (n_classes < 1) throw std::invalid_argument("net: n_classes must be at least 1");
}

std::vector<DenseLayer*> ParamSet::layers() {
  std::vector<DenseLayer*> out;
  out.push_back(&input);
  for (auto& layer : blocks) out.push_back(&layer);
  out.push_back(&head);
  return out;
}

std::vector<const DenseLayer*> ParamSet::layers() const {
  std::vector<const DenseLayer*> out;
  out.push_back(&input);
  for (const auto& layer : blocks) out.push_back(&layer);
  out.push_back(&head);
  return out;
}

std::vector<std::string> ParamSet::layer_names(int n_blocks) {
  std::vector<std::string> names;
  names.push_back("input");
  for (int k = 0; k < n_blocks; ++k) {
    names.push_back("block" + std::to_string(k) + ".dense1");
    names.push_back("block" + std::to_string(k) + ".dense2");
  }
  names.push_back("head");
  return names;
}

ParamSet ParamSet::zeros(const NetConfig& config) {
  config.validate();
  const int h = config.hidden_width;
  ParamSet p;
  p.input.w = Eigen::MatrixXd::Zero(h, config.input_dim);
  p.input.b = Eigen::VectorXd::Zero(h);
  p.blocks.resize(2 * static_cast<std::size_t>(config.n_blocks));
  for (auto& layer : p.blocks) {
    layer.w = Eigen::MatrixXd::Zero(h, h);
    layer.b = Eigen::VectorXd::Zero(h);
  }
  p.head.w = Eigen::MatrixXd::Zero(config.head_dim(), h);
  p.head.b = Eigen::VectorXd::Zero(config.head_dim());
  return p;
}

std::size_t ParamSet::n_scalars() const {
  std::size_t total = 0;
  for (const auto* layer : layers())
    total += static_cast<std::size_t>(layer->w.size() + layer->b.size());
  return total;
}

bool ParamSet::all_finite() const {
  for (const auto* layer : layers()) {
    if (!layer->w.allFinite() || !layer->b.allFinite()) return false;
  }
  return true;
}

ModelParams init_params(const NetConfig& config) {
  config.validate();
  ModelParams params{config, ParamSet::zeros(config)};
  Rng rng(config.seed);
  for (auto* layer : params.p.layers()) {
    const auto fan_out = layer->w.rows();
    const auto fan_in = layer->w.cols();
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (Eigen::Index r = 0; r < fan_out; ++r)
      for (Eigen::Index c = 0; c < fan_in; ++c)
        layer->w(r, c) = rng.uniform(-limit, limit);
    layer->b.setZero();
  }
  return params;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double gelu_derivative(double x) {
  const double phi_cdf = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
  const double phi_pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
  return phi_cdf + x * phi_pdf;
}

namespace {

Eigen::MatrixXd gelu_mat(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return gelu(v); });
}

Eigen::MatrixXd gelu_derivative_mat(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return gelu_derivative(v); });
}

Eigen::MatrixXd affine(const Eigen::MatrixXd& a, const DenseLayer& layer) {
  return (a * layer.w.transpose()).rowwise() + layer.b.transpose();
}

}  // namespace

ForwardTrace forward(const ModelParams& params, const Eigen::MatrixXd& x_batch,
                     const ForwardMode& mode) {
  const NetConfig& cfg = params.config;
  if (x_batch.cols() != cfg.input_dim)
    throw std::invalid_argument("net: input has " + std::to_string(x_batch.cols()) +
                                " columns, expected " + std::to_string(cfg.input_dim));
  if (!x_batch.allFinite()) throw std::invalid_argument("net: non-finite input");

  ForwardTrace trace;
  trace.x = x_batch;
  trace.z0 = affine(x_batch, params.p.input);
  trace.h0 = gelu_mat(trace.z0);

  const bool use_dropout = mode.train && cfg.dropout_p > 0.0;
  Rng drop_rng(mode.dropout_seed);
  const double keep = 1.0 - cfg.dropout_p;
  const double scale = 1.0 / keep;

  Eigen::MatrixXd h = trace.h0;
  trace.blocks.resize(static_cast<std::size_t>(cfg.n_blocks));
  for (int k = 0; k < cfg.n_blocks; ++k) {
    auto& bt = trace.blocks[static_cast<std::size_t>(k)];
    const DenseLayer& d1 = params.p.blocks[static_cast<std::size_t>(2 * k)];
    const DenseLayer& d2 = params.p.blocks[static_cast<std::size_t>(2 * k + 1)];
    bt.h_in = h;
    bt.u1 = affine(bt.h_in, d1);
    bt.a1 = gelu_mat(bt.u1);
    bt.u2 = affine(bt.a1, d2);
    bt.a2 = gelu_mat(bt.u2);
    if (use_dropout) {
      bt.mask.resize(bt.a2.rows(), bt.a2.cols());
      for (Eigen::Index r = 0; r < bt.mask.rows(); ++r)
        for (Eigen::Index c = 0; c < bt.mask.cols(); ++c)
          bt.mask(r, c) = drop_rng.uniform() < keep ? scale : 0.0;
      h = bt.h_in + bt.a2.cwiseProduct(bt.mask);
    } else {
      h = bt.h_in + bt.a2;
    }
  }
  trace.h_final = h;
  trace.out = affine(trace.h_final, params.p.head);
  return trace;
}

GeneratedLinearModel reshape_head_row(const NetConfig& config, const Eigen::VectorXd& head_row) {
  if (head_row.size() != config.head_dim())
    throw std::invalid_argument("net: head row has wrong length");
  const int m = config.input_dim;
  GeneratedLinearModel lin;
  lin.weights.resize(config.n_classes, m);
  lin.bias.resize(config.n_classes);
  for (int c = 0; c < config.n_classes; ++c) {
    const int base = c * (m + 1);
    for (int j = 0; j < m; ++j) lin.weights(c, j) = head_row(base + j);
    lin.bias(c) = head_row(base + m);
  }
  return lin;
}

std::pair<GeneratedLinearModel, ForwardTrace> generate_linear(const ModelParams& params,
                                                              const Eigen::VectorXd& x,
                                                              const ForwardMode& mode) {
  ForwardTrace trace = forward(params, x.transpose(), mode);
  return {reshape_head_row(params.config, trace.out.row(0).transpose()), std::move(trace)};
}

GeneratedLinearModel generate_linear_eval(const ModelParams& params, const Eigen::VectorXd& x) {
  return generate_linear(params, x, ForwardMode::eval()).first;
}

Eigen::VectorXd predict_logits(const GeneratedLinearModel& lin, const Eigen::VectorXd& x) {
  if (lin.weights.cols() != x.size())
    throw std::invalid_argument("net: feature count mismatch in predict_logits");
  Eigen::VectorXd z(lin.weights.rows());
  for (Eigen::Index c = 0; c < lin.weights.rows(); ++c) {
    double acc = 0.0;
    for (Eigen::Index m = 0; m < x.size(); ++m) acc += lin.weights(c, m) * x(m);
    z(c) = acc + lin.bias(c);
  }
  return z;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  const double zmax = z.maxCoeff();
  Eigen::VectorXd e = (z.array() - zmax).exp();
  return e / e.sum();
}

Eigen::VectorXd predict_proba(const ModelParams& params, const Eigen::VectorXd& x) {
  return softmax(predict_logits(generate_linear_eval(params, x), x));
}

Batch batch_from(const Dataset& data, const std::vector<int>& indices) {
  Batch batch;
  batch.x.resize(static_cast<Eigen::Index>(indices.size()), data.x.cols());
  for (std::size_t i = 0; i < indices.size(); ++i)
    batch.x.row(static_cast<Eigen::Index>(i)) = data.x.row(indices[i]);
  if (data.is_classification()) {
    batch.y_class.reserve(indices.size());
    for (int idx : indices) batch.y_class.push_back(data.y_class[static_cast<std::size_t>(idx)]);
  } else {
    batch.y_value.resize(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t i = 0; i < indices.size(); ++i)
      batch.y_value(static_cast<Eigen::Index>(i)) = data.y_value(indices[i]);
  }
  return batch;
}

namespace {

// Logits for every row of the trace output, via the same per-instance linear
// form used at prediction time.
Eigen::MatrixXd trace_logits(const NetConfig& cfg, const ForwardTrace& trace) {
  const Eigen::Index b = trace.out.rows();
  Eigen::MatrixXd z(b, cfg.n_classes);
  for (Eigen::Index i = 0; i < b; ++i) {
    GeneratedLinearModel lin = reshape_head_row(cfg, trace.out.row(i).transpose());
    z.row(i) = predict_logits(lin, trace.x.row(i).transpose()).transpose();
  }
  return z;
}

double log_sum_exp(const Eigen::VectorXd& z) {
  const double zmax = z.maxCoeff();
  return zmax + std::log((z.array() - zmax).exp().sum());
}

double data_loss(const NetConfig& cfg, const Batch& batch, const Eigen::MatrixXd& z) {
  const auto b = static_cast<double>(batch.size());
  double total = 0.0;
  if (batch.classification()) {
    for (Eigen::Index i = 0; i < batch.size(); ++i) {
      const Eigen::VectorXd zi = z.row(i).transpose();
      total += log_sum_exp(zi) - zi(batch.y_class[static_cast<std::size_t>(i)]);
    }
  } else {
    if (cfg.n_classes != 1)
      throw std::invalid_argument("net: regression batch requires n_classes == 1");
    for (Eigen::Index i = 0; i < batch.size(); ++i) {
      const double diff = z(i, 0) - batch.y_value(i);
      total += diff * diff;
    }
  }
  return total / b;
}

double l1_penalty(const Eigen::MatrixXd& out, double lambda_l1) {
  if (lambda_l1 == 0.0) return 0.0;
  return lambda_l1 * out.cwiseAbs().sum() / static_cast<double>(out.rows());
}

// dL/dz for the data term, already divided by the batch size.
Eigen::MatrixXd logit_grad(const Batch& batch, const Eigen::MatrixXd& z) {
  const auto b = static_cast<double>(batch.size());
  Eigen::MatrixXd dz(z.rows(), z.cols());
  if (batch.classification()) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      Eigen::VectorXd p = softmax(z.row(i).transpose());
      p(batch.y_class[static_cast<std::size_t>(i)]) -= 1.0;
      dz.row(i) = p.transpose() / b;
    }
  } else {
    for (Eigen::Index i = 0; i < z.rows(); ++i)
      dz(i, 0) = 2.0 * (z(i, 0) - batch.y_value(i)) / b;
  }
  return dz;
}

}  // namespace

double batch_loss(const ModelParams& params, const Batch& batch, double lambda_l1,
                  const ForwardMode& mode) {
  if (batch.size() == 0) throw std::invalid_argument("net: empty batch");
  if (lambda_l1 < 0.0) throw std::invalid_argument("net: lambda_l1 must be non-negative");
  const ForwardTrace trace = forward(params, batch.x, mode);
  const Eigen::MatrixXd z = trace_logits(params.config, trace);
  return data_loss(params.config, batch, z) + l1_penalty(trace.out, lambda_l1);
}

std::pair<double, ModelGrads> loss_and_grad(const ModelParams& params, const Batch& batch,
                                            double lambda_l1, const ForwardMode& mode) {
  if (batch.size() == 0) throw std::invalid_argument("net: empty batch");
  if (lambda_l1 < 0.0) throw std::invalid_argument("net: lambda_l1 must be non-negative");
  const NetConfig& cfg = params.config;
  const ForwardTrace trace = forward(params, batch.x, mode);
  const Eigen::MatrixXd z = trace_logits(cfg, trace);
  const double loss = data_loss(cfg, batch, z) + l1_penalty(trace.out, lambda_l1);

  const Eigen::Index b = batch.size();
  const int m = cfg.input_dim;
  const Eigen::MatrixXd dz = logit_grad(batch, z);

  // d(loss)/d(head output): the data term routes dz through the generated
  // linear form, the L1 term contributes a scaled sign (0 at 0).
  Eigen::MatrixXd dout = Eigen::MatrixXd::Zero(b, cfg.head_dim());
  for (Eigen::Index i = 0; i < b; ++i) {
    for (int c = 0; c < cfg.n_classes; ++c) {
      const int base = c * (m + 1);
      const double g = dz(i, c);
      for (int j = 0; j < m; ++j) dout(i, base + j) = g * trace.x(i, j);
      dout(i, base + m) = g;
    }
  }
  if (lambda_l1 != 0.0) {
    const double lam = lambda_l1 / static_cast<double>(b);
    dout += trace.out.unaryExpr([lam](double v) {
      if (v > 0.0) return lam;
      if (v < 0.0) return -lam;
      return 0.0;
    });
  }

  ModelGrads grads = ParamSet::zeros(cfg);
  grads.head.w = dout.transpose() * trace.h_final;
  grads.head.b = dout.colwise().sum().transpose();
  Eigen::MatrixXd dh = dout * params.p.head.w;

  for (int k = cfg.n_blocks - 1; k >= 0; --k) {
    const auto& bt = trace.blocks[static_cast<std::size_t>(k)];
    const DenseLayer& d1 = params.p.blocks[static_cast<std::size_t>(2 * k)];
    const DenseLayer& d2 = params.p.blocks[static_cast<std::size_t>(2 * k + 1)];
    DenseLayer& g1 = grads.blocks[static_cast<std::size_t>(2 * k)];
    DenseLayer& g2 = grads.blocks[static_cast<std::size_t>(2 * k + 1)];

    Eigen::MatrixXd da2 = bt.mask.size() > 0 ? dh.cwiseProduct(bt.mask).eval() : dh;
    Eigen::MatrixXd du2 = da2.cwiseProduct(gelu_derivative_mat(bt.u2));
    g2.w = du2.transpose() * bt.a1;
    g2.b = du2.colwise().sum().transpose();
    Eigen::MatrixXd da1 = du2 * d2.w;
    Eigen::MatrixXd du1 = da1.cwiseProduct(gelu_derivative_mat(bt.u1));
    g1.w = du1.transpose() * bt.h_in;
    g1.b = du1.colwise().sum().transpose();
    dh += du1 * d1.w;
  }

  Eigen::MatrixXd dz0 = dh.cwiseProduct(gelu_derivative_mat(trace.z0));
  grads.input.w = dz0.transpose() * trace.x;
  grads.input.b = dz0.colwise().sum().transpose();
  return {loss, std::move(grads)};
}

ModelGrads grad(const ModelParams& params, const Batch& batch, double lambda_l1,
                const ForwardMode& mode) {
  return loss_and_grad(params, batch, lambda_l1, mode).second;
}

}  // namespace imn
