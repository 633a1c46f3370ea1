#include "imn/synth.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "imn/rng.hpp"
#include "imn/xai_metrics.hpp"

namespace imn {

Dataset gen_half_moons(int n, double noise_std, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("half-moons: n must be an even count of at least 2");
  if (noise_std < 0.0) throw std::invalid_argument("half-moons: noise_std must be non-negative");

  const int half = n / 2;
  Dataset data;
  data.x.resize(n, 2);
  data.y_class.resize(static_cast<std::size_t>(n));
  data.feature_names = {"x0", "x1"};
  data.n_classes = 2;
  data.task = TaskKind::kBinary;

  Rng rng(seed);
  auto angle = [half](int i) {
    return half > 1 ? kPi * static_cast<double>(i) / static_cast<double>(half - 1) : 0.0;
  };
  for (int i = 0; i < half; ++i) {
    const double t = angle(i);
    data.x(i, 0) = std::cos(t) + noise_std * rng.normal();
    data.x(i, 1) = std::sin(t) + noise_std * rng.normal();
    data.y_class[static_cast<std::size_t>(i)] = 0;
  }
  for (int i = 0; i < half; ++i) {
    const double t = angle(i);
    data.x(half + i, 0) = 1.0 - std::cos(t) + noise_std * rng.normal();
    data.x(half + i, 1) = 0.5 - std::sin(t) + noise_std * rng.normal();
    data.y_class[static_cast<std::size_t>(half + i)] = 1;
  }
  return data;
}

std::string xai_kind_name(XaiKind kind) {
  switch (kind) {
    case XaiKind::kLinear: return "gaussian-linear";
    case XaiKind::kNonlinearAdditive: return "gaussian-nonlinear-additive";
    case XaiKind::kPiecewise: return "gaussian-piecewise";
  }
  throw std::logic_error("unreachable");
}

XaiKind xai_kind_from_name(const std::string& name) {
  if (name == "gaussian-linear") return XaiKind::kLinear;
  if (name == "gaussian-nonlinear-additive") return XaiKind::kNonlinearAdditive;
  if (name == "gaussian-piecewise") return XaiKind::kPiecewise;
  throw std::invalid_argument("unknown xai dataset kind: " + name);
}

void XaiDatasetSpec::validate() const {
  if (m < 1) throw std::invalid_argument("xai dataset: m must be at least 1");
  if (n < 1) throw std::invalid_argument("xai dataset: n must be at least 1");
  if (rho < 0.0 || rho >= 1.0)
    throw std::invalid_argument("xai dataset: rho must lie in [0, 1)");
  if (kind != XaiKind::kLinear && m > shapley_m_max)
    throw std::invalid_argument(
        "xai dataset: Shapley ground truth is capped at " + std::to_string(shapley_m_max) +
        " features; got " + std::to_string(m));
}

namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double apply_g(int kind, double v) {
  switch (kind) {
    case 0: return std::sin(v);
    case 1: return std::tanh(v);
    case 2: return v * v;
    default: return v;
  }
}

}  // namespace

XaiData gen_xai_dataset(const XaiDatasetSpec& spec) {
  spec.validate();
  const int m = spec.m;
  const int n = spec.n;
  Rng rng(spec.seed);

  XaiData out;
  switch (spec.kind) {
    case XaiKind::kLinear:
      out.linear_weights.resize(m);
      for (int j = 0; j < m; ++j) out.linear_weights(j) = rng.normal();
      break;
    case XaiKind::kNonlinearAdditive: {
      out.function_kinds.resize(static_cast<std::size_t>(m));
      for (int j = 0; j < m; ++j) out.function_kinds[static_cast<std::size_t>(j)] = j % 4;
      rng.shuffle(out.function_kinds);
      break;
    }
    case XaiKind::kPiecewise:
      out.thresholds.resize(m);
      out.coefficients.resize(m);
      for (int j = 0; j < m; ++j) out.thresholds(j) = rng.uniform(-0.5, 0.5);
      for (int j = 0; j < m; ++j) out.coefficients(j) = rng.normal();
      break;
  }

  // Equicorrelated unit Gaussians via the Cholesky factor of (1-rho)I + rho.
  Eigen::MatrixXd chol = Eigen::MatrixXd::Identity(m, m);
  if (spec.rho > 0.0) {
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(m, m, spec.rho);
    sigma.diagonal().setOnes();
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("xai dataset: equicorrelation matrix is not positive definite");
    chol = llt.matrixL();
  }

  Dataset& data = out.data;
  data.x.resize(n, m);
  data.y_class.resize(static_cast<std::size_t>(n));
  data.n_classes = 2;
  data.task = TaskKind::kBinary;
  data.feature_names.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) data.feature_names.push_back("x" + std::to_string(j));

  Eigen::VectorXd z(m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) z(j) = rng.normal();
    data.x.row(i) = (chol * z).transpose();
  }

  auto score = [&](const Eigen::VectorXd& row) {
    double total = 0.0;
    switch (spec.kind) {
      case XaiKind::kLinear:
        total = out.linear_weights.dot(row);
        break;
      case XaiKind::kNonlinearAdditive:
        for (int j = 0; j < m; ++j)
          total += apply_g(out.function_kinds[static_cast<std::size_t>(j)], row(j));
        break;
      case XaiKind::kPiecewise:
        for (int j = 0; j < m; ++j) total += out.coefficients(j) * sgn(row(j) - out.thresholds(j));
        break;
    }
    return total;
  };

  for (int i = 0; i < n; ++i)
    data.y_class[static_cast<std::size_t>(i)] = score(data.x.row(i).transpose()) > 0.0 ? 1 : 0;

  // Ground truth explains the generative score. For the linear kind the
  // closed form w_j x_j coincides with the Shapley value of the score under
  // a zero (distribution-mean) background; the other kinds go through the
  // exact oracle with the same background.
  out.ground_truth.resize(n, m);
  if (spec.kind == XaiKind::kLinear) {
    for (int i = 0; i < n; ++i)
      out.ground_truth.row(i) = data.x.row(i).cwiseProduct(out.linear_weights.transpose());
  } else {
    const Eigen::VectorXd background = Eigen::VectorXd::Zero(m);
    const ModelFn fn = [&score](const Eigen::VectorXd& v) { return score(v); };
    for (int i = 0; i < n; ++i)
      out.ground_truth.row(i) =
          brute_force_shapley(fn, data.x.row(i).transpose(), background, spec.shapley_m_max)
              .transpose();
  }
  return out;
}

}  // namespace imn
