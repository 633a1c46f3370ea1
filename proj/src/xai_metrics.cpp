#include "imn/xai_metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>

#include "imn/format.hpp"
#include "imn/rng.hpp"

namespace imn {

namespace {

std::uint64_t instance_seed(std::uint64_t seed, int index) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index) + 1));
}

}  // namespace

std::optional<double> pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("pearson: vectors must share a length of at least 2");
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double va = (da * da).sum();
  const double vb = (db * db).sum();
  if (va == 0.0 || vb == 0.0) return std::nullopt;
  return (da * db).sum() / std::sqrt(va * vb);
}

Eigen::VectorXd brute_force_shapley(const ModelFn& f, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& background_mean, int m_max) {
  const int m = static_cast<int>(x.size());
  if (m < 1) throw std::invalid_argument("shapley: empty instance");
  if (m > m_max || m > 25)
    throw std::invalid_argument("shapley: " + std::to_string(m) +
                                " features exceed the enumeration cap of " +
                                std::to_string(std::min(m_max, 25)));
  if (background_mean.size() != m)
    throw std::invalid_argument("shapley: background dimension mismatch");

  const std::uint32_t n_masks = 1u << m;
  std::vector<double> value(n_masks);
  Eigen::VectorXd z(m);
  for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
    for (int j = 0; j < m; ++j) z(j) = (mask >> j) & 1u ? x(j) : background_mean(j);
    value[mask] = f(z);
  }

  // |S|! (M-|S|-1)! / M!, exact in double for M <= 15.
  std::vector<double> fact(static_cast<std::size_t>(m) + 1, 1.0);
  for (int i = 1; i <= m; ++i) fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i - 1)] * i;
  std::vector<double> coalition_weight(static_cast<std::size_t>(m));
  for (int s = 0; s < m; ++s)
    coalition_weight[static_cast<std::size_t>(s)] =
        fact[static_cast<std::size_t>(s)] * fact[static_cast<std::size_t>(m - s - 1)] /
        fact[static_cast<std::size_t>(m)];

  Eigen::VectorXd phi = Eigen::VectorXd::Zero(m);
  for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
    const double w = mask == n_masks - 1 ? 0.0 : coalition_weight[static_cast<std::size_t>(std::popcount(mask))];
    for (int j = 0; j < m; ++j) {
      if ((mask >> j) & 1u) continue;
      phi(j) += w * (value[mask | (1u << j)] - value[mask]);
    }
  }
  return phi;
}

std::optional<double> faithfulness_instance(const ModelFn& f, const Eigen::VectorXd& attr,
                                            const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& baseline) {
  const Eigen::Index m = x.size();
  if (attr.size() != m || baseline.size() != m)
    throw std::invalid_argument("faithfulness: dimension mismatch");
  const double fx = f(x);
  Eigen::VectorXd drops(m);
  Eigen::VectorXd z = x;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double keep = z(j);
    z(j) = baseline(j);
    drops(j) = fx - f(z);
    z(j) = keep;
  }
  return pearson(attr, drops);
}

double monotonicity_instance(const ModelFn& f, const Eigen::VectorXd& attr,
                             const Eigen::VectorXd& x, const Eigen::VectorXd& baseline) {
  const Eigen::Index m = x.size();
  if (m < 2) throw std::invalid_argument("monotonicity: requires at least 2 features");
  if (attr.size() != m || baseline.size() != m)
    throw std::invalid_argument("monotonicity: dimension mismatch");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double aa = std::abs(attr(a)), ab = std::abs(attr(b));
    if (aa != ab) return aa < ab;
    return a < b;
  });

  Eigen::VectorXd z = baseline;
  double prev_value = f(z);
  Eigen::VectorXd gains(m);
  for (Eigen::Index step = 0; step < m; ++step) {
    z(order[static_cast<std::size_t>(step)]) = x(order[static_cast<std::size_t>(step)]);
    const double cur = f(z);
    gains(step) = std::abs(cur - prev_value);
    prev_value = cur;
  }

  int ordered = 0;
  for (Eigen::Index j = 0; j + 1 < m; ++j)
    if (gains(j + 1) >= gains(j)) ++ordered;
  return static_cast<double>(ordered) / static_cast<double>(m - 1);
}

double infidelity_instance(const ModelFn& f, const Eigen::VectorXd& a, const Eigen::VectorXd& x,
                           double sigma, int n_perturb, std::uint64_t seed) {
  if (sigma <= 0.0) throw std::invalid_argument("infidelity: sigma must be positive");
  if (n_perturb < 1) throw std::invalid_argument("infidelity: n_perturb must be at least 1");
  if (a.size() != x.size()) throw std::invalid_argument("infidelity: dimension mismatch");

  Rng rng(seed);
  const double fx = f(x);
  Eigen::VectorXd noise(x.size());
  double total = 0.0;
  for (int t = 0; t < n_perturb; ++t) {
    for (Eigen::Index j = 0; j < noise.size(); ++j) noise(j) = sigma * rng.normal();
    const double predicted = noise.dot(a);
    const double actual = fx - f(x - noise);
    const double err = predicted - actual;
    total += err * err;
  }
  return total / static_cast<double>(n_perturb);
}

double faithfulness(const ModelFactory& model, const Explainer& explainer,
                    const Eigen::MatrixXd& xs, const Eigen::VectorXd& baseline, int* n_skipped) {
  if (xs.rows() == 0) throw std::invalid_argument("faithfulness: empty instance set");
  double total = 0.0;
  int kept = 0, skipped = 0;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const Eigen::VectorXd x = xs.row(i).transpose();
    const InstanceModel im = model(x);
    const Eigen::VectorXd attr = explainer.attribute(x, static_cast<int>(i));
    const auto r = faithfulness_instance(im.prob, attr, x, baseline);
    if (r.has_value()) {
      total += *r;
      ++kept;
    } else {
      ++skipped;
    }
  }
  if (n_skipped != nullptr) *n_skipped = skipped;
  if (kept == 0) throw std::runtime_error("faithfulness: every instance had zero variance");
  return total / static_cast<double>(kept);
}

double monotonicity(const ModelFactory& model, const Explainer& explainer,
                    const Eigen::MatrixXd& xs, const Eigen::VectorXd& baseline) {
  if (xs.rows() == 0) throw std::invalid_argument("monotonicity: empty instance set");
  double total = 0.0;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const Eigen::VectorXd x = xs.row(i).transpose();
    const InstanceModel im = model(x);
    total += monotonicity_instance(im.prob, explainer.attribute(x, static_cast<int>(i)), x,
                                   baseline);
  }
  return total / static_cast<double>(xs.rows());
}

double infidelity(const ModelFactory& model, const Explainer& explainer, const Eigen::MatrixXd& xs,
                  double sigma, int n_perturb, std::uint64_t seed) {
  if (xs.rows() == 0) throw std::invalid_argument("infidelity: empty instance set");
  double total = 0.0;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const Eigen::VectorXd x = xs.row(i).transpose();
    const InstanceModel im = model(x);
    const Eigen::VectorXd a = explainer.perturbation_vector(x, static_cast<int>(i));
    total += infidelity_instance(im.logit, a, x, sigma, n_perturb,
                                 instance_seed(seed, static_cast<int>(i)));
  }
  return total / static_cast<double>(xs.rows());
}

double shapley_corr(const ModelFactory& model, const Explainer& explainer,
                    const Eigen::MatrixXd& xs, const Eigen::VectorXd& background_mean, int m_max,
                    int* n_skipped) {
  if (xs.rows() < 2) throw std::invalid_argument("shapley_corr: needs at least 2 instances");
  double total = 0.0;
  int kept = 0, skipped = 0;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const Eigen::VectorXd x = xs.row(i).transpose();
    const InstanceModel im = model(x);
    const Eigen::VectorXd oracle = brute_force_shapley(im.prob, x, background_mean, m_max);
    const Eigen::VectorXd attr = explainer.attribute(x, static_cast<int>(i));
    const auto r = pearson(attr, oracle);
    if (r.has_value()) {
      total += *r;
      ++kept;
    } else {
      ++skipped;
    }
  }
  if (n_skipped != nullptr) *n_skipped = skipped;
  if (kept == 0) throw std::runtime_error("shapley_corr: every instance had zero variance");
  return total / static_cast<double>(kept);
}

std::vector<RoarPoint> roar_monotonicity(const Dataset& train_set, const Dataset& val_set,
                                         const std::vector<double>& importance,
                                         const std::vector<double>& fractions,
                                         const TrainConfig& cfg, const NetConfig& net_cfg) {
  const int m = train_set.m();
  if (static_cast<int>(importance.size()) != m)
    throw std::invalid_argument("roar: importance length must match feature count");
  if (fractions.empty()) throw std::invalid_argument("roar: no fractions given");

  std::vector<int> ranked(static_cast<std::size_t>(m));
  std::iota(ranked.begin(), ranked.end(), 0);
  std::sort(ranked.begin(), ranked.end(), [&](int a, int b) {
    if (importance[static_cast<std::size_t>(a)] != importance[static_cast<std::size_t>(b)])
      return importance[static_cast<std::size_t>(a)] > importance[static_cast<std::size_t>(b)];
    return a < b;
  });

  std::vector<double> ordered = fractions;
  std::sort(ordered.begin(), ordered.end());

  std::vector<RoarPoint> curve;
  for (double fraction : ordered) {
    if (fraction <= 0.0 || fraction >= 1.0)
      throw std::invalid_argument("roar: fractions must lie in (0, 1)");
    const int k = static_cast<int>(std::ceil(fraction * m));
    if (k >= m)
      throw std::invalid_argument("roar: fraction " + format_double(fraction) +
                                  " would remove every feature");
    Dataset masked_train = train_set;
    Dataset masked_val = val_set;
    for (int j = 0; j < k; ++j) {
      masked_train.x.col(ranked[static_cast<std::size_t>(j)]).setZero();
      masked_val.x.col(ranked[static_cast<std::size_t>(j)]).setZero();
    }
    const TrainResult result = train(masked_train, cfg, net_cfg);
    curve.push_back({fraction, ensemble_accuracy(result.ensemble, masked_val)});
  }
  return curve;
}

double roar_monotonicity_score(const std::vector<RoarPoint>& curve) {
  if (curve.size() < 2) throw std::invalid_argument("roar score: needs at least 2 points");
  int ok = 0;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i)
    if (curve[i + 1].accuracy <= curve[i].accuracy) ++ok;
  return static_cast<double>(ok) / static_cast<double>(curve.size() - 1);
}

Eigen::VectorXd random_attribution(int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("random_attribution: m must be at least 1");
  Rng rng(seed);
  Eigen::VectorXd v(m);
  for (int j = 0; j < m; ++j) v(j) = rng.normal();
  return v;
}

Explainer random_explainer(std::uint64_t seed) {
  auto draw = [seed](const Eigen::VectorXd& x, int index) {
    return random_attribution(static_cast<int>(x.size()), instance_seed(seed, index));
  };
  return {"random", draw, draw};
}

ModelFactory imn_model_factory(const SnapshotEnsemble& ens) {
  auto shared = std::make_shared<SnapshotEnsemble>(ens);
  return [shared](const Eigen::VectorXd& x) {
    const int cls = ensemble_predict(*shared, x);
    InstanceModel im;
    im.prob = [shared, cls](const Eigen::VectorXd& z) { return ensemble_proba(*shared, z)(cls); };
    im.logit = [shared, cls](const Eigen::VectorXd& z) {
      return predict_logits(ensemble_generate(*shared, z), z)(cls);
    };
    return im;
  };
}

Explainer imn_explainer(const SnapshotEnsemble& ens) {
  auto shared = std::make_shared<SnapshotEnsemble>(ens);
  auto impacts = [shared](const Eigen::VectorXd& x, int) {
    const GeneratedLinearModel lin = ensemble_generate(*shared, x);
    Eigen::Index cls = 0;
    predict_logits(lin, x).maxCoeff(&cls);
    return Eigen::VectorXd(lin.weights.row(cls).transpose().cwiseProduct(x));
  };
  auto weights = [shared](const Eigen::VectorXd& x, int) {
    const GeneratedLinearModel lin = ensemble_generate(*shared, x);
    Eigen::Index cls = 0;
    predict_logits(lin, x).maxCoeff(&cls);
    return Eigen::VectorXd(lin.weights.row(cls).transpose());
  };
  return {"imn", impacts, weights};
}

std::string metric_report_json_line(const MetricReport& report) {
  nlohmann::json j{{"dataset", report.dataset_id}, {"rho", report.rho},
                   {"explainer", report.explainer}, {"metric", report.metric},
                   {"value", report.value},         {"n_instances", report.n_instances},
                   {"seed", report.seed}};
  return j.dump();
}

std::string metric_report_csv_header() {
  return "dataset,rho,explainer,metric,value,n_instances,seed";
}

std::string metric_report_csv_row(const MetricReport& report) {
  return report.dataset_id + "," + format_double(report.rho) + "," + report.explainer + "," +
         report.metric + "," + format_double(report.value) + "," +
         std::to_string(report.n_instances) + "," + std::to_string(report.seed);
}

}  // namespace imn
