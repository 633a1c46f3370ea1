#include "imn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "imn/rng.hpp"

namespace imn {

Eigen::VectorXd LogisticRegression::proba(const Eigen::VectorXd& x) const {
  return softmax(w * x + b);
}

int LogisticRegression::predict(const Eigen::VectorXd& x) const {
  Eigen::Index best;
  (w * x + b).maxCoeff(&best);
  return static_cast<int>(best);
}

double LogisticRegression::accuracy(const Dataset& data) const {
  int correct = 0;
  for (int i = 0; i < data.n(); ++i)
    if (predict(data.x.row(i).transpose()) == data.y_class[static_cast<std::size_t>(i)]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.n());
}

namespace {

Eigen::MatrixXd class_probs_matrix(const LogisticRegression& model, const Dataset& data) {
  Eigen::MatrixXd z = (data.x * model.w.transpose()).rowwise() + model.b.transpose();
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    z.row(i) = softmax(z.row(i).transpose()).transpose();
  return z;
}

}  // namespace

double logreg_loss(const LogisticRegression& model, const Dataset& data, double l2) {
  const Eigen::MatrixXd p = class_probs_matrix(model, data);
  double total = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const double pi = p(i, data.y_class[static_cast<std::size_t>(i)]);
    total -= std::log(std::max(pi, 1e-300));
  }
  return total / static_cast<double>(data.n()) + 0.5 * l2 * model.w.squaredNorm();
}

void logreg_grad(const LogisticRegression& model, const Dataset& data, double l2,
                 Eigen::MatrixXd& dw, Eigen::VectorXd& db) {
  Eigen::MatrixXd residual = class_probs_matrix(model, data);
  for (int i = 0; i < data.n(); ++i) residual(i, data.y_class[static_cast<std::size_t>(i)]) -= 1.0;
  residual /= static_cast<double>(data.n());
  dw = residual.transpose() * data.x + l2 * model.w;
  db = residual.colwise().sum().transpose();
}

LogisticRegression train_logreg(const Dataset& data, double l2, double lr, int iters) {
  data.validate();
  if (!data.is_classification())
    throw std::invalid_argument("logreg: requires a classification dataset");
  if (l2 < 0.0) throw std::invalid_argument("logreg: l2 must be non-negative");
  if (lr <= 0.0 || iters < 1) throw std::invalid_argument("logreg: bad optimizer settings");

  LogisticRegression model;
  model.w = Eigen::MatrixXd::Zero(data.n_classes, data.m());
  model.b = Eigen::VectorXd::Zero(data.n_classes);
  Eigen::MatrixXd dw;
  Eigen::VectorXd db;
  for (int it = 0; it < iters; ++it) {
    logreg_grad(model, data, l2, dw, db);
    model.w -= lr * dw;
    model.b -= lr * db;
    if (!model.w.allFinite() || !model.b.allFinite())
      throw std::runtime_error("logreg: diverged at iteration " + std::to_string(it + 1));
  }
  return model;
}

int DecisionTree::predict(const Eigen::VectorXd& x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
    node = x(nd.feature) <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(node)].leaf_class;
}

Eigen::VectorXd DecisionTree::proba(const Eigen::VectorXd& x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
    node = x(nd.feature) <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(node)].class_probs;
}

double DecisionTree::accuracy(const Dataset& data) const {
  int correct = 0;
  for (int i = 0; i < data.n(); ++i)
    if (predict(data.x.row(i).transpose()) == data.y_class[static_cast<std::size_t>(i)]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.n());
}

int DecisionTree::depth() const {
  // Iterative depth over the node array; children always follow parents.
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].feature >= 0) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
    deepest = std::max(deepest, level[i]);
  }
  return deepest;
}

namespace {

struct CartBuilder {
  const Dataset& data;
  int max_depth;
  int min_samples_leaf;
  std::vector<TreeNode> nodes;

  double gini(const std::vector<int>& counts, int total) const {
    double g = 1.0;
    for (int c : counts) {
      const double p = static_cast<double>(c) / static_cast<double>(total);
      g -= p * p;
    }
    return g;
  }

  int make_leaf(const std::vector<int>& counts, int total) {
    TreeNode leaf;
    leaf.class_probs.resize(data.n_classes);
    int best = 0;
    for (int c = 0; c < data.n_classes; ++c) {
      leaf.class_probs(c) =
          static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(total);
      if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = c;
    }
    leaf.leaf_class = best;
    nodes.push_back(std::move(leaf));
    return static_cast<int>(nodes.size()) - 1;
  }

  int build(std::vector<int>& rows, int depth) {
    const int total = static_cast<int>(rows.size());
    std::vector<int> counts(static_cast<std::size_t>(data.n_classes), 0);
    for (int r : rows) ++counts[static_cast<std::size_t>(data.y_class[static_cast<std::size_t>(r)])];
    const bool pure = *std::max_element(counts.begin(), counts.end()) == total;
    if (pure || depth >= max_depth || total < 2 * min_samples_leaf)
      return make_leaf(counts, total);

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, int>> column(static_cast<std::size_t>(total));
    std::vector<int> left_counts(static_cast<std::size_t>(data.n_classes));

    for (int j = 0; j < data.m(); ++j) {
      for (int t = 0; t < total; ++t)
        column[static_cast<std::size_t>(t)] = {data.x(rows[static_cast<std::size_t>(t)], j),
                                               data.y_class[static_cast<std::size_t>(
                                                   rows[static_cast<std::size_t>(t)])]};
      std::sort(column.begin(), column.end());
      std::fill(left_counts.begin(), left_counts.end(), 0);
      int n_left = 0;
      for (int t = 0; t + 1 < total; ++t) {
        ++left_counts[static_cast<std::size_t>(column[static_cast<std::size_t>(t)].second)];
        ++n_left;
        const double v = column[static_cast<std::size_t>(t)].first;
        const double v_next = column[static_cast<std::size_t>(t + 1)].first;
        if (v == v_next) continue;
        const int n_right = total - n_left;
        if (n_left < min_samples_leaf || n_right < min_samples_leaf) continue;
        std::vector<int> right_counts(static_cast<std::size_t>(data.n_classes));
        for (int c = 0; c < data.n_classes; ++c)
          right_counts[static_cast<std::size_t>(c)] =
              counts[static_cast<std::size_t>(c)] - left_counts[static_cast<std::size_t>(c)];
        const double score = (n_left * gini(left_counts, n_left) +
                              n_right * gini(right_counts, n_right)) /
                             static_cast<double>(total);
        if (score < best_score) {
          best_score = score;
          best_feature = j;
          best_threshold = 0.5 * (v + v_next);
        }
      }
    }

    if (best_feature < 0) return make_leaf(counts, total);

    std::vector<int> left_rows, right_rows;
    for (int r : rows) {
      if (data.x(r, best_feature) <= best_threshold)
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }

    TreeNode node;
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.class_probs.resize(data.n_classes);
    for (int c = 0; c < data.n_classes; ++c)
      node.class_probs(c) =
          static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(total);
    nodes.push_back(node);
    const int self = static_cast<int>(nodes.size()) - 1;
    nodes[static_cast<std::size_t>(self)].left = build(left_rows, depth + 1);
    nodes[static_cast<std::size_t>(self)].right = build(right_rows, depth + 1);
    return self;
  }
};

}  // namespace

DecisionTree train_cart(const Dataset& data, int max_depth, int min_samples_leaf) {
  data.validate();
  if (!data.is_classification())
    throw std::invalid_argument("cart: requires a classification dataset");
  if (max_depth < 1) throw std::invalid_argument("cart: max_depth must be at least 1");
  if (min_samples_leaf < 1) throw std::invalid_argument("cart: min_samples_leaf must be at least 1");

  CartBuilder builder{data, max_depth, min_samples_leaf, {}};
  std::vector<int> rows(static_cast<std::size_t>(data.n()));
  std::iota(rows.begin(), rows.end(), 0);
  builder.build(rows, 0);
  DecisionTree tree;
  tree.nodes = std::move(builder.nodes);
  tree.n_classes = data.n_classes;
  return tree;
}

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw std::invalid_argument("auroc: scores and labels must match and be nonempty");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int label : labels) {
    if (label != 0 && label != 1) throw std::invalid_argument("auroc: labels must be 0 or 1");
    n_pos += static_cast<std::size_t>(label);
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("auroc: both classes must be present");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average ranks across tie groups, then the rank-sum formula.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]] == 1) pos_rank_sum += avg_rank;
    i = j;
  }
  const double p = static_cast<double>(n_pos);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(n_neg));
}

double auroc_macro_ovr(const Eigen::MatrixXd& scores, const std::vector<int>& labels,
                       int n_classes) {
  if (scores.rows() != static_cast<Eigen::Index>(labels.size()) || scores.cols() != n_classes)
    throw std::invalid_argument("auroc: score matrix shape mismatch");
  double total = 0.0;
  int used = 0;
  for (int c = 0; c < n_classes; ++c) {
    std::vector<double> s(labels.size());
    std::vector<int> y(labels.size());
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      s[i] = scores(static_cast<Eigen::Index>(i), c);
      y[i] = labels[i] == c ? 1 : 0;
      n_pos += static_cast<std::size_t>(y[i]);
    }
    if (n_pos == 0 || n_pos == labels.size()) continue;  // class absent or universal
    total += auroc(s, y);
    ++used;
  }
  if (used == 0) throw std::invalid_argument("auroc: labels contain a single class");
  return total / static_cast<double>(used);
}

double gain(double method_auroc, double tree_auroc) {
  if (tree_auroc <= 0.0) throw std::invalid_argument("gain: tree AUROC must be positive");
  return method_auroc / tree_auroc;
}

std::vector<RemovalPoint> topk_removal_curve(const Dataset& train_set, const Dataset& val_set,
                                             const std::vector<int>& ranking, int k_max,
                                             const TrainConfig& cfg, const NetConfig& net_cfg,
                                             const std::vector<std::uint64_t>& seeds) {
  const int m = train_set.m();
  if (k_max < 0 || k_max >= m)
    throw std::invalid_argument("removal curve: k_max must lie in [0, M)");
  if (static_cast<int>(ranking.size()) < k_max)
    throw std::invalid_argument("removal curve: ranking shorter than k_max");
  if (seeds.empty()) throw std::invalid_argument("removal curve: at least one seed required");

  std::vector<RemovalPoint> curve;
  for (int k = 0; k <= k_max; ++k) {
    Dataset masked_train = train_set;
    Dataset masked_val = val_set;
    for (int j = 0; j < k; ++j) {
      masked_train.x.col(ranking[static_cast<std::size_t>(j)]).setZero();
      masked_val.x.col(ranking[static_cast<std::size_t>(j)]).setZero();
    }
    double total = 0.0;
    for (std::uint64_t seed : seeds) {
      TrainConfig run_cfg = cfg;
      run_cfg.seed = seed;
      NetConfig run_net = net_cfg;
      run_net.seed = splitmix64(seed);
      const TrainResult result = train(masked_train, run_cfg, run_net);
      total += ensemble_accuracy(result.ensemble, masked_val);
    }
    curve.push_back({k, total / static_cast<double>(seeds.size())});
  }
  return curve;
}

}  // namespace imn
