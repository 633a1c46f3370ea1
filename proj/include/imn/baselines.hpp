#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "imn/dataset.hpp"
#include "imn/train.hpp"

namespace imn {

// Multinomial logistic regression fit by full-batch gradient descent on
// cross-entropy plus (l2/2)||W||^2; weights start at zero, so the fit is
// deterministic.
struct LogisticRegression {
  Eigen::MatrixXd w;  // C x M
  Eigen::VectorXd b;  // C

  Eigen::VectorXd proba(const Eigen::VectorXd& x) const;
  int predict(const Eigen::VectorXd& x) const;
  double accuracy(const Dataset& data) const;
};

LogisticRegression train_logreg(const Dataset& data, double l2 = 0.0, double lr = 0.5,
                                int iters = 2000);

// Mean cross-entropy plus the L2 penalty (weights only); exposed so the
// analytic gradient can be checked against finite differences.
double logreg_loss(const LogisticRegression& model, const Dataset& data, double l2);
void logreg_grad(const LogisticRegression& model, const Dataset& data, double l2,
                 Eigen::MatrixXd& dw, Eigen::VectorXd& db);

// Greedy CART with Gini impurity. Splits test x <= threshold at midpoints of
// consecutive distinct values; ties prefer the lowest feature index, then the
// lowest threshold.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  Eigen::VectorXd class_probs;
  int leaf_class = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int n_classes = 2;

  int predict(const Eigen::VectorXd& x) const;
  Eigen::VectorXd proba(const Eigen::VectorXd& x) const;
  double accuracy(const Dataset& data) const;
  int depth() const;
};

DecisionTree train_cart(const Dataset& data, int max_depth, int min_samples_leaf = 1);

// Probability that a random positive outranks a random negative, ties
// counted half (rank formulation). Labels are 0/1.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

// Macro one-vs-rest average over classes that appear in the labels.
double auroc_macro_ovr(const Eigen::MatrixXd& scores, const std::vector<int>& labels,
                       int n_classes);

// AUROC of a model's validation scores: positive-class probability for
// binary, macro OVR otherwise.
template <typename Model>
double model_auroc(const Model& model, const Dataset& data) {
  Eigen::MatrixXd scores(data.n(), data.n_classes);
  for (int i = 0; i < data.n(); ++i)
    scores.row(i) = model.proba(data.x.row(i).transpose()).transpose();
  if (data.n_classes == 2) {
    std::vector<double> s(static_cast<std::size_t>(data.n()));
    for (int i = 0; i < data.n(); ++i) s[static_cast<std::size_t>(i)] = scores(i, 1);
    return auroc(s, data.y_class);
  }
  return auroc_macro_ovr(scores, data.y_class, data.n_classes);
}

// G = method AUROC / decision-tree AUROC.
double gain(double method_auroc, double tree_auroc);

struct RemovalPoint {
  int k = 0;
  double mean_accuracy = 0.0;
};

// Retrains the model with the top-k ranked features zeroed out (in both
// splits), for k = 0..k_max, averaging validation accuracy over seeds.
// ranking lists feature indices, most important first.
std::vector<RemovalPoint> topk_removal_curve(const Dataset& train_set, const Dataset& val_set,
                                             const std::vector<int>& ranking, int k_max,
                                             const TrainConfig& cfg, const NetConfig& net_cfg,
                                             const std::vector<std::uint64_t>& seeds);

}  // namespace imn
