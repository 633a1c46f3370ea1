#include "imn/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace imn {

Attribution local_attribution(const SnapshotEnsemble& ens, const Eigen::VectorXd& x,
                              int class_choice) {
  const GeneratedLinearModel lin = ensemble_generate(ens, x);
  if (class_choice >= static_cast<int>(lin.weights.rows()))
    throw std::invalid_argument("explain: class index " + std::to_string(class_choice) +
                                " out of range");
  Eigen::Index cls;
  if (class_choice == kPredictedClass) {
    predict_logits(lin, x).maxCoeff(&cls);
  } else if (class_choice >= 0) {
    cls = class_choice;
  } else {
    throw std::invalid_argument("explain: negative class index");
  }

  Attribution attr;
  attr.target_class = static_cast<int>(cls);
  attr.impacts.resize(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) attr.impacts(j) = lin.weights(cls, j) * x(j);
  attr.bias = lin.bias(cls);
  // Same left-to-right accumulation as predict_logits, so the additivity
  // identity holds bitwise, not just to rounding.
  double acc = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) acc += attr.impacts(j);
  attr.logit = acc + attr.bias;
  return attr;
}

double removal_delta(const SnapshotEnsemble& ens, const Eigen::VectorXd& x, int m) {
  if (m < 0 || m >= static_cast<int>(x.size()))
    throw std::invalid_argument("explain: feature index out of range");
  const int cls = ensemble_predict(ens, x);
  Eigen::VectorXd masked = x;
  masked(m) = 0.0;
  return ensemble_proba(ens, x)(cls) - ensemble_proba(ens, masked)(cls);
}

GlobalImportance global_importance(const SnapshotEnsemble& ens, const Dataset& data) {
  if (data.n() < 1) throw std::invalid_argument("explain: empty dataset");
  GlobalImportance gi;
  gi.feature_names = data.feature_names;
  gi.importance = Eigen::VectorXd::Zero(data.m());
  for (int i = 0; i < data.n(); ++i) {
    const Attribution attr = local_attribution(ens, data.x.row(i).transpose());
    gi.importance += attr.impacts.cwiseAbs();
  }
  gi.importance /= static_cast<double>(data.n());

  gi.ranking.resize(static_cast<std::size_t>(data.m()));
  std::iota(gi.ranking.begin(), gi.ranking.end(), 0);
  std::sort(gi.ranking.begin(), gi.ranking.end(), [&](int a, int b) {
    if (gi.importance(a) != gi.importance(b)) return gi.importance(a) > gi.importance(b);
    return a < b;
  });
  return gi;
}

std::vector<BoundaryPoint> decision_boundary(const SnapshotEnsemble& ens,
                                             const std::array<double, 4>& box, int grid_n) {
  if (ens.config.input_dim != 2)
    throw std::invalid_argument("explain: decision boundary requires a 2-feature model");
  if (ens.config.n_classes != 2)
    throw std::invalid_argument("explain: decision boundary requires a binary model");
  if (grid_n < 2) throw std::invalid_argument("explain: grid_n must be at least 2");
  if (!(box[0] < box[1]) || !(box[2] < box[3]))
    throw std::invalid_argument("explain: degenerate bounding box");

  std::vector<BoundaryPoint> grid;
  grid.reserve(static_cast<std::size_t>(grid_n) * static_cast<std::size_t>(grid_n));
  Eigen::VectorXd x(2);
  for (int i = 0; i < grid_n; ++i) {
    x(0) = box[0] + (box[1] - box[0]) * static_cast<double>(i) / static_cast<double>(grid_n - 1);
    for (int j = 0; j < grid_n; ++j) {
      x(1) = box[2] + (box[3] - box[2]) * static_cast<double>(j) / static_cast<double>(grid_n - 1);
      grid.push_back({x(0), x(1), ensemble_proba(ens, x)(1)});
    }
  }

  std::vector<double> distance(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) distance[g] = std::abs(grid[g].prob - 0.5);
  std::vector<double> sorted = distance;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t idx = static_cast<std::size_t>(0.01 * static_cast<double>(sorted.size() - 1));
  const double threshold = sorted[idx];

  std::vector<BoundaryPoint> boundary;
  for (std::size_t g = 0; g < grid.size(); ++g)
    if (distance[g] <= threshold) boundary.push_back(grid[g]);
  return boundary;
}

std::vector<std::vector<int>> neighbor_sets(const Dataset& data, int k_per_class) {
  if (k_per_class < 1) throw std::invalid_argument("explain: k_per_class must be at least 1");
  if (!data.is_classification())
    throw std::invalid_argument("explain: neighborhoods require a classification dataset");

  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(data.n_classes));
  for (int i = 0; i < data.n(); ++i)
    by_class[static_cast<std::size_t>(data.y_class[static_cast<std::size_t>(i)])].push_back(i);
  for (int c = 0; c < data.n_classes; ++c) {
    if (static_cast<int>(by_class[static_cast<std::size_t>(c)].size()) < k_per_class + 1)
      throw std::invalid_argument("explain: class " + std::to_string(c) +
                                  " has fewer than k_per_class + 1 instances");
  }

  std::vector<std::vector<int>> sets(static_cast<std::size_t>(data.n()));
  std::vector<std::pair<double, int>> dist;
  for (int i = 0; i < data.n(); ++i) {
    auto& chosen = sets[static_cast<std::size_t>(i)];
    chosen.reserve(static_cast<std::size_t>(k_per_class) * static_cast<std::size_t>(data.n_classes));
    for (int c = 0; c < data.n_classes; ++c) {
      dist.clear();
      for (int j : by_class[static_cast<std::size_t>(c)]) {
        if (j == i) continue;
        dist.emplace_back((data.x.row(i) - data.x.row(j)).squaredNorm(), j);
      }
      std::partial_sort(dist.begin(), dist.begin() + k_per_class, dist.end());
      for (int t = 0; t < k_per_class; ++t) chosen.push_back(dist[static_cast<std::size_t>(t)].second);
    }
  }
  return sets;
}

NeighborhoodResult neighborhood_accuracy(const SnapshotEnsemble& ens, const Dataset& data,
                                         int k_per_class) {
  const auto sets = neighbor_sets(data, k_per_class);
  NeighborhoodResult result;
  result.per_instance.reserve(sets.size());
  double total = 0.0;
  std::size_t pairs = 0;
  for (int i = 0; i < data.n(); ++i) {
    const GeneratedLinearModel lin = ensemble_generate(ens, data.x.row(i).transpose());
    int correct = 0;
    const auto& neigh = sets[static_cast<std::size_t>(i)];
    for (int j : neigh) {
      Eigen::Index cls;
      predict_logits(lin, data.x.row(j).transpose()).maxCoeff(&cls);
      if (static_cast<int>(cls) == data.y_class[static_cast<std::size_t>(j)]) ++correct;
    }
    result.per_instance.push_back(static_cast<double>(correct) /
                                  static_cast<double>(neigh.size()));
    total += correct;
    pairs += neigh.size();
  }
  result.mean_accuracy = total / static_cast<double>(pairs);
  return result;
}

}  // namespace imn
