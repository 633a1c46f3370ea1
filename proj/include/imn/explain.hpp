#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "imn/dataset.hpp"
#include "imn/train.hpp"

namespace imn {

inline constexpr int kPredictedClass = -1;

// Signed per-feature contributions to one logit of the ensemble model:
// impacts[m] = w_m * x_m, and sum(impacts) + bias reproduces the logit
// exactly (same accumulation order as prediction).
struct Attribution {
  int target_class = 0;
  Eigen::VectorXd impacts;
  double bias = 0.0;
  double logit = 0.0;
};

Attribution local_attribution(const SnapshotEnsemble& ens, const Eigen::VectorXd& x,
                              int class_choice = kPredictedClass);

// End-to-end removal effect at the probability level: f(x) - f(x with
// feature m zeroed), with the generated weights honestly recomputed at the
// masked input. The class is the one predicted at the unmasked x.
double removal_delta(const SnapshotEnsemble& ens, const Eigen::VectorXd& x, int m);

struct GlobalImportance {
  std::vector<std::string> feature_names;
  Eigen::VectorXd importance;  // mean |w_m * x_m| over the dataset
  std::vector<int> ranking;    // feature indices, most important first
};

GlobalImportance global_importance(const SnapshotEnsemble& ens, const Dataset& data);

struct BoundaryPoint {
  double x0 = 0.0;
  double x1 = 0.0;
  double prob = 0.0;  // positive-class probability
};

// Grid points whose positive-class probability is closest to 0.5: those with
// |p - 0.5| at or below the 1st percentile over the grid_n x grid_n lattice.
// box is {x0_min, x0_max, x1_min, x1_max}; requires a 2-feature binary model.
std::vector<BoundaryPoint> decision_boundary(const SnapshotEnsemble& ens,
                                             const std::array<double, 4>& box, int grid_n);

// For every instance, the k nearest neighbors from each class (excluding the
// instance itself), by Euclidean distance; ties broken by row index.
std::vector<std::vector<int>> neighbor_sets(const Dataset& data, int k_per_class);

struct NeighborhoodResult {
  double mean_accuracy = 0.0;
  std::vector<double> per_instance;
};

// Classifies each instance's neighbor set with that instance's own generated
// hyperplane and reports the fraction classified correctly.
NeighborhoodResult neighborhood_accuracy(const SnapshotEnsemble& ens, const Dataset& data,
                                         int k_per_class);

}  // namespace imn
