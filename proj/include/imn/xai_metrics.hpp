#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "imn/dataset.hpp"
#include "imn/train.hpp"

namespace imn {

// Scalar-valued model under explanation.
using ModelFn = std::function<double(const Eigen::VectorXd&)>;

// The two scalar views of a model at one instance: the probability and the
// logit of the class the model predicts at that instance.
struct InstanceModel {
  ModelFn prob;
  ModelFn logit;
};

using ModelFactory = std::function<InstanceModel(const Eigen::VectorXd&)>;

// An attribution method. attribute() yields the per-feature attribution;
// perturbation_vector() yields the gradient-like vector used by infidelity
// (for IMN the generated weights; for the random baseline the same noise).
struct Explainer {
  std::string name;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, int index)> attribute;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, int index)> perturbation_vector;
};

// Pearson correlation; empty when either side has zero variance.
std::optional<double> pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Exact Shapley values by enumeration of all 2^M subsets. v(S) evaluates f at
// x with the features outside S replaced by the background mean.
Eigen::VectorXd brute_force_shapley(const ModelFn& f, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& background_mean, int m_max = 15);

// Per-instance building blocks.
std::optional<double> faithfulness_instance(const ModelFn& f, const Eigen::VectorXd& attr,
                                            const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& baseline);
double monotonicity_instance(const ModelFn& f, const Eigen::VectorXd& attr,
                             const Eigen::VectorXd& x, const Eigen::VectorXd& baseline);
double infidelity_instance(const ModelFn& f, const Eigen::VectorXd& a, const Eigen::VectorXd& x,
                           double sigma, int n_perturb, std::uint64_t seed);

// Dataset-level metrics: mean over instances. Instances whose correlation is
// undefined (zero variance on either side) are skipped and counted through
// n_skipped; an error is raised when nothing survives.
double faithfulness(const ModelFactory& model, const Explainer& explainer,
                    const Eigen::MatrixXd& xs, const Eigen::VectorXd& baseline,
                    int* n_skipped = nullptr);
double monotonicity(const ModelFactory& model, const Explainer& explainer,
                    const Eigen::MatrixXd& xs, const Eigen::VectorXd& baseline);
double infidelity(const ModelFactory& model, const Explainer& explainer,
                  const Eigen::MatrixXd& xs, double sigma = 0.1, int n_perturb = 1000,
                  std::uint64_t seed = 0);
double shapley_corr(const ModelFactory& model, const Explainer& explainer,
                    const Eigen::MatrixXd& xs, const Eigen::VectorXd& background_mean,
                    int m_max = 15, int* n_skipped = nullptr);

// Remove-and-retrain: for each fraction, zero out the top share of features
// by the given global importance ranking in both splits, retrain from
// scratch, and record validation accuracy.
struct RoarPoint {
  double fraction = 0.0;
  double accuracy = 0.0;
};

std::vector<RoarPoint> roar_monotonicity(const Dataset& train_set, const Dataset& val_set,
                                         const std::vector<double>& importance,
                                         const std::vector<double>& fractions,
                                         const TrainConfig& cfg, const NetConfig& net_cfg);

// Fraction of adjacent curve segments with non-increasing accuracy (removing
// more important features should not help).
double roar_monotonicity_score(const std::vector<RoarPoint>& curve);

// i.i.d. standard normal attribution vector.
Eigen::VectorXd random_attribution(int m, std::uint64_t seed);

Explainer random_explainer(std::uint64_t seed);

// IMN wiring: predictions explained at the class predicted for each instance;
// attributions are the signed impacts w_m * x_m of the ensemble model.
ModelFactory imn_model_factory(const SnapshotEnsemble& ens);
Explainer imn_explainer(const SnapshotEnsemble& ens);

struct MetricReport {
  std::string dataset_id;
  double rho = 0.0;
  std::string explainer;
  std::string metric;
  double value = 0.0;
  int n_instances = 0;
  std::uint64_t seed = 0;
};

std::string metric_report_json_line(const MetricReport& report);
std::string metric_report_csv_header();
std::string metric_report_csv_row(const MetricReport& report);

}  // namespace imn
