#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace imn {

enum class TaskKind { kBinary, kMulticlass, kRegression };

std::string task_name(TaskKind task);
TaskKind task_from_name(const std::string& name);

// Fully numeric view of a table: X is N x M, targets are class indices for
// classification or reals for regression.
struct Dataset {
  Eigen::MatrixXd x;                       // N x M
  std::vector<int> y_class;                // classification targets
  Eigen::VectorXd y_value;                 // regression targets
  std::vector<std::string> feature_names;  // M names
  int n_classes = 1;                       // 1 for regression
  TaskKind task = TaskKind::kBinary;

  int n() const { return static_cast<int>(x.rows()); }
  int m() const { return static_cast<int>(x.cols()); }
  bool is_classification() const { return task != TaskKind::kRegression; }

  Dataset rows(const std::vector<int>& indices) const;
  void validate() const;
};

// Disjoint covering train/validation split, deterministic per seed. With
// stratification the class proportions are preserved within one instance
// per class.
std::pair<Dataset, Dataset> split(const Dataset& data, double val_fraction,
                                  std::uint64_t seed, bool stratified);

// Index-level form of split(), for splitting raw table rows before the
// preprocessor is fitted. labels may be null for an unstratified split.
std::pair<std::vector<int>, std::vector<int>> split_indices(int n, const std::vector<int>* labels,
                                                            int n_classes, double val_fraction,
                                                            std::uint64_t seed, bool stratified);

// Centers and scales columns by the training split's population mean/std
// (std 0 replaced by 1), applies the same transform to `val` when given,
// and returns the training means (the removal baseline used by the
// explainability metrics). Means of the transformed training columns are
// exactly the zero vector up to rounding.
Eigen::VectorXd standardize(Dataset& train, Dataset* val);

// Fraction of rows whose predicted class matches the label.
double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

// Majority-class rate, the no-information accuracy bound.
double majority_rate(const Dataset& data);

}  // namespace imn
