#include "imn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "imn/rng.hpp"

namespace imn {

std::string task_name(TaskKind task) {
  switch (task) {
    case TaskKind::kBinary: return "binary";
    case TaskKind::kMulticlass: return "multiclass";
    case TaskKind::kRegression: return "regression";
  }
  throw std::logic_error("bad task kind");
}

TaskKind task_from_name(const std::string& name) {
  if (name == "binary") return TaskKind::kBinary;
  if (name == "multiclass") return TaskKind::kMulticlass;
  if (name == "regression") return TaskKind::kRegression;
  throw std::runtime_error("unknown task kind '" + name + "'");
}

Dataset Dataset::rows(const std::vector<int>& indices) const {
  Dataset out;
  out.feature_names = feature_names;
  out.n_classes = n_classes;
  out.task = task;
  out.x.resize(static_cast<Eigen::Index>(indices.size()), x.cols());
  if (is_classification()) {
    out.y_class.reserve(indices.size());
  } else {
    out.y_value.resize(static_cast<Eigen::Index>(indices.size()));
  }
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.x.row(static_cast<Eigen::Index>(i)) = x.row(indices[i]);
    if (is_classification()) {
      out.y_class.push_back(y_class[static_cast<std::size_t>(indices[i])]);
    } else {
      out.y_value(static_cast<Eigen::Index>(i)) = y_value(indices[i]);
    }
  }
  return out;
}

void Dataset::validate() const {
  if (n() < 1 || m() < 1) throw std::runtime_error("dataset must have at least one row and one column");
  if (!x.allFinite()) throw std::runtime_error("dataset contains non-finite cells");
  if (is_classification()) {
    if (static_cast<int>(y_class.size()) != n()) throw std::runtime_error("label count mismatch");
    for (int label : y_class) {
      if (label < 0 || label >= n_classes) throw std::runtime_error("class index out of range");
    }
  } else {
    if (static_cast<int>(y_value.size()) != n()) throw std::runtime_error("target count mismatch");
  }
}

std::pair<std::vector<int>, std::vector<int>> split_indices(int n, const std::vector<int>* labels,
                                                            int n_classes, double val_fraction,
                                                            std::uint64_t seed, bool stratified) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw std::runtime_error("val_fraction must lie in (0, 1)");
  }
  if (n < 2) throw std::runtime_error("cannot split fewer than 2 rows");
  Rng rng(seed);
  std::vector<int> val_indices;
  std::vector<int> train_indices;

  if (stratified) {
    if (labels == nullptr) {
      throw std::runtime_error("stratified split requires class labels");
    }
    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(n_classes));
    for (int i = 0; i < n; ++i) {
      by_class[static_cast<std::size_t>((*labels)[static_cast<std::size_t>(i)])].push_back(i);
    }
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      auto& members = by_class[c];
      if (members.size() < 2) {
        throw std::runtime_error("class " + std::to_string(c) +
                                 " has fewer than 2 instances; cannot stratify");
      }
      rng.shuffle(members);
      auto n_val = static_cast<std::size_t>(
          std::llround(static_cast<double>(members.size()) * val_fraction));
      n_val = std::min(n_val, members.size() - 1);
      for (std::size_t i = 0; i < members.size(); ++i) {
        (i < n_val ? val_indices : train_indices).push_back(members[i]);
      }
    }
    if (val_indices.empty()) {
      // Tiny dataset edge: move one instance of the largest class.
      std::size_t biggest = 0;
      for (std::size_t c = 1; c < by_class.size(); ++c) {
        if (by_class[c].size() > by_class[biggest].size()) biggest = c;
      }
      const int moved = by_class[biggest].front();
      val_indices.push_back(moved);
      train_indices.erase(std::find(train_indices.begin(), train_indices.end(), moved));
    }
  } else {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    auto n_val =
        static_cast<std::size_t>(std::llround(static_cast<double>(n) * val_fraction));
    n_val = std::clamp<std::size_t>(n_val, 1, static_cast<std::size_t>(n) - 1);
    for (std::size_t i = 0; i < order.size(); ++i) {
      (i < n_val ? val_indices : train_indices).push_back(order[i]);
    }
  }

  std::sort(train_indices.begin(), train_indices.end());
  std::sort(val_indices.begin(), val_indices.end());
  return {std::move(train_indices), std::move(val_indices)};
}

std::pair<Dataset, Dataset> split(const Dataset& data, double val_fraction, std::uint64_t seed,
                                  bool stratified) {
  if (stratified && !data.is_classification()) {
    throw std::runtime_error("stratified split requires a classification dataset");
  }
  const std::vector<int>* labels = data.is_classification() ? &data.y_class : nullptr;
  auto [train_idx, val_idx] =
      split_indices(data.n(), labels, data.n_classes, val_fraction, seed, stratified);
  return {data.rows(train_idx), data.rows(val_idx)};
}

Eigen::VectorXd standardize(Dataset& train, Dataset* val) {
  const Eigen::Index m = train.x.cols();
  const auto n = static_cast<double>(train.x.rows());
  Eigen::VectorXd mean(m), stddev(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    // A constant column is detected on the raw values: its rounded mean need
    // not equal the cell value, which would leave a tiny nonzero variance
    // and blow that rounding noise up to unit scale.
    const double lo = train.x.col(j).minCoeff();
    const double hi = train.x.col(j).maxCoeff();
    if (lo == hi) {
      mean(j) = lo;
      stddev(j) = 1.0;
      continue;
    }
    mean(j) = train.x.col(j).mean();
    const double var = (train.x.col(j).array() - mean(j)).square().sum() / n;
    double s = std::sqrt(var);
    if (s == 0.0) s = 1.0;
    stddev(j) = s;
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    train.x.col(j) = (train.x.col(j).array() - mean(j)) / stddev(j);
    if (val != nullptr) {
      val->x.col(j) = (val->x.col(j).array() - mean(j)) / stddev(j);
    }
  }
  Eigen::VectorXd post_mean(m);
  for (Eigen::Index j = 0; j < m; ++j) post_mean(j) = train.x.col(j).mean();
  return post_mean;
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size() || predictions.empty()) {
    throw std::runtime_error("accuracy needs equally sized, nonempty vectors");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double majority_rate(const Dataset& data) {
  if (!data.is_classification()) throw std::runtime_error("majority rate requires classification");
  std::vector<int> counts(static_cast<std::size_t>(data.n_classes), 0);
  for (int label : data.y_class) ++counts[static_cast<std::size_t>(label)];
  return static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
         static_cast<double>(data.n());
}

}  // namespace imn
