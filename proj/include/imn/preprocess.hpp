#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "imn/dataset.hpp"
#include "imn/table.hpp"

namespace imn {

// Reserved category for missing cells and for categories unseen at fit time.
inline constexpr const char* kMissingCategory = "__missing__";

enum class CatEncoding { kOneHot, kTarget };

struct NumericStats {
  double mean = 0.0;
  double stddev = 1.0;      // population std; 0 replaced by 1
  bool constant = false;    // raw training std was 0
};

struct CategoricalEncoder {
  CatEncoding encoding = CatEncoding::kOneHot;
  // One-hot: category -> column index, a bijection onto 0..cardinality-1.
  // The missing category always owns the last index.
  std::vector<std::string> categories;
  // Target encoding: shrunk mean per category; unseen categories fall back
  // to the global target mean.
  std::map<std::string, double> target_values;
  double global_mean = 0.0;

  int one_hot_index(const std::string& cell) const;
  double target_value(const std::string& cell) const;
};

// Fitted preprocessing pipeline: standardization for numeric columns,
// one-hot or (binary tasks) target encoding for categorical columns,
// missing numeric cells imputed as the post-standardization zero.
struct PreprocessorState {
  struct Column {
    std::string name;
    bool numeric = true;
    NumericStats num;
    CategoricalEncoder cat;
  };

  TaskKind task = TaskKind::kBinary;
  double shrinkage = 10.0;
  std::vector<Column> columns;           // in schema order, target excluded
  int target_column = -1;                // index into the raw schema
  std::string target_name;
  std::vector<std::string> class_labels; // sorted; classification only

  nlohmann::json to_json() const;
  static PreprocessorState from_json(const nlohmann::json& doc);
};

// Fits on the given training rows only. Target encoding is used for
// categorical features iff the task is binary; the shrunk estimate for
// category c is (n_c * mean_c + s * global_mean) / (n_c + s).
PreprocessorState fit_preprocessor(const RawTable& table,
                                   const std::vector<int>& train_rows,
                                   TaskKind task, double shrinkage = 10.0);

// Applies a fitted state to any table with the same schema. Column order is
// deterministic: original order with one-hot groups contiguous.
Dataset transform(const RawTable& table, const PreprocessorState& state);

}  // namespace imn
