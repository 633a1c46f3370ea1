#include "imn/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <stdexcept>

namespace imn {

namespace {

double parse_numeric(const std::string& cell, const std::string& column, std::size_t row) {
  char* end = nullptr;
  const double value = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size()) {
    throw std::runtime_error("cell '" + cell + "' in numeric column '" + column +
                             "' at row " + std::to_string(row) + " is not a number");
  }
  return value;
}

const std::string& cell_or_missing(const std::string& cell) {
  static const std::string missing = kMissingCategory;
  return cell.empty() ? missing : cell;
}

}  // namespace

int CategoricalEncoder::one_hot_index(const std::string& cell) const {
  const std::string& key = cell_or_missing(cell);
  const auto it = std::find(categories.begin(), categories.end(), key);
  if (it != categories.end()) return static_cast<int>(it - categories.begin());
  return static_cast<int>(categories.size()) - 1;  // unseen -> missing slot
}

double CategoricalEncoder::target_value(const std::string& cell) const {
  const auto it = target_values.find(cell_or_missing(cell));
  return it != target_values.end() ? it->second : global_mean;
}

PreprocessorState fit_preprocessor(const RawTable& table,
                                   const std::vector<int>& train_rows,
                                   TaskKind task, double shrinkage) {
  table.schema.validate();
  if (train_rows.empty()) throw std::runtime_error("cannot fit preprocessor on zero training rows");
  if (!(shrinkage > 0.0)) throw std::runtime_error("shrinkage must be positive");

  PreprocessorState state;
  state.task = task;
  state.shrinkage = shrinkage;
  state.target_column = table.schema.target_index();
  state.target_name = table.schema.columns[static_cast<std::size_t>(state.target_column)].name;

  const auto target_cell = [&](int row) -> const std::string& {
    return table.rows[static_cast<std::size_t>(row)][static_cast<std::size_t>(state.target_column)];
  };

  // Targets first: classification labels are the sorted distinct strings.
  std::vector<double> target_numeric(train_rows.size(), 0.0);
  if (task == TaskKind::kRegression) {
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
      target_numeric[i] = parse_numeric(target_cell(train_rows[i]), state.target_name,
                                        static_cast<std::size_t>(train_rows[i]));
    }
  } else {
    std::set<std::string> labels;
    for (int row : train_rows) {
      if (target_cell(row).empty()) {
        throw std::runtime_error("missing target at row " + std::to_string(row));
      }
      labels.insert(target_cell(row));
    }
    state.class_labels.assign(labels.begin(), labels.end());
    if (task == TaskKind::kBinary && state.class_labels.size() != 2) {
      throw std::runtime_error("binary task needs exactly 2 distinct labels, found " +
                               std::to_string(state.class_labels.size()));
    }
    if (state.class_labels.size() < 2) {
      throw std::runtime_error("classification needs at least 2 distinct labels");
    }
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
      const auto it = std::find(state.class_labels.begin(), state.class_labels.end(),
                                target_cell(train_rows[i]));
      target_numeric[i] = static_cast<double>(it - state.class_labels.begin());
    }
  }

  for (std::size_t j = 0; j < table.schema.columns.size(); ++j) {
    const auto& spec = table.schema.columns[j];
    if (spec.kind == ColumnKind::kTarget) continue;

    PreprocessorState::Column col;
    col.name = spec.name;
    col.numeric = spec.kind == ColumnKind::kNumeric;

    if (col.numeric) {
      // Moments over observed (non-missing) training cells.
      double sum = 0.0;
      double count = 0.0;
      std::vector<double> values;
      values.reserve(train_rows.size());
      for (int row : train_rows) {
        const auto& cell = table.rows[static_cast<std::size_t>(row)][j];
        if (cell.empty()) continue;
        values.push_back(parse_numeric(cell, spec.name, static_cast<std::size_t>(row)));
        sum += values.back();
        count += 1.0;
      }
      if (values.empty()) {
        col.num = NumericStats{0.0, 1.0, true};
      } else if (const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
                 *lo == *hi) {
        // Constant column. Detected on the raw values: the rounded mean of n
        // equal cells need not equal the cell, which would leave a tiny
        // variance and scale that rounding noise up to unit size.
        col.num = NumericStats{*lo, 1.0, true};
      } else {
        const double mean = sum / count;
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        double stddev = std::sqrt(ss / count);
        if (stddev == 0.0) stddev = 1.0;  // differences below double resolution
        col.num.mean = mean;
        col.num.constant = false;
        col.num.stddev = stddev;
      }
    } else {
      // Category statistics; missing cells form their own category.
      std::map<std::string, std::pair<double, double>> stats;  // count, target sum
      for (std::size_t i = 0; i < train_rows.size(); ++i) {
        const auto& cell = table.rows[static_cast<std::size_t>(train_rows[i])][j];
        auto& entry = stats[cell_or_missing(cell)];
        entry.first += 1.0;
        entry.second += target_numeric[i];
      }
      if (task == TaskKind::kBinary) {
        col.cat.encoding = CatEncoding::kTarget;
        double global_sum = 0.0;
        for (double t : target_numeric) global_sum += t;
        const double global_mean = global_sum / static_cast<double>(target_numeric.size());
        col.cat.global_mean = global_mean;
        for (const auto& [category, entry] : stats) {
          const double n_c = entry.first;
          const double mean_c = entry.second / n_c;
          col.cat.target_values[category] =
              (n_c * mean_c + shrinkage * global_mean) / (n_c + shrinkage);
        }
      } else {
        col.cat.encoding = CatEncoding::kOneHot;
        for (const auto& [category, entry] : stats) {
          if (category != kMissingCategory) col.cat.categories.push_back(category);
        }
        std::sort(col.cat.categories.begin(), col.cat.categories.end());
        col.cat.categories.push_back(kMissingCategory);
      }
    }
    state.columns.push_back(std::move(col));
  }
  return state;
}

Dataset transform(const RawTable& table, const PreprocessorState& state) {
  if (table.schema.columns.size() != state.columns.size() + 1) {
    throw std::runtime_error("table schema does not match fitted preprocessor");
  }
  const auto n = static_cast<Eigen::Index>(table.n_rows());
  if (n == 0) throw std::runtime_error("cannot transform an empty table");

  Dataset out;
  out.task = state.task;
  out.n_classes = state.task == TaskKind::kRegression
                      ? 1
                      : static_cast<int>(state.class_labels.size());

  // Output width and names.
  Eigen::Index width = 0;
  for (const auto& col : state.columns) {
    if (col.numeric || col.cat.encoding == CatEncoding::kTarget) {
      out.feature_names.push_back(col.name);
      width += 1;
    } else {
      for (const auto& category : col.cat.categories) {
        out.feature_names.push_back(col.name + "=" + category);
      }
      width += static_cast<Eigen::Index>(col.cat.categories.size());
    }
  }
  out.x.resize(n, width);

  if (state.task == TaskKind::kRegression) {
    out.y_value.resize(n);
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    Eigen::Index offset = 0;
    std::size_t state_col = 0;
    for (std::size_t j = 0; j < table.schema.columns.size(); ++j) {
      if (static_cast<int>(j) == state.target_column) continue;
      const auto& col = state.columns[state_col++];
      const auto& cell = row[j];
      if (col.numeric) {
        if (cell.empty()) {
          out.x(i, offset) = 0.0;  // imputed at the standardized mean
        } else {
          const double value = parse_numeric(cell, col.name, static_cast<std::size_t>(i));
          out.x(i, offset) = (value - col.num.mean) / col.num.stddev;
        }
        offset += 1;
      } else if (col.cat.encoding == CatEncoding::kTarget) {
        out.x(i, offset) = col.cat.target_value(cell);
        offset += 1;
      } else {
        const auto cardinality = static_cast<Eigen::Index>(col.cat.categories.size());
        out.x.block(i, offset, 1, cardinality).setZero();
        out.x(i, offset + col.cat.one_hot_index(cell)) = 1.0;
        offset += cardinality;
      }
    }

    const auto& target = row[static_cast<std::size_t>(state.target_column)];
    if (state.task == TaskKind::kRegression) {
      out.y_value(i) = parse_numeric(target, state.target_name, static_cast<std::size_t>(i));
    } else {
      const auto it = std::find(state.class_labels.begin(), state.class_labels.end(), target);
      if (it == state.class_labels.end()) {
        throw std::runtime_error("label '" + target + "' at row " + std::to_string(i) +
                                 " was not seen at fit time");
      }
      out.y_class.push_back(static_cast<int>(it - state.class_labels.begin()));
    }
  }

  out.validate();
  return out;
}

nlohmann::json PreprocessorState::to_json() const {
  nlohmann::json doc;
  doc["task"] = task_name(task);
  doc["shrinkage"] = shrinkage;
  doc["target_column"] = target_column;
  doc["target_name"] = target_name;
  doc["class_labels"] = class_labels;
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& col : columns) {
    nlohmann::json c;
    c["name"] = col.name;
    if (col.numeric) {
      c["kind"] = "numeric";
      c["mean"] = col.num.mean;
      c["std"] = col.num.stddev;
      c["constant"] = col.num.constant;
    } else if (col.cat.encoding == CatEncoding::kTarget) {
      c["kind"] = "target_encoded";
      c["global_mean"] = col.cat.global_mean;
      nlohmann::json values = nlohmann::json::object();
      for (const auto& [category, value] : col.cat.target_values) values[category] = value;
      c["values"] = values;
    } else {
      c["kind"] = "one_hot";
      c["categories"] = col.cat.categories;
    }
    cols.push_back(std::move(c));
  }
  doc["columns"] = std::move(cols);
  return doc;
}

PreprocessorState PreprocessorState::from_json(const nlohmann::json& doc) {
  PreprocessorState state;
  state.task = task_from_name(doc.at("task").get<std::string>());
  state.shrinkage = doc.at("shrinkage").get<double>();
  state.target_column = doc.at("target_column").get<int>();
  state.target_name = doc.at("target_name").get<std::string>();
  state.class_labels = doc.at("class_labels").get<std::vector<std::string>>();
  for (const auto& c : doc.at("columns")) {
    Column col;
    col.name = c.at("name").get<std::string>();
    const std::string kind = c.at("kind").get<std::string>();
    if (kind == "numeric") {
      col.numeric = true;
      col.num.mean = c.at("mean").get<double>();
      col.num.stddev = c.at("std").get<double>();
      col.num.constant = c.at("constant").get<bool>();
    } else if (kind == "target_encoded") {
      col.numeric = false;
      col.cat.encoding = CatEncoding::kTarget;
      col.cat.global_mean = c.at("global_mean").get<double>();
      for (const auto& [category, value] : c.at("values").items()) {
        col.cat.target_values[category] = value.get<double>();
      }
    } else if (kind == "one_hot") {
      col.numeric = false;
      col.cat.encoding = CatEncoding::kOneHot;
      col.cat.categories = c.at("categories").get<std::vector<std::string>>();
    } else {
      throw std::runtime_error("unknown preprocessor column kind '" + kind + "'");
    }
    state.columns.push_back(std::move(col));
  }
  return state;
}

}  // namespace imn
