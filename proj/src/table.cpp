#include "imn/table.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace imn {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    cells.emplace_back();
  }
  return cells;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

bool parses_as_double(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

int TableSchema::target_index() const {
  int found = -1;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].kind == ColumnKind::kTarget) {
      if (found >= 0) throw std::runtime_error("schema declares more than one target column");
      found = static_cast<int>(j);
    }
  }
  if (found < 0) throw std::runtime_error("schema declares no target column");
  return found;
}

void TableSchema::validate() const {
  if (columns.empty()) throw std::runtime_error("schema has no columns");
  (void)target_index();
}

RawTable load_csv(const std::string& path, const TableSchema& schema) {
  schema.validate();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV file: " + path);
  const auto header = split_line(strip_cr(line));
  if (header.size() != schema.columns.size()) {
    throw std::runtime_error("header has " + std::to_string(header.size()) +
                             " columns, schema declares " + std::to_string(schema.columns.size()));
  }
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] != schema.columns[j].name) {
      throw std::runtime_error("unknown column '" + header[j] + "' at position " +
                               std::to_string(j) + ", schema expects '" +
                               schema.columns[j].name + "'");
    }
  }

  RawTable table;
  table.schema = schema;
  std::size_t row_index = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty() && in.peek() == EOF) break;  // trailing newline
    auto cells = split_line(line);
    if (cells.size() != schema.columns.size()) {
      throw std::runtime_error("row " + std::to_string(row_index) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(schema.columns.size()));
    }
    table.rows.push_back(std::move(cells));
    ++row_index;
  }
  return table;
}

TableSchema infer_schema(const std::string& path, const std::string& target_name) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV file: " + path);
  const auto header = split_line(strip_cr(line));

  std::vector<bool> numeric(header.size(), true);
  std::vector<bool> any_value(header.size(), false);
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty() && in.peek() == EOF) break;
    const auto cells = split_line(line);
    for (std::size_t j = 0; j < cells.size() && j < header.size(); ++j) {
      if (cells[j].empty()) continue;
      any_value[j] = true;
      if (!parses_as_double(cells[j])) numeric[j] = false;
    }
  }

  TableSchema schema;
  bool target_found = false;
  for (std::size_t j = 0; j < header.size(); ++j) {
    ColumnSpec spec;
    spec.name = header[j];
    if (header[j] == target_name) {
      spec.kind = ColumnKind::kTarget;
      target_found = true;
    } else {
      spec.kind = (numeric[j] && any_value[j]) ? ColumnKind::kNumeric : ColumnKind::kCategorical;
    }
    schema.columns.push_back(std::move(spec));
  }
  if (!target_found) {
    throw std::runtime_error("target column '" + target_name + "' not present in header");
  }
  return schema;
}

TableSchema schema_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schema file: " + path);
  nlohmann::json doc;
  in >> doc;
  TableSchema schema;
  for (const auto& col : doc.at("columns")) {
    ColumnSpec spec;
    spec.name = col.at("name").get<std::string>();
    const std::string kind = col.at("kind").get<std::string>();
    if (kind == "numeric") {
      spec.kind = ColumnKind::kNumeric;
    } else if (kind == "categorical") {
      spec.kind = ColumnKind::kCategorical;
    } else if (kind == "target") {
      spec.kind = ColumnKind::kTarget;
    } else {
      throw std::runtime_error("unknown column kind '" + kind + "'");
    }
    schema.columns.push_back(std::move(spec));
  }
  schema.validate();
  return schema;
}

}  // namespace imn
