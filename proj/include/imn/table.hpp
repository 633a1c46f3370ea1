#pragma once

#include <string>
#include <vector>

namespace imn {

enum class ColumnKind { kNumeric, kCategorical, kTarget };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
};

// Column declarations for a CSV file. Exactly one column must be the target.
struct TableSchema {
  std::vector<ColumnSpec> columns;

  int target_index() const;
  void validate() const;
};

// Pre-transform view of a table: all cells kept as strings, empty string
// marks a missing value.
struct RawTable {
  TableSchema schema;
  std::vector<std::vector<std::string>> rows;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return schema.columns.size(); }
};

// Loads a UTF-8 comma-separated file whose header row must match the schema
// column names in order. Throws on arity mismatches (with the row number) and
// on header/schema disagreements.
RawTable load_csv(const std::string& path, const TableSchema& schema);

// Reads the header and infers column kinds: a column is numeric when every
// non-empty cell parses as a double. `target_name` must name one column.
TableSchema infer_schema(const std::string& path, const std::string& target_name);

// Schema JSON: {"columns": [{"name": ..., "kind": "numeric"|"categorical"|"target"}]}
TableSchema schema_from_json_file(const std::string& path);

}  // namespace imn
