#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <map>
#include <span>
#include <string>
#include <vector>

namespace frontier {

enum class VariableRole { Identifier, Input, Output, Explanatory, Group };

std::string role_name(VariableRole role);
VariableRole role_from_name(const std::string& name);

// Column-name -> role assignment. Role assignment is an analytical choice,
// so it always arrives explicitly (schema file or CLI flags), never guessed.
using Schema = std::map<std::string, VariableRole>;

Schema schema_from_json(const std::string& text);
Schema schema_from_file(const std::string& path);

struct Column {
  std::string name;
  VariableRole role = VariableRole::Explanatory;
  std::vector<double> values;        // numeric roles; NaN marks missing
  std::vector<std::string> labels;   // Group role only
};

// Immutable after construction; safe to share across concurrent readers.
class Dataset {
 public:
  Dataset(std::vector<std::string> dmu_names, std::vector<Column> columns);

  std::size_t n() const { return dmu_names_.size(); }
  const std::vector<std::string>& dmu_names() const { return dmu_names_; }
  const std::vector<Column>& columns() const { return columns_; }

  const Column& column(const std::string& name) const;
  bool has_column(const std::string& name) const;

  std::vector<const Column*> columns_with_role(VariableRole role) const;
  const Column* group_column() const;  // nullptr when absent

  // n x m / n x s matrices of input and output values, column order as stored.
  Eigen::MatrixXd input_matrix() const;
  Eigen::MatrixXd output_matrix() const;
  std::vector<std::string> input_names() const;
  std::vector<std::string> output_names() const;

  std::string to_csv() const;

 private:
  std::vector<std::string> dmu_names_;
  std::vector<Column> columns_;
};

// Reads and validates a CSV file. Columns not named in the schema are
// ignored. Rows with a missing input or output are rejected as a whole-file
// error that lists the offending rows; missing explanatory values pass
// through as NaN.
Dataset parse_csv(const std::string& path, const Schema& schema);
Dataset parse_csv_text(std::string_view text, const Schema& schema);

struct ColumnStats {
  std::string name;
  VariableRole role;
  double mean = 0.0;
  double sd = 0.0;   // sample standard deviation, n-1 denominator
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;  // non-missing entries
};

struct DescriptiveStats {
  std::vector<ColumnStats> columns;
};

DescriptiveStats describe(const Dataset& ds);

struct GroupRow {
  std::string label;
  std::size_t count = 0;
  double mean_score = 0.0;
  std::vector<std::string> members;
};

// One row per distinct group label, sorted by label; mean_score is the
// arithmetic mean of member scores.
std::vector<GroupRow> group_summary(const Dataset& ds, std::span<const double> scores);

nlohmann::ordered_json descriptives_to_json(const DescriptiveStats& stats);
nlohmann::ordered_json groups_to_json(const std::vector<GroupRow>& rows);

}  // namespace frontier
