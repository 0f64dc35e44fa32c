#include "frontier/dataset.hpp"

#include "frontier/csv.hpp"
#include "frontier/errors.hpp"
#include "frontier/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace frontier {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_missing_marker(const std::string& s) {
  return s.empty() || s == "NA" || s == "na" || s == "N/A" || s == "." || s == "NaN" ||
         s == "nan";
}

bool parse_number(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

bool numeric_role(VariableRole role) {
  return role == VariableRole::Input || role == VariableRole::Output ||
         role == VariableRole::Explanatory;
}

}  // namespace

std::string role_name(VariableRole role) {
  switch (role) {
    case VariableRole::Identifier: return "identifier";
    case VariableRole::Input: return "input";
    case VariableRole::Output: return "output";
    case VariableRole::Explanatory: return "explanatory";
    case VariableRole::Group: return "group";
  }
  return "?";
}

VariableRole role_from_name(const std::string& name) {
  if (name == "identifier" || name == "id") return VariableRole::Identifier;
  if (name == "input") return VariableRole::Input;
  if (name == "output") return VariableRole::Output;
  if (name == "explanatory") return VariableRole::Explanatory;
  if (name == "group") return VariableRole::Group;
  throw SchemaMismatch("unknown variable role: '" + name + "'");
}

Schema schema_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatch(std::string("schema is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaMismatch("schema must be a JSON object of column -> role");
  Schema schema;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_string()) throw SchemaMismatch("role of column '" + key + "' must be a string");
    schema[key] = role_from_name(value.get<std::string>());
  }
  return schema;
}

Schema schema_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open schema file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return schema_from_json(buf.str());
}

Dataset::Dataset(std::vector<std::string> dmu_names, std::vector<Column> columns)
    : dmu_names_(std::move(dmu_names)), columns_(std::move(columns)) {
  const std::size_t n = dmu_names_.size();
  if (n == 0) throw EmptyDataset("dataset has no rows");

  std::set<std::string> seen;
  for (const auto& name : dmu_names_) {
    if (name.empty()) throw DuplicateDmuName("empty DMU name");
    if (!seen.insert(name).second) throw DuplicateDmuName("duplicate DMU name: '" + name + "'");
  }

  int identifiers = 0;
  for (const auto& col : columns_) {
    if (col.role == VariableRole::Identifier) {
      ++identifiers;  // names live in dmu_names_, the column is a tag
      continue;
    }
    const std::size_t len =
        col.role == VariableRole::Group ? col.labels.size() : col.values.size();
    if (len != n)
      throw LengthMismatch("column '" + col.name + "' has " + std::to_string(len) +
                           " values, expected " + std::to_string(n));
    if (col.role == VariableRole::Input || col.role == VariableRole::Output) {
      for (std::size_t i = 0; i < n; ++i) {
        const double v = col.values[i];
        if (std::isnan(v))
          throw MissingInputOutput("missing value in column '" + col.name + "', row '" +
                                   dmu_names_[i] + "'");
        if (!(v > 0.0) || !std::isfinite(v))
          throw NonPositiveInputOutput("column '" + col.name + "', row '" + dmu_names_[i] +
                                       "': value " + stats::format_double(v) +
                                       " must be strictly positive and finite");
      }
    }
  }
  if (identifiers > 1) throw SchemaMismatch("more than one identifier column");
}

const Column& Dataset::column(const std::string& name) const {
  for (const auto& col : columns_)
    if (col.name == name) return col;
  throw SchemaMismatch("no column named '" + name + "'");
}

bool Dataset::has_column(const std::string& name) const {
  return std::any_of(columns_.begin(), columns_.end(),
                     [&](const Column& c) { return c.name == name; });
}

std::vector<const Column*> Dataset::columns_with_role(VariableRole role) const {
  std::vector<const Column*> out;
  for (const auto& col : columns_)
    if (col.role == role) out.push_back(&col);
  return out;
}

const Column* Dataset::group_column() const {
  for (const auto& col : columns_)
    if (col.role == VariableRole::Group) return &col;
  return nullptr;
}

Eigen::MatrixXd Dataset::input_matrix() const {
  const auto cols = columns_with_role(VariableRole::Input);
  Eigen::MatrixXd m(n(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < n(); ++i) m(i, j) = cols[j]->values[i];
  return m;
}

Eigen::MatrixXd Dataset::output_matrix() const {
  const auto cols = columns_with_role(VariableRole::Output);
  Eigen::MatrixXd m(n(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < n(); ++i) m(i, j) = cols[j]->values[i];
  return m;
}

std::vector<std::string> Dataset::input_names() const {
  std::vector<std::string> out;
  for (const auto* c : columns_with_role(VariableRole::Input)) out.push_back(c->name);
  return out;
}

std::vector<std::string> Dataset::output_names() const {
  std::vector<std::string> out;
  for (const auto* c : columns_with_role(VariableRole::Output)) out.push_back(c->name);
  return out;
}

std::string Dataset::to_csv() const {
  std::string id_name = "dmu";
  for (const auto& col : columns_)
    if (col.role == VariableRole::Identifier) id_name = col.name;

  std::vector<std::string> header{id_name};
  for (const auto& col : columns_)
    if (col.role != VariableRole::Identifier) header.push_back(col.name);

  std::string out = csv::join_line(header);
  for (std::size_t i = 0; i < n(); ++i) {
    std::vector<std::string> fields{dmu_names_[i]};
    for (const auto& col : columns_) {
      if (col.role == VariableRole::Identifier) continue;
      if (col.role == VariableRole::Group) {
        fields.push_back(col.labels[i]);
      } else {
        const double v = col.values[i];
        fields.push_back(std::isnan(v) ? "" : stats::format_double(v));
      }
    }
    out += csv::join_line(fields);
  }
  return out;
}

Dataset parse_csv_text(std::string_view text, const Schema& schema) {
  const csv::Table table = csv::parse(text);
  if (table.header.empty()) throw SchemaMismatch("CSV file has no header row");

  std::map<std::string, std::size_t> header_index;
  for (std::size_t j = 0; j < table.header.size(); ++j) header_index[table.header[j]] = j;

  std::string id_column;
  for (const auto& [name, role] : schema) {
    if (!header_index.count(name))
      throw SchemaMismatch("schema column '" + name + "' not found in CSV header");
    if (role == VariableRole::Identifier) {
      if (!id_column.empty())
        throw SchemaMismatch("schema tags both '" + id_column + "' and '" + name +
                             "' as identifier");
      id_column = name;
    }
  }
  if (id_column.empty()) throw SchemaMismatch("schema must tag exactly one identifier column");

  const std::size_t nrows = table.rows.size();
  for (std::size_t i = 0; i < nrows; ++i) {
    if (table.rows[i].size() != table.header.size())
      throw SchemaMismatch("row " + std::to_string(i + 1) + " has " +
                           std::to_string(table.rows[i].size()) + " fields, header has " +
                           std::to_string(table.header.size()));
  }

  std::vector<std::string> dmu_names(nrows);
  const std::size_t id_idx = header_index.at(id_column);
  for (std::size_t i = 0; i < nrows; ++i) dmu_names[i] = table.rows[i][id_idx];

  // Columns in header order, restricted to the schema.
  std::vector<Column> columns;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    const auto it = schema.find(table.header[j]);
    if (it == schema.end()) continue;
    const VariableRole role = it->second;
    Column col;
    col.name = table.header[j];
    col.role = role;
    if (role == VariableRole::Identifier) {
      columns.push_back(std::move(col));
      continue;
    }
    if (role == VariableRole::Group) {
      for (std::size_t i = 0; i < nrows; ++i) col.labels.push_back(table.rows[i][j]);
      columns.push_back(std::move(col));
      continue;
    }
    for (std::size_t i = 0; i < nrows; ++i) {
      const std::string& cell = table.rows[i][j];
      if (is_missing_marker(cell)) {
        col.values.push_back(kNaN);
        continue;
      }
      double v = 0.0;
      if (!parse_number(cell, v))
        throw NonNumericCell("row " + std::to_string(i + 1) + ", column '" + col.name +
                             "': cannot parse '" + cell + "' as a number");
      col.values.push_back(v);
    }
    columns.push_back(std::move(col));
  }

  // Missing inputs/outputs are a whole-file error: report every offender at
  // once so the file can be fixed in one pass.
  std::vector<std::string> holes;
  for (const auto& col : columns) {
    if (col.role != VariableRole::Input && col.role != VariableRole::Output) continue;
    for (std::size_t i = 0; i < nrows; ++i)
      if (std::isnan(col.values[i])) holes.push_back("'" + dmu_names[i] + "'/" + col.name);
  }
  if (!holes.empty()) {
    std::string msg = "missing input/output values at: ";
    for (std::size_t k = 0; k < holes.size(); ++k) {
      if (k) msg += ", ";
      msg += holes[k];
    }
    throw MissingInputOutput(msg);
  }

  return Dataset(std::move(dmu_names), std::move(columns));
}

Dataset parse_csv(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_text(buf.str(), schema);
}

DescriptiveStats describe(const Dataset& ds) {
  if (ds.n() == 0) throw EmptyDataset("cannot describe an empty dataset");
  DescriptiveStats stats;
  for (const auto& col : ds.columns()) {
    if (!numeric_role(col.role)) continue;
    std::vector<double> present;
    for (double v : col.values)
      if (!std::isnan(v)) present.push_back(v);
    ColumnStats cs;
    cs.name = col.name;
    cs.role = col.role;
    cs.count = present.size();
    if (!present.empty()) {
      cs.mean = stats::mean(present);
      cs.sd = stats::sample_sd(present);
      cs.min = *std::min_element(present.begin(), present.end());
      cs.max = *std::max_element(present.begin(), present.end());
    }
    stats.columns.push_back(std::move(cs));
  }
  return stats;
}

std::vector<GroupRow> group_summary(const Dataset& ds, std::span<const double> scores) {
  const Column* group = ds.group_column();
  if (!group) throw NoGroupColumn("dataset has no group column");
  if (scores.size() != ds.n())
    throw LengthMismatch("score vector length " + std::to_string(scores.size()) +
                         " does not match dataset size " + std::to_string(ds.n()));

  std::map<std::string, GroupRow> by_label;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    GroupRow& row = by_label[group->labels[i]];
    row.label = group->labels[i];
    row.count += 1;
    row.mean_score += scores[i];
    row.members.push_back(ds.dmu_names()[i]);
  }
  std::vector<GroupRow> out;
  for (auto& [label, row] : by_label) {
    row.mean_score /= static_cast<double>(row.count);
    out.push_back(std::move(row));
  }
  return out;
}

nlohmann::ordered_json descriptives_to_json(const DescriptiveStats& stats) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& c : stats.columns) {
    arr.push_back({{"column", c.name},
                   {"role", role_name(c.role)},
                   {"mean", c.mean},
                   {"sd", c.sd},
                   {"min", c.min},
                   {"max", c.max},
                   {"count", c.count}});
  }
  return arr;
}

nlohmann::ordered_json groups_to_json(const std::vector<GroupRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    arr.push_back({{"group", r.label},
                   {"count", r.count},
                   {"mean_score", r.mean_score},
                   {"members", r.members}});
  }
  return arr;
}

}  // namespace frontier
