#include "frontier/csv.hpp"

#include "frontier/errors.hpp"

#include <fstream>
#include <sstream>

namespace frontier::csv {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

Table parse(std::string_view text) {
  Table table;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  bool in_record = false;

  auto end_field = [&] {
    record.push_back(field_was_quoted ? field : trim(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    if (table.header.empty() && table.rows.empty())
      table.header = std::move(record);
    else
      table.rows.push_back(std::move(record));
    record = {};
    in_record = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        field_was_quoted = true;
        in_record = true;
        break;
      case ',':
        end_field();
        in_record = true;
        break;
      case '\n':
        if (in_record || !field.empty() || !record.empty()) end_record();
        break;
      case '\r':
        break;
      default:
        field += c;
        in_record = true;
    }
  }
  if (quoted) throw SchemaMismatch("unterminated quoted field at end of file");
  if (in_record || !field.empty() || !record.empty()) end_record();
  return table;
}

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string escape(std::string_view field) {
  const bool needs = field.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string join_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += escape(fields[i]);
  }
  out += '\n';
  return out;
}

}  // namespace frontier::csv
