#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace frontier::csv {

// RFC-4180-style table: comma separated, optional double-quote escaping,
// first record is the header. Unquoted fields are trimmed of surrounding
// ASCII whitespace.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Table parse(std::string_view text);
Table read_file(const std::string& path);

// Quotes a field only when it needs it (comma, quote, or newline inside).
std::string escape(std::string_view field);
std::string join_line(const std::vector<std::string>& fields);

}  // namespace frontier::csv
