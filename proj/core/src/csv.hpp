#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tempfid::detail {

// Splits one delimited line. Double-quoted fields may contain the delimiter
// and "" escapes. Returns false on an unterminated quote.
inline bool split_fields(std::string_view line, char delimiter, std::vector<std::string>& out) {
  out.clear();
  std::string field;
  bool quoted = false;
  bool at_start = true;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && at_start) {
      quoted = true;
      at_start = false;
    } else if (c == delimiter) {
      out.push_back(std::move(field));
      field.clear();
      at_start = true;
    } else {
      field.push_back(c);
      at_start = false;
    }
  }
  if (quoted) return false;
  out.push_back(std::move(field));
  return true;
}

inline std::string quote_field(std::string_view text, char delimiter) {
  if (text.find_first_of(std::string{delimiter, '"', '\n'}) == std::string_view::npos) {
    return std::string(text);
  }
  std::string out = "\"";
  for (const char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace tempfid::detail
