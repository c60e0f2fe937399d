#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "elicit/errors.hpp"

namespace elicit {

/// Shortest decimal text that parses back to exactly the same double.
/// All CSV output goes through this, which is what makes repeated runs
/// byte-identical and load/serialize cycles bit-exact.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& context) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw IoError(context + ": not a number: '" + std::string(text) + "'");
  return v;
}

inline long parse_long(std::string_view text, const std::string& context) {
  long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw IoError(context + ": not an integer: '" + std::string(text) + "'");
  return v;
}

/// Splits one CSV line on commas. Fields are plain identifiers and numbers;
/// quoting is not part of any file format here.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      return fields;
    }
    fields.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

} // namespace elicit
