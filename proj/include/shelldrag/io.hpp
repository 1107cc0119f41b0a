#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace shelldrag::io {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_number(double v)
{
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Strict decimal parse: the whole field must be consumed, and only finite
/// values are accepted.
inline std::optional<double> parse_number(std::string_view field)
{
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
    field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t'))
    field.remove_suffix(1);
  if (field.empty())
    return std::nullopt;
  if (field.front() == '+')
    field.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = ',')
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

/// Strips a trailing CR and, on the first line, a UTF-8 byte-order mark.
inline std::string_view clean_line(std::string_view line, bool first)
{
  if (first && line.starts_with("\xEF\xBB\xBF"))
    line.remove_prefix(3);
  if (!line.empty() && line.back() == '\r')
    line.remove_suffix(1);
  return line;
}

}  // namespace shelldrag::io
