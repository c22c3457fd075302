#ifndef TDVARMA_FORMAT_HPP
#define TDVARMA_FORMAT_HPP

#include <charconv>
#include <string>
#include <string_view>

#include "tdvarma/errors.hpp"

namespace tdvarma {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("not a number: '" + std::string(s) + "'");
  return x;
}

inline long long parse_integer(std::string_view s) {
  long long x = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("not an integer: '" + std::string(s) + "'");
  return x;
}

}  // namespace tdvarma

#endif  // TDVARMA_FORMAT_HPP
