#pragma once

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "cardioemu/errors.hpp"

namespace cardioemu {

// Shortest decimal that round-trips the double exactly. Used for every
// numeric artifact so reruns are byte-identical.
inline std::string format_full(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Hex-float form, bit-exact by construction; used for checkpoint weights.
inline std::string format_hex(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return std::string(buf);
}

// Parses both decimal and hex-float forms.
inline double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) {
    throw ConfigError("not a number: '" + s + "'");
  }
  return v;
}

}  // namespace cardioemu
