#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

namespace rae::io {

// Shortest round-trip decimal form; identical on every run and platform
// with a conforming to_chars.
inline std::string format_double(double v) {
  if (v == 0.0) return "0";  // folds -0
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

// Fixed precision for SVG coordinates.
inline std::string format_fixed(double v, int precision = 5) {
  if (std::abs(v) < 0.5 * std::pow(10.0, -precision)) return "0";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, precision);
  std::string s(buf.data(), res.ptr);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

}  // namespace rae::io
