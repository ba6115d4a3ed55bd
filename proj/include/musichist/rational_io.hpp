// Copyright 2026 The musichist Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MUSICHIST_RATIONAL_IO_HPP
#define MUSICHIST_RATIONAL_IO_HPP

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>

#include "musichist/core.hpp"

namespace musichist {

/// Fixed-point decimal with `digits` fractional digits, rounded half away
/// from zero. 5/2 -> "2.500000".
inline std::string to_decimal(const Rational& r, int digits = 6) {
  __int128 scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const __int128 num = r.numerator(), den = r.denominator();
  const bool neg = num < 0;
  __int128 a = neg ? -num : num;
  __int128 q = (a * scale * 2 + den) / (den * 2);
  auto ip = static_cast<std::int64_t>(q / scale);
  auto fp = static_cast<std::int64_t>(q % scale);
  std::string frac = std::to_string(fp);
  if (static_cast<int>(frac.size()) < digits) frac.insert(0, digits - frac.size(), '0');
  std::string out = (neg && q != 0 ? "-" : "") + std::to_string(ip);
  if (digits > 0) out += "." + frac;
  return out;
}

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

/// Parses "3", "0.25", "-1.5" or "1/4" exactly. Throws std::invalid_argument.
inline Rational parse_rational(std::string_view s) {
  auto bad = [&] { return std::invalid_argument("not a rational number: '" + std::string(s) + "'"); };
  auto parse_i64 = [&](std::string_view t) {
    std::int64_t v{};
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || p != t.data() + t.size()) throw bad();
    return v;
  };
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto den = parse_i64(s.substr(slash + 1));
    if (den == 0) throw bad();
    return Rational(parse_i64(s.substr(0, slash)), den);
  }
  auto dot = s.find('.');
  if (dot == std::string_view::npos) return Rational(parse_i64(s));
  auto ipart = s.substr(0, dot);
  auto fpart = s.substr(dot + 1);
  if (fpart.empty() || fpart.size() > 15 || fpart.find_first_not_of("0123456789") != std::string_view::npos)
    throw bad();
  const bool neg = !ipart.empty() && ipart.front() == '-';
  if (neg || (!ipart.empty() && ipart.front() == '+')) ipart.remove_prefix(1);
  std::int64_t ip = ipart.empty() ? 0 : parse_i64(ipart);
  if (ip < 0) throw bad();
  std::int64_t den = 1;
  for (std::size_t i = 0; i < fpart.size(); ++i) den *= 10;
  Rational r(ip * den + parse_i64(fpart), den);
  return neg ? -r : r;
}

}  // namespace musichist

#endif  // MUSICHIST_RATIONAL_IO_HPP
