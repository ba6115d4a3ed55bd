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

#ifndef MUSICHIST_LAYOUT_STYLES_HPP
#define MUSICHIST_LAYOUT_STYLES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>

#include "musichist/core.hpp"

namespace musichist::layout {

inline constexpr std::array<const char*, 12> kGenrePalette = {
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
    "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#17becf", "#bcbd22"};

inline constexpr double kNewestGray = 0.15;
inline constexpr double kOldestGray = 0.90;

struct StyleEncoding {
  std::map<std::string, std::string> genre_palette;
  std::pair<int, int> year_range{0, 0};

  const std::string& genre_color(const std::string& genre) const {
    static const std::string kUnknown = "#808080";
    auto it = genre_palette.find(genre);
    return it == genre_palette.end() ? kUnknown : it->second;
  }

  /// Linear ramp from 0.90 (oldest) to 0.15 (newest); a single-year
  /// catalog maps everything to the midpoint.
  double year_gray(int year) const {
    const auto [lo, hi] = year_range;
    if (hi <= lo) return (kNewestGray + kOldestGray) / 2;
    double t = static_cast<double>(year - lo) / static_cast<double>(hi - lo);
    t = std::clamp(t, 0.0, 1.0);
    return kOldestGray - t * (kOldestGray - kNewestGray);
  }

  static std::string gray_hex(double level) {
    const int v = static_cast<int>(std::lround(std::clamp(level, 0.0, 1.0) * 255));
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", v, v, v);
    return buf;
  }
};

namespace detail {

// Mixes `hex` towards white by `amount` in [0, 1).
inline std::string lighten(const char* hex, double amount) {
  unsigned r = 0, g = 0, b = 0;
  std::sscanf(hex + 1, "%02x%02x%02x", &r, &g, &b);
  auto mix = [&](unsigned c) {
    return static_cast<unsigned>(std::lround(c + (255.0 - c) * amount));
  };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(r), mix(g), mix(b));
  return buf;
}

}  // namespace detail

/// Assigns palette colours in the catalog's canonical genre order. Past 12
/// genres the palette repeats, each cycle lighter than the last.
inline StyleEncoding encode_styles(const Catalog& catalog) {
  StyleEncoding s;
  s.year_range = catalog.year_range();
  std::set<std::string> used;
  const auto& genres = catalog.genres();
  for (std::size_t i = 0; i < genres.size(); ++i) {
    const auto cycle = i / kGenrePalette.size();
    const char* base = kGenrePalette[i % kGenrePalette.size()];
    const double amount = 1.0 - std::pow(0.7, static_cast<double>(cycle));
    std::string colour = cycle == 0 ? std::string(base) : detail::lighten(base, amount);
    // Rounding can collide once colours approach white; step to the next
    // free RGB value so the map stays injective.
    while (!used.insert(colour).second) {
      unsigned long v = std::stoul(colour.substr(1), nullptr, 16);
      char buf[8];
      std::snprintf(buf, sizeof buf, "#%06lx", (v + 0xFFFFFFul) & 0xFFFFFFul);  // v - 1 mod 2^24
      colour = buf;
    }
    s.genre_palette.emplace(genres[i], colour);
  }
  return s;
}

}  // namespace musichist::layout

#endif  // MUSICHIST_LAYOUT_STYLES_HPP
