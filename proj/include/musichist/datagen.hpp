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

#ifndef MUSICHIST_DATAGEN_HPP
#define MUSICHIST_DATAGEN_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "musichist/core.hpp"

namespace musichist {

/// SplitMix64 (Steele, Lea & Flood 2014): the n-th output is a fixed
/// mixing function of seed + n * 0x9E3779B97F4A7C15, so streams are
/// reproducible on every platform and cheap to split.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  /// Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire's multiply-shift with rejection.
    for (;;) {
      const unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
      const auto low = static_cast<std::uint64_t>(m);
      if (low >= (-n) % n) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  /// Independent stream number `stream` derived from this generator's seed.
  SplitMix64 split(std::uint64_t stream) const {
    return SplitMix64(mix(seed_key() ^ mix(stream + 0x632BE59BD9B4E019ull)));
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_key() const { return state_; }
  std::uint64_t state_;
};

/// Two-segment power law over gaps in [min_gap, inf):
///   f(g) ~ g^-alpha1                          for min_gap <= g < breakpoint
///   f(g) ~ breakpoint^(alpha2-alpha1) g^-alpha2  for g >= breakpoint
/// The density is continuous at the breakpoint, which fixes the mass below it.
struct GapModel {
  double alpha1 = 1.2;
  double alpha2 = 2.5;
  double breakpoint = 3600.0;
  double min_gap = 0.1;

  void validate() const {
    if (!(alpha1 > 1.0) || !(alpha2 > 1.0))
      throw std::invalid_argument("gap model exponents must exceed 1");
    if (!(breakpoint > 1.0)) throw std::invalid_argument("gap model breakpoint must exceed 1 s");
    if (!(min_gap > 0.0) || !(min_gap < breakpoint))
      throw std::invalid_argument("gap model min_gap must lie in (0, breakpoint)");
  }

  /// Probability that a gap falls below the breakpoint.
  double mass_below() const {
    const double lower = (std::pow(min_gap, 1 - alpha1) - std::pow(breakpoint, 1 - alpha1)) / (alpha1 - 1);
    const double upper = std::pow(breakpoint, 1 - alpha1) / (alpha2 - 1);
    return lower / (lower + upper);
  }

  double cdf(double g) const {
    if (g <= min_gap) return 0.0;
    const double p = mass_below();
    if (g < breakpoint) {
      const double a = std::pow(min_gap, 1 - alpha1);
      return p * (a - std::pow(g, 1 - alpha1)) / (a - std::pow(breakpoint, 1 - alpha1));
    }
    return p + (1 - p) * (1 - std::pow(breakpoint / g, alpha2 - 1));
  }

  double quantile(double u) const {
    const double p = mass_below();
    if (u < p) {
      const double a = std::pow(min_gap, 1 - alpha1);
      const double b = std::pow(breakpoint, 1 - alpha1);
      return std::pow(a - (u / p) * (a - b), 1 / (1 - alpha1));
    }
    const double v = (u - p) / (1 - p);
    return breakpoint * std::pow(1 - v, -1 / (alpha2 - 1));
  }

  double sample(SplitMix64& rng) const { return quantile(rng.uniform()); }
};

struct GenreWeight {
  std::string name;
  double weight = 1.0;
};

struct GenSpec {
  std::size_t n_users = 10;
  std::size_t n_tracks = 200;
  std::size_t events_per_user = 100;
  std::vector<GenreWeight> genres = {{"pop", 4}, {"rock", 3}, {"jazz", 2}, {"classical", 1}};
  GapModel gaps;
  double switch_probability = 0.3;  // per session boundary
  Timestamp session_gap = 3600;
  Timestamp start_time = 1704067200;  // 2024-01-01T00:00:00Z
  int year_min = 1960;
  int year_max = 2020;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_users == 0) throw std::invalid_argument("n_users must be positive");
    if (n_tracks == 0) throw std::invalid_argument("n_tracks must be positive");
    if (genres.empty()) throw std::invalid_argument("at least one genre is required");
    double total = 0;
    for (const auto& g : genres) {
      if (g.name.empty()) throw std::invalid_argument("genre names must be non-empty");
      if (!(g.weight >= 0) || !std::isfinite(g.weight))
        throw std::invalid_argument("genre weights must be finite and non-negative");
      total += g.weight;
    }
    if (!(total > 0)) throw std::invalid_argument("genre weights must not all be zero");
    if (!(switch_probability >= 0 && switch_probability <= 1))
      throw std::invalid_argument("switch_probability must lie in [0, 1]");
    if (session_gap <= 0) throw std::invalid_argument("session_gap must be positive");
    if (start_time < 0) throw std::invalid_argument("start_time must be non-negative");
    if (year_min < kMinReleaseYear || year_max > kMaxReleaseYear || year_min > year_max)
      throw std::invalid_argument("release years must satisfy 1000 <= year_min <= year_max <= 3000");
    gaps.validate();
  }
};

inline GenSpec genspec_from_json(const nlohmann::json& j) {
  GenSpec s;
  s.n_users = j.value("n_users", s.n_users);
  s.n_tracks = j.value("n_tracks", s.n_tracks);
  s.events_per_user = j.value("events_per_user", s.events_per_user);
  if (j.contains("genres")) {
    s.genres.clear();
    for (const auto& g : j.at("genres"))
      s.genres.push_back({g.at("name").get<std::string>(), g.value("weight", 1.0)});
  }
  if (j.contains("gap_model")) {
    const auto& g = j.at("gap_model");
    s.gaps.alpha1 = g.value("alpha1", s.gaps.alpha1);
    s.gaps.alpha2 = g.value("alpha2", s.gaps.alpha2);
    s.gaps.breakpoint = g.value("breakpoint", s.gaps.breakpoint);
    s.gaps.min_gap = g.value("min_gap", s.gaps.min_gap);
  }
  s.switch_probability = j.value("switch_probability", s.switch_probability);
  s.session_gap = j.value("session_gap", s.session_gap);
  s.start_time = j.value("start_time", s.start_time);
  s.year_min = j.value("year_min", s.year_min);
  s.year_max = j.value("year_max", s.year_max);
  s.seed = j.value("seed", s.seed);
  return s;
}

struct GeneratedData {
  Catalog catalog;
  std::vector<AccessEvent> events;
};

namespace detail {

inline std::size_t weighted_pick(SplitMix64& rng, const std::vector<double>& weights) {
  double total = 0;
  for (double w : weights) total += w;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0) return i;
  return 0;
}

inline std::string padded_id(char prefix, std::size_t i, std::size_t n) {
  const int width = static_cast<int>(std::to_string(n > 0 ? n - 1 : 0).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, i);
  return buf;
}

}  // namespace detail

/// Synthetic catalog and listening log.
///
/// Each user starts at a random point of the first week and draws gaps
/// from `spec.gaps` (floored to whole seconds). Within a session the user
/// picks tracks uniformly from the current genre; at each session boundary
/// the genre switches with `switch_probability`. Stream 0 of the seed
/// drives the catalog and stream u+1 drives user u.
inline GeneratedData generate(const GenSpec& spec) {
  spec.validate();
  const SplitMix64 root(spec.seed);
  const std::size_t n_genres = spec.genres.size();

  auto catalog_rng = root.split(0);
  std::vector<double> weights;
  for (const auto& g : spec.genres) weights.push_back(g.weight);
  std::vector<Track> tracks;
  std::vector<std::vector<std::size_t>> by_genre(n_genres);
  for (std::size_t t = 0; t < spec.n_tracks; ++t) {
    // Every genre gets one track before weighted assignment kicks in.
    const std::size_t g = t < n_genres && spec.genres[t].weight > 0
                              ? t
                              : detail::weighted_pick(catalog_rng, weights);
    const int span = spec.year_max - spec.year_min + 1;
    const int year = spec.year_min + static_cast<int>(catalog_rng.below(static_cast<std::uint64_t>(span)));
    auto id = detail::padded_id('t', t, spec.n_tracks);
    by_genre[g].push_back(tracks.size());
    tracks.push_back({id, spec.genres[g].name, year, "Track " + std::to_string(t)});
  }

  std::vector<double> active = weights;  // genres that own tracks
  for (std::size_t g = 0; g < n_genres; ++g)
    if (by_genre[g].empty()) active[g] = 0;

  std::vector<AccessEvent> events;
  events.reserve(spec.n_users * spec.events_per_user);
  for (std::size_t u = 0; u < spec.n_users; ++u) {
    auto rng = root.split(u + 1);
    const auto user = detail::padded_id('u', u, spec.n_users);
    Timestamp t = spec.start_time + static_cast<Timestamp>(rng.below(7 * 86400));
    std::size_t genre = detail::weighted_pick(rng, active);
    std::vector<std::size_t> at_current_time;
    for (std::size_t e = 0; e < spec.events_per_user; ++e) {
      if (e > 0) {
        const auto gap = static_cast<Timestamp>(std::floor(spec.gaps.sample(rng)));
        if (gap > 0) at_current_time.clear();
        t += gap;
        if (gap >= spec.session_gap && rng.uniform() < spec.switch_probability) {
          auto others = active;
          others[genre] = 0;
          double rest = 0;
          for (double w : others) rest += w;
          if (rest > 0) genre = detail::weighted_pick(rng, others);
        }
      }
      const auto& pool = by_genre[genre];
      std::size_t pick = pool[rng.below(pool.size())];
      // An identical (user, track, timestamp) record would be a duplicate.
      for (int retry = 0; retry < 8 && std::count(at_current_time.begin(), at_current_time.end(), pick); ++retry)
        pick = pool[rng.below(pool.size())];
      if (std::count(at_current_time.begin(), at_current_time.end(), pick)) {
        ++t;
        at_current_time.clear();
      }
      at_current_time.push_back(pick);
      events.push_back({user, tracks[pick].track_id, t});
    }
  }
  return {Catalog(std::move(tracks)), std::move(events)};
}

}  // namespace musichist

#endif  // MUSICHIST_DATAGEN_HPP
