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

#ifndef MUSICHIST_RECOMMENDER_HPP
#define MUSICHIST_RECOMMENDER_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "musichist/clock.hpp"
#include "musichist/ingest.hpp"
#include "musichist/relevance.hpp"

namespace musichist {

enum class RecommendMode { General, TimeSlot, SingleTrack };

inline const char* to_string(RecommendMode m) {
  switch (m) {
    case RecommendMode::General: return "general";
    case RecommendMode::TimeSlot: return "time_slot";
    case RecommendMode::SingleTrack: return "single_track";
  }
  return "general";
}

inline std::optional<RecommendMode> parse_mode(std::string_view s) {
  if (s == "general") return RecommendMode::General;
  if (s == "time_slot") return RecommendMode::TimeSlot;
  if (s == "single_track") return RecommendMode::SingleTrack;
  return std::nullopt;
}

class InvalidQueryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class UnknownUserError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class UnknownTrackError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class EmptySeedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RecommendationQuery {
  std::string user_id;
  RecommendMode mode = RecommendMode::General;
  std::optional<int> slot;               // hour of day, time_slot mode only
  std::optional<std::string> seed_track;  // single_track mode only
  int k = 10;

  void validate() const {
    if (slot.has_value() != (mode == RecommendMode::TimeSlot))
      throw InvalidQueryError("slot must be given iff mode=time_slot");
    if (seed_track.has_value() != (mode == RecommendMode::SingleTrack))
      throw InvalidQueryError("seed must be given iff mode=single_track");
    if (slot && (*slot < 0 || *slot > 23)) throw InvalidQueryError("slot must be in [0, 23]");
    if (k < 0) throw InvalidQueryError("k must be non-negative");
  }
};

struct ScoredTrack {
  std::string track_id;
  Rational score;

  friend bool operator==(const ScoredTrack&, const ScoredTrack&) = default;
};

struct Recommendation {
  RecommendationQuery query;
  std::vector<ScoredTrack> items;  // score descending, then track_id ascending
};

struct RecommenderOptions {
  LocalClock clock;
  bool exclude_history = true;
};

/// Tracks the query draws relevance from. Throws EmptySeedError when a
/// general or time-slot query finds nothing.
inline std::set<std::string> seed_set(const UserHistory& history, const RecommendationQuery& query,
                                      const LocalClock& clock = {}) {
  std::set<std::string> seeds;
  switch (query.mode) {
    case RecommendMode::General:
      seeds = history.track_set();
      if (seeds.empty()) throw EmptySeedError("user " + history.user_id + " has no history");
      break;
    case RecommendMode::TimeSlot:
      for (const auto& e : history.events)
        if (clock.hour_of_day(e.timestamp) == query.slot.value()) seeds.insert(e.track_id);
      if (seeds.empty())
        throw EmptySeedError("user " + history.user_id + " has no events in slot " +
                             std::to_string(*query.slot));
      break;
    case RecommendMode::SingleTrack:
      seeds.insert(query.seed_track.value());
      break;
  }
  return seeds;
}

/// score(c) = sum over seeds s of combined(s, c), for every track of the
/// matrix universe not excluded. Zero scores are dropped.
inline std::vector<ScoredTrack> score_candidates(const std::set<std::string>& seeds,
                                                 const RelevanceMatrix& matrix,
                                                 const std::set<std::string>& exclusions) {
  std::vector<RelevanceMatrix::Index> seed_idx;
  for (const auto& s : seeds)
    if (auto i = matrix.index_of(s)) seed_idx.push_back(*i);
  std::vector<ScoredTrack> out;
  const auto& universe = matrix.tracks();
  for (RelevanceMatrix::Index c = 0; c < universe.size(); ++c) {
    if (exclusions.count(universe[c])) continue;
    Rational score = 0;
    for (auto s : seed_idx) score += matrix.combined(s, c);
    if (score > 0) out.push_back({universe[c], score});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.score > b.score; });
  return out;  // universe is sorted, so equal scores stay in track_id order
}

inline Recommendation recommend(const DatasetSnapshot& snapshot, const RelevanceMatrix& matrix,
                                const RecommendationQuery& query,
                                const RecommenderOptions& options = {}) {
  query.validate();
  auto it = snapshot.histories.find(query.user_id);
  if (it == snapshot.histories.end()) throw UnknownUserError("unknown user " + query.user_id);
  if (query.seed_track && !snapshot.catalog.contains(*query.seed_track))
    throw UnknownTrackError("unknown track " + *query.seed_track);

  auto seeds = seed_set(it->second, query, options.clock);
  std::set<std::string> exclusions = seeds;
  if (options.exclude_history) {
    auto hist = it->second.track_set();
    exclusions.insert(hist.begin(), hist.end());
  }
  Recommendation rec{query, score_candidates(seeds, matrix, exclusions)};
  if (rec.items.size() > static_cast<std::size_t>(query.k)) rec.items.resize(query.k);
  return rec;
}

inline nlohmann::json to_json(const Recommendation& rec, const Catalog& catalog,
                              bool expose_titles = false) {
  nlohmann::json q = {{"user_id", rec.query.user_id},
                      {"mode", to_string(rec.query.mode)},
                      {"k", rec.query.k}};
  if (rec.query.slot) q["slot"] = *rec.query.slot;
  if (rec.query.seed_track) q["seed"] = *rec.query.seed_track;
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : rec.items) {
    nlohmann::json j = {{"track_id", item.track_id},
                        {"score", to_double(item.score)},
                        {"score_exact", to_decimal(item.score)}};
    if (const auto* t = catalog.find(item.track_id)) {
      j["genre"] = t->genre;
      j["release_year"] = t->release_year;
      if (expose_titles && t->title) j["title"] = *t->title;
    }
    items.push_back(std::move(j));
  }
  return {{"query", std::move(q)}, {"items", std::move(items)}};
}

}  // namespace musichist

#endif  // MUSICHIST_RECOMMENDER_HPP
