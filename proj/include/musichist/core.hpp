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

#ifndef MUSICHIST_CORE_HPP
#define MUSICHIST_CORE_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

namespace musichist {

using Timestamp = std::int64_t;  // integer seconds since the epoch
using Rational = boost::rational<std::int64_t>;

inline constexpr int kMinReleaseYear = 1000;
inline constexpr int kMaxReleaseYear = 3000;

/// Raised for malformed input data (bad CSV rows, inconsistent catalogs).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a file cannot be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Track {
  std::string track_id;
  std::string genre;
  int release_year = 2000;
  std::optional<std::string> title;

  friend bool operator==(const Track&, const Track&) = default;
};

struct AccessEvent {
  std::string user_id;
  std::string track_id;
  Timestamp timestamp = 0;

  friend bool operator==(const AccessEvent&, const AccessEvent&) = default;
  friend auto operator<=>(const AccessEvent&, const AccessEvent&) = default;
};

struct UserHistory {
  std::string user_id;
  std::vector<AccessEvent> events;  // non-decreasing timestamps

  friend bool operator==(const UserHistory&, const UserHistory&) = default;

  std::set<std::string> track_set() const {
    std::set<std::string> out;
    for (const auto& e : events) out.insert(e.track_id);
    return out;
  }
};

using HistoryMap = std::map<std::string, UserHistory>;

/// Track lookup table with derived genre order and year range.
///
/// Genres are ordered by descending track count, ties broken by label.
class Catalog {
 public:
  Catalog() = default;

  /// Throws ValidationError on duplicate ids, empty ids/genres or years
  /// outside [1000, 3000].
  explicit Catalog(std::vector<Track> tracks) {
    for (auto& t : tracks) {
      if (t.track_id.empty()) throw ValidationError("track with empty track_id");
      if (t.genre.empty()) throw ValidationError("track " + t.track_id + " has empty genre");
      if (t.release_year < kMinReleaseYear || t.release_year > kMaxReleaseYear)
        throw ValidationError("track " + t.track_id + " release_year " +
                              std::to_string(t.release_year) + " outside [1000, 3000]");
      auto id = t.track_id;
      if (!tracks_.emplace(id, std::move(t)).second)
        throw ValidationError("duplicate track_id " + id);
    }
    derive();
  }

  const std::map<std::string, Track>& tracks() const { return tracks_; }
  const std::vector<std::string>& genres() const { return genres_; }
  std::pair<int, int> year_range() const { return year_range_; }
  std::size_t size() const { return tracks_.size(); }
  bool empty() const { return tracks_.empty(); }
  bool contains(const std::string& id) const { return tracks_.count(id) != 0; }

  const Track& at(const std::string& id) const {
    auto it = tracks_.find(id);
    if (it == tracks_.end()) throw std::out_of_range("unknown track_id " + id);
    return it->second;
  }

  const Track* find(const std::string& id) const {
    auto it = tracks_.find(id);
    return it == tracks_.end() ? nullptr : &it->second;
  }

  /// Position of `genre` in genres(), or genres().size() if absent.
  std::size_t genre_rank(const std::string& genre) const {
    auto it = std::find(genres_.begin(), genres_.end(), genre);
    return static_cast<std::size_t>(it - genres_.begin());
  }

  friend bool operator==(const Catalog& a, const Catalog& b) { return a.tracks_ == b.tracks_; }

 private:
  void derive() {
    std::map<std::string, std::size_t> counts;
    int lo = kMaxReleaseYear, hi = kMinReleaseYear;
    for (const auto& [id, t] : tracks_) {
      ++counts[t.genre];
      lo = std::min(lo, t.release_year);
      hi = std::max(hi, t.release_year);
    }
    std::vector<std::pair<std::string, std::size_t>> order(counts.begin(), counts.end());
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    genres_.clear();
    for (auto& [g, n] : order) genres_.push_back(g);
    year_range_ = tracks_.empty() ? std::pair{0, 0} : std::pair{lo, hi};
  }

  std::map<std::string, Track> tracks_;
  std::vector<std::string> genres_;
  std::pair<int, int> year_range_{0, 0};
};

enum class FindingKind { DanglingTrack, NegativeTimestamp, DuplicateRecord };

struct Finding {
  FindingKind kind;
  bool is_error;
  std::size_t index;  // position in the input event list
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;
  std::vector<AccessEvent> accepted;  // input minus errors and exact duplicates

  std::size_t error_count() const {
    return static_cast<std::size_t>(
        std::count_if(findings.begin(), findings.end(), [](const auto& f) { return f.is_error; }));
  }
  std::size_t warning_count() const { return findings.size() - error_count(); }
  std::size_t count(FindingKind k) const {
    return static_cast<std::size_t>(
        std::count_if(findings.begin(), findings.end(), [k](const auto& f) { return f.kind == k; }));
  }
  bool ok() const { return error_count() == 0; }
};

/// Checks events against the catalog. Dangling track ids and negative
/// timestamps are errors; exact (user, track, timestamp) repeats are
/// warnings and only the first copy is kept in `accepted`.
inline ValidationReport validate_dataset(const Catalog& catalog,
                                         const std::vector<AccessEvent>& events) {
  ValidationReport report;
  std::set<std::tuple<std::string_view, std::string_view, Timestamp>> seen;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    bool bad = false;
    if (!catalog.contains(e.track_id)) {
      report.findings.push_back({FindingKind::DanglingTrack, true, i,
                                 "event " + std::to_string(i) + ": unknown track_id '" +
                                     e.track_id + "'"});
      bad = true;
    }
    if (e.timestamp < 0) {
      report.findings.push_back({FindingKind::NegativeTimestamp, true, i,
                                 "event " + std::to_string(i) + ": negative timestamp " +
                                     std::to_string(e.timestamp)});
      bad = true;
    }
    if (bad) continue;
    if (!seen.emplace(e.user_id, e.track_id, e.timestamp).second) {
      report.findings.push_back({FindingKind::DuplicateRecord, false, i,
                                 "event " + std::to_string(i) + ": duplicate record (" +
                                     e.user_id + ", " + e.track_id + ", " +
                                     std::to_string(e.timestamp) + ")"});
      continue;
    }
    report.accepted.push_back(e);
  }
  return report;
}

/// Groups events by user and sorts each history by timestamp. Equal
/// timestamps keep their input order.
inline HistoryMap build_histories(const std::vector<AccessEvent>& events) {
  HistoryMap out;
  for (const auto& e : events) {
    auto& h = out[e.user_id];
    h.user_id = e.user_id;
    h.events.push_back(e);
  }
  for (auto& [u, h] : out)
    std::stable_sort(h.events.begin(), h.events.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return out;
}

}  // namespace musichist

#endif  // MUSICHIST_CORE_HPP
