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

#ifndef MUSICHIST_RELEVANCE_HPP
#define MUSICHIST_RELEVANCE_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "musichist/core.hpp"
#include "musichist/ingest.hpp"
#include "musichist/rational_io.hpp"

namespace musichist {

/// How indirect relevance aggregates third tracks.
enum class IndirectMode {
  /// sum_i sum_{x != a,b} (r_i(a,x) + r_i(b,x)), the published definition.
  AsWritten,
  /// sum_i sum_{x != a,b} r_i(a,x) * r_i(b,x). Not part of the published
  /// model; counts only paths a-x-b inside one user's history.
  SharedNeighbor,
};

struct RelevanceConfig {
  Timestamp t0 = 3600;
  Rational lambda{1, 4};
  IndirectMode indirect_mode = IndirectMode::AsWritten;
};

namespace detail {

inline std::vector<Timestamp> access_times(const UserHistory& h, std::string_view track) {
  std::vector<Timestamp> out;
  for (const auto& e : h.events)
    if (e.track_id == track) out.push_back(e.timestamp);
  return out;
}

}  // namespace detail

/// 1 iff the user accessed both tracks with some pair of accesses at most
/// `t0` seconds apart. Repeat accesses are all considered.
inline int pair_indicator(const UserHistory& history, std::string_view a, std::string_view b,
                          Timestamp t0) {
  if (a == b) throw std::invalid_argument("pair_indicator requires distinct tracks");
  auto ta = detail::access_times(history, a);
  auto tb = detail::access_times(history, b);
  // Both lists are sorted; the closest pair is adjacent in the merged order.
  std::size_t i = 0, j = 0;
  while (i < ta.size() && j < tb.size()) {
    if (std::llabs(ta[i] - tb[j]) <= t0) return 1;
    if (ta[i] < tb[j]) ++i; else ++j;
  }
  return 0;
}

/// Number of users whose indicator fires for (a, b).
inline std::int64_t direct_relevance(const HistoryMap& histories, std::string_view a,
                                     std::string_view b, Timestamp t0) {
  std::int64_t n = 0;
  for (const auto& [u, h] : histories) n += pair_indicator(h, a, b, t0);
  return n;
}

/// Sum over users and third tracks x of r_i(a,x) + r_i(b,x).
inline std::int64_t indirect_relevance(const HistoryMap& histories, std::string_view a,
                                       std::string_view b, Timestamp t0) {
  if (a == b) throw std::invalid_argument("indirect_relevance requires distinct tracks");
  std::int64_t n = 0;
  for (const auto& [u, h] : histories) {
    for (const auto& x : h.track_set()) {
      if (x == a || x == b) continue;
      n += pair_indicator(h, a, x, t0) + pair_indicator(h, b, x, t0);
    }
  }
  return n;
}

inline Rational combined_relevance(std::int64_t direct, std::int64_t indirect,
                                   const Rational& lambda) {
  return Rational(direct) + lambda * Rational(indirect);
}

/// Sparse symmetric store of direct, indirect and combined relevance over
/// a fixed track universe.
///
/// Built matrices keep R_D per co-accessed pair plus the per-track degree
/// Deg(a) = sum_i #{x != a : r_i(a,x) = 1}; the published indirect term then
/// reduces to R_I(a,b) = Deg(a) + Deg(b) - 2 R_D(a,b). Matrices loaded from
/// CSV or built in shared-neighbor mode store R_I explicitly instead.
class RelevanceMatrix {
 public:
  using Index = std::uint32_t;

  struct Entry {
    std::string_view a, b;  // a < b
    std::int64_t direct;
    std::int64_t indirect;
    Rational combined;
  };

  RelevanceMatrix() = default;

  RelevanceMatrix(std::vector<std::string> universe, Rational lambda, std::int64_t n_users)
      : tracks_(std::move(universe)), lambda_(lambda), n_users_(n_users) {
    std::sort(tracks_.begin(), tracks_.end());
    tracks_.erase(std::unique(tracks_.begin(), tracks_.end()), tracks_.end());
    for (Index i = 0; i < tracks_.size(); ++i) index_.emplace(tracks_[i], i);
    degree_.assign(tracks_.size(), 0);
  }

  const std::vector<std::string>& tracks() const { return tracks_; }
  const Rational& lambda() const { return lambda_; }
  std::int64_t n_users() const { return n_users_; }
  bool explicit_indirect() const { return explicit_indirect_; }

  std::optional<Index> index_of(std::string_view id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::int64_t direct(Index i, Index j) const {
    if (i == j) return 0;
    auto it = direct_.find(key(i, j));
    return it == direct_.end() ? 0 : it->second;
  }

  std::int64_t indirect(Index i, Index j) const {
    if (i == j) return 0;
    if (explicit_indirect_) {
      auto it = indirect_.find(key(i, j));
      return it == indirect_.end() ? 0 : it->second;
    }
    return degree_[i] + degree_[j] - 2 * direct(i, j);
  }

  Rational combined(Index i, Index j) const {
    return combined_relevance(direct(i, j), indirect(i, j), lambda_);
  }

  std::int64_t direct(std::string_view a, std::string_view b) const {
    auto i = index_of(a), j = index_of(b);
    return i && j ? direct(*i, *j) : 0;
  }
  std::int64_t indirect(std::string_view a, std::string_view b) const {
    auto i = index_of(a), j = index_of(b);
    return i && j ? indirect(*i, *j) : 0;
  }
  Rational combined(std::string_view a, std::string_view b) const {
    auto i = index_of(a), j = index_of(b);
    return i && j ? combined(*i, *j) : Rational(0);
  }

  /// Visits every pair with combined > 0 in (a, b) lexicographic order.
  void for_each_nonzero(const std::function<void(const Entry&)>& fn) const {
    const auto m = static_cast<Index>(tracks_.size());
    if (explicit_indirect_) {
      std::vector<std::uint64_t> keys;
      for (const auto& [k, v] : direct_) keys.push_back(k);
      for (const auto& [k, v] : indirect_)
        if (!direct_.count(k)) keys.push_back(k);
      std::sort(keys.begin(), keys.end());
      for (auto k : keys) emit(static_cast<Index>(k >> 32), static_cast<Index>(k & 0xFFFFFFFFu), fn);
      return;
    }
    for (Index i = 0; i < m; ++i)
      for (Index j = i + 1; j < m; ++j) emit(i, j, fn);
  }

  std::size_t nonzero_count() const {
    std::size_t n = 0;
    for_each_nonzero([&](const Entry&) { ++n; });
    return n;
  }

  /// Copy with every direct and indirect entry multiplied by `factor`.
  RelevanceMatrix scaled(std::int64_t factor) const {
    if (factor <= 0) throw std::invalid_argument("scale factor must be positive");
    RelevanceMatrix m = *this;
    for (auto& [k, v] : m.direct_) v *= factor;
    for (auto& [k, v] : m.indirect_) v *= factor;
    for (auto& d : m.degree_) d *= factor;
    return m;
  }

  // Builders.
  void add_direct(Index i, Index j, std::int64_t n) {
    if (n != 0) direct_[key(i, j)] += n;
  }
  void add_degree(Index i, std::int64_t n) { degree_[i] += n; }
  void add_indirect(Index i, Index j, std::int64_t n) {
    explicit_indirect_ = true;
    if (n != 0) indirect_[key(i, j)] += n;
  }
  void use_explicit_indirect() { explicit_indirect_ = true; }

  static std::uint64_t key(Index i, Index j) {
    if (i > j) std::swap(i, j);
    return (std::uint64_t{i} << 32) | j;
  }

 private:
  void emit(Index i, Index j, const std::function<void(const Entry&)>& fn) const {
    const auto d = direct(i, j);
    const auto ind = indirect(i, j);
    auto c = combined_relevance(d, ind, lambda_);
    if (c > 0) fn(Entry{tracks_[i], tracks_[j], d, ind, c});
  }

  std::vector<std::string> tracks_;
  std::map<std::string, Index, std::less<>> index_;
  Rational lambda_{1, 4};
  std::int64_t n_users_ = 0;
  std::unordered_map<std::uint64_t, std::int64_t> direct_;
  std::vector<std::int64_t> degree_;
  std::unordered_map<std::uint64_t, std::int64_t> indirect_;
  bool explicit_indirect_ = false;
};

namespace detail {

/// Distinct unordered track pairs (as matrix indices) accessed within t0 of
/// each other by one user, via a sliding window over the sorted history.
inline std::vector<std::uint64_t> coaccess_pairs(const UserHistory& h, const RelevanceMatrix& m,
                                                 Timestamp t0) {
  std::vector<RelevanceMatrix::Index> idx;
  idx.reserve(h.events.size());
  for (const auto& e : h.events) {
    auto i = m.index_of(e.track_id);
    if (!i) throw ValidationError("track " + e.track_id + " is not in the catalog");
    idx.push_back(*i);
  }
  std::vector<std::uint64_t> pairs;
  for (std::size_t i = 0; i < h.events.size(); ++i)
    for (std::size_t j = i + 1; j < h.events.size() &&
                                h.events[j].timestamp - h.events[i].timestamp <= t0;
         ++j)
      if (idx[i] != idx[j]) pairs.push_back(RelevanceMatrix::key(idx[i], idx[j]));
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

}  // namespace detail

/// Relevance over every catalog track pair.
inline RelevanceMatrix build_matrix(const Catalog& catalog, const HistoryMap& histories,
                                    const RelevanceConfig& config = {}) {
  if (config.t0 <= 0) throw std::invalid_argument("t0 must be positive");
  if (config.lambda < 0) throw std::invalid_argument("lambda must be non-negative");
  std::vector<std::string> universe;
  universe.reserve(catalog.size());
  for (const auto& [id, t] : catalog.tracks()) universe.push_back(id);
  RelevanceMatrix m(std::move(universe), config.lambda,
                    static_cast<std::int64_t>(histories.size()));
  if (config.indirect_mode == IndirectMode::SharedNeighbor) m.use_explicit_indirect();

  for (const auto& [u, h] : histories) {
    auto pairs = detail::coaccess_pairs(h, m, config.t0);
    std::unordered_map<RelevanceMatrix::Index, std::vector<RelevanceMatrix::Index>> adj;
    for (auto k : pairs) {
      auto i = static_cast<RelevanceMatrix::Index>(k >> 32);
      auto j = static_cast<RelevanceMatrix::Index>(k & 0xFFFFFFFFu);
      m.add_direct(i, j, 1);
      if (config.indirect_mode == IndirectMode::AsWritten) {
        m.add_degree(i, 1);
        m.add_degree(j, 1);
      } else {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
    for (auto& [x, nbrs] : adj)
      for (std::size_t p = 0; p < nbrs.size(); ++p)
        for (std::size_t q = p + 1; q < nbrs.size(); ++q) m.add_indirect(nbrs[p], nbrs[q], 1);
  }
  return m;
}

inline RelevanceMatrix build_matrix(const DatasetSnapshot& snapshot,
                                    const RelevanceConfig& config = {}) {
  return build_matrix(snapshot.catalog, snapshot.histories, config);
}

/// `track_a,track_b,direct,indirect,combined`, one row per nonzero pair.
inline std::string matrix_to_csv(const RelevanceMatrix& m) {
  std::string out = "track_a,track_b,direct,indirect,combined\n";
  m.for_each_nonzero([&](const RelevanceMatrix::Entry& e) {
    out += csv::quote(std::string(e.a)) + "," + csv::quote(std::string(e.b)) + "," +
           std::to_string(e.direct) + "," + std::to_string(e.indirect) + "," +
           to_decimal(e.combined) + "\n";
  });
  return out;
}

/// Reads a matrix CSV against a catalog. Pairs not listed are zero. The
/// combined column must agree with direct + lambda * indirect to 1e-6.
inline RelevanceMatrix parse_matrix_csv(std::string_view text, const Catalog& catalog,
                                        const Rational& lambda, std::int64_t n_users) {
  auto rows = csv::split(text);
  if (rows.empty() || rows[0].fields.size() != 5 || rows[0].fields[0] != "track_a" ||
      rows[0].fields[1] != "track_b" || rows[0].fields[2] != "direct" ||
      rows[0].fields[3] != "indirect" || rows[0].fields[4] != "combined")
    throw ParseError(1, "expected header 'track_a,track_b,direct,indirect,combined'");
  std::vector<std::string> universe;
  for (const auto& [id, t] : catalog.tracks()) universe.push_back(id);
  RelevanceMatrix m(std::move(universe), lambda, n_users);
  m.use_explicit_indirect();
  std::set<std::uint64_t> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != 5)
      throw ParseError(row.line, "expected 5 columns, got " + std::to_string(row.fields.size()));
    auto i = m.index_of(row.fields[0]);
    auto j = m.index_of(row.fields[1]);
    if (!i) throw ParseError(row.line, "column 1 (track_a): unknown track " + row.fields[0]);
    if (!j) throw ParseError(row.line, "column 2 (track_b): unknown track " + row.fields[1]);
    if (*i == *j) throw ParseError(row.line, "diagonal entry");
    if (!seen.insert(RelevanceMatrix::key(*i, *j)).second)
      throw ParseError(row.line, "duplicate pair");
    auto d = csv::parse_int<std::int64_t>(row, 2, "direct");
    auto ind = csv::parse_int<std::int64_t>(row, 3, "indirect");
    if (d < 0 || ind < 0) throw ParseError(row.line, "negative relevance");
    double c = 0;
    try {
      c = std::stod(row.fields[4]);
    } catch (const std::exception&) {
      throw ParseError(row.line, "column 5 (combined): not a number");
    }
    if (std::abs(c - to_double(combined_relevance(d, ind, lambda))) > 1e-6)
      throw ParseError(row.line, "combined does not equal direct + lambda * indirect");
    m.add_direct(*i, *j, d);
    m.add_indirect(*i, *j, ind);
  }
  return m;
}

}  // namespace musichist

#endif  // MUSICHIST_RELEVANCE_HPP
