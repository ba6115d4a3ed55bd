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

#ifndef MUSICHIST_SESSIONIZER_HPP
#define MUSICHIST_SESSIONIZER_HPP

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "musichist/core.hpp"

namespace musichist {

inline constexpr Timestamp kDefaultSessionGap = 3600;

struct Session {
  std::string user_id;
  std::size_t index = 0;  // position within the user's session list
  std::vector<AccessEvent> events;
  Timestamp start = 0;
  Timestamp end = 0;

  std::size_t size() const { return events.size(); }
};

struct SubSession {
  std::size_t session_index = 0;
  std::string genre;
  std::vector<AccessEvent> events;
};

/// Splits a chronological history into sessions. Consecutive events stay
/// in one session iff their gap is strictly below `t0`.
inline std::vector<Session> segment_sessions(const UserHistory& history,
                                             Timestamp t0 = kDefaultSessionGap) {
  if (t0 <= 0) throw std::invalid_argument("session gap threshold must be positive");
  std::vector<Session> out;
  for (const auto& e : history.events) {
    if (out.empty() || e.timestamp - out.back().end >= t0) {
      out.push_back({history.user_id, out.size(), {}, e.timestamp, e.timestamp});
    }
    out.back().events.push_back(e);
    out.back().end = e.timestamp;
  }
  return out;
}

/// Maximal runs of same-genre events inside a session.
inline std::vector<SubSession> segment_subsessions(const Session& session, const Catalog& catalog) {
  std::vector<SubSession> out;
  for (const auto& e : session.events) {
    const auto& genre = catalog.at(e.track_id).genre;
    if (out.empty() || out.back().genre != genre) out.push_back({session.index, genre, {}});
    out.back().events.push_back(e);
  }
  return out;
}

/// Inter-event gaps pooled over users; gaps never span two users.
struct IntervalStats {
  std::vector<Timestamp> gaps;  // sorted ascending

  std::size_t size() const { return gaps.size(); }

  /// Empirical P(gap < threshold).
  double fraction_below(double threshold) const {
    if (gaps.empty()) return 0.0;
    auto it = std::lower_bound(gaps.begin(), gaps.end(), threshold,
                               [](Timestamp g, double t) { return static_cast<double>(g) < t; });
    return static_cast<double>(it - gaps.begin()) / static_cast<double>(gaps.size());
  }
};

inline IntervalStats interval_stats(const HistoryMap& histories) {
  IntervalStats s;
  for (const auto& [u, h] : histories)
    for (std::size_t i = 1; i < h.events.size(); ++i)
      s.gaps.push_back(h.events[i].timestamp - h.events[i - 1].timestamp);
  std::sort(s.gaps.begin(), s.gaps.end());
  return s;
}

class FitUndefinedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One logarithmic histogram bin over positive integer gaps.
///
/// A gap value k stands for the real interval [k, k+1), so a bin holding
/// integers k1..k2 covers [k1, k2+1) and its density is count / (k2+1-k1).
struct GapBin {
  double low = 0;   // bin edges as requested
  double high = 0;
  std::int64_t first = 0;  // integer span actually covered (first > last: none)
  std::int64_t last = -1;
  std::size_t count = 0;

  bool has_support() const { return first <= last; }
  double width() const { return static_cast<double>(last + 1 - first); }
  double center() const {
    return std::sqrt(static_cast<double>(first) * static_cast<double>(last + 1));
  }
  double density() const { return static_cast<double>(count) / width(); }
};

struct PowerLawFit {
  double breakpoint = 0;  // seconds
  double alpha1 = 0;      // density ~ gap^-alpha below the breakpoint
  double alpha2 = 0;      // and above it
  double intercept1 = 0;  // log10 density at gap = 1 s
  double intercept2 = 0;
  double sse = 0;          // weighted squared residual in log10 units
  bool segmented = false;  // false: one line explains the data, alpha1 == alpha2
  std::vector<GapBin> bins;

  /// Fitted density (counts per second) at `gap`.
  double value_at(double gap) const {
    const bool low = gap < breakpoint;
    const double a = low ? alpha1 : alpha2;
    const double c = low ? intercept1 : intercept2;
    return std::pow(10.0, c - a * std::log10(gap));
  }
};

struct PowerLawFitOptions {
  std::size_t bins = 50;
  std::size_t min_points_per_segment = 3;
  /// Minimum F statistic for accepting a breakpoint over a single line.
  double split_significance = 10.0;
  std::size_t min_distinct_gaps = 10;
};

namespace detail {

struct LineFit {
  double slope = 0, intercept = 0, sse = 0;
};

// Weighted least squares y = intercept + slope * x.
inline LineFit weighted_line(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>& w, std::size_t begin, std::size_t end) {
  double sw = 0, sx = 0, sy = 0;
  for (auto i = begin; i < end; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (auto i = begin; i < end; ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  for (auto i = begin; i < end; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    f.sse += w[i] * r * r;
  }
  return f;
}

}  // namespace detail

/// Logarithmic bins over [1 s, max gap]; zero gaps are ignored.
inline std::vector<GapBin> log_gap_histogram(const IntervalStats& stats, std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("bins must be positive");
  auto first_pos = std::upper_bound(stats.gaps.begin(), stats.gaps.end(), Timestamp{0});
  std::vector<GapBin> out;
  if (first_pos == stats.gaps.end()) return out;
  const auto min_gap = *first_pos;
  const auto max_gap = stats.gaps.back();
  const double top = static_cast<double>(max_gap);
  out.resize(bins);
  for (std::size_t j = 0; j < bins; ++j) {
    auto& b = out[j];
    b.low = std::pow(top, static_cast<double>(j) / static_cast<double>(bins));
    b.high = j + 1 == bins ? top : std::pow(top, static_cast<double>(j + 1) / static_cast<double>(bins));
    auto first = static_cast<std::int64_t>(std::ceil(b.low));
    auto last = j + 1 == bins ? max_gap : static_cast<std::int64_t>(std::ceil(b.high)) - 1;
    b.first = std::max<std::int64_t>(first, min_gap);
    b.last = std::min<std::int64_t>(last, max_gap);
    if (b.has_support()) {
      auto lo = std::lower_bound(first_pos, stats.gaps.end(), b.first);
      auto hi = std::upper_bound(lo, stats.gaps.end(), b.last);
      b.count = static_cast<std::size_t>(hi - lo);
    }
  }
  return out;
}

/// Fits two power laws to the log-log gap density, split at the bin edge
/// that minimizes the combined squared residual.
///
/// Points are (log10 centre, log10 density) of non-empty bins, weighted by
/// bin count. The split is kept only when its F statistic against a single
/// line exceeds `split_significance`; otherwise both segments carry the
/// single-line slope. Throws FitUndefinedError for fewer than
/// `min_distinct_gaps` distinct positive gaps.
inline PowerLawFit fit_piecewise_powerlaw(const IntervalStats& stats,
                                          const PowerLawFitOptions& opt = {}) {
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < stats.gaps.size(); ++i)
    if (stats.gaps[i] > 0 && (i == 0 || stats.gaps[i] != stats.gaps[i - 1])) ++distinct;
  if (distinct < opt.min_distinct_gaps)
    throw FitUndefinedError("power-law fit needs at least " +
                            std::to_string(opt.min_distinct_gaps) + " distinct positive gaps, got " +
                            std::to_string(distinct));

  PowerLawFit fit;
  fit.bins = log_gap_histogram(stats, opt.bins);

  std::vector<double> x, y, w;
  std::vector<std::size_t> bin_of;
  for (std::size_t j = 0; j < fit.bins.size(); ++j) {
    const auto& b = fit.bins[j];
    if (!b.has_support() || b.count == 0) continue;
    x.push_back(std::log10(b.center()));
    y.push_back(std::log10(b.density()));
    w.push_back(static_cast<double>(b.count));
    bin_of.push_back(j);
  }
  const std::size_t n = x.size();
  if (n < 2) throw FitUndefinedError("power-law fit needs at least two populated bins");

  const auto single = detail::weighted_line(x, y, w, 0, n);

  // Candidate split k: points [0, k) left of bin edge low(bin_of[k]).
  double best_sse = std::numeric_limits<double>::infinity();
  std::size_t best_k = 0;
  detail::LineFit best_left, best_right;
  const auto m = opt.min_points_per_segment;
  for (std::size_t k = std::max<std::size_t>(m, 1); k + m <= n; ++k) {
    auto left = detail::weighted_line(x, y, w, 0, k);
    auto right = detail::weighted_line(x, y, w, k, n);
    if (left.sse + right.sse < best_sse) {
      best_sse = left.sse + right.sse;
      best_k = k;
      best_left = left;
      best_right = right;
    }
  }

  bool split = false;
  if (best_k != 0 && n > 5) {
    const double gain = single.sse - best_sse;
    if (best_sse <= 0.0) {
      split = gain > 0.0;
    } else {
      const double f = (gain / 3.0) / (best_sse / static_cast<double>(n - 5));
      split = f > opt.split_significance;
    }
  }

  if (best_k != 0) {
    fit.breakpoint = fit.bins[bin_of[best_k]].low;
  } else {
    fit.breakpoint = std::sqrt(fit.bins[bin_of.front()].center() * fit.bins[bin_of.back()].center());
  }
  if (split) {
    fit.segmented = true;
    fit.alpha1 = -best_left.slope;
    fit.alpha2 = -best_right.slope;
    fit.intercept1 = best_left.intercept;
    fit.intercept2 = best_right.intercept;
    fit.sse = best_sse;
  } else {
    fit.alpha1 = fit.alpha2 = -single.slope;
    fit.intercept1 = fit.intercept2 = single.intercept;
    fit.sse = single.sse;
  }
  return fit;
}

/// `bin_low,bin_high,count,fit_value` rows for external plotting.
inline std::string histogram_csv(const PowerLawFit& fit) {
  std::string out = "bin_low,bin_high,count,fit_value\n";
  char buf[160];
  for (const auto& b : fit.bins) {
    const double mid = b.has_support() ? b.center() : std::sqrt(b.low * b.high);
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%zu,%.9g\n", b.low, b.high, b.count,
                  fit.value_at(mid));
    out += buf;
  }
  return out;
}

}  // namespace musichist

#endif  // MUSICHIST_SESSIONIZER_HPP
