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

#ifndef MUSICHIST_LAYOUT_PLOTS_HPP
#define MUSICHIST_LAYOUT_PLOTS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "musichist/clock.hpp"
#include "musichist/layout/scene.hpp"
#include "musichist/layout/styles.hpp"
#include "musichist/rational_io.hpp"
#include "musichist/relevance.hpp"
#include "musichist/sessionizer.hpp"

namespace musichist::layout {

inline constexpr double kTwoPi = 2 * std::numbers::pi;

/// Every geometric constant of the four plots, in abstract canvas units.
struct LayoutConfig {
  Timestamp session_gap = kDefaultSessionGap;

  // Relevance curves.
  std::size_t max_relevance_curves = 200;
  double curve_width_min = 0.5;
  double curve_width_max = 4.0;
  double inner_control = 0.2;   // control points at this fraction of the radius
  double outer_control = 1.35;  // transition curves bulge to this fraction

  // Bean plot.
  double pod_radius_unit = 6.0;  // pod radius = unit * sqrt(bean count)
  double bean_radius = 6.0 / 2.25;
  double pod_gap = 4.0;
  double bean_axis_width = 1000.0;
  double bean_label_width = 80.0;
  double bean_row_gap = 12.0;
  double margin = 20.0;

  // Transitional pie / instrument.
  double disc_radius = 200.0;
  double genre_arc_thickness = 14.0;
  double track_point_radius = 3.0;
  double year_bar_gap = 3.0;
  double year_bar_length = 18.0;
  double neck_length = 320.0;
  double neck_thickness = 24.0;
  double headstock_length = 140.0;
  double headstock_thickness = 56.0;

  // Calendar.
  double cell = 40.0;
  double calendar_label_width = 90.0;
  double calendar_header_height = 30.0;
  double calendar_pod_unit = 4.0;
  double calendar_pod_max_radius = 18.0;
  double line_spacing = 24.0;
  double line_bean_radius = 8.0;

  std::size_t k_default = 10;
};

/// Sessions of one user, the input row of a bean plot.
struct UserSessions {
  std::string user_id;
  std::vector<Session> sessions;
};

namespace detail {

inline Point polar(Point c, double radius, double angle) {
  return {c.x + radius * std::sin(angle), c.y - radius * std::cos(angle)};
}

inline Point toward(Point c, Point p, double f) {
  return {c.x + f * (p.x - c.x), c.y + f * (p.y - c.y)};
}

/// Number of concentric rings (beyond the centre bean) for n beans when
/// ring k holds 6k beans.
inline std::size_t rings_needed(std::size_t n) {
  std::size_t rings = 0, capacity = 1;
  while (capacity < n) {
    ++rings;
    capacity += 6 * rings;
  }
  return rings;
}

/// Offsets of n beans of radius r packed on concentric rings, in
/// chronological order: the centre first, then each ring clockwise from
/// 12 o'clock.
inline std::vector<Point> ring_offsets(std::size_t n, double r) {
  std::vector<Point> out;
  if (n == 0) return out;
  out.push_back({0, 0});
  for (std::size_t ring = 1; out.size() < n; ++ring) {
    const std::size_t slots = 6 * ring;
    const std::size_t take = std::min(slots, n - out.size());
    for (std::size_t s = 0; s < take; ++s)
      out.push_back(polar({0, 0}, 2 * r * static_cast<double>(ring),
                          kTwoPi * static_cast<double>(s) / static_cast<double>(slots)));
  }
  return out;
}

inline nlohmann::json event_payload(const AccessEvent& e, const Catalog& catalog) {
  nlohmann::json j = {{"track_id", e.track_id}, {"timestamp", e.timestamp}};
  if (const auto* t = catalog.find(e.track_id)) {
    j["genre"] = t->genre;
    j["release_year"] = t->release_year;
  }
  return j;
}

inline std::string user_path(const std::string& user) { return "/api/users/" + user; }

/// Pod disc plus its beans. Returns the pod radius.
inline double add_pod(SceneGraph& scene, const std::string& pod_id, const std::string& bean_prefix,
                      Point center, const std::vector<AccessEvent>& events, const Catalog& catalog,
                      const StyleEncoding& styles, double pod_radius, double bean_radius,
                      nlohmann::json pod_payload, const std::string& role = "pod") {
  pod_payload["bean_count"] = events.size();
  scene.nodes.push_back({pod_id, role, Circle{center, pod_radius},
                         Style{.fill = "#f4f4f4", .stroke = "#9a9a9a", .stroke_width = 1.0},
                         std::move(pod_payload)});
  const auto offsets = ring_offsets(events.size(), bean_radius);
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto& e = events[k];
    const auto* t = catalog.find(e.track_id);
    scene.nodes.push_back({bean_prefix + std::to_string(k), "bean",
                           Circle{{center.x + offsets[k].x, center.y + offsets[k].y}, bean_radius},
                           Style{.fill = styles.genre_color(t ? t->genre : "")},
                           event_payload(e, catalog)});
  }
  return pod_radius;
}

struct CurvePair {
  std::size_t a, b;  // node positions (first access of each track)
  std::string track_a, track_b;
  Rational combined;
};

/// Distinct-track pairs with combined relevance > 0, strongest first,
/// truncated to `limit`. `first_node[track]` maps a track to its node index.
inline std::vector<CurvePair> top_pairs(const std::map<std::string, std::size_t>& first_node,
                                        const RelevanceMatrix& matrix, std::size_t limit) {
  std::vector<CurvePair> pairs;
  std::vector<std::pair<std::string, std::optional<RelevanceMatrix::Index>>> tracks;
  for (const auto& [t, n] : first_node) tracks.emplace_back(t, matrix.index_of(t));
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (!tracks[i].second) continue;
    for (std::size_t j = i + 1; j < tracks.size(); ++j) {
      if (!tracks[j].second) continue;
      auto c = matrix.combined(*tracks[i].second, *tracks[j].second);
      if (c > 0)
        pairs.push_back({first_node.at(tracks[i].first), first_node.at(tracks[j].first),
                         tracks[i].first, tracks[j].first, c});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& x, const auto& y) { return x.combined > y.combined; });
  if (pairs.size() > limit) pairs.resize(limit);
  return pairs;
}

inline std::vector<double> curve_widths(const std::vector<CurvePair>& pairs, const LayoutConfig& cfg) {
  std::vector<double> out;
  if (pairs.empty()) return out;
  double lo = to_double(pairs.back().combined), hi = to_double(pairs.front().combined);
  for (const auto& p : pairs) {
    const double v = to_double(p.combined);
    out.push_back(hi > lo ? cfg.curve_width_min + (v - lo) / (hi - lo) * (cfg.curve_width_max - cfg.curve_width_min)
                          : (cfg.curve_width_min + cfg.curve_width_max) / 2);
  }
  return out;
}

inline nlohmann::json curve_payload(const CurvePair& p, const std::string& from, const std::string& to) {
  return {{"track_a", p.track_a},
          {"track_b", p.track_b},
          {"combined", to_double(p.combined)},
          {"combined_exact", to_decimal(p.combined)},
          {"from", from},
          {"to", to}};
}

/// Inner relevance curves between existing track nodes of a disc.
inline void add_inner_curves(SceneGraph& scene, Point center, const std::vector<std::string>& track_node_ids,
                             const std::vector<Point>& track_points,
                             const std::map<std::string, std::size_t>& first_node,
                             const RelevanceMatrix& matrix, const LayoutConfig& cfg) {
  const auto pairs = top_pairs(first_node, matrix, cfg.max_relevance_curves);
  const auto widths = curve_widths(pairs, cfg);
  for (std::size_t n = 0; n < pairs.size(); ++n) {
    const auto& p = pairs[n];
    const Point a = track_points[p.a], b = track_points[p.b];
    scene.nodes.push_back({"rel:" + std::to_string(n), "relevance",
                           Bezier{a, toward(center, a, cfg.inner_control), toward(center, b, cfg.inner_control), b},
                           Style{.stroke = "#6b6b6b", .stroke_width = widths[n], .opacity = 0.6},
                           curve_payload(p, track_node_ids[p.a], track_node_ids[p.b])});
  }
}

}  // namespace detail

/// Bean plot: one row per user, one pod per session in chronological order
/// along a shared time axis. Pod radius = unit * sqrt(beans). Each pod
/// carries an `unfold` interaction requesting its subsession sub-scene.
inline SceneGraph layout_bean(const std::vector<UserSessions>& rows, const Catalog& catalog,
                              const StyleEncoding& styles, const LayoutConfig& cfg = {}) {
  SceneGraph scene;
  scene.plot_kind = PlotKind::Bean;

  Timestamp tmin = 0, tmax = 0;
  bool any = false;
  double max_radius = cfg.pod_radius_unit;
  for (const auto& row : rows)
    for (const auto& s : row.sessions) {
      tmin = any ? std::min(tmin, s.start) : s.start;
      tmax = any ? std::max(tmax, s.end) : s.end;
      any = true;
      max_radius = std::max(max_radius, cfg.pod_radius_unit * std::sqrt(static_cast<double>(s.size())));
    }
  const double row_height = 2 * max_radius + cfg.bean_row_gap;
  const double x0 = cfg.margin + cfg.bean_label_width;
  double right = x0;

  std::vector<std::string> users;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    users.push_back(row.user_id);
    const double cy = cfg.margin + row_height * (static_cast<double>(r) + 0.5);
    scene.nodes.push_back({"user:" + row.user_id, "row_label", Text{{cfg.margin, cy}, row.user_id},
                           Style{.fill = "#333333"}, {{"user_id", row.user_id}}});
    double prev_edge = x0 - cfg.pod_gap;
    for (const auto& s : row.sessions) {
      const double radius = cfg.pod_radius_unit * std::sqrt(static_cast<double>(s.size()));
      const double t = tmax > tmin ? static_cast<double>(s.start - tmin) / static_cast<double>(tmax - tmin) : 0.0;
      const double cx = std::max(x0 + radius + t * cfg.bean_axis_width, prev_edge + cfg.pod_gap + radius);
      prev_edge = cx + radius;
      right = std::max(right, prev_edge);
      const auto pod_id = "pod:" + row.user_id + ":" + std::to_string(s.index);
      detail::add_pod(scene, pod_id, "bean:" + row.user_id + ":" + std::to_string(s.index) + ":", {cx, cy},
                      s.events, catalog, styles, radius, cfg.bean_radius,
                      {{"user_id", row.user_id}, {"session", s.index}, {"start", s.start}, {"end", s.end}});
      scene.interactions.push_back(
          {pod_id, "unfold",
           get_request(detail::user_path(row.user_id) + "/plot/bean", {{"pod", std::to_string(s.index)}})});
    }
  }
  scene.width = right + cfg.margin;
  scene.height = 2 * cfg.margin + row_height * static_cast<double>(rows.size());
  scene.header = {{"users", users}, {"time_range", {tmin, tmax}}};
  return scene;
}

/// Unfolded pod: one smaller pod per single-genre subsession, in order.
inline SceneGraph layout_bean_unfold(const Session& session, const Catalog& catalog,
                                     const StyleEncoding& styles, const LayoutConfig& cfg = {}) {
  SceneGraph scene;
  scene.plot_kind = PlotKind::Bean;
  const auto subs = segment_subsessions(session, catalog);
  double max_radius = cfg.pod_radius_unit;
  for (const auto& sub : subs)
    max_radius = std::max(max_radius, cfg.pod_radius_unit * std::sqrt(static_cast<double>(sub.events.size())));
  const double cy = cfg.margin + max_radius;
  double x = cfg.margin;
  for (std::size_t j = 0; j < subs.size(); ++j) {
    const auto& sub = subs[j];
    const double radius = cfg.pod_radius_unit * std::sqrt(static_cast<double>(sub.events.size()));
    x += radius;
    const auto id = std::to_string(session.index) + ":" + std::to_string(j);
    detail::add_pod(scene, "subpod:" + id, "bean:" + id + ":", {x, cy}, sub.events, catalog, styles, radius,
                    cfg.bean_radius, {{"session", session.index}, {"subsession", j}, {"genre", sub.genre}},
                    "subpod");
    x += radius + cfg.pod_gap;
  }
  scene.width = x - cfg.pod_gap + cfg.margin;
  scene.height = 2 * (cfg.margin + max_radius);
  scene.header = {{"user_id", session.user_id}, {"unfolded_pod", session.index}, {"parent", "pod:" + session.user_id + ":" + std::to_string(session.index)}};
  return scene;
}

/// Transitional pie: genre arcs sized by track count in canonical genre
/// order clockwise from 12 o'clock, one point per download in chronological
/// order within its arc, inner relevance curves and outer transition curves.
inline SceneGraph layout_transitional_pie(const UserHistory& history, const Catalog& catalog,
                                          const RelevanceMatrix& matrix, const StyleEncoding& styles,
                                          const LayoutConfig& cfg = {}) {
  SceneGraph scene;
  scene.plot_kind = PlotKind::TransitionalPie;
  const double R = cfg.disc_radius;
  const double extent = R * cfg.outer_control + cfg.margin;
  const Point c{extent, extent};
  scene.width = scene.height = 2 * extent;
  scene.header = {{"user_id", history.user_id}, {"event_count", history.events.size()}};

  const auto n = history.events.size();
  if (n == 0) return scene;

  std::map<std::string, std::size_t> counts;
  for (const auto& e : history.events) ++counts[catalog.at(e.track_id).genre];
  std::vector<std::string> order;
  for (const auto& [g, k] : counts) order.push_back(g);
  std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    return std::pair(catalog.genre_rank(a), a) < std::pair(catalog.genre_rank(b), b);
  });

  std::map<std::string, std::pair<double, double>> span;  // genre -> [start, sweep]
  double angle = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& g = order[i];
    // The last arc closes the circle exactly.
    const double sweep = i + 1 == order.size() ? kTwoPi - angle
                                               : kTwoPi * static_cast<double>(counts[g]) / static_cast<double>(n);
    span[g] = {angle, sweep};
    scene.nodes.push_back({"genre:" + g, "genre_arc",
                           Arc{c, R - cfg.genre_arc_thickness, R, angle, angle + sweep},
                           Style{.fill = styles.genre_color(g)}, {{"genre", g}, {"count", counts[g]}}});
    angle += sweep;
  }

  std::vector<std::string> ids(n);
  std::vector<Point> points(n);
  std::map<std::string, std::size_t> seen_in_genre, first_node;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = history.events[i];
    const auto& g = catalog.at(e.track_id).genre;
    const auto [start, sweep] = span[g];
    const auto j = seen_in_genre[g]++;
    const double theta = start + sweep * (static_cast<double>(j) + 0.5) / static_cast<double>(counts[g]);
    ids[i] = "track:" + std::to_string(i);
    points[i] = detail::polar(c, R, theta);
    first_node.emplace(e.track_id, i);
    auto payload = detail::event_payload(e, catalog);
    payload["angle"] = theta;
    payload["order"] = i;
    scene.nodes.push_back({ids[i], "track", Circle{points[i], cfg.track_point_radius},
                           Style{.fill = styles.genre_color(g)}, std::move(payload)});
  }

  detail::add_inner_curves(scene, c, ids, points, first_node, matrix, cfg);

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto& ga = catalog.at(history.events[i].track_id).genre;
    const auto& gb = catalog.at(history.events[i + 1].track_id).genre;
    if (ga == gb) continue;
    const Point a = points[i], b = points[i + 1];
    scene.nodes.push_back({"transition:" + std::to_string(i), "transition",
                           Bezier{a, detail::toward(c, a, cfg.outer_control), detail::toward(c, b, cfg.outer_control), b},
                           Style{.stroke = styles.genre_color(ga), .stroke_to = styles.genre_color(gb), .stroke_width = 1.5},
                           {{"from", ids[i]}, {"to", ids[i + 1]}, {"from_genre", ga}, {"to_genre", gb}}});
  }
  return scene;
}

/// Instrument plot: a timeline disc (body) with release-year bars, inner
/// relevance curves, a genre distribution bar (neck) and a release-year
/// distribution bar (headstock). Clicking a track highlights its related
/// tracks.
inline SceneGraph layout_instrument(const UserHistory& history, const Catalog& catalog,
                                    const RelevanceMatrix& matrix, const StyleEncoding& styles,
                                    const LayoutConfig& cfg = {}) {
  SceneGraph scene;
  scene.plot_kind = PlotKind::Instrument;
  const double R = cfg.disc_radius;
  const double body_extent = R + cfg.year_bar_gap + cfg.year_bar_length;
  const Point c{cfg.margin + body_extent, cfg.margin + std::max(body_extent, cfg.headstock_thickness / 2)};
  scene.width = c.x + body_extent + cfg.neck_length + cfg.headstock_length + cfg.margin;
  scene.height = 2 * (c.y);
  scene.header = {{"user_id", history.user_id}, {"event_count", history.events.size()}};

  scene.nodes.push_back({"body", "body", Circle{c, R}, Style{.fill = "#fbf7ef", .stroke = "#b9a98c", .stroke_width = 1.0},
                         nlohmann::json::object()});
  const auto n = history.events.size();
  if (n == 0) return scene;

  std::vector<std::string> ids(n);
  std::vector<Point> points(n);
  std::map<std::string, std::size_t> first_node;
  std::map<std::string, std::vector<std::size_t>> nodes_of_track;
  const double slot = kTwoPi / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = history.events[i];
    const auto& t = catalog.at(e.track_id);
    const double theta = slot * (static_cast<double>(i) + 0.5);
    ids[i] = "track:" + std::to_string(i);
    points[i] = detail::polar(c, R, theta);
    first_node.emplace(e.track_id, i);
    nodes_of_track[e.track_id].push_back(i);
    auto payload = detail::event_payload(e, catalog);
    payload["angle"] = theta;
    payload["order"] = i;
    scene.nodes.push_back({ids[i], "track", Circle{points[i], cfg.track_point_radius},
                           Style{.fill = styles.genre_color(t.genre)}, std::move(payload)});
    const double start = slot * static_cast<double>(i);
    const double end = i + 1 == n ? kTwoPi : slot * static_cast<double>(i + 1);
    const double gray = styles.year_gray(t.release_year);
    scene.nodes.push_back({"year:" + std::to_string(i), "year_bar",
                           Arc{c, R + cfg.year_bar_gap, R + cfg.year_bar_gap + cfg.year_bar_length, start, end},
                           Style{.fill = StyleEncoding::gray_hex(gray), .gray = gray},
                           {{"release_year", t.release_year}, {"track", ids[i]}}});
  }

  detail::add_inner_curves(scene, c, ids, points, first_node, matrix, cfg);

  // Related tracks: any other distinct track in this history with R > 0.
  for (const auto& [track, own_nodes] : nodes_of_track) {
    const auto ti = matrix.index_of(track);
    std::vector<std::string> related_tracks;
    std::vector<std::size_t> related_nodes;
    for (const auto& [other, other_nodes] : nodes_of_track) {
      if (other == track || !ti) continue;
      const auto oi = matrix.index_of(other);
      if (oi && matrix.combined(*ti, *oi) > 0) {
        related_tracks.push_back(other);
        related_nodes.insert(related_nodes.end(), other_nodes.begin(), other_nodes.end());
      }
    }
    std::sort(related_nodes.begin(), related_nodes.end());
    nlohmann::json node_ids = nlohmann::json::array();
    for (auto k : related_nodes) node_ids.push_back(ids[k]);
    for (auto k : own_nodes) {
      scene.nodes[1 + 2 * k].payload["related_tracks"] = related_tracks;
      scene.interactions.push_back({ids[k], "highlight",
                                    {{"method", "LOCAL"}, {"highlight", node_ids}, {"related_tracks", related_tracks}}});
    }
  }

  // Neck: genre distribution.
  std::map<std::string, std::size_t> genre_counts;
  std::map<int, std::size_t> year_counts;
  for (const auto& e : history.events) {
    const auto& t = catalog.at(e.track_id);
    ++genre_counts[t.genre];
    ++year_counts[t.release_year];
  }
  std::vector<std::string> genres;
  for (const auto& [g, k] : genre_counts) genres.push_back(g);
  std::sort(genres.begin(), genres.end(), [&](const auto& a, const auto& b) {
    return std::pair(catalog.genre_rank(a), a) < std::pair(catalog.genre_rank(b), b);
  });
  double x = c.x + body_extent;
  for (const auto& g : genres) {
    const double len = cfg.neck_length * static_cast<double>(genre_counts[g]) / static_cast<double>(n);
    scene.nodes.push_back({"neck:" + g, "neck", Bar{x, c.y - cfg.neck_thickness / 2, len, cfg.neck_thickness},
                           Style{.fill = styles.genre_color(g)}, {{"genre", g}, {"count", genre_counts[g]}}});
    x += len;
  }
  // Headstock: release-year distribution, oldest first.
  x = c.x + body_extent + cfg.neck_length;
  for (const auto& [year, k] : year_counts) {
    const double len = cfg.headstock_length * static_cast<double>(k) / static_cast<double>(n);
    const double gray = styles.year_gray(year);
    scene.nodes.push_back({"headstock:" + std::to_string(year), "headstock",
                           Bar{x, c.y - cfg.headstock_thickness / 2, len, cfg.headstock_thickness},
                           Style{.fill = StyleEncoding::gray_hex(gray), .gray = gray},
                           {{"release_year", year}, {"count", k}}});
    x += len;
  }
  return scene;
}

/// Calendar plot: 24 hour columns by one row per local day with events.
/// Each session is a pod at (start hour, start day). Pods expand into a
/// line of beans; hour headers request time-slot recommendations and the
/// scene header carries the general-recommendation request.
inline SceneGraph layout_calendar(const UserHistory& history, const std::vector<Session>& sessions,
                                  const Catalog& catalog, const StyleEncoding& styles,
                                  const LocalClock& clock = {}, const LayoutConfig& cfg = {}) {
  SceneGraph scene;
  scene.plot_kind = PlotKind::Calendar;
  const auto base = detail::user_path(history.user_id);
  const auto k = std::to_string(cfg.k_default);

  std::vector<Timestamp> days;
  for (const auto& e : history.events) days.push_back(clock.day_index(e.timestamp));
  std::sort(days.begin(), days.end());
  days.erase(std::unique(days.begin(), days.end()), days.end());

  const double x0 = cfg.margin + cfg.calendar_label_width;
  const double y0 = cfg.margin + cfg.calendar_header_height;
  scene.width = x0 + 24 * cfg.cell + cfg.margin;
  scene.height = y0 + static_cast<double>(days.size()) * cfg.cell + cfg.margin;
  scene.header = {{"user_id", history.user_id},
                  {"utc_offset_minutes", clock.utc_offset_minutes},
                  {"general_recommendation", get_request(base + "/recommend", {{"mode", "general"}, {"k", k}})}};

  for (int h = 0; h < 24; ++h) {
    const auto id = "hour:" + std::to_string(h);
    char label[4];
    std::snprintf(label, sizeof label, "%02d", h);
    scene.nodes.push_back({id, "hour_label", Text{{x0 + (h + 0.5) * cfg.cell, cfg.margin + cfg.calendar_header_height / 2}, label},
                           Style{.fill = "#333333"}, {{"slot", h}}});
    scene.interactions.push_back({id, "recommend",
                                  get_request(base + "/recommend", {{"mode", "time_slot"}, {"slot", std::to_string(h)}, {"k", k}})});
  }
  for (std::size_t r = 0; r < days.size(); ++r) {
    const auto date = LocalClock::date_string(days[r]);
    scene.nodes.push_back({"day:" + date, "day_label", Text{{cfg.margin, y0 + (r + 0.5) * cfg.cell}, date},
                           Style{.fill = "#333333"}, {{"date", date}, {"row", r}}});
  }

  for (const auto& s : sessions) {
    const auto row = static_cast<std::size_t>(std::lower_bound(days.begin(), days.end(), clock.day_index(s.start)) - days.begin());
    const int col = clock.hour_of_day(s.start);
    const Point center{x0 + (col + 0.5) * cfg.cell, y0 + (static_cast<double>(row) + 0.5) * cfg.cell};
    const double radius = std::min(cfg.calendar_pod_unit * std::sqrt(static_cast<double>(s.size())), cfg.calendar_pod_max_radius);
    const double bean_r = radius / (2.0 * static_cast<double>(detail::rings_needed(s.size())) + 1.0) * 0.9;
    const auto pod_id = "pod:" + std::to_string(s.index);
    detail::add_pod(scene, pod_id, "bean:" + std::to_string(s.index) + ":", center, s.events, catalog, styles, radius,
                    bean_r,
                    {{"session", s.index}, {"start", s.start}, {"end", s.end}, {"hour", col},
                     {"date", LocalClock::date_string(days[row])}});
    scene.interactions.push_back({pod_id, "expand", get_request(base + "/plot/calendar", {{"pod", std::to_string(s.index)}})});
  }
  return scene;
}

/// Expanded calendar pod: beans on a line with hover details, relevance
/// arcs between them, click-to-recommend requests and the anchors where
/// returned recommendations are appended.
inline SceneGraph layout_calendar_pod(const Session& session, const Catalog& catalog,
                                      const RelevanceMatrix& matrix, const StyleEncoding& styles,
                                      const LocalClock& clock = {}, const LayoutConfig& cfg = {}) {
  SceneGraph scene;
  scene.plot_kind = PlotKind::Calendar;
  const auto base = detail::user_path(session.user_id);
  const auto n = session.events.size();
  const double y = cfg.margin + cfg.line_spacing * 0.5 * static_cast<double>(std::max<std::size_t>(n, 2));
  const double x0 = cfg.margin + cfg.line_bean_radius;

  std::vector<std::string> ids(n);
  std::vector<Point> points(n);
  std::map<std::string, std::size_t> first_node;
  std::map<std::string, std::vector<std::size_t>> nodes_of_track;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = session.events[i];
    ids[i] = "bean:" + std::to_string(session.index) + ":" + std::to_string(i);
    points[i] = {x0 + cfg.line_spacing * static_cast<double>(i), y};
    first_node.emplace(e.track_id, i);
    nodes_of_track[e.track_id].push_back(i);
    auto payload = detail::event_payload(e, catalog);
    char hhmm[8];
    const auto secs = clock.local_seconds(e.timestamp) - clock.day_index(e.timestamp) * kSecondsPerDay;
    std::snprintf(hhmm, sizeof hhmm, "%02d:%02d", static_cast<int>(secs / 3600), static_cast<int>(secs % 3600 / 60));
    payload["local_time"] = hhmm;
    const auto* t = catalog.find(e.track_id);
    scene.nodes.push_back({ids[i], "bean", Circle{points[i], cfg.line_bean_radius},
                           Style{.fill = styles.genre_color(t ? t->genre : "")}, std::move(payload)});
  }

  const auto pairs = detail::top_pairs(first_node, matrix, cfg.max_relevance_curves);
  const auto widths = detail::curve_widths(pairs, cfg);
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    const auto& p = pairs[m];
    const Point a = points[p.a], b = points[p.b];
    const double lift = 0.5 * std::abs(b.x - a.x);
    scene.nodes.push_back({"rel:" + std::to_string(m), "relevance",
                           Bezier{a, {a.x, a.y - lift}, {b.x, b.y - lift}, b},
                           Style{.stroke = "#6b6b6b", .stroke_width = widths[m], .opacity = 0.6},
                           detail::curve_payload(p, ids[p.a], ids[p.b])});
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = session.events[i];
    std::vector<std::string> related;
    const auto ti = matrix.index_of(e.track_id);
    for (const auto& [other, nodes] : nodes_of_track) {
      if (other == e.track_id || !ti) continue;
      const auto oi = matrix.index_of(other);
      if (oi && matrix.combined(*ti, *oi) > 0)
        for (auto k : nodes) related.push_back(ids[k]);
    }
    std::sort(related.begin(), related.end());
    scene.interactions.push_back({ids[i], "hover", {{"method", "LOCAL"}, {"tooltip", scene.nodes[i].payload}, {"highlight", related}}});
    scene.interactions.push_back({ids[i], "recommend",
                                  get_request(base + "/recommend", {{"mode", "single_track"},
                                                                   {"seed", e.track_id},
                                                                   {"k", std::to_string(cfg.k_default)}})});
  }

  // Recommendations land at the end of the line; the client appends them
  // at these anchors when a bean is clicked.
  const double slots_x = x0 + cfg.line_spacing * static_cast<double>(n);
  nlohmann::json slots = nlohmann::json::array();
  for (std::size_t m = 0; m < cfg.k_default; ++m)
    slots.push_back({slots_x + cfg.line_spacing * static_cast<double>(m), y});

  scene.width = slots_x + cfg.line_spacing * static_cast<double>(cfg.k_default) + cfg.margin;
  scene.height = 2 * y;
  scene.header = {{"user_id", session.user_id},
                  {"expanded_pod", session.index},
                  {"parent", "pod:" + std::to_string(session.index)},
                  {"bean_count", n},
                  {"recommendation_slots", std::move(slots)},
                  {"bean_radius", cfg.line_bean_radius}};
  return scene;
}

}  // namespace musichist::layout

#endif  // MUSICHIST_LAYOUT_PLOTS_HPP
