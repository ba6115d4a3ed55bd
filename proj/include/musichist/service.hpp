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

#ifndef MUSICHIST_SERVICE_HPP
#define MUSICHIST_SERVICE_HPP

#include <charconv>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "musichist/ingest.hpp"
#include "musichist/layout/plots.hpp"
#include "musichist/recommender.hpp"
#include "musichist/relevance.hpp"
#include "musichist/sessionizer.hpp"

namespace musichist::service {

struct ServiceConfig {
  std::filesystem::path snapshot;
  std::optional<std::filesystem::path> matrix;  // built from the snapshot when absent
  Timestamp t0 = 3600;
  Rational lambda{1, 4};
  int k_default = 10;
  int utc_offset_minutes = 0;
  std::string host = "127.0.0.1";
  int port = 8080;
  bool expose_titles = false;
  std::string cors_origin = "*";

  void validate() const {
    if (t0 <= 0) throw ValidationError("t0 must be positive");
    if (lambda < 0) throw ValidationError("lambda must be non-negative");
    if (k_default < 1) throw ValidationError("k_default must be at least 1");
    if (port < 0 || port > 65535) throw ValidationError("port must be in [0, 65535]");
    if (utc_offset_minutes < -24 * 60 || utc_offset_minutes > 24 * 60)
      throw ValidationError("utc_offset_minutes must be within one day");
  }
};

/// Immutable unit of serving state. Every request binds to exactly one.
struct Bundle {
  DatasetSnapshot snapshot;
  RelevanceMatrix matrix;
  ServiceConfig config;
  layout::StyleEncoding styles;
  std::map<std::string, std::vector<Session>> sessions;
  std::string version;  // snapshot hash + ":" + matrix hash (12 hex each)

  Bundle(DatasetSnapshot snap, RelevanceMatrix m, ServiceConfig cfg)
      : snapshot(std::move(snap)), matrix(std::move(m)), config(std::move(cfg)) {
    styles = layout::encode_styles(snapshot.catalog);
    for (const auto& [u, h] : snapshot.histories) sessions.emplace(u, segment_sessions(h, config.t0));
    version = snapshot.content_hash.substr(0, 12) + ":" + sha256_hex(matrix_to_csv(matrix)).substr(0, 12);
  }

  layout::LayoutConfig layout_config() const {
    layout::LayoutConfig c;
    c.session_gap = config.t0;
    c.k_default = static_cast<std::size_t>(config.k_default);
    return c;
  }
  LocalClock clock() const { return {config.utc_offset_minutes}; }
};

inline std::shared_ptr<const Bundle> load_bundle(const ServiceConfig& config) {
  config.validate();
  auto snap = load_snapshot(config.snapshot);
  RelevanceMatrix m =
      config.matrix ? parse_matrix_csv(read_file(*config.matrix), snap.catalog, config.lambda,
                                       static_cast<std::int64_t>(snap.histories.size()))
                    : build_matrix(snap, RelevanceConfig{config.t0, config.lambda});
  return std::make_shared<const Bundle>(std::move(snap), std::move(m), config);
}

/// Holder of the current bundle. Readers take a reference-counted copy, so
/// a swap never tears an in-flight request.
class ServiceState {
 public:
  std::shared_ptr<const Bundle> current() const {
    std::lock_guard lock(mu_);
    return bundle_;
  }
  void swap(std::shared_ptr<const Bundle> next) {
    std::lock_guard lock(mu_);
    bundle_ = std::move(next);
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const Bundle> bundle_;
};

struct Response {
  int status = 200;
  std::string body;
  std::map<std::string, std::string> headers;
};

using Query = std::map<std::string, std::string>;

namespace detail {

inline Response json_response(int status, const nlohmann::json& body) {
  return {status, body.dump() + "\n", {{"Content-Type", "application/json"}}};
}

inline Response error(int status, const std::string& message) {
  return json_response(status, {{"error", message}, {"status", status}});
}

inline std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i <= path.size()) {
    auto j = path.find('/', i);
    if (j == std::string_view::npos) j = path.size();
    if (j > i) parts.emplace_back(path.substr(i, j - i));
    i = j + 1;
  }
  return parts;
}

inline std::optional<long long> parse_int(const std::string& s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i <= s.size()) {
    auto j = s.find(',', i);
    if (j == std::string::npos) j = s.size();
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

inline Response users(const Bundle& b) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [u, h] : b.snapshot.histories)
    arr.push_back({{"user_id", u}, {"event_count", h.events.size()}});
  return json_response(200, arr);
}

inline Response plot(const Bundle& b, const std::string& user, const std::string& kind_name, const Query& q) {
  auto hist = b.snapshot.histories.find(user);
  if (hist == b.snapshot.histories.end()) return error(404, "unknown user " + user);
  auto kind = layout::parse_plot_kind(kind_name);
  if (!kind) return error(400, "unknown plot kind " + kind_name);
  if (auto it = q.find("scene_version"); it != q.end() && it->second != std::to_string(layout::kSceneVersion))
    return error(400, "unsupported scene_version " + it->second);

  const auto cfg = b.layout_config();
  const auto& sessions = b.sessions.at(user);
  std::optional<std::size_t> pod;
  if (auto it = q.find("pod"); it != q.end()) {
    if (*kind != layout::PlotKind::Bean && *kind != layout::PlotKind::Calendar)
      return error(400, "pod is only valid for bean and calendar plots");
    auto v = parse_int(it->second);
    if (!v || *v < 0) return error(400, "pod must be a non-negative integer");
    if (static_cast<std::size_t>(*v) >= sessions.size()) return error(404, "no pod " + it->second + " for " + user);
    pod = static_cast<std::size_t>(*v);
  }
  if (q.count("compare") && *kind != layout::PlotKind::Bean)
    return error(400, "compare is only valid for bean plots");

  layout::SceneGraph scene;
  switch (*kind) {
    case layout::PlotKind::Bean:
      if (pod) {
        scene = layout::layout_bean_unfold(sessions[*pod], b.snapshot.catalog, b.styles, cfg);
      } else {
        std::vector<layout::UserSessions> rows{{user, sessions}};
        if (auto it = q.find("compare"); it != q.end())
          for (const auto& other : split_list(it->second)) {
            auto s = b.sessions.find(other);
            if (s == b.sessions.end()) return error(404, "unknown user " + other);
            if (other != user) rows.push_back({other, s->second});
          }
        scene = layout::layout_bean(rows, b.snapshot.catalog, b.styles, cfg);
      }
      break;
    case layout::PlotKind::TransitionalPie:
      scene = layout::layout_transitional_pie(hist->second, b.snapshot.catalog, b.matrix, b.styles, cfg);
      break;
    case layout::PlotKind::Instrument:
      scene = layout::layout_instrument(hist->second, b.snapshot.catalog, b.matrix, b.styles, cfg);
      break;
    case layout::PlotKind::Calendar:
      scene = pod ? layout::layout_calendar_pod(sessions[*pod], b.snapshot.catalog, b.matrix, b.styles, b.clock(), cfg)
                  : layout::layout_calendar(hist->second, sessions, b.snapshot.catalog, b.styles, b.clock(), cfg);
      break;
  }
  return {200, layout::serialize(scene), {{"Content-Type", "application/json"}}};
}

inline Response recommend(const Bundle& b, const std::string& user, const Query& q) {
  RecommendationQuery query;
  query.user_id = user;
  query.k = b.config.k_default;
  if (auto it = q.find("mode"); it != q.end()) {
    auto m = parse_mode(it->second);
    if (!m) return error(400, "unknown mode " + it->second);
    query.mode = *m;
  }
  if (auto it = q.find("slot"); it != q.end()) {
    auto v = parse_int(it->second);
    if (!v || *v < 0 || *v > 23) return error(400, "slot must be an integer in [0, 23]");
    query.slot = static_cast<int>(*v);
  }
  if (auto it = q.find("seed"); it != q.end()) query.seed_track = it->second;
  if (auto it = q.find("k"); it != q.end()) {
    auto v = parse_int(it->second);
    if (!v || *v < 0 || *v > 1'000'000) return error(400, "k must be a non-negative integer");
    query.k = static_cast<int>(*v);
  }
  try {
    auto rec = musichist::recommend(b.snapshot, b.matrix, query, {b.clock(), true});
    return json_response(200, to_json(rec, b.snapshot.catalog, b.config.expose_titles));
  } catch (const InvalidQueryError& e) {
    return error(400, e.what());
  } catch (const UnknownUserError& e) {
    return error(404, e.what());
  } catch (const UnknownTrackError& e) {
    return error(404, e.what());
  } catch (const EmptySeedError& e) {
    return error(422, e.what());
  }
}

}  // namespace detail

/// Routes one GET request against a bundle. Pure: equal (bundle, request)
/// pairs give byte-identical responses. A null bundle means nothing is
/// loaded yet.
inline Response handle(const Bundle* bundle, std::string_view method, std::string_view path, const Query& query) {
  Response r;
  const auto parts = detail::split_path(path);
  if (parts.empty() || parts[0] != "api") {
    r = detail::error(404, "no such endpoint");
  } else if (method != "GET") {
    r = detail::error(405, "only GET is supported");
  } else if (!bundle) {
    r = detail::error(503, "no snapshot loaded");
  } else if (parts.size() == 2 && parts[1] == "users") {
    r = detail::users(*bundle);
  } else if (parts.size() == 5 && parts[1] == "users" && parts[3] == "plot") {
    r = detail::plot(*bundle, parts[2], parts[4], query);
  } else if (parts.size() == 4 && parts[1] == "users" && parts[3] == "recommend") {
    r = detail::recommend(*bundle, parts[2], query);
  } else {
    r = detail::error(404, "no such endpoint");
  }
  if (bundle) {
    r.headers["X-Dataset-Version"] = bundle->version;
    r.headers["Access-Control-Allow-Origin"] = bundle->config.cors_origin;
  } else {
    r.headers["Access-Control-Allow-Origin"] = "*";
  }
  r.headers["Access-Control-Expose-Headers"] = "X-Dataset-Version";
  return r;
}

}  // namespace musichist::service

#endif  // MUSICHIST_SERVICE_HPP
