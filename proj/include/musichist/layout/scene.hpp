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

#ifndef MUSICHIST_LAYOUT_SCENE_HPP
#define MUSICHIST_LAYOUT_SCENE_HPP

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace musichist::layout {

inline constexpr int kSceneVersion = 1;

enum class PlotKind { Bean, TransitionalPie, Instrument, Calendar };

inline const char* to_string(PlotKind k) {
  switch (k) {
    case PlotKind::Bean: return "bean";
    case PlotKind::TransitionalPie: return "transitional_pie";
    case PlotKind::Instrument: return "instrument";
    case PlotKind::Calendar: return "calendar";
  }
  return "bean";
}

inline std::optional<PlotKind> parse_plot_kind(std::string_view s) {
  if (s == "bean") return PlotKind::Bean;
  if (s == "transitional_pie") return PlotKind::TransitionalPie;
  if (s == "instrument") return PlotKind::Instrument;
  if (s == "calendar") return PlotKind::Calendar;
  return std::nullopt;
}

struct Point {
  double x = 0, y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Circle {
  Point center;
  double radius = 0;
};

/// Annular sector. Angles in radians, clockwise from 12 o'clock.
struct Arc {
  Point center;
  double inner_radius = 0, outer_radius = 0;
  double start_angle = 0, end_angle = 0;
};

struct Bar {
  double x = 0, y = 0, width = 0, height = 0;
};

/// Cubic Bezier curve.
struct Bezier {
  Point p0, p1, p2, p3;
};

struct Text {
  Point anchor;
  std::string text;
};

using Shape = std::variant<Circle, Arc, Bar, Bezier, Text>;

struct Style {
  std::optional<std::string> fill{};
  std::optional<std::string> stroke{};
  std::optional<std::string> stroke_to{};  // gradient end colour along a curve
  std::optional<double> stroke_width{};
  std::optional<double> gray{};  // 0 black .. 1 white
  std::optional<double> opacity{};
};

struct Node {
  std::string id;
  std::string role;
  Shape shape;
  Style style;
  nlohmann::json payload = nlohmann::json::object();
};

/// Follow-up request a client issues when the user triggers `action`.
/// `request` is {"method": "GET", "path": ..., "query": {...}} for server
/// round trips, or {"method": "LOCAL", ...} for client-side effects.
struct Interaction {
  std::string node_id;
  std::string action;
  nlohmann::json request;
};

struct SceneGraph {
  PlotKind plot_kind = PlotKind::Bean;
  double width = 0, height = 0;
  nlohmann::json header = nlohmann::json::object();
  std::vector<Node> nodes;
  std::vector<Interaction> interactions;

  const Node* find(const std::string& id) const {
    for (const auto& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }

  std::vector<const Node*> with_role(const std::string& role) const {
    std::vector<const Node*> out;
    for (const auto& n : nodes)
      if (n.role == role) out.push_back(&n);
    return out;
  }

  std::vector<const Interaction*> interactions_for(const std::string& node_id) const {
    std::vector<const Interaction*> out;
    for (const auto& i : interactions)
      if (i.node_id == node_id) out.push_back(&i);
    return out;
  }
};

inline nlohmann::json get_request(const std::string& path, nlohmann::json query = nlohmann::json::object()) {
  return {{"method", "GET"}, {"path", path}, {"query", std::move(query)}};
}

namespace detail {

inline nlohmann::json point_json(const Point& p) { return nlohmann::json::array({p.x, p.y}); }

struct GeometryJson {
  nlohmann::json operator()(const Circle& c) const {
    return {{"cx", c.center.x}, {"cy", c.center.y}, {"r", c.radius}};
  }
  nlohmann::json operator()(const Arc& a) const {
    return {{"cx", a.center.x},           {"cy", a.center.y},          {"inner_radius", a.inner_radius},
            {"outer_radius", a.outer_radius}, {"start_angle", a.start_angle}, {"end_angle", a.end_angle}};
  }
  nlohmann::json operator()(const Bar& b) const {
    return {{"x", b.x}, {"y", b.y}, {"width", b.width}, {"height", b.height}};
  }
  nlohmann::json operator()(const Bezier& b) const {
    return {{"p0", point_json(b.p0)}, {"p1", point_json(b.p1)}, {"p2", point_json(b.p2)},
            {"p3", point_json(b.p3)}};
  }
  nlohmann::json operator()(const Text& t) const {
    return {{"x", t.anchor.x}, {"y", t.anchor.y}, {"text", t.text}};
  }
};

inline const char* shape_name(const Shape& s) {
  static constexpr const char* kNames[] = {"circle", "arc", "bar", "bezier", "text"};
  return kNames[s.index()];
}

inline std::vector<double> coordinates(const Shape& s) {
  return std::visit(
      [](const auto& g) -> std::vector<double> {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Circle>) return {g.center.x, g.center.y, g.radius};
        if constexpr (std::is_same_v<T, Arc>)
          return {g.center.x, g.center.y, g.inner_radius, g.outer_radius, g.start_angle, g.end_angle};
        if constexpr (std::is_same_v<T, Bar>) return {g.x, g.y, g.width, g.height};
        if constexpr (std::is_same_v<T, Bezier>)
          return {g.p0.x, g.p0.y, g.p1.x, g.p1.y, g.p2.x, g.p2.y, g.p3.x, g.p3.y};
        if constexpr (std::is_same_v<T, Text>) return {g.anchor.x, g.anchor.y};
      },
      s);
}

}  // namespace detail

inline nlohmann::json to_json(const Node& n) {
  nlohmann::json style = nlohmann::json::object();
  if (n.style.fill) style["fill"] = *n.style.fill;
  if (n.style.stroke) style["stroke"] = *n.style.stroke;
  if (n.style.stroke_to) style["stroke_to"] = *n.style.stroke_to;
  if (n.style.stroke_width) style["stroke_width"] = *n.style.stroke_width;
  if (n.style.gray) style["gray"] = *n.style.gray;
  if (n.style.opacity) style["opacity"] = *n.style.opacity;
  return {{"id", n.id},
          {"role", n.role},
          {"shape", detail::shape_name(n.shape)},
          {"geometry", std::visit(detail::GeometryJson{}, n.shape)},
          {"style", std::move(style)},
          {"payload", n.payload}};
}

inline nlohmann::json to_json(const SceneGraph& scene) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : scene.nodes) nodes.push_back(to_json(n));
  nlohmann::json inter = nlohmann::json::array();
  for (const auto& i : scene.interactions)
    inter.push_back({{"node_id", i.node_id}, {"action", i.action}, {"request", i.request}});
  return {{"scene_version", kSceneVersion},
          {"plot_kind", to_string(scene.plot_kind)},
          {"canvas", {{"width", scene.width}, {"height", scene.height}}},
          {"header", scene.header},
          {"nodes", std::move(nodes)},
          {"interactions", std::move(inter)}};
}

/// Byte-stable serialization: sorted keys, compact, trailing LF.
inline std::string serialize(const SceneGraph& scene) { return to_json(scene).dump() + "\n"; }

/// Structural problems of a scene; empty when the scene is well formed.
inline std::vector<std::string> check_scene(const SceneGraph& scene) {
  std::vector<std::string> problems;
  if (!std::isfinite(scene.width) || !std::isfinite(scene.height))
    problems.push_back("canvas size is not finite");
  std::set<std::string> ids;
  for (const auto& n : scene.nodes) {
    if (!ids.insert(n.id).second) problems.push_back("duplicate node id " + n.id);
    for (double v : detail::coordinates(n.shape))
      if (!std::isfinite(v)) {
        problems.push_back("non-finite coordinate in node " + n.id);
        break;
      }
  }
  for (const auto& i : scene.interactions)
    if (!ids.count(i.node_id)) problems.push_back("interaction on missing node " + i.node_id);
  return problems;
}

}  // namespace musichist::layout

#endif  // MUSICHIST_LAYOUT_SCENE_HPP
