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

// Acceptance runner: one PASS/FAIL line per primary criterion, nonzero exit
// if any fails.

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "layout_checks.hpp"
#include "musichist/datagen.hpp"
#include "musichist/service_http.hpp"
#include "oracle.hpp"

using namespace musichist;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// 500 random datasets against the triple-loop oracle, exact arithmetic.
void relevance_oracle(Outcome& o) {
  const auto start = Clock::now();
  std::mt19937_64 rng(500);
  std::size_t pairs = 0;
  for (int r = 0; r < 500; ++r) {
    auto d = oracle::random_dataset(rng, 10, 20, 50);
    auto m = build_matrix(d.catalog, build_histories(oracle::to_events(d.events)));
    auto ref = oracle::relevance(d.events, d.tracks, 3600, {1, 4});
    std::size_t nonzero = 0;
    for (const auto& [key, want] : ref) {
      const auto& [a, b] = key;
      const bool same = m.direct(a, b) == want.direct && m.indirect(a, b) == want.indirect &&
                        m.combined(a, b) == want.combined && m.combined(b, a) == want.combined;
      o.require(same, "dataset " + std::to_string(r) + " pair " + a + "," + b);
      nonzero += want.combined > 0;
      ++pairs;
    }
    o.require(m.nonzero_count() == nonzero, "nonzero count in dataset " + std::to_string(r));
  }
  const double took = seconds_since(start);
  o.require(took < 60.0, "runtime " + std::to_string(took) + " s");
  o.detail << pairs << " pairs, " << took << " s";
}

// Goldens were derived from the oracle first, then frozen here.
void f1_goldens(Outcome& o) {
  auto ref = oracle::relevance(oracle::f1_events(), {"a", "b", "c"}, 3600, {1, 4});
  o.require(ref.at({"a", "b"}).direct == 2 && ref.at({"a", "b"}).indirect == 2 &&
                ref.at({"a", "b"}).combined == oracle::Q(5, 2),
            "oracle (a,b)");
  o.require(ref.at({"a", "c"}).direct == 1 && ref.at({"a", "c"}).indirect == 3 &&
                ref.at({"a", "c"}).combined == oracle::Q(7, 4),
            "oracle (a,c)");
  auto m = build_matrix(oracle::f1_snapshot());
  o.require(m.direct("a", "b") == 2 && m.indirect("a", "b") == 2 && m.combined("a", "b") == Rational(5, 2), "R(a,b)");
  o.require(m.direct("a", "c") == 1 && m.indirect("a", "c") == 3 && m.combined("a", "c") == Rational(7, 4), "R(a,c)");
  o.detail << "R(a,b)=" << to_decimal(m.combined("a", "b")) << " R(a,c)=" << to_decimal(m.combined("a", "c"));
}

// Partition and maximality on 10^4 gap sequences, a third of the gaps
// landing exactly on or next to the threshold.
void session_invariants(Outcome& o) {
  std::mt19937_64 rng(10000);
  const Timestamp t0 = 3600;
  std::size_t boundary_gaps = 0;
  for (int r = 0; r < 10000; ++r) {
    std::uniform_int_distribution<int> len(0, 30), pick(0, 5);
    std::uniform_int_distribution<Timestamp> any(0, 3 * t0);
    UserHistory h{"u", {}};
    Timestamp t = 0;
    std::size_t expected_sessions = 0;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      Timestamp g = 0;
      switch (pick(rng)) {
        case 0: g = t0; break;
        case 1: g = t0 - 1; break;
        case 2: g = t0 + 1; break;
        default: g = any(rng);
      }
      boundary_gaps += i > 0 && g == t0;
      if (i > 0) t += g;
      if (i == 0 || g >= t0) ++expected_sessions;
      h.events.push_back({"u", "t" + std::to_string(i), t});
    }
    auto sessions = segment_sessions(h, t0);
    const std::string tag = "sequence " + std::to_string(r);
    o.require(sessions.size() == expected_sessions, tag + " session count");
    std::vector<AccessEvent> flat;
    for (std::size_t s = 0; s < sessions.size(); ++s) {
      const auto& ses = sessions[s];
      o.require(!ses.events.empty() && ses.index == s, tag + " session shape");
      for (std::size_t k = 1; k < ses.events.size(); ++k)
        o.require(ses.events[k].timestamp - ses.events[k - 1].timestamp < t0, tag + " gap inside session");
      if (s > 0) o.require(ses.start - sessions[s - 1].end >= t0, tag + " sessions mergeable");
      flat.insert(flat.end(), ses.events.begin(), ses.events.end());
    }
    o.require(flat == h.events, tag + " partition");
  }
  o.detail << "10000 sequences, " << boundary_gaps << " gaps equal to t0";
}

// datagen -> histories -> gaps -> fit recovers the generating parameters.
void interval_loop_closure(Outcome& o) {
  GenSpec spec;
  spec.gaps.alpha1 = 1.2;
  spec.gaps.alpha2 = 2.5;
  spec.gaps.breakpoint = 3600;
  spec.n_users = 10;
  spec.events_per_user = 10001;
  auto data = generate(spec);
  auto stats = interval_stats(build_histories(data.events));
  o.require(stats.size() == 100000, "gap count " + std::to_string(stats.size()));
  auto fit = fit_piecewise_powerlaw(stats);
  const double bin_log_width = std::log(fit.bins.back().high / fit.bins.front().low) / static_cast<double>(fit.bins.size());
  const double bp_error = std::abs(std::log(fit.breakpoint / 3600.0));
  o.require(fit.segmented, "fit found no breakpoint");
  o.require(bp_error <= bin_log_width * (1 + 1e-9), "breakpoint " + std::to_string(fit.breakpoint));
  o.require(std::abs(fit.alpha1 - 1.2) <= 0.15, "alpha1 " + std::to_string(fit.alpha1));
  o.require(std::abs(fit.alpha2 - 2.5) <= 0.15, "alpha2 " + std::to_string(fit.alpha2));
  const double analytic = spec.gaps.cdf(3600);
  const double empirical = stats.fraction_below(3600);
  o.require(analytic >= 0.98, "analytic fraction " + std::to_string(analytic));
  o.require(std::abs(empirical - analytic) <= 0.01, "empirical fraction " + std::to_string(empirical));
  o.detail << "breakpoint " << fit.breakpoint << " (" << bp_error / bin_log_width << " bins off), alpha1 " << fit.alpha1
           << ", alpha2 " << fit.alpha2 << ", P(gap<3600) " << empirical << " vs " << analytic;
}

// 1000 random queries: oracle agreement, exclusions, ordering, scaling, ties.
void recommendation_properties(Outcome& o) {
  std::mt19937_64 rng(1000);
  int queries = 0, ties = 0;
  while (queries < 1000) {
    auto d = oracle::random_dataset(rng, 8, 15, 40);
    if (d.events.empty()) continue;
    auto snap = make_snapshot(d.catalog, build_histories(oracle::to_events(d.events)), 0);
    auto m = build_matrix(snap);
    auto ref = oracle::relevance(d.events, d.tracks, 3600, {1, 4});
    std::uniform_int_distribution<std::int64_t> factor(2, 9);
    auto scaled = m.scaled(factor(rng));
    std::uniform_int_distribution<std::size_t> pick_track(0, d.tracks.size() - 1);
    std::uniform_int_distribution<int> pick_k(0, 8), pick_mode(0, 2);
    for (const auto& [user, h] : snap.histories) {
      RecommendationQuery q{user, RecommendMode::General, {}, {}, pick_k(rng)};
      const int mode = pick_mode(rng);
      if (mode == 1) {
        q.mode = RecommendMode::TimeSlot;
        q.slot = LocalClock{}.hour_of_day(h.events[0].timestamp);
      } else if (mode == 2) {
        q.mode = RecommendMode::SingleTrack;
        q.seed_track = d.tracks[pick_track(rng)];
      }
      const auto seeds = seed_set(h, q);
      auto excluded = h.track_set();
      excluded.insert(seeds.begin(), seeds.end());
      auto rec = recommend(snap, m, q);
      auto want = oracle::top_k(ref, d.tracks, seeds, excluded, static_cast<std::size_t>(q.k));
      const std::string tag = "query " + std::to_string(queries);
      o.require(rec.items.size() == want.size(), tag + " length");
      for (std::size_t i = 0; i < std::min(rec.items.size(), want.size()); ++i) {
        o.require(rec.items[i].track_id == want[i].first && rec.items[i].score == want[i].second, tag + " oracle");
        o.require(!excluded.count(rec.items[i].track_id), tag + " exclusion");
        if (i > 0) {
          o.require(rec.items[i - 1].score >= rec.items[i].score, tag + " ordering");
          if (rec.items[i - 1].score == rec.items[i].score) {
            ++ties;
            o.require(rec.items[i - 1].track_id < rec.items[i].track_id, tag + " tie-break");
          }
        }
      }
      auto rs = recommend(snap, scaled, q);
      o.require(rs.items.size() == rec.items.size(), tag + " scaled length");
      for (std::size_t i = 0; i < std::min(rs.items.size(), rec.items.size()); ++i)
        o.require(rs.items[i].track_id == rec.items[i].track_id, tag + " scaling invariance");
      o.require(to_json(recommend(snap, m, q), snap.catalog).dump() == to_json(rec, snap.catalog).dump(),
                tag + " determinism");
      if (++queries == 1000) break;
    }
  }
  o.detail << queries << " queries, " << ties << " tied neighbours";
}

std::size_t sum_bean_counts(const layout::SceneGraph& s) {
  std::size_t n = 0;
  for (const auto& node : s.nodes)
    if (node.role == "pod" || node.role == "subpod") n += node.payload.at("bean_count").get<std::size_t>();
  return n;
}

void expect_clean(Outcome& o, const std::vector<std::string>& problems, const std::string& tag) {
  o.require(problems.empty(), tag + (problems.empty() ? "" : ": " + problems.front()));
}

// Invariants on 50 synthetic users for every plot kind.
void layout_invariants(Outcome& o) {
  GenSpec spec;
  spec.n_users = 50;
  spec.n_tracks = 150;
  spec.events_per_user = 60;
  spec.seed = 50;
  auto data = generate(spec);
  auto snap = make_snapshot(data.catalog, build_histories(data.events), 0);
  auto m = build_matrix(snap);
  auto styles = layout::encode_styles(snap.catalog);
  std::size_t scenes = 0;
  for (const auto& [u, h] : snap.histories) {
    const auto sessions = segment_sessions(h);
    const std::size_t n = h.events.size();
    auto run = [&](const std::string& kind, const std::function<layout::SceneGraph()>& make) {
      auto a = make();
      auto b = make();
      const std::string tag = u + "/" + kind;
      expect_clean(o, layout::check_scene(a), tag + " well-formed");
      expect_clean(o, checks::bezier_endpoints(a), tag + " bezier endpoints");
      o.require(layout::serialize(a) == layout::serialize(b), tag + " byte-identical JSON");
      ++scenes;
      return a;
    };
    auto bean = run("bean", [&] { return layout::layout_bean({{u, sessions}}, snap.catalog, styles); });
    expect_clean(o, checks::beans_inside_pods(bean), u + "/bean pods");
    o.require(sum_bean_counts(bean) == n && checks::count_role(bean, "bean") == n, u + "/bean bean conservation");
    auto unfold = run("bean_unfold", [&] { return layout::layout_bean_unfold(sessions[0], snap.catalog, styles); });
    o.require(sum_bean_counts(unfold) == sessions[0].size(), u + "/bean_unfold bean conservation");

    auto pie = run("transitional_pie", [&] { return layout::layout_transitional_pie(h, snap.catalog, m, styles); });
    expect_clean(o, checks::arc_sum(pie, "genre_arc"), u + "/pie arc sum");
    expect_clean(o, checks::angular_monotonicity(pie, snap.catalog), u + "/pie monotonicity");
    o.require(checks::count_role(pie, "track") == n, u + "/pie track conservation");

    auto inst = run("instrument", [&] { return layout::layout_instrument(h, snap.catalog, m, styles); });
    expect_clean(o, checks::arc_sum(inst, "year_bar"), u + "/instrument arc sum");
    expect_clean(o, checks::angular_monotonicity(inst, snap.catalog), u + "/instrument monotonicity");
    o.require(checks::count_role(inst, "track") == n, u + "/instrument track conservation");

    auto cal = run("calendar", [&] { return layout::layout_calendar(h, sessions, snap.catalog, styles); });
    expect_clean(o, checks::beans_inside_pods(cal), u + "/calendar pods");
    o.require(sum_bean_counts(cal) == n && checks::count_role(cal, "bean") == n, u + "/calendar bean conservation");
    auto line = run("calendar_pod", [&] { return layout::layout_calendar_pod(sessions[0], snap.catalog, m, styles); });
    o.require(checks::count_role(line, "bean") == sessions[0].size(), u + "/calendar_pod bean conservation");
  }
  o.detail << snap.histories.size() << " users, " << scenes << " scenes";
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "musichist-acc-XXXXXX").string();
    path = ::mkdtemp(tmpl.data());
  }
  ~TempDir() { fs::remove_all(path); }
};

// Determinism across independently loaded bundles, plus version/body
// consistency while the live server swaps snapshots underneath readers.
void api_determinism_and_atomicity(Outcome& o) {
  TempDir dir;
  GenSpec spec;
  spec.n_users = 6;
  spec.n_tracks = 40;
  spec.events_per_user = 50;
  auto d1 = generate(spec);
  spec.seed = 2;
  auto d2 = generate(spec);
  const auto p1 = (dir.path / "one.json").string();
  const auto p2 = (dir.path / "two.json").string();
  save_snapshot(make_snapshot(d1.catalog, build_histories(d1.events), 0), p1);
  save_snapshot(make_snapshot(d2.catalog, build_histories(d2.events), 0), p2);

  service::ServiceConfig c1, c2;
  c1.snapshot = p1;
  c2.snapshot = p2;
  auto first = service::load_bundle(c1);
  auto again = service::load_bundle(c1);
  auto second = service::load_bundle(c2);
  o.require(first->version == again->version && first->version != second->version, "bundle versions");

  std::vector<std::string> paths{"/api/users"};
  for (const auto& [u, h] : first->snapshot.histories) {
    for (const char* kind : {"bean", "transitional_pie", "instrument", "calendar"})
      paths.push_back("/api/users/" + u + "/plot/" + kind);
    paths.push_back("/api/users/" + u + "/recommend");
  }
  for (const auto& p : paths) {
    auto x = service::handle(first.get(), "GET", p, {});
    auto y = service::handle(again.get(), "GET", p, {});
    o.require(x.status == 200 && x.body == y.body && x.headers == y.headers, "determinism " + p);
  }

  // Expected body per version for a probe path present in both datasets.
  const std::string probe = "/api/users/" + first->snapshot.histories.begin()->first + "/plot/calendar";
  const std::map<std::string, std::string> expected{{first->version, service::handle(first.get(), "GET", probe, {}).body},
                                                    {second->version, service::handle(second.get(), "GET", probe, {}).body}};

  service::ServiceState state;
  state.swap(first);
  httplib::Server server;
  service::install_routes(server, state);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  std::atomic<bool> stop{false};
  std::atomic<int> swaps{0};
  std::thread swapper([&] {
    while (!stop) {
      state.swap(swaps++ % 2 ? first : second);
      std::this_thread::sleep_for(std::chrono::microseconds(200));
    }
  });
  std::atomic<int> ok{0}, bad{0};
  std::set<std::string> seen;
  std::mutex seen_mu;
  std::vector<std::thread> readers;
  for (int t = 0; t < 8; ++t)
    readers.emplace_back([&] {
      httplib::Client client("127.0.0.1", port);
      for (int i = 0; i < 50; ++i) {
        auto res = client.Get(probe);
        if (!res || res->status != 200) {
          ++bad;
          continue;
        }
        const auto v = res->get_header_value("X-Dataset-Version");
        auto it = expected.find(v);
        (it != expected.end() && it->second == res->body ? ok : bad)++;
        std::lock_guard lock(seen_mu);
        seen.insert(v);
      }
    });
  for (auto& r : readers) r.join();
  stop = true;
  swapper.join();
  server.stop();
  listener.join();
  o.require(bad == 0, std::to_string(bad.load()) + " torn or failed responses");
  o.detail << paths.size() << " paths deterministic; " << ok << " live responses consistent over " << swaps
           << " swaps, " << seen.size() << " versions observed";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"relevance matches brute-force oracle on 500 random datasets", relevance_oracle},
      {"fixture F1 golden relevance values", f1_goldens},
      {"session partition and maximality on 10^4 gap sequences", session_invariants},
      {"interval statistics loop closure at 10^5 gaps", interval_loop_closure},
      {"recommendation properties on 1000 random queries", recommendation_properties},
      {"layout invariants on 50 synthetic users per plot kind", layout_invariants},
      {"API determinism and snapshot atomicity", api_determinism_and_atomicity},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    const auto start = Clock::now();
    try {
      check(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << "  [" << o.detail.str() << "; " << seconds_since(start)
              << " s]" << std::endl;
    failed += !o.pass;
  }
  std::cout << (failed ? "FAILED " + std::to_string(failed) + " criteria" : std::string("ALL CRITERIA PASSED"))
            << std::endl;
  return failed ? 1 : 0;
}
