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

// musichist: batch preprocessing and the HTTP service.
//
// Exit codes: 0 success, 1 validation error (bad input data or arguments),
// 2 I/O error.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <ctime>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "musichist/datagen.hpp"
#include "musichist/ingest.hpp"
#include "musichist/layout/plots.hpp"
#include "musichist/recommender.hpp"
#include "musichist/relevance.hpp"
#include "musichist/sessionizer.hpp"
#include "musichist/service_http.hpp"

namespace mh = musichist;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kIo = 2;

std::atomic<bool> g_reload{false};
httplib::Server* g_server = nullptr;

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-")
    std::cout << text << std::flush;
  else
    mh::write_file_atomic(path, text);
}

mh::Rational lambda_arg(const std::string& s) {
  try {
    return mh::parse_rational(s);
  } catch (const std::invalid_argument& e) {
    throw mh::ValidationError(std::string("--lambda: ") + e.what());
  }
}

struct MatrixArgs {
  std::string snapshot;
  std::string matrix;
  mh::Timestamp t0 = 3600;
  std::string lambda = "1/4";
  std::string indirect = "as_written";

  void add_to(CLI::App* app) {
    app->add_option("--snapshot", snapshot, "Snapshot file")->required();
    app->add_option("--t0", t0, "Co-access window in seconds");
    app->add_option("--lambda", lambda, "Indirect weight, decimal or p/q");
  }

  mh::RelevanceConfig config() const {
    mh::RelevanceConfig c;
    c.t0 = t0;
    c.lambda = lambda_arg(lambda);
    if (indirect == "shared_neighbor")
      c.indirect_mode = mh::IndirectMode::SharedNeighbor;
    else if (indirect != "as_written")
      throw mh::ValidationError("--indirect must be as_written or shared_neighbor");
    if (c.t0 <= 0) throw mh::ValidationError("--t0 must be positive");
    if (c.lambda < 0) throw mh::ValidationError("--lambda must be non-negative");
    return c;
  }

  mh::RelevanceMatrix load(const mh::DatasetSnapshot& snap) const {
    auto c = config();
    if (!matrix.empty())
      return mh::parse_matrix_csv(mh::read_file(matrix), snap.catalog, c.lambda,
                                  static_cast<std::int64_t>(snap.histories.size()));
    return mh::build_matrix(snap, c);
  }
};

int run_ingest(const std::string& events, const std::string& catalog, const std::string& out,
               std::optional<mh::Timestamp> created_at) {
  auto cat = mh::parse_catalog_csv(mh::read_file(catalog));
  auto evs = mh::parse_events_csv(mh::read_file(events));
  auto report = mh::validate_dataset(cat, evs);
  for (const auto& f : report.findings)
    std::cerr << (f.is_error ? "error: " : "warning: ") << f.message << "\n";
  if (!report.ok()) {
    std::cerr << report.error_count() << " validation error(s); snapshot not written\n";
    return kValidation;
  }
  const auto ts = created_at.value_or(static_cast<mh::Timestamp>(std::time(nullptr)));
  auto snap = mh::make_snapshot(std::move(cat), mh::build_histories(report.accepted), ts);
  std::cout << mh::save_snapshot(snap, out) << "\n";
  return kOk;
}

// Histogram plus fitted density as CSV on `out`; the fit summary goes to
// standard error.
int run_stats(const std::string& snapshot, std::size_t bins, const std::string& out) {
  auto snap = mh::load_snapshot(snapshot);
  auto stats = mh::interval_stats(snap.histories);
  mh::PowerLawFitOptions opt;
  opt.bins = bins;
  mh::PowerLawFit fit;
  try {
    fit = mh::fit_piecewise_powerlaw(stats, opt);
  } catch (const mh::FitUndefinedError& e) {
    throw mh::ValidationError(e.what());
  }
  emit(mh::histogram_csv(fit), out);
  nlohmann::json summary = {{"gap_count", stats.size()},
                            {"fraction_below_3600", stats.fraction_below(3600)},
                            {"segmented", fit.segmented},
                            {"breakpoint", fit.breakpoint},
                            {"alpha1", fit.alpha1},
                            {"alpha2", fit.alpha2},
                            {"sse", fit.sse}};
  std::cerr << summary.dump() << "\n";
  return kOk;
}

// CLI11 does not read config files attached to subcommands, so the file is
// parsed here and each key fills the option of the same name unless the
// flag was already given on the command line.
void apply_config_file(CLI::App* sub, const std::string& path) {
  for (const auto& item : CLI::ConfigTOML().from_file(path)) {
    std::string name = item.name;
    std::replace(name.begin(), name.end(), '_', '-');
    auto* opt = sub->get_option_no_throw("--" + name);
    if (opt == nullptr || name == "config") throw mh::ValidationError("unknown config key '" + item.name + "'");
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    opt->run_callback();
  }
}

int run_serve(mh::service::ServiceConfig cfg) {
  mh::service::ServiceState state;
  state.swap(mh::service::load_bundle(cfg));
  httplib::Server server;
  mh::service::install_routes(server, state);
  g_server = &server;
  std::signal(SIGHUP, [](int) { g_reload = true; });
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });

  std::atomic<bool> done{false};
  std::thread reloader([&] {
    while (!done) {
      std::this_thread::sleep_for(std::chrono::milliseconds(200));
      if (!g_reload.exchange(false)) continue;
      try {
        state.swap(mh::service::load_bundle(cfg));
        std::cerr << "reloaded " << state.current()->version << "\n";
      } catch (const std::exception& e) {
        std::cerr << "reload failed, keeping current snapshot: " << e.what() << "\n";
      }
    }
  });
  const int port = cfg.port == 0 ? server.bind_to_any_port(cfg.host) : (server.bind_to_port(cfg.host, cfg.port) ? cfg.port : -1);
  if (port < 0) {
    done = true;
    reloader.join();
    std::cerr << "cannot listen on " << cfg.host << ":" << cfg.port << "\n";
    return kIo;
  }
  std::cerr << "serving " << state.current()->version << " on " << cfg.host << ":" << port << "\n";
  server.listen_after_bind();
  done = true;
  reloader.join();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Music listening history analytics"};
  app.require_subcommand(1);

  // ingest
  std::string events_path, catalog_path, out_path;
  std::optional<mh::Timestamp> created_at;
  auto* ingest = app.add_subcommand("ingest", "Validate CSV inputs and write a snapshot");
  ingest->add_option("--events", events_path, "Events CSV (user_id,track_id,timestamp)")->required();
  ingest->add_option("--catalog", catalog_path, "Catalog CSV (track_id,genre,release_year[,title])")->required();
  ingest->add_option("--out", out_path, "Snapshot output path")->required();
  ingest->add_option("--created-at", created_at, "Snapshot timestamp (default: now)");

  // relevance build
  MatrixArgs rel_args;
  std::string rel_out;
  auto* relevance = app.add_subcommand("relevance", "Collaborative relevance");
  relevance->require_subcommand(1);
  auto* rel_build = relevance->add_subcommand("build", "Compute the relevance matrix as CSV");
  rel_args.add_to(rel_build);
  rel_build->add_option("--indirect", rel_args.indirect, "as_written or shared_neighbor");
  rel_build->add_option("--out", rel_out, "Output CSV (default: stdout)");

  // stats intervals
  std::string stats_snapshot, stats_hist;
  std::size_t stats_bins = 50;
  auto* stats = app.add_subcommand("stats", "Dataset statistics");
  stats->require_subcommand(1);
  auto* intervals = stats->add_subcommand("intervals", "Inter-event gap distribution and power-law fit");
  intervals->add_option("--snapshot", stats_snapshot, "Snapshot file")->required();
  intervals->add_option("--bins", stats_bins, "Log-spaced histogram bins")->check(CLI::Range(2, 10000));
  intervals->add_option("--out", stats_hist, "Histogram CSV output (default: stdout)");

  // recommend
  MatrixArgs rec_args;
  std::string rec_user, rec_mode = "general", rec_seed;
  std::optional<int> rec_slot;
  int rec_k = 10, rec_offset = 0;
  bool rec_titles = false;
  auto* rec = app.add_subcommand("recommend", "Top-k recommendations for one user");
  rec_args.add_to(rec);
  rec->add_option("--matrix", rec_args.matrix, "Precomputed matrix CSV");
  rec->add_option("--user", rec_user, "User id")->required();
  rec->add_option("--mode", rec_mode, "general, time_slot or single_track");
  rec->add_option("--slot", rec_slot, "Hour of day for time_slot");
  rec->add_option("--seed", rec_seed, "Seed track for single_track");
  rec->add_option("-k", rec_k, "Number of results");
  rec->add_option("--utc-offset-minutes", rec_offset, "Local time offset for time slots");
  rec->add_flag("--expose-titles", rec_titles, "Include track titles");

  // plot
  MatrixArgs plot_args;
  std::string plot_user, plot_kind = "bean";
  std::optional<std::size_t> plot_pod;
  int plot_offset = 0;
  auto* plot = app.add_subcommand("plot", "Write one scene graph as JSON");
  plot_args.add_to(plot);
  plot->add_option("--matrix", plot_args.matrix, "Precomputed matrix CSV");
  plot->add_option("--user", plot_user, "User id")->required();
  plot->add_option("--kind", plot_kind, "bean, transitional_pie, instrument or calendar");
  plot->add_option("--pod", plot_pod, "Session index for unfolded/expanded pods");
  plot->add_option("--utc-offset-minutes", plot_offset, "Local time offset for the calendar");

  // serve
  mh::service::ServiceConfig serve_cfg;
  std::string serve_snapshot, serve_matrix, serve_lambda = "1/4";
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string serve_config;
  serve->add_option("--config", serve_config, "TOML-style key = value file; flags override it");
  serve->add_option("--snapshot", serve_snapshot, "Snapshot file");
  serve->add_option("--matrix", serve_matrix, "Precomputed matrix CSV");
  serve->add_option("--t0", serve_cfg.t0, "Co-access window in seconds");
  serve->add_option("--lambda", serve_lambda, "Indirect weight");
  serve->add_option("--k-default", serve_cfg.k_default, "Default k");
  serve->add_option("--utc-offset-minutes", serve_cfg.utc_offset_minutes, "Local time offset");
  serve->add_option("--host", serve_cfg.host, "Listen address");
  serve->add_option("--port", serve_cfg.port, "Listen port");
  serve->add_option("--cors-origin", serve_cfg.cors_origin, "Access-Control-Allow-Origin value");
  serve->add_flag("--expose-titles", serve_cfg.expose_titles, "Include track titles in responses");

  // datagen
  std::string gen_spec, gen_events, gen_catalog;
  auto* datagen = app.add_subcommand("datagen", "Generate a synthetic catalog and listening log");
  datagen->add_option("--spec", gen_spec, "GenSpec JSON")->required();
  datagen->add_option("--out-events", gen_events, "Events CSV output")->required();
  datagen->add_option("--out-catalog", gen_catalog, "Catalog CSV output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << e.what() << "\n";
    return kIo;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  try {
    if (*ingest) return run_ingest(events_path, catalog_path, out_path, created_at);

    if (*rel_build) {
      auto snap = mh::load_snapshot(rel_args.snapshot);
      emit(mh::matrix_to_csv(rel_args.load(snap)), rel_out);
      return kOk;
    }

    if (*intervals) return run_stats(stats_snapshot, stats_bins, stats_hist);

    if (*rec) {
      auto snap = mh::load_snapshot(rec_args.snapshot);
      auto matrix = rec_args.load(snap);
      auto mode = mh::parse_mode(rec_mode);
      if (!mode) throw mh::ValidationError("unknown mode " + rec_mode);
      mh::RecommendationQuery q{rec_user, *mode, rec_slot,
                                rec_seed.empty() ? std::nullopt : std::optional<std::string>(rec_seed), rec_k};
      auto result = mh::recommend(snap, matrix, q, {mh::LocalClock{rec_offset}, true});
      std::cout << mh::to_json(result, snap.catalog, rec_titles).dump(2) << "\n";
      return kOk;
    }

    if (*plot) {
      mh::service::ServiceConfig cfg;
      cfg.t0 = plot_args.t0;
      cfg.lambda = plot_args.config().lambda;
      cfg.utc_offset_minutes = plot_offset;
      auto snap = mh::load_snapshot(plot_args.snapshot);
      auto matrix = plot_args.load(snap);
      mh::service::Bundle bundle(std::move(snap), std::move(matrix), cfg);
      mh::service::Query q;
      if (plot_pod) q["pod"] = std::to_string(*plot_pod);
      auto r = mh::service::handle(&bundle, "GET", "/api/users/" + plot_user + "/plot/" + plot_kind, q);
      if (r.status != 200) {
        std::cerr << nlohmann::json::parse(r.body).at("error").get<std::string>() << "\n";
        return kValidation;
      }
      std::cout << r.body;
      return kOk;
    }

    if (*serve) {
      if (!serve_config.empty()) apply_config_file(serve, serve_config);
      if (serve_snapshot.empty()) throw mh::ValidationError("--snapshot is required (flag or config key)");
      serve_cfg.snapshot = serve_snapshot;
      if (!serve_matrix.empty()) serve_cfg.matrix = serve_matrix;
      serve_cfg.lambda = lambda_arg(serve_lambda);
      return run_serve(serve_cfg);
    }

    if (*datagen) {
      nlohmann::json spec_json;
      try {
        spec_json = nlohmann::json::parse(mh::read_file(gen_spec));
      } catch (const nlohmann::json::exception& e) {
        throw mh::ValidationError(std::string("spec is not valid JSON: ") + e.what());
      }
      mh::GeneratedData data;
      try {
        data = mh::generate(mh::genspec_from_json(spec_json));
      } catch (const nlohmann::json::exception& e) {
        throw mh::ValidationError(std::string("spec field error: ") + e.what());
      }
      mh::write_file_atomic(gen_catalog, mh::catalog_to_csv(data.catalog));
      mh::write_file_atomic(gen_events, mh::events_to_csv(data.events));
      std::cerr << data.catalog.size() << " tracks, " << data.events.size() << " events\n";
      return kOk;
    }
  } catch (const CLI::FileError& e) {
    std::cerr << e.what() << "\n";
    return kIo;
  } catch (const CLI::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kValidation;
  } catch (const mh::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const mh::CorruptionError& e) {
    std::cerr << "corrupt snapshot: " << e.what() << "\n";
    return kValidation;
  } catch (const mh::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kValidation;
  } catch (const std::runtime_error& e) {
    // Unknown user / track and empty seeds from the recommender.
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}
