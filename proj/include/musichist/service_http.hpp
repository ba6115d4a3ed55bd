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

#ifndef MUSICHIST_SERVICE_HTTP_HPP
#define MUSICHIST_SERVICE_HTTP_HPP

#include <memory>
#include <string>

#include <httplib.h>

#include "musichist/service.hpp"

namespace musichist::service {

/// Binds `handle` to an httplib server. The bundle is read once per request
/// so a concurrent ServiceState::swap cannot mix two versions.
inline void install_routes(httplib::Server& server, const ServiceState& state) {
  auto dispatch = [&state](const httplib::Request& req, httplib::Response& res) {
    const auto bundle = state.current();
    Query query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);  // first value wins
    const auto r = handle(bundle.get(), req.method, req.path, query);
    res.status = r.status;
    for (const auto& [k, v] : r.headers)
      if (k != "Content-Type") res.set_header(k, v);
    res.set_content(r.body, "application/json");
  };
  server.Get(R"(/.*)", dispatch);
  server.Post(R"(/.*)", dispatch);
  server.Put(R"(/.*)", dispatch);
  server.Delete(R"(/.*)", dispatch);
  server.Patch(R"(/.*)", dispatch);
  server.Options(R"(/.*)", [&state](const httplib::Request&, httplib::Response& res) {
    const auto bundle = state.current();
    res.status = 204;
    res.set_header("Access-Control-Allow-Origin", bundle ? bundle->config.cors_origin : std::string("*"));
    res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
}

}  // namespace musichist::service

#endif  // MUSICHIST_SERVICE_HTTP_HPP
