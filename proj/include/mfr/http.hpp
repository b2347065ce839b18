/*
 * Copyright (c) 2026 The MFR Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <httplib.h>

#include <memory>
#include <optional>
#include <string>

#include "mfr/service.hpp"

namespace mfr {

namespace detail {

inline void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(canonical_json(body), "application/json");
}

inline void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, {{"error", std::string(code_name(code))}, {"message", message}}, http_status(code));
}

inline std::span<const std::uint8_t> body_bytes(const httplib::Request& req) {
  return {reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size()};
}

template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    send_error(res, e.code(), e.what());
  } catch (const json::exception& e) {
    send_error(res, ErrorCode::invalid_argument, std::string("bad JSON: ") + e.what());
  } catch (const std::exception& e) {
    send_error(res, ErrorCode::io, e.what());
  }
}

}  // namespace detail

/// Wires the try-on HTTP API onto `server`. Optional `static_dir` is served
/// at "/" for the browser front end.
inline void install_routes(httplib::Server& server, TryOnService& service,
                           const std::optional<fs::path>& static_dir = std::nullopt) {
  using httplib::Request;
  using httplib::Response;
  using detail::guarded;
  using detail::send_json;

  server.Get("/garments", [&service](const Request& req, Response& res) {
    guarded(res, [&] {
      std::optional<std::string> filter;
      if (req.has_param("class") && !req.get_param_value("class").empty()) filter = req.get_param_value("class");
      json out = json::array();
      for (const auto& g : service.list_garments(filter)) {
        out.push_back({{"garment_id", g.garment_id},
                       {"display_name", g.display_name},
                       {"garment_class", g.garment_class},
                       {"size_bytes", g.size_bytes},
                       {"downloaded", g.downloaded}});
      }
      send_json(res, out);
    });
  });

  server.Post(R"(/garments/([^/]+)/download)", [&service](const Request& req, Response& res) {
    guarded(res, [&] {
      service.download_garment(req.matches[1]);
      send_json(res, {{"downloaded", true}});
    });
  });

  server.Post(R"(/garments/([^/]+)/interest)", [&service](const Request& req, Response& res) {
    guarded(res, [&] {
      const json body = json::parse(req.body);
      require(body.is_object() && body.contains("interest_score") && body["interest_score"].is_number(),
              ErrorCode::invalid_argument, "interest needs {interest_score}");
      service.set_interest(req.matches[1], body["interest_score"].get<double>());
      send_json(res, {{"ok", true}});
    });
  });

  server.Post("/sessions", [&service](const Request& req, Response& res) {
    guarded(res, [&] { send_json(res, {{"session_id", service.create_session(detail::body_bytes(req))}}); });
  });

  auto png_getter = [&service](Bytes (TryOnService::*getter)(const std::string&)) {
    return [&service, getter](const Request& req, Response& res) {
      guarded(res, [&] {
        const Bytes png = (service.*getter)(req.matches[1]);
        res.set_content(std::string(png.begin(), png.end()), "image/png");
      });
    };
  };
  server.Get(R"(/sessions/([^/]+)/original)", png_getter(&TryOnService::original_png));
  server.Get(R"(/sessions/([^/]+)/mask)", png_getter(&TryOnService::mask_png));
  server.Get(R"(/sessions/([^/]+)/result)", png_getter(&TryOnService::result_png));

  server.Post(R"(/sessions/([^/]+)/mask)", [&service](const Request& req, Response& res) {
    guarded(res, [&] {
      service.submit_mask(req.matches[1], detail::body_bytes(req));
      send_json(res, {{"ok", true}});
    });
  });

  server.Post(R"(/sessions/([^/]+)/generate)", [&service](const Request& req, Response& res) {
    guarded(res, [&] {
      const json body = req.body.empty() ? json::object() : json::parse(req.body);
      require(body.is_object() && body.contains("garment_id") && body["garment_id"].is_string(),
              ErrorCode::invalid_argument, "generate needs {garment_id}");
      GenerationParams params;
      if (body.contains("steps")) params.steps = body["steps"].get<int>();
      if (body.contains("guidance")) params.guidance = body["guidance"].get<float>();
      if (body.contains("seed")) params.seed = body["seed"].get<std::uint64_t>();
      service.run_generate(req.matches[1], body["garment_id"].get<std::string>(), params);
      send_json(res, {{"ok", true}});
    });
  });

  server.Post(R"(/sessions/([^/]+)/erase)", [&service](const Request& req, Response& res) {
    guarded(res, [&] {
      service.apply_eraser(req.matches[1], detail::body_bytes(req));
      send_json(res, {{"ok", true}});
    });
  });

  if (static_dir) server.set_mount_point("/", static_dir->string());

  server.set_read_timeout(120, 0);
  server.set_write_timeout(120, 0);
  server.set_payload_max_length(64ull << 20);
}

}  // namespace mfr
