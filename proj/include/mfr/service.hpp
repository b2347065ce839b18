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

// Try-on session workflow: upload -> mask -> generate -> erase.
//
// Each session lives in <sessions_dir>/<id>/ as original.png, mask.png,
// result.png, eraser_<n>.png and meta.json. Requests on one session are
// serialized; different sessions proceed concurrently.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mfr/catalog.hpp"
#include "mfr/diffusion.hpp"
#include "mfr/image.hpp"
#include "mfr/io.hpp"
#include "mfr/prompt.hpp"
#include "mfr/toy_models.hpp"

namespace mfr {

struct ServiceOptions {
  int max_dim = 1024;
  std::chrono::seconds session_ttl = std::chrono::hours(24);
  /// Seconds since the epoch; injectable for expiry tests.
  std::function<std::int64_t()> clock = [] {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
};

inline bool is_session_id(const std::string& id) {
  if (id.size() != 32) return false;
  for (char c : id) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

inline std::string random_session_id() {
  static thread_local std::random_device rd;
  std::string id;
  static constexpr char hex[] = "0123456789abcdef";
  for (int i = 0; i < 4; ++i) {
    std::uint32_t w = rd();
    for (int j = 0; j < 8; ++j) {
      id.push_back(hex[w & 0xf]);
      w >>= 4;
    }
  }
  return id;
}

class TryOnService {
 public:
  TryOnService(Catalog& catalog, fs::path sessions_dir, ServiceOptions options = {})
      : catalog_(catalog), dir_(std::move(sessions_dir)), options_(std::move(options)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) fail(ErrorCode::io, "cannot create " + dir_.string() + ": " + ec.message());
  }

  Catalog& catalog() { return catalog_; }

  std::vector<GarmentRecord> list_garments(const std::optional<std::string>& class_filter) const {
    return catalog_.list_garments(class_filter);
  }

  void download_garment(const std::string& garment_id) { catalog_.mark_downloaded(garment_id); }

  void set_interest(const std::string& garment_id, double score) { catalog_.set_interest(garment_id, score); }

  std::string create_session(std::span<const std::uint8_t> png) {
    const PngDims dims = png_dims(png);
    require(dims.width <= options_.max_dim && dims.height <= options_.max_dim, ErrorCode::image_too_large,
            "image too large: " + std::to_string(dims.width) + "x" + std::to_string(dims.height) + " exceeds " +
                std::to_string(options_.max_dim) + "x" + std::to_string(options_.max_dim));
    const Image img = decode_png(png, 3);
    sweep_expired();

    std::string id;
    do {
      id = random_session_id();
    } while (fs::exists(dir_ / id));
    auto lock = lock_session(id);
    const fs::path sdir = dir_ / id;
    fs::create_directories(sdir);
    write_file_atomic(sdir / "original.png", encode_png(img));
    json meta;
    meta["session_id"] = id;
    meta["width"] = img.width;
    meta["height"] = img.height;
    meta["created"] = options_.clock();
    meta["last_access"] = options_.clock();
    meta["has_mask"] = false;
    meta["has_result"] = false;
    meta["eraser_history"] = json::array();
    meta["params"] = nullptr;
    meta["garment_id"] = nullptr;
    save_meta(id, meta);
    return id;
  }

  Bytes original_png(const std::string& id) { return read_member(id, "original.png", ErrorCode::unknown_session); }

  Bytes mask_png(const std::string& id) {
    return read_member(id, "mask.png", ErrorCode::no_mask, "no mask submitted for this session");
  }

  Bytes result_png(const std::string& id) {
    return read_member(id, "result.png", ErrorCode::no_result, "no result yet; call generate first");
  }

  void submit_mask(const std::string& id, std::span<const std::uint8_t> png) {
    auto lock = lock_session(id);
    json meta = open_session(id);
    const Image mask = decode_png(png, 1);
    check_dims(mask, meta, "mask");
    write_file_atomic(dir_ / id / "mask.png", encode_png(mask));
    meta["has_mask"] = true;
    save_meta(id, meta);
  }

  /// Runs the inpainting loop with the garment's toy model and stores the
  /// result. On any error the session is left as it was.
  Bytes run_generate(const std::string& id, const std::string& garment_id, const GenerationParams& params) {
    params.validate();
    auto lock = lock_session(id);
    json meta = open_session(id);
    require(meta.value("has_mask", false), ErrorCode::no_mask, "no mask submitted; submit a mask before generate");
    const GarmentRecord garment = catalog_.get(garment_id);
    require(garment.downloaded, ErrorCode::model_unavailable, "model not available; call download first");

    const fs::path sdir = dir_ / id;
    const Image original = decode_png(read_file(sdir / "original.png"), 3);
    const Image mask = decode_png(read_file(sdir / "mask.png"), 1);
    const auto model = denoiser_for(garment);
    const ToyDenoiser sized = model->resized(original.width, original.height);
    const Condition cond = encode_prompt(catalog_.prompt_for(garment_id));
    const Image result = inpaint_generate(original, mask, sized, cond, params);

    Bytes png = encode_png(result);
    write_file_atomic(sdir / "result.png", png);
    meta["has_result"] = true;
    meta["garment_id"] = garment_id;
    meta["params"] = {{"guidance", params.guidance}, {"steps", params.steps}, {"seed", params.seed}};
    save_meta(id, meta);
    return png;
  }

  Bytes apply_eraser(const std::string& id, std::span<const std::uint8_t> png) {
    auto lock = lock_session(id);
    json meta = open_session(id);
    require(meta.value("has_result", false), ErrorCode::no_result, "no result yet; call generate first");
    const Image eraser = decode_png(png, 1);
    check_dims(eraser, meta, "eraser mask");

    const fs::path sdir = dir_ / id;
    const Image original = decode_png(read_file(sdir / "original.png"), 3);
    const Image current = decode_png(read_file(sdir / "result.png"), 3);
    const Image blended = erase_blend(original, current, eraser);

    auto& history = meta["eraser_history"];
    const std::string name = "eraser_" + std::to_string(history.size()) + ".png";
    write_file_atomic(sdir / name, encode_png(eraser));
    Bytes out = encode_png(blended);
    write_file_atomic(sdir / "result.png", out);
    history.push_back(name);
    save_meta(id, meta);
    return out;
  }

  json session_info(const std::string& id) {
    auto lock = lock_session(id);
    return open_session(id);
  }

  /// Removes sessions idle for longer than the TTL.
  void sweep_expired() {
    std::error_code ec;
    if (!fs::exists(dir_, ec)) return;
    const std::int64_t now = options_.clock();
    for (const auto& entry : fs::directory_iterator(dir_, ec)) {
      const std::string id = entry.path().filename().string();
      if (!is_session_id(id)) continue;
      auto lock = lock_session(id);
      if (expired(id, now)) fs::remove_all(entry.path(), ec);
    }
  }

 private:
  std::unique_lock<std::mutex> lock_session(const std::string& id) {
    std::shared_ptr<std::mutex> m;
    {
      std::lock_guard guard(locks_mutex_);
      auto& slot = locks_[id];
      if (!slot) slot = std::make_shared<std::mutex>();
      m = slot;
    }
    // The map keeps the mutex alive for the service lifetime.
    return std::unique_lock<std::mutex>(*m);
  }

  bool expired(const std::string& id, std::int64_t now) const {
    try {
      const json meta = json::parse(read_text(dir_ / id / "meta.json"));
      return now - meta.at("last_access").get<std::int64_t>() > options_.session_ttl.count();
    } catch (const std::exception&) {
      return false;
    }
  }

  // Loads meta.json for a live session and refreshes its access time.
  json open_session(const std::string& id) {
    require(is_session_id(id) && fs::exists(dir_ / id / "meta.json"), ErrorCode::unknown_session,
            "unknown session '" + id + "'");
    const std::int64_t now = options_.clock();
    if (expired(id, now)) {
      std::error_code ec;
      fs::remove_all(dir_ / id, ec);
      fail(ErrorCode::unknown_session, "session '" + id + "' has expired");
    }
    json meta = json::parse(read_text(dir_ / id / "meta.json"));
    meta["last_access"] = now;
    return meta;
  }

  Bytes read_member(const std::string& id, const char* file, ErrorCode missing, const std::string& message = "") {
    auto lock = lock_session(id);
    json meta = open_session(id);
    save_meta(id, meta);
    const fs::path p = dir_ / id / file;
    require(fs::exists(p), missing, message.empty() ? std::string("missing ") + file : message);
    return read_file(p);
  }

  void save_meta(const std::string& id, const json& meta) {
    write_text_atomic(dir_ / id / "meta.json", canonical_json(meta));
  }

  static void check_dims(const Image& img, const json& meta, const char* what) {
    const int w = meta.at("width").get<int>(), h = meta.at("height").get<int>();
    require(img.width == w && img.height == h, ErrorCode::dim_mismatch,
            std::string(what) + " is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                " but the session image is " + std::to_string(w) + "x" + std::to_string(h));
  }

  std::shared_ptr<const ToyDenoiser> denoiser_for(const GarmentRecord& g) {
    std::lock_guard guard(models_mutex_);
    auto it = models_.find(g.garment_id);
    if (it != models_.end()) return it->second;
    auto model = std::make_shared<const ToyDenoiser>(load_toy_denoiser(catalog_.artifact_path(g)));
    models_[g.garment_id] = model;
    return model;
  }

  Catalog& catalog_;
  fs::path dir_;
  ServiceOptions options_;
  std::mutex locks_mutex_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;
  std::mutex models_mutex_;
  std::map<std::string, std::shared_ptr<const ToyDenoiser>> models_;
};

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::unknown_session:
    case ErrorCode::unknown_garment:
    case ErrorCode::no_result:
      return 404;
    case ErrorCode::no_mask:
    case ErrorCode::model_unavailable:
      return 409;
    case ErrorCode::image_too_large:
      return 413;
    case ErrorCode::invalid_image:
    case ErrorCode::dim_mismatch:
    case ErrorCode::invalid_argument:
      return 400;
    default:
      return 500;
  }
}

}  // namespace mfr
