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

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "mfr/chunker.hpp"
#include "mfr/io.hpp"
#include "mfr/prompt.hpp"
#include "mfr/weight_store.hpp"

namespace mfr {

struct GarmentRecord {
  std::string garment_id;
  std::string display_name;
  std::string garment_class;
  std::string identifier_token;
  std::string artifact;  // path relative to the data root: .mfrw or .manifest.json
  std::uint64_t size_bytes = 0;
  double interest_score = 0.0;
  bool downloaded = false;

  bool operator==(const GarmentRecord&) const = default;
};

inline json to_json(const GarmentRecord& r) {
  return {{"garment_id", r.garment_id},       {"display_name", r.display_name},
          {"garment_class", r.garment_class}, {"identifier_token", r.identifier_token},
          {"artifact", r.artifact},           {"size_bytes", r.size_bytes},
          {"interest_score", r.interest_score}, {"downloaded", r.downloaded}};
}

inline GarmentRecord garment_from_json(const json& j) {
  GarmentRecord r;
  r.garment_id = j.at("garment_id").get<std::string>();
  r.display_name = j.at("display_name").get<std::string>();
  r.garment_class = j.at("garment_class").get<std::string>();
  r.identifier_token = j.at("identifier_token").get<std::string>();
  r.artifact = j.at("artifact").get<std::string>();
  r.size_bytes = j.at("size_bytes").get<std::uint64_t>();
  r.interest_score = j.at("interest_score").get<double>();
  r.downloaded = j.at("downloaded").get<bool>();
  return r;
}

// Words an identifier token must not collide with.
inline const std::set<std::string>& token_stop_list() {
  static const std::set<std::string> words = {
      "a",      "an",     "and",   "are",    "as",     "at",    "be",    "black",  "blouse", "blue",
      "boot",   "by",     "coat",  "cotton", "dress",  "for",   "from",  "green",  "hat",    "he",
      "in",     "is",     "it",    "jacket", "jeans",  "man",   "of",    "on",     "or",     "pants",
      "person", "photo",  "red",   "shirt",  "shoe",   "skirt", "sks",   "sock",   "she",    "silk",
      "suit",   "sweater", "that", "the",    "this",   "to",    "top",   "tshirt", "white",  "with",
      "woman",  "wool",   "yellow"};
  return words;
}

inline void validate_token(const std::string& token) {
  require(!token.empty(), ErrorCode::invalid_argument, "identifier token must be non-empty");
  for (char c : token) {
    require((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'), ErrorCode::invalid_argument,
            "identifier token '" + token + "' must be lowercase alphanumeric");
  }
  require(!token_stop_list().contains(token), ErrorCode::invalid_argument,
          "identifier token '" + token + "' is a dictionary word");
}

/// Throws verification_failed (or the chunk error) unless the artifact at
/// `path` reads cleanly.
inline void verify_garment_artifact(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorCode::verification_failed, "artifact not found: " + path.string());
  if (is_manifest_path(path)) {
    load_chunked(path);
    return;
  }
  const auto report = verify_artifact(path);
  if (!report.empty()) fail(ErrorCode::verification_failed, "artifact " + path.string() + ": " + report.front().message);
}

/// Bytes on disk for a single artifact or a manifest plus its chunks.
inline std::uint64_t artifact_disk_bytes(const fs::path& path) {
  if (!is_manifest_path(path)) return fs::file_size(path);
  std::uint64_t total = 0;
  for (const auto& c : read_manifest(path).chunks) total += c.bytes;
  return total;
}

struct DownloadCandidate {
  std::string id;
  std::uint64_t size_bytes = 0;
  double score = 0.0;
};

inline constexpr std::uint64_t kPlanUnit = 1024;

/// 0/1 knapsack over sizes quantized to whole KiB (sizes rounded up, budget
/// rounded down, so every plan fits the exact budget). Maximizes total score;
/// ties prefer smaller total size, then the lexicographically smallest sorted
/// id list. Returns ids sorted ascending.
inline std::vector<std::string> plan_downloads(std::vector<DownloadCandidate> items, std::uint64_t budget_bytes) {
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  const std::size_t n = items.size();
  std::vector<std::uint64_t> units(n);
  std::uint64_t total_units = 0;
  for (std::size_t i = 0; i < n; ++i) {
    require(items[i].score >= 0.0, ErrorCode::invalid_argument, "interest scores must be non-negative");
    units[i] = (items[i].size_bytes + kPlanUnit - 1) / kPlanUnit;
    total_units += units[i];
  }
  const std::size_t cap = static_cast<std::size_t>(std::min(budget_bytes / kPlanUnit, total_units));

  // Suffix DP over items in id order: best[c] is the best subset of items
  // [i, n) within capacity c. Taking item i puts the smallest id first, so
  // on a (score, size) tie the take branch is lexicographically smaller
  // unless the skip branch is empty.
  std::vector<double> score(cap + 1, 0.0), next_score(cap + 1);
  std::vector<std::uint64_t> size(cap + 1, 0), next_size(cap + 1);
  std::vector<std::uint32_t> count(cap + 1, 0), next_count(cap + 1);
  std::vector<std::vector<bool>> take(n, std::vector<bool>(cap + 1, false));

  for (std::size_t ii = n; ii-- > 0;) {
    const auto& it = items[ii];
    for (std::size_t c = 0; c <= cap; ++c) {
      next_score[c] = score[c];
      next_size[c] = size[c];
      next_count[c] = count[c];
      if (units[ii] > c) continue;
      const std::size_t rest = c - units[ii];
      const double s = it.score + score[rest];
      const std::uint64_t z = it.size_bytes + size[rest];
      bool better;
      if (s != score[c]) {
        better = s > score[c];
      } else if (z != size[c]) {
        better = z < size[c];
      } else {
        better = count[c] > 0;
      }
      if (better) {
        next_score[c] = s;
        next_size[c] = z;
        next_count[c] = count[rest] + 1;
        take[ii][c] = true;
      }
    }
    std::swap(score, next_score);
    std::swap(size, next_size);
    std::swap(count, next_count);
  }

  std::vector<std::string> chosen;
  std::size_t c = cap;
  for (std::size_t i = 0; i < n; ++i) {
    if (take[i][c]) {
      chosen.push_back(items[i].id);
      c -= units[i];
    }
  }
  return chosen;
}

/// Garment catalog persisted as <root>/catalog.json. Mutations are
/// serialized; readers get consistent snapshots.
class Catalog {
 public:
  explicit Catalog(fs::path root) : root_(std::move(root)) {
    const fs::path file = root_ / "catalog.json";
    if (!fs::exists(file)) return;
    try {
      const json j = json::parse(read_text(file));
      for (const auto& g : j.at("garments")) {
        auto r = garment_from_json(g);
        records_[r.garment_id] = std::move(r);
      }
    } catch (const json::exception& e) {
      fail(ErrorCode::malformed_header, "malformed catalog.json: " + std::string(e.what()));
    }
  }

  const fs::path& root() const { return root_; }

  fs::path artifact_path(const GarmentRecord& r) const { return root_ / r.artifact; }

  void register_garment(GarmentRecord r) {
    require(!r.garment_id.empty(), ErrorCode::invalid_argument, "garment_id must be non-empty");
    require(!r.garment_class.empty(), ErrorCode::invalid_argument, "garment_class must be non-empty");
    require(r.interest_score >= 0.0, ErrorCode::invalid_argument, "interest_score must be non-negative");
    validate_token(r.identifier_token);
    if (r.display_name.empty()) r.display_name = r.garment_id;

    std::unique_lock lock(mutex_);
    require(!records_.contains(r.garment_id), ErrorCode::duplicate, "garment '" + r.garment_id + "' already exists");
    for (const auto& [id, other] : records_) {
      require(!(other.identifier_token == r.identifier_token && other.garment_class == r.garment_class),
              ErrorCode::duplicate,
              "token '" + r.identifier_token + "' is already bound to a " + r.garment_class + " (" + id + ")");
    }
    const fs::path path = artifact_path(r);
    verify_garment_artifact(path);
    if (r.size_bytes == 0) r.size_bytes = artifact_disk_bytes(path);
    records_[r.garment_id] = std::move(r);
    save_locked();
  }

  GarmentRecord get(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = records_.find(id);
    require(it != records_.end(), ErrorCode::unknown_garment, "unknown garment '" + id + "'");
    return it->second;
  }

  std::string prompt_for(const std::string& id) const {
    const auto r = get(id);
    return make_prompt(r.identifier_token, r.garment_class);
  }

  /// Ordered by display_name, then garment_id.
  std::vector<GarmentRecord> list_garments(const std::optional<std::string>& class_filter = std::nullopt) const {
    std::vector<GarmentRecord> out;
    {
      std::shared_lock lock(mutex_);
      for (const auto& [id, r] : records_) {
        if (!class_filter || r.garment_class == *class_filter) out.push_back(r);
      }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      return std::tie(a.display_name, a.garment_id) < std::tie(b.display_name, b.garment_id);
    });
    return out;
  }

  std::vector<std::string> plan_downloads(std::uint64_t budget_bytes) const {
    std::vector<DownloadCandidate> items;
    {
      std::shared_lock lock(mutex_);
      for (const auto& [id, r] : records_) {
        if (!r.downloaded) items.push_back({id, r.size_bytes, r.interest_score});
      }
    }
    return mfr::plan_downloads(std::move(items), budget_bytes);
  }

  /// Re-verifies the artifact already on disk, then flips the flag.
  void mark_downloaded(const std::string& id) {
    std::unique_lock lock(mutex_);
    auto it = records_.find(id);
    require(it != records_.end(), ErrorCode::unknown_garment, "unknown garment '" + id + "'");
    verify_garment_artifact(artifact_path(it->second));
    it->second.downloaded = true;
    save_locked();
  }

  void set_interest(const std::string& id, double score) {
    require(score >= 0.0 && std::isfinite(score), ErrorCode::invalid_argument, "interest score must be >= 0");
    std::unique_lock lock(mutex_);
    auto it = records_.find(id);
    require(it != records_.end(), ErrorCode::unknown_garment, "unknown garment '" + id + "'");
    it->second.interest_score = score;
    save_locked();
  }

 private:
  void save_locked() const {
    json garments = json::array();
    for (const auto& [id, r] : records_) garments.push_back(to_json(r));
    std::error_code ec;
    fs::create_directories(root_, ec);
    write_text_atomic(root_ / "catalog.json", canonical_json({{"garments", std::move(garments)}}));
  }

  fs::path root_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, GarmentRecord> records_;
};

}  // namespace mfr
