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
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mfr/io.hpp"
#include "mfr/weight_store.hpp"

namespace mfr {

/// Half-open range of tensor indices [begin, end).
struct ChunkRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const ChunkRange&) const = default;
};

namespace detail {

inline void check_plan_args(std::span<const std::uint64_t> sizes, std::size_t n_chunks) {
  require(n_chunks >= 1 && n_chunks <= sizes.size(), ErrorCode::invalid_argument,
          "n_chunks=" + std::to_string(n_chunks) + " out of range for " + std::to_string(sizes.size()) + " tensors");
  for (auto s : sizes) require(s > 0, ErrorCode::invalid_argument, "tensor sizes must be positive");
}

}  // namespace detail

/// Two-way split by a single prefix-sum scan: the first cut minimizing the
/// larger side.
inline std::vector<ChunkRange> split_plan_two(std::span<const std::uint64_t> sizes) {
  detail::check_plan_args(sizes, 2);
  std::uint64_t total = 0;
  for (auto s : sizes) total += s;
  std::uint64_t prefix = 0, best = std::numeric_limits<std::uint64_t>::max();
  std::size_t best_cut = 1;
  for (std::size_t cut = 1; cut < sizes.size(); ++cut) {
    prefix += sizes[cut - 1];
    const std::uint64_t worst = std::max(prefix, total - prefix);
    if (worst < best) {
      best = worst;
      best_cut = cut;
    }
  }
  return {{0, best_cut}, {best_cut, sizes.size()}};
}

/// Contiguous partition into `n_chunks` non-empty ranges minimizing the
/// largest chunk. Among optimal partitions the lexicographically smallest
/// sequence of cut positions is returned.
inline std::vector<ChunkRange> split_plan(std::span<const std::uint64_t> sizes, std::size_t n_chunks) {
  detail::check_plan_args(sizes, n_chunks);
  if (n_chunks == 1) return {{0, sizes.size()}};
  if (n_chunks == 2) return split_plan_two(sizes);

  const std::size_t n = sizes.size();
  std::vector<std::uint64_t> prefix(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + sizes[i];
  constexpr std::uint64_t inf = std::numeric_limits<std::uint64_t>::max();

  // suffix[c][i]: minimax of sizes[i..n) split into c non-empty chunks.
  std::vector<std::vector<std::uint64_t>> suffix(n_chunks + 1, std::vector<std::uint64_t>(n + 1, inf));
  suffix[0][n] = 0;
  for (std::size_t i = 0; i < n; ++i) suffix[1][i] = prefix[n] - prefix[i];
  for (std::size_t c = 2; c <= n_chunks; ++c) {
    for (std::size_t i = 0; i + c <= n; ++i) {
      std::uint64_t best = inf;
      for (std::size_t e = i + 1; e + (c - 1) <= n; ++e) {
        best = std::min(best, std::max(prefix[e] - prefix[i], suffix[c - 1][e]));
      }
      suffix[c][i] = best;
    }
  }

  const std::uint64_t optimum = suffix[n_chunks][0];
  std::vector<ChunkRange> ranges;
  std::size_t start = 0;
  for (std::size_t c = n_chunks; c >= 2; --c) {
    std::size_t e = start + 1;
    while (std::max(prefix[e] - prefix[start], suffix[c - 1][e]) > optimum) ++e;
    ranges.push_back({start, e});
    start = e;
  }
  ranges.push_back({start, n});
  return ranges;
}

struct ChunkEntry {
  std::string file;
  std::uint64_t bytes = 0;
  std::string sha256;
  std::string first_tensor;
  std::string last_tensor;
};

struct ChunkManifest {
  std::string model_id;
  std::size_t n_chunks = 0;
  std::vector<ChunkEntry> chunks;
};

inline json to_json(const ChunkManifest& m) {
  json chunks = json::array();
  for (const auto& c : m.chunks) {
    chunks.push_back({{"file", c.file},
                      {"bytes", c.bytes},
                      {"sha256", c.sha256},
                      {"first_tensor", c.first_tensor},
                      {"last_tensor", c.last_tensor}});
  }
  return {{"model_id", m.model_id}, {"n_chunks", m.n_chunks}, {"chunks", std::move(chunks)}};
}

inline ChunkManifest manifest_from_json(const json& j) {
  try {
    ChunkManifest m;
    m.model_id = j.at("model_id").get<std::string>();
    m.n_chunks = j.at("n_chunks").get<std::size_t>();
    for (const auto& c : j.at("chunks")) {
      m.chunks.push_back({c.at("file").get<std::string>(), c.at("bytes").get<std::uint64_t>(),
                          c.at("sha256").get<std::string>(), c.at("first_tensor").get<std::string>(),
                          c.at("last_tensor").get<std::string>()});
    }
    require(m.n_chunks == m.chunks.size() && m.n_chunks >= 1, ErrorCode::malformed_header,
            "manifest n_chunks does not match its chunk list");
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::malformed_header, std::string("malformed manifest: ") + e.what());
  }
}

inline std::string manifest_file_name(const std::string& model_id) { return model_id + ".manifest.json"; }

inline bool is_manifest_path(const fs::path& p) {
  const std::string s = p.filename().string();
  return s.size() > 14 && s.ends_with(".manifest.json");
}

/// Splits an artifact into `n_chunks` MFRW files balanced by payload bytes
/// and writes `<model_id>.manifest.json` next to them. Returns the manifest.
inline ChunkManifest write_chunks(const fs::path& in_path, const fs::path& out_dir, std::size_t n_chunks) {
  const Artifact a = read_artifact(in_path);
  std::vector<std::uint64_t> sizes;
  for (const auto& e : a.tensors) sizes.push_back(entry_payload_bytes(e));
  const auto plan = split_plan(sizes, n_chunks);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create " + out_dir.string() + ": " + ec.message());

  ChunkManifest m;
  auto it = a.metadata.find("model_id");
  m.model_id = it != a.metadata.end() && !it->second.empty() ? it->second : in_path.stem().string();
  m.n_chunks = plan.size();
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const std::span<const ArtifactEntry> part(a.tensors.data() + plan[i].begin, plan[i].end - plan[i].begin);
    const Bytes bytes = serialize_artifact(part, a.metadata);
    ChunkEntry c;
    c.file = m.model_id + ".chunk" + std::to_string(i) + ".mfrw";
    c.bytes = bytes.size();
    c.sha256 = sha256_hex(bytes);
    c.first_tensor = entry_name(part.front());
    c.last_tensor = entry_name(part.back());
    write_file_atomic(out_dir / c.file, bytes);
    m.chunks.push_back(std::move(c));
  }
  write_text_atomic(out_dir / manifest_file_name(m.model_id), canonical_json(to_json(m)));
  return m;
}

inline ChunkManifest read_manifest(const fs::path& manifest_path) {
  json j;
  try {
    j = json::parse(read_text(manifest_path));
  } catch (const json::exception& e) {
    fail(ErrorCode::malformed_header, "malformed manifest " + manifest_path.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

/// Checks every chunk's presence and digest without decoding tensors.
inline void verify_chunk_digests(const fs::path& manifest_path) {
  const ChunkManifest m = read_manifest(manifest_path);
  const fs::path dir = manifest_path.parent_path();
  for (const auto& c : m.chunks) {
    const fs::path p = dir / c.file;
    require(fs::exists(p), ErrorCode::missing_chunk, "missing chunk file " + c.file);
    const Bytes bytes = read_file(p);
    require(bytes.size() == c.bytes && sha256_hex(bytes) == c.sha256, ErrorCode::digest_mismatch,
            "digest mismatch for chunk " + c.file);
  }
}

/// Reassembles a chunked artifact. Refuses to load if any chunk is missing
/// or fails its digest.
inline Artifact load_chunked(const fs::path& manifest_path) {
  const ChunkManifest m = read_manifest(manifest_path);
  const fs::path dir = manifest_path.parent_path();
  Artifact out;
  for (std::size_t i = 0; i < m.chunks.size(); ++i) {
    const auto& c = m.chunks[i];
    const fs::path p = dir / c.file;
    require(fs::exists(p), ErrorCode::missing_chunk, "missing chunk file " + c.file);
    const Bytes bytes = read_file(p);
    require(bytes.size() == c.bytes && sha256_hex(bytes) == c.sha256, ErrorCode::digest_mismatch,
            "digest mismatch for chunk " + c.file);
    Artifact part = parse_artifact(bytes);
    require(!part.tensors.empty() && entry_name(part.tensors.front()) == c.first_tensor &&
                entry_name(part.tensors.back()) == c.last_tensor,
            ErrorCode::verification_failed, "chunk " + c.file + " does not hold the tensor range its manifest names");
    if (i == 0) out.metadata = part.metadata;
    for (auto& e : part.tensors) out.tensors.push_back(std::move(e));
  }
  return out;
}

/// Reads either a single artifact or a chunk manifest.
inline Artifact load_any(const fs::path& path) {
  return is_manifest_path(path) ? load_chunked(path) : read_artifact(path);
}

}  // namespace mfr
