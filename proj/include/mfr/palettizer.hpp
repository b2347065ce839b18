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
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "mfr/io.hpp"
#include "mfr/kmeans.hpp"
#include "mfr/tensor.hpp"
#include "mfr/weight_store.hpp"

namespace mfr {

enum class Strategy { exact_dp, lloyd };

/// Tensors up to this many elements always use the exact solver.
inline constexpr std::size_t kExactThreshold = 4096;

struct PalettizationConfig {
  int n_bits = 6;
  Strategy strategy = Strategy::lloyd;
  std::size_t min_elements = 4096;  // smaller tensors stay raw
  int lloyd_max_iters = 100;
  double lloyd_rel_tol = 1e-7;
  std::size_t sample_limit = 1'000'000;

  void validate() const {
    require(n_bits >= 1 && n_bits <= 8, ErrorCode::invalid_argument, "n_bits must be in [1,8]");
    require(min_elements >= 1, ErrorCode::invalid_argument, "min_elements must be >= 1");
    require(sample_limit >= (std::size_t{1} << n_bits), ErrorCode::invalid_argument,
            "sample_limit must be >= 2^n_bits");
    require(lloyd_max_iters >= 0, ErrorCode::invalid_argument, "lloyd_max_iters must be >= 0");
  }
};

struct PalettizeResult {
  ArtifactEntry entry;
  std::optional<double> cluster_cost;  // set when the tensor was palettized

  bool palettized() const { return std::holds_alternative<PalettizedTensor>(entry); }
};

inline Tensor depalettize_tensor(const PalettizedTensor& p) {
  const auto indices = p.indices();
  Tensor t{p.name, p.lut_dtype, p.shape, std::vector<float>(indices.size())};
  for (std::size_t i = 0; i < indices.size(); ++i) {
    require(indices[i] < p.lut.size(), ErrorCode::index_out_of_range,
            "tensor '" + p.name + "': index " + std::to_string(indices[i]) + " outside LUT");
    t.data[i] = p.lut[indices[i]];
  }
  return t;
}

inline Tensor to_dense(const ArtifactEntry& e) {
  if (const auto* t = std::get_if<Tensor>(&e)) return *t;
  return depalettize_tensor(std::get<PalettizedTensor>(e));
}

/// Clusters a tensor's values into at most 2^n_bits centroids. Tensors below
/// `min_elements` come back unchanged.
inline PalettizeResult palettize_tensor(const Tensor& t, const PalettizationConfig& config) {
  config.validate();
  const std::size_t n = t.numel();
  require(t.data.size() == n, ErrorCode::invalid_tensor, "tensor '" + t.name + "': data length does not match shape");
  require(all_finite(t.data), ErrorCode::non_finite, "tensor '" + t.name + "' contains a non-finite value");
  if (n < config.min_elements) return {t, std::nullopt};

  std::vector<double> values(t.data.begin(), t.data.end());
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t slots = std::size_t{1} << config.n_bits;
  const std::size_t k = std::min(slots, count_distinct_sorted(sorted));

  KMeansResult km;
  if (n <= kExactThreshold || config.strategy == Strategy::exact_dp) {
    km = kmeans_1d_exact(sorted, k);
  } else {
    km = lloyd_1d(values, k, {config.lloyd_max_iters, config.lloyd_rel_tol, config.sample_limit});
  }

  // Narrow centroids to the storage dtype; narrowing can merge neighbours.
  std::vector<float> lut;
  for (double c : km.centroids) lut.push_back(round_to_dtype(static_cast<float>(c), t.dtype));
  std::sort(lut.begin(), lut.end());
  lut.erase(std::unique(lut.begin(), lut.end()), lut.end());
  const std::vector<double> lut_d(lut.begin(), lut.end());

  std::vector<std::uint32_t> indices(n);
  for (std::size_t i = 0; i < n; ++i) {
    indices[i] = static_cast<std::uint32_t>(detail::nearest_centroid(lut_d, values[i]));
  }
  lut.resize(slots, lut.back());

  PalettizedTensor p;
  p.name = t.name;
  p.n_bits = config.n_bits;
  p.lut_dtype = t.dtype;
  p.lut = std::move(lut);
  p.shape = t.shape;
  p.packed_indices = pack_indices(indices, config.n_bits);
  return {std::move(p), km.cost};
}

struct SizeRow {
  std::string name;
  std::size_t raw_bytes = 0;
  std::size_t compressed_bytes = 0;
  std::optional<double> sse;
  std::optional<double> max_abs_err;
  bool palettized = false;
};

/// Byte accounting. `raw_bytes`, `compressed_bytes` and `reduction_percent`
/// cover tensor payloads only and equal the row sums; the *_file_bytes
/// fields are whole-file sizes including header and alignment padding.
struct SizeReport {
  std::vector<SizeRow> rows;
  std::size_t raw_bytes = 0;
  std::size_t compressed_bytes = 0;
  double reduction_percent = 0.0;
  std::size_t raw_file_bytes = 0;
  std::size_t compressed_file_bytes = 0;
  double file_reduction_percent = 0.0;

  void finalize() {
    raw_bytes = compressed_bytes = 0;
    for (const auto& r : rows) {
      raw_bytes += r.raw_bytes;
      compressed_bytes += r.compressed_bytes;
    }
    reduction_percent = percent_saved(raw_bytes, compressed_bytes);
    file_reduction_percent = percent_saved(raw_file_bytes, compressed_file_bytes);
  }

  static double percent_saved(std::size_t before, std::size_t after) {
    if (before == 0) return 0.0;
    return 100.0 * (1.0 - static_cast<double>(after) / static_cast<double>(before));
  }
};

inline json to_json(const SizeReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json j;
    j["name"] = row.name;
    j["raw_bytes"] = row.raw_bytes;
    j["compressed_bytes"] = row.compressed_bytes;
    j["palettized"] = row.palettized;
    j["sse"] = row.sse ? json(*row.sse) : json(nullptr);
    j["max_abs_err"] = row.max_abs_err ? json(*row.max_abs_err) : json(nullptr);
    rows.push_back(std::move(j));
  }
  json j;
  j["rows"] = std::move(rows);
  j["totals"] = {{"raw_bytes", r.raw_bytes},
                 {"compressed_bytes", r.compressed_bytes},
                 {"reduction_percent", r.reduction_percent},
                 {"raw_file_bytes", r.raw_file_bytes},
                 {"compressed_file_bytes", r.compressed_file_bytes},
                 {"file_reduction_percent", r.file_reduction_percent}};
  return j;
}

inline std::string format_table(const SizeReport& r) {
  std::size_t width = 6;
  for (const auto& row : r.rows) width = std::max(width, row.name.size());
  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-*s %12s %12s %8s %14s %12s\n", static_cast<int>(width), "tensor", "raw_bytes",
                "compressed", "saved%", "sse", "max_abs_err");
  out += buf;
  for (const auto& row : r.rows) {
    const std::string sse = row.sse ? std::to_string(*row.sse) : "-";
    const std::string mae = row.max_abs_err ? std::to_string(*row.max_abs_err) : "-";
    std::snprintf(buf, sizeof buf, "%-*s %12zu %12zu %7.1f%% %14s %12s\n", static_cast<int>(width), row.name.c_str(),
                  row.raw_bytes, row.compressed_bytes, SizeReport::percent_saved(row.raw_bytes, row.compressed_bytes),
                  sse.c_str(), mae.c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-*s %12zu %12zu %7.1f%%\n", static_cast<int>(width), "TOTAL (payload)", r.raw_bytes,
                r.compressed_bytes, r.reduction_percent);
  out += buf;
  std::snprintf(buf, sizeof buf, "%-*s %12zu %12zu %7.1f%%\n", static_cast<int>(width), "TOTAL (file)",
                r.raw_file_bytes, r.compressed_file_bytes, r.file_reduction_percent);
  out += buf;
  return out;
}

/// Palettizes every eligible tensor of an artifact, copies the rest, and
/// accounts for the bytes. Rows follow input order.
inline SizeReport compress_model(const fs::path& in_path, const fs::path& out_path, const PalettizationConfig& config) {
  config.validate();
  const Bytes input = read_file(in_path);
  const Artifact in = parse_artifact(input);

  SizeReport report;
  std::vector<ArtifactEntry> out_entries;
  out_entries.reserve(in.tensors.size());
  for (const auto& entry : in.tensors) {
    SizeRow row;
    row.name = entry_name(entry);
    row.raw_bytes = entry_payload_bytes(entry);
    if (const auto* t = std::get_if<Tensor>(&entry)) {
      auto res = palettize_tensor(*t, config);
      if (res.palettized()) {
        const Tensor back = depalettize_tensor(std::get<PalettizedTensor>(res.entry));
        double sse = 0.0, mae = 0.0;
        for (std::size_t i = 0; i < back.data.size(); ++i) {
          const double d = static_cast<double>(back.data[i]) - static_cast<double>(t->data[i]);
          sse += d * d;
          mae = std::max(mae, std::abs(d));
        }
        row.sse = sse;
        row.max_abs_err = mae;
        row.palettized = true;
      } else {
        row.sse = 0.0;
        row.max_abs_err = 0.0;
      }
      out_entries.push_back(std::move(res.entry));
    } else {
      row.palettized = true;  // already palettized: copied as is
      out_entries.push_back(entry);
    }
    row.compressed_bytes = entry_payload_bytes(out_entries.back());
    report.rows.push_back(std::move(row));
  }

  const Bytes output = serialize_artifact(out_entries, in.metadata);
  write_file_atomic(out_path, output);
  report.raw_file_bytes = input.size();
  report.compressed_file_bytes = output.size();
  report.finalize();
  return report;
}

/// Describes an existing artifact's storage against its dense equivalent.
inline SizeReport size_report(const fs::path& path) {
  const Bytes bytes = read_file(path);
  const Artifact a = parse_artifact(bytes);
  SizeReport report;
  std::vector<ArtifactEntry> dense;
  for (const auto& e : a.tensors) {
    SizeRow row;
    row.name = entry_name(e);
    row.compressed_bytes = entry_payload_bytes(e);
    if (const auto* p = std::get_if<PalettizedTensor>(&e)) {
      row.raw_bytes = p->numel() * dtype_size(p->lut_dtype);
      row.palettized = true;
    } else {
      row.raw_bytes = row.compressed_bytes;
    }
    dense.push_back(to_dense(e));
    report.rows.push_back(std::move(row));
  }
  report.raw_file_bytes = serialize_artifact(dense, a.metadata).size();
  report.compressed_file_bytes = bytes.size();
  report.finalize();
  return report;
}

}  // namespace mfr
