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

// MFRW container.
//
//   offset 0   "MFRW"
//   offset 4   u32 LE version (= 1)
//   offset 8   u64 LE header_len
//   offset 16  header_len bytes of canonical JSON
//   then       tensor blobs, each starting on a 16-byte boundary, in the
//              order the tensors are listed; zero bytes fill the gaps
//
// Header JSON: {"metadata":{...},"tensors":[{...},...]}. A raw tensor entry
// has {name, kind:"raw", dtype, shape, data_offset, data_len}; a palettized
// one adds {n_bits, lut_offset, lut_len} with its LUT blob preceding its
// index blob and `dtype` naming the LUT dtype. Offsets are absolute.

#include <bit>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mfr/error.hpp"
#include "mfr/io.hpp"
#include "mfr/tensor.hpp"

namespace mfr {

using Metadata = std::map<std::string, std::string>;

struct Artifact {
  std::vector<ArtifactEntry> tensors;
  Metadata metadata;

  const ArtifactEntry* find(std::string_view name) const {
    for (const auto& e : tensors) {
      if (entry_name(e) == name) return &e;
    }
    return nullptr;
  }
};

struct Violation {
  ErrorCode code;
  std::string tensor;  // empty for file-level problems
  std::string message;
};

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::size_t kPreambleSize = 16;
inline constexpr std::size_t kBlobAlignment = 16;

namespace detail {

constexpr std::size_t align_up(std::size_t n) { return (n + kBlobAlignment - 1) / kBlobAlignment * kBlobAlignment; }

inline void put_le(Bytes& out, std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t at, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(in[at + i]) << (8 * i);
  return v;
}

inline Bytes encode_values(std::span<const float> values, DType dtype) {
  Bytes out;
  out.reserve(values.size() * dtype_size(dtype));
  for (float v : values) {
    if (dtype == DType::f32) {
      put_le(out, std::bit_cast<std::uint32_t>(v), 4);
    } else {
      put_le(out, float_to_half(v), 2);
    }
  }
  return out;
}

inline std::vector<float> decode_values(std::span<const std::uint8_t> in, std::size_t count, DType dtype) {
  std::vector<float> out(count);
  const std::size_t w = dtype_size(dtype);
  for (std::size_t i = 0; i < count; ++i) {
    const auto raw = get_le(in, i * w, static_cast<int>(w));
    out[i] = dtype == DType::f32 ? std::bit_cast<float>(static_cast<std::uint32_t>(raw))
                                 : half_to_float(static_cast<std::uint16_t>(raw));
  }
  return out;
}

inline json shape_json(const Shape& s) {
  json a = json::array();
  for (auto d : s) a.push_back(d);
  return a;
}

struct Blob {
  Bytes bytes;
};

inline void validate_for_write(const ArtifactEntry& entry) {
  const std::string& name = entry_name(entry);
  require(!name.empty(), ErrorCode::invalid_tensor, "tensor name must be non-empty");
  require(!entry_shape(entry).empty(), ErrorCode::invalid_tensor, "tensor '" + name + "' has an empty shape");
  if (const auto* t = std::get_if<Tensor>(&entry)) {
    require(t->data.size() == t->numel(), ErrorCode::invalid_tensor,
            "tensor '" + name + "': data length does not match shape " + shape_string(t->shape));
    require(all_finite(t->data), ErrorCode::non_finite, "tensor '" + name + "' contains a non-finite value");
    for (float v : t->data) {
      require(std::isfinite(round_to_dtype(v, t->dtype)), ErrorCode::non_finite,
              "tensor '" + name + "' has a value that overflows " + std::string(dtype_name(t->dtype)));
    }
  } else {
    const auto& p = std::get<PalettizedTensor>(entry);
    require(p.n_bits >= 1 && p.n_bits <= 8, ErrorCode::invalid_tensor, "tensor '" + name + "': n_bits out of range");
    require(p.lut.size() == (std::size_t{1} << p.n_bits), ErrorCode::invalid_tensor,
            "tensor '" + name + "': LUT must have 2^n_bits entries");
    require(p.packed_indices.size() == packed_size(p.numel(), p.n_bits), ErrorCode::invalid_tensor,
            "tensor '" + name + "': packed index length does not match shape");
    require(all_finite(p.lut), ErrorCode::non_finite, "tensor '" + name + "' has a non-finite LUT value");
  }
}

}  // namespace detail

/// Serializes to the exact bytes `write_artifact` puts on disk.
inline Bytes serialize_artifact(std::span<const ArtifactEntry> tensors, const Metadata& metadata) {
  std::set<std::string> names;
  for (const auto& e : tensors) {
    detail::validate_for_write(e);
    require(names.insert(entry_name(e)).second, ErrorCode::duplicate_name,
            "duplicate tensor name '" + entry_name(e) + "'");
  }

  // Blob payloads in file order.
  std::vector<Bytes> blobs;
  for (const auto& e : tensors) {
    if (const auto* t = std::get_if<Tensor>(&e)) {
      blobs.push_back(detail::encode_values(t->data, t->dtype));
    } else {
      const auto& p = std::get<PalettizedTensor>(e);
      blobs.push_back(detail::encode_values(p.lut, p.lut_dtype));
      blobs.push_back(p.packed_indices);
    }
  }

  json meta = json::object();
  for (const auto& [k, v] : metadata) meta[k] = v;

  auto build_header = [&](std::size_t base, std::vector<std::size_t>& offsets) {
    offsets.clear();
    std::size_t cursor = base;
    for (const auto& b : blobs) {
      const std::size_t off = detail::align_up(cursor);
      offsets.push_back(off);
      cursor = off + b.size();
    }
    json entries = json::array();
    std::size_t bi = 0;
    for (const auto& e : tensors) {
      json j;
      j["name"] = entry_name(e);
      j["shape"] = detail::shape_json(entry_shape(e));
      if (const auto* t = std::get_if<Tensor>(&e)) {
        j["kind"] = "raw";
        j["dtype"] = dtype_name(t->dtype);
      } else {
        const auto& p = std::get<PalettizedTensor>(e);
        j["kind"] = "pal";
        j["dtype"] = dtype_name(p.lut_dtype);
        j["n_bits"] = p.n_bits;
        j["lut_offset"] = offsets[bi];
        j["lut_len"] = blobs[bi].size();
        ++bi;
      }
      j["data_offset"] = offsets[bi];
      j["data_len"] = blobs[bi].size();
      ++bi;
      entries.push_back(std::move(j));
    }
    json header;
    header["metadata"] = meta;
    header["tensors"] = std::move(entries);
    return canonical_json(header);
  };

  // Offsets are absolute, so the header length feeds back into itself;
  // grow the blob base until the header fits in front of it.
  std::vector<std::size_t> offsets;
  std::size_t base = 0;
  std::string header = build_header(base, offsets);
  for (;;) {
    const std::size_t needed = detail::align_up(kPreambleSize + header.size());
    if (needed <= base) break;
    base = needed;
    header = build_header(base, offsets);
  }

  Bytes out;
  out.reserve(base + (blobs.empty() ? 0 : offsets.back() + blobs.back().size() - base));
  out.insert(out.end(), {'M', 'F', 'R', 'W'});
  detail::put_le(out, kFormatVersion, 4);
  detail::put_le(out, header.size(), 8);
  out.insert(out.end(), header.begin(), header.end());
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    out.resize(offsets[i], 0);
    out.insert(out.end(), blobs[i].begin(), blobs[i].end());
  }
  return out;
}

inline void write_artifact(std::span<const ArtifactEntry> tensors, const Metadata& metadata, const fs::path& path) {
  const Bytes bytes = serialize_artifact(tensors, metadata);
  write_file_atomic(path, bytes);
}

inline void write_artifact(const std::vector<ArtifactEntry>& tensors, const Metadata& metadata, const fs::path& path) {
  write_artifact(std::span<const ArtifactEntry>(tensors), metadata, path);
}

namespace detail {

// Shared decoder for read (throw on first violation) and verify (collect).
class Decoder {
 public:
  Decoder(std::span<const std::uint8_t> bytes, std::vector<Violation>* sink) : bytes_(bytes), sink_(sink) {}

  std::optional<Artifact> run() {
    if (bytes_.size() < kPreambleSize) {
      report(ErrorCode::truncated, "", "truncated header: file has " + std::to_string(bytes_.size()) + " bytes");
      return std::nullopt;
    }
    if (std::memcmp(bytes_.data(), "MFRW", 4) != 0) {
      report(ErrorCode::bad_magic, "", "bad magic: expected \"MFRW\"");
      return std::nullopt;
    }
    const auto version = get_le(bytes_, 4, 4);
    if (version != kFormatVersion) {
      report(ErrorCode::unsupported_version, "", "unsupported version " + std::to_string(version));
      return std::nullopt;
    }
    const auto header_len = get_le(bytes_, 8, 8);
    if (header_len > bytes_.size() - kPreambleSize) {
      report(ErrorCode::truncated, "", "truncated header: header_len exceeds file size");
      return std::nullopt;
    }
    header_end_ = kPreambleSize + static_cast<std::size_t>(header_len);

    json header;
    try {
      header = json::parse(bytes_.begin() + kPreambleSize, bytes_.begin() + static_cast<std::ptrdiff_t>(header_end_));
    } catch (const json::exception& e) {
      report(ErrorCode::malformed_header, "", std::string("malformed header JSON: ") + e.what());
      return std::nullopt;
    }
    if (!header.is_object() || !header.contains("tensors") || !header["tensors"].is_array() ||
        (header.contains("metadata") && !header["metadata"].is_object())) {
      report(ErrorCode::malformed_header, "", "malformed header: expected {metadata, tensors}");
      return std::nullopt;
    }

    Artifact artifact;
    if (header.contains("metadata")) {
      for (const auto& [k, v] : header["metadata"].items()) {
        if (!v.is_string()) {
          report(ErrorCode::malformed_header, "", "metadata value for '" + k + "' is not a string");
          return std::nullopt;
        }
        artifact.metadata[k] = v.get<std::string>();
      }
    }

    cursor_ = header_end_;
    bool ok = true;
    for (const auto& entry : header["tensors"]) {
      try {
        auto decoded = decode_entry(entry);
        if (decoded) {
          artifact.tensors.push_back(std::move(*decoded));
        } else {
          ok = false;
        }
      } catch (const json::exception& e) {
        report(ErrorCode::malformed_header, "", std::string("malformed tensor entry: ") + e.what());
        return std::nullopt;
      }
      if (!ok && !sink_) return std::nullopt;
    }
    if (!ok) return std::nullopt;
    return artifact;
  }

 private:
  void report(ErrorCode code, const std::string& tensor, const std::string& message) {
    const std::string full = tensor.empty() ? message : "tensor '" + tensor + "': " + message;
    if (!sink_) fail(code, full);
    sink_->push_back({code, tensor, full});
  }

  // Checks a blob region and advances the cursor; returns false on violation.
  bool claim(const std::string& name, std::uint64_t offset, std::uint64_t len) {
    if (offset < header_end_) {
      report(ErrorCode::bad_region, name, "blob offset " + std::to_string(offset) + " lies inside the header");
      return false;
    }
    if (offset % kBlobAlignment != 0) {
      report(ErrorCode::bad_region, name, "blob offset " + std::to_string(offset) + " is not 16-byte aligned");
      return false;
    }
    if (offset < cursor_) {
      report(ErrorCode::bad_region, name, "blob at " + std::to_string(offset) + " overlaps or precedes the previous blob");
      return false;
    }
    if (offset > bytes_.size() || len > bytes_.size() - offset) {
      report(ErrorCode::truncated, name, "truncated: blob ends past end of file");
      return false;
    }
    cursor_ = static_cast<std::size_t>(offset + len);
    return true;
  }

  std::optional<ArtifactEntry> decode_entry(const json& e) {
    const std::string name = e.at("name").get<std::string>();
    if (name.empty()) {
      report(ErrorCode::invalid_tensor, name, "empty tensor name");
      return std::nullopt;
    }
    if (!names_.insert(name).second) {
      report(ErrorCode::duplicate_name, name, "duplicate tensor name");
      return std::nullopt;
    }
    const std::string kind = e.at("kind").get<std::string>();
    const std::string dtype_s = e.at("dtype").get<std::string>();
    if (dtype_s != "f32" && dtype_s != "f16") {
      report(ErrorCode::invalid_tensor, name, "unknown dtype '" + dtype_s + "'");
      return std::nullopt;
    }
    const DType dtype = parse_dtype(dtype_s);
    Shape shape;
    for (const auto& d : e.at("shape")) shape.push_back(d.get<std::int64_t>());
    bool shape_ok = !shape.empty();
    for (auto d : shape) shape_ok = shape_ok && d > 0;
    if (!shape_ok) {
      report(ErrorCode::invalid_tensor, name, "shape must be a non-empty list of positive integers");
      return std::nullopt;
    }
    const std::size_t count = element_count(shape);
    const auto data_offset = e.at("data_offset").get<std::uint64_t>();
    const auto data_len = e.at("data_len").get<std::uint64_t>();

    if (kind == "raw") {
      if (!claim(name, data_offset, data_len)) return std::nullopt;
      if (data_len != count * dtype_size(dtype)) {
        report(ErrorCode::invalid_tensor, name, "data_len does not match shape and dtype");
        return std::nullopt;
      }
      Tensor t{name, dtype, shape, decode_values(bytes_.subspan(data_offset, data_len), count, dtype)};
      if (!all_finite(t.data)) {
        report(ErrorCode::non_finite, name, "non-finite value");
        return std::nullopt;
      }
      return t;
    }
    if (kind != "pal") {
      report(ErrorCode::invalid_tensor, name, "unknown kind '" + kind + "'");
      return std::nullopt;
    }

    const int n_bits = e.at("n_bits").get<int>();
    if (n_bits < 1 || n_bits > 8) {
      report(ErrorCode::invalid_tensor, name, "n_bits " + std::to_string(n_bits) + " outside [1,8]");
      return std::nullopt;
    }
    const auto lut_offset = e.at("lut_offset").get<std::uint64_t>();
    const auto lut_len = e.at("lut_len").get<std::uint64_t>();
    const std::size_t lut_entries = std::size_t{1} << n_bits;
    if (!claim(name, lut_offset, lut_len) || !claim(name, data_offset, data_len)) return std::nullopt;
    if (lut_len != lut_entries * dtype_size(dtype)) {
      report(ErrorCode::invalid_tensor, name, "lut_len does not equal 2^n_bits entries");
      return std::nullopt;
    }
    if (data_len != packed_size(count, n_bits)) {
      report(ErrorCode::invalid_tensor, name, "data_len does not match packed index size");
      return std::nullopt;
    }
    PalettizedTensor p;
    p.name = name;
    p.n_bits = n_bits;
    p.lut_dtype = dtype;
    p.shape = shape;
    p.lut = decode_values(bytes_.subspan(lut_offset, lut_len), lut_entries, dtype);
    const auto packed = bytes_.subspan(data_offset, data_len);
    p.packed_indices.assign(packed.begin(), packed.end());

    if (!all_finite(p.lut)) {
      report(ErrorCode::non_finite, name, "non-finite LUT value");
      return std::nullopt;
    }
    for (std::size_t i = 1; i < p.lut.size(); ++i) {
      if (p.lut[i] < p.lut[i - 1]) {
        report(ErrorCode::invalid_tensor, name, "LUT is not sorted ascending");
        return std::nullopt;
      }
    }
    const std::size_t used = p.used_entries();
    const auto indices = p.indices();
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (indices[i] >= lut_entries || indices[i] >= used) {
        report(ErrorCode::index_out_of_range, name,
               "index " + std::to_string(indices[i]) + " at element " + std::to_string(i) +
                   " is out of range (palette has " + std::to_string(used) + " live entries of " +
                   std::to_string(lut_entries) + ")");
        return std::nullopt;
      }
    }
    return p;
  }

  std::span<const std::uint8_t> bytes_;
  std::vector<Violation>* sink_;
  std::size_t header_end_ = 0;
  std::size_t cursor_ = 0;
  std::set<std::string> names_;
};

}  // namespace detail

inline Artifact parse_artifact(std::span<const std::uint8_t> bytes) {
  detail::Decoder decoder(bytes, nullptr);
  return *decoder.run();
}

inline Artifact read_artifact(const fs::path& path) { return parse_artifact(read_file(path)); }

/// Empty iff `parse_artifact` would succeed. Never throws for content
/// problems; an unreadable path is reported as an io violation.
inline std::vector<Violation> verify_artifact_bytes(std::span<const std::uint8_t> bytes) {
  std::vector<Violation> report;
  detail::Decoder decoder(bytes, &report);
  decoder.run();
  return report;
}

inline std::vector<Violation> verify_artifact(const fs::path& path) {
  Bytes bytes;
  try {
    bytes = read_file(path);
  } catch (const Error& e) {
    return {{e.code(), "", e.what()}};
  }
  return verify_artifact_bytes(bytes);
}

}  // namespace mfr
