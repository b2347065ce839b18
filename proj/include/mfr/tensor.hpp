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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mfr/error.hpp"
#include "mfr/half.hpp"

namespace mfr {

enum class DType { f32, f16 };

constexpr std::size_t dtype_size(DType d) { return d == DType::f32 ? 4 : 2; }
constexpr std::string_view dtype_name(DType d) { return d == DType::f32 ? "f32" : "f16"; }

inline DType parse_dtype(std::string_view s) {
  if (s == "f32") return DType::f32;
  if (s == "f16") return DType::f16;
  fail(ErrorCode::invalid_tensor, "unknown dtype '" + std::string(s) + "'");
}

/// Narrows to what `dtype` can store; f16 values are kept widened in f32.
inline float round_to_dtype(float v, DType d) { return d == DType::f16 ? round_to_half(v) : v; }

using Shape = std::vector<std::int64_t>;

inline std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) {
    require(d > 0, ErrorCode::invalid_tensor, "shape dimensions must be positive");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

inline std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

/// Dense row-major tensor. f16 tensors hold their values widened to float.
struct Tensor {
  std::string name;
  DType dtype = DType::f32;
  Shape shape;
  std::vector<float> data;

  std::size_t numel() const { return element_count(shape); }
  std::size_t payload_bytes() const { return numel() * dtype_size(dtype); }

  bool operator==(const Tensor&) const = default;
};

inline Tensor make_tensor(std::string name, DType dtype, Shape shape, std::vector<float> data) {
  Tensor t{std::move(name), dtype, std::move(shape), std::move(data)};
  if (dtype == DType::f16) {
    for (auto& v : t.data) v = round_to_half(v);
  }
  return t;
}

inline std::size_t packed_size(std::size_t count, int n_bits) {
  return (count * static_cast<std::size_t>(n_bits) + 7) / 8;
}

// Index i occupies bits [i*n, i*n + n), counted from bit 0 of byte 0,
// least-significant bit first within each byte.
inline std::vector<std::uint8_t> pack_indices(std::span<const std::uint32_t> indices, int n_bits) {
  require(n_bits >= 1 && n_bits <= 8, ErrorCode::invalid_argument, "n_bits must be in [1,8]");
  std::vector<std::uint8_t> out(packed_size(indices.size(), n_bits), 0);
  const std::uint32_t limit = 1u << n_bits;
  std::size_t bit = 0;
  for (auto idx : indices) {
    require(idx < limit, ErrorCode::index_out_of_range, "index does not fit in n_bits");
    for (int b = 0; b < n_bits; ++b, ++bit) {
      if ((idx >> b) & 1u) out[bit >> 3] |= static_cast<std::uint8_t>(1u << (bit & 7));
    }
  }
  return out;
}

inline std::vector<std::uint32_t> unpack_indices(std::span<const std::uint8_t> packed, std::size_t count,
                                                 int n_bits) {
  require(n_bits >= 1 && n_bits <= 8, ErrorCode::invalid_argument, "n_bits must be in [1,8]");
  require(packed.size() >= packed_size(count, n_bits), ErrorCode::truncated, "packed index buffer too short");
  std::vector<std::uint32_t> out(count, 0);
  std::size_t bit = 0;
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t v = 0;
    for (int b = 0; b < n_bits; ++b, ++bit) {
      v |= static_cast<std::uint32_t>((packed[bit >> 3] >> (bit & 7)) & 1u) << b;
    }
    out[i] = v;
  }
  return out;
}

/// Bit-packed cluster indices plus a lookup table of exactly 2^n_bits
/// entries. Trailing LUT entries may repeat the last centroid as padding;
/// indices never point into that padding.
struct PalettizedTensor {
  std::string name;
  int n_bits = 6;
  DType lut_dtype = DType::f32;
  std::vector<float> lut;
  Shape shape;
  std::vector<std::uint8_t> packed_indices;

  std::size_t numel() const { return element_count(shape); }
  std::size_t lut_bytes() const { return lut.size() * dtype_size(lut_dtype); }
  std::size_t index_bytes() const { return packed_indices.size(); }
  std::size_t payload_bytes() const { return lut_bytes() + index_bytes(); }

  /// Number of LUT entries before the padding run starts.
  std::size_t used_entries() const {
    if (lut.empty()) return 0;
    std::size_t used = 1;
    while (used < lut.size() && lut[used] > lut[used - 1]) ++used;
    return used;
  }

  std::vector<std::uint32_t> indices() const { return unpack_indices(packed_indices, numel(), n_bits); }

  bool operator==(const PalettizedTensor&) const = default;
};

using ArtifactEntry = std::variant<Tensor, PalettizedTensor>;

inline const std::string& entry_name(const ArtifactEntry& e) {
  return std::visit([](const auto& t) -> const std::string& { return t.name; }, e);
}

inline std::size_t entry_payload_bytes(const ArtifactEntry& e) {
  return std::visit([](const auto& t) { return t.payload_bytes(); }, e);
}

inline const Shape& entry_shape(const ArtifactEntry& e) {
  return std::visit([](const auto& t) -> const Shape& { return t.shape; }, e);
}

inline bool all_finite(std::span<const float> values) {
  for (float v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace mfr
