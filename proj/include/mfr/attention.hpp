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

// Scaled dot-product attention in two layouts.
//
// Baseline operates on (B, H, S, D). The split-einsum kernel views each
// operand as (B, H*D, 1, S), i.e. channels-major with the sequence on the
// last axis, and works head chunk by head chunk: scores are formed by
// accumulating rank-1 updates over the channel axis, so no transposed copy
// of K is ever materialized.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mfr/error.hpp"
#include "mfr/io.hpp"
#include "mfr/rng.hpp"
#include "mfr/tensor.hpp"

namespace mfr {

struct AttentionShape {
  std::size_t batch = 1, heads = 1, seq = 1, head_dim = 1;

  std::size_t numel() const { return batch * heads * seq * head_dim; }
  Shape as_shape() const {
    return {static_cast<std::int64_t>(batch), static_cast<std::int64_t>(heads), static_cast<std::int64_t>(seq),
            static_cast<std::int64_t>(head_dim)};
  }
};

struct AttentionInputs {
  Tensor q, k, v;
  float scale = 1.0f;

  /// Inputs with the conventional 1/sqrt(D) scale.
  static AttentionInputs make(Tensor q, Tensor k, Tensor v) {
    const float d = q.shape.size() == 4 ? static_cast<float>(q.shape[3]) : 1.0f;
    return {std::move(q), std::move(k), std::move(v), 1.0f / std::sqrt(d)};
  }

  AttentionShape shape() const {
    require(q.shape.size() == 4, ErrorCode::shape_mismatch, "attention operands must be rank 4 (B,H,S,D)");
    require(q.shape == k.shape && q.shape == v.shape, ErrorCode::shape_mismatch, "q, k, v shapes differ");
    for (auto d : q.shape) require(d >= 1, ErrorCode::shape_mismatch, "attention dimensions must be >= 1");
    const AttentionShape s{static_cast<std::size_t>(q.shape[0]), static_cast<std::size_t>(q.shape[1]),
                           static_cast<std::size_t>(q.shape[2]), static_cast<std::size_t>(q.shape[3])};
    require(q.data.size() == s.numel() && k.data.size() == s.numel() && v.data.size() == s.numel(),
            ErrorCode::shape_mismatch, "attention operand data does not match its shape");
    return s;
  }
};

namespace detail {

// In-place numerically stable softmax of one row.
inline void softmax_row(float* row, std::size_t n) {
  float m = row[0];
  for (std::size_t j = 1; j < n; ++j) m = std::max(m, row[j]);
  float sum = 0.0f;
  for (std::size_t j = 0; j < n; ++j) {
    row[j] = std::exp(row[j] - m);
    sum += row[j];
  }
  const float inv = 1.0f / sum;
  for (std::size_t j = 0; j < n; ++j) row[j] *= inv;
}

}  // namespace detail

inline Tensor attention_baseline(const AttentionInputs& in) {
  const auto s = in.shape();
  const std::size_t S = s.seq, D = s.head_dim;
  Tensor out{"attention_out", DType::f32, s.as_shape(), std::vector<float>(s.numel(), 0.0f)};
  std::vector<float> scores(S);
  for (std::size_t bh = 0; bh < s.batch * s.heads; ++bh) {
    const float* q = in.q.data.data() + bh * S * D;
    const float* k = in.k.data.data() + bh * S * D;
    const float* v = in.v.data.data() + bh * S * D;
    float* o = out.data.data() + bh * S * D;
    for (std::size_t i = 0; i < S; ++i) {
      for (std::size_t j = 0; j < S; ++j) {
        float dot = 0.0f;
        for (std::size_t d = 0; d < D; ++d) dot += q[i * D + d] * k[j * D + d];
        scores[j] = in.scale * dot;
      }
      detail::softmax_row(scores.data(), S);
      for (std::size_t j = 0; j < S; ++j) {
        for (std::size_t d = 0; d < D; ++d) o[i * D + d] += scores[j] * v[j * D + d];
      }
    }
  }
  return out;
}

/// (B,H,S,D) -> (B, H*D, 1, S)
inline std::vector<float> to_channels_layout(const Tensor& t, const AttentionShape& s) {
  std::vector<float> out(s.numel());
  for (std::size_t b = 0; b < s.batch; ++b)
    for (std::size_t h = 0; h < s.heads; ++h)
      for (std::size_t i = 0; i < s.seq; ++i)
        for (std::size_t d = 0; d < s.head_dim; ++d)
          out[((b * s.heads + h) * s.head_dim + d) * s.seq + i] =
              t.data[((b * s.heads + h) * s.seq + i) * s.head_dim + d];
  return out;
}

inline Tensor attention_split_einsum(const AttentionInputs& in, std::size_t head_chunk = 1) {
  const auto s = in.shape();
  require(head_chunk >= 1, ErrorCode::invalid_argument, "head chunk size must be >= 1");
  const std::size_t S = s.seq, D = s.head_dim, H = s.heads;
  const auto q = to_channels_layout(in.q, s);
  const auto k = to_channels_layout(in.k, s);
  const auto v = to_channels_layout(in.v, s);

  Tensor out{"attention_out", DType::f32, s.as_shape(), std::vector<float>(s.numel(), 0.0f)};
  std::vector<float> scores;
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t h0 = 0; h0 < H; h0 += head_chunk) {
      const std::size_t hc = std::min(head_chunk, H - h0);
      // scores[h][i][j] = sum_d q[b, h*D+d, 0, i] * k[b, h*D+d, 0, j]
      scores.assign(hc * S * S, 0.0f);
      for (std::size_t h = 0; h < hc; ++h) {
        float* sc = scores.data() + h * S * S;
        const std::size_t base = (b * H + h0 + h) * D;
        for (std::size_t d = 0; d < D; ++d) {
          const float* qrow = q.data() + (base + d) * S;
          const float* krow = k.data() + (base + d) * S;
          for (std::size_t i = 0; i < S; ++i) {
            const float qi = qrow[i];
            float* srow = sc + i * S;
            for (std::size_t j = 0; j < S; ++j) srow[j] += qi * krow[j];
          }
        }
        for (std::size_t i = 0; i < S; ++i) {
          float* srow = sc + i * S;
          for (std::size_t j = 0; j < S; ++j) srow[j] *= in.scale;
          detail::softmax_row(srow, S);
        }
      }
      // out[b, h*D+d, 0, i] = sum_j p[h][i][j] * v[b, h*D+d, 0, j], written back as (B,H,S,D)
      for (std::size_t h = 0; h < hc; ++h) {
        const float* sc = scores.data() + h * S * S;
        const std::size_t base = (b * H + h0 + h) * D;
        for (std::size_t d = 0; d < D; ++d) {
          const float* vrow = v.data() + (base + d) * S;
          for (std::size_t i = 0; i < S; ++i) {
            const float* prow = sc + i * S;
            float a = 0.0f;
            for (std::size_t j = 0; j < S; ++j) a += prow[j] * vrow[j];
            out.data[((b * H + h0 + h) * S + i) * D + d] = a;
          }
        }
      }
    }
  }
  return out;
}

inline float max_abs_diff(const Tensor& a, const Tensor& b) {
  require(a.shape == b.shape, ErrorCode::shape_mismatch, "max_abs_diff: shapes differ");
  float m = 0.0f;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

/// Seeded standard-normal operands; depends only on (shape, seed).
inline AttentionInputs random_attention_inputs(const AttentionShape& s, std::uint64_t seed) {
  CounterStream rng(seed);
  auto fill = [&](const char* name) {
    Tensor t{name, DType::f32, s.as_shape(), std::vector<float>(s.numel())};
    for (auto& x : t.data) x = static_cast<float>(rng.next_normal());
    return t;
  };
  Tensor q = fill("q"), k = fill("k"), v = fill("v");
  return AttentionInputs::make(std::move(q), std::move(k), std::move(v));
}

struct KernelComparison {
  AttentionShape shape;
  int trials = 0;
  std::uint64_t seed = 0;
  std::size_t head_chunk = 1;
  double max_abs_diff = 0.0;
  double baseline_median_ms = 0.0;
  double split_einsum_median_ms = 0.0;
};

inline json to_json(const KernelComparison& c) {
  return {{"shape", {c.shape.batch, c.shape.heads, c.shape.seq, c.shape.head_dim}},
          {"trials", c.trials},
          {"seed", c.seed},
          {"head_chunk", c.head_chunk},
          {"max_abs_diff", c.max_abs_diff},
          {"baseline_median_ms", c.baseline_median_ms},
          {"split_einsum_median_ms", c.split_einsum_median_ms}};
}

/// Equivalence check plus median wall times. Timings are reported only.
inline KernelComparison compare_kernels(const AttentionShape& shape, int trials, std::uint64_t seed,
                                        std::size_t head_chunk = 1) {
  require(shape.batch >= 1 && shape.heads >= 1 && shape.seq >= 1 && shape.head_dim >= 1, ErrorCode::invalid_argument,
          "attention sizes must all be >= 1");
  require(trials >= 1, ErrorCode::invalid_argument, "trials must be >= 1");
  const auto inputs = random_attention_inputs(shape, seed);

  using clock = std::chrono::steady_clock;
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  std::vector<double> t_base, t_split;
  Tensor base, split;
  for (int i = 0; i < trials; ++i) {
    auto t0 = clock::now();
    base = attention_baseline(inputs);
    auto t1 = clock::now();
    split = attention_split_einsum(inputs, head_chunk);
    auto t2 = clock::now();
    t_base.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    t_split.push_back(std::chrono::duration<double, std::milli>(t2 - t1).count());
  }
  KernelComparison c;
  c.shape = shape;
  c.trials = trials;
  c.seed = seed;
  c.head_chunk = head_chunk;
  c.max_abs_diff = max_abs_diff(base, split);
  c.baseline_median_ms = median(t_base);
  c.split_einsum_median_ms = median(t_split);
  return c;
}

}  // namespace mfr
