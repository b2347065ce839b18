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

// Scalar (1-D) k-means: an exact solver and a deterministic Lloyd iteration.
// Both operate on (distinct value, multiplicity) pairs internally, so
// heavily repeated inputs such as f16 weights stay cheap.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mfr/error.hpp"

namespace mfr {

struct KMeansResult {
  std::vector<double> centroids;  // ascending
  double cost = 0.0;              // sum of squared errors
  int iterations = 0;
  std::vector<double> sse_history;  // Lloyd only: SSE after each assignment
};

struct LloydOptions {
  int max_iters = 100;
  double rel_tol = 1e-7;
  std::size_t sample_limit = 1'000'000;
};

namespace detail {

struct WeightedPoints {
  std::vector<double> x;
  std::vector<double> w;
};

inline WeightedPoints collapse_sorted(std::span<const double> sorted) {
  WeightedPoints p;
  for (double v : sorted) {
    if (!p.x.empty() && p.x.back() == v) {
      p.w.back() += 1.0;
    } else {
      p.x.push_back(v);
      p.w.push_back(1.0);
    }
  }
  return p;
}

inline double weighted_sse(const WeightedPoints& p, std::size_t begin, std::size_t end, double c) {
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double d = p.x[i] - c;
    s += p.w[i] * d * d;
  }
  return s;
}

inline double weighted_mean(const WeightedPoints& p, std::size_t begin, std::size_t end) {
  double sw = 0.0, sx = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    sw += p.w[i];
    sx += p.w[i] * p.x[i];
  }
  return sx / sw;
}

// Smallest index j minimizing |x - c[j]| over ascending centroids.
inline std::size_t nearest_centroid(std::span<const double> c, double x) {
  const auto it = std::lower_bound(c.begin(), c.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - c.begin());
  if (hi == c.size()) --hi;
  // lower_bound already returns the first of a run of equal values
  if (hi == 0) return 0;
  std::size_t lo = hi - 1;
  while (lo > 0 && c[lo - 1] == c[lo]) --lo;
  return std::abs(x - c[lo]) <= std::abs(c[hi] - x) ? lo : hi;
}

}  // namespace detail

inline std::size_t count_distinct_sorted(std::span<const double> sorted) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i == 0 || sorted[i] != sorted[i - 1]) ++d;
  }
  return d;
}

/// Globally optimal k-means of sorted scalars. Optimal clusters are contiguous
/// runs of the sorted input, so this is a DP over split points,
///   D[j][i] = min_s D[j-1][s] + cost(s, i),
/// with the split index monotone in i, which lets each row be filled by
/// divide and conquer in O(n log n).
inline KMeansResult kmeans_1d_exact(std::span<const double> sorted_values, std::size_t k) {
  require(!sorted_values.empty(), ErrorCode::invalid_argument, "kmeans_1d_exact: empty input");
  require(k >= 1, ErrorCode::invalid_argument, "kmeans_1d_exact: k must be >= 1");
  require(std::is_sorted(sorted_values.begin(), sorted_values.end()), ErrorCode::invalid_argument,
          "kmeans_1d_exact: values must be sorted ascending");
  for (double v : sorted_values) require(std::isfinite(v), ErrorCode::non_finite, "kmeans_1d_exact: non-finite value");

  const auto pts = detail::collapse_sorted(sorted_values);
  const std::size_t n = pts.x.size();
  require(k <= n, ErrorCode::invalid_argument,
          "kmeans_1d_exact: k=" + std::to_string(k) + " exceeds distinct value count " + std::to_string(n));

  KMeansResult result;
  if (k == n) {
    result.centroids = pts.x;
    return result;
  }

  // Centered prefix sums keep cost(a, b) = S2 - S1^2 / W well conditioned.
  double shift = 0.0, total_w = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    shift += pts.w[i] * pts.x[i];
    total_w += pts.w[i];
  }
  shift /= total_w;
  std::vector<double> pw(n + 1, 0.0), p1(n + 1, 0.0), p2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = pts.x[i] - shift;
    pw[i + 1] = pw[i] + pts.w[i];
    p1[i + 1] = p1[i] + pts.w[i] * y;
    p2[i + 1] = p2[i] + pts.w[i] * y * y;
  }
  auto cost = [&](std::size_t a, std::size_t b) {  // points [a, b)
    const double w = pw[b] - pw[a];
    const double s1 = p1[b] - p1[a];
    const double c = (p2[b] - p2[a]) - s1 * s1 / w;
    return c > 0.0 ? c : 0.0;
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  // prev[i]: best cost of the first i points in (j-1) clusters.
  std::vector<double> prev(n + 1, inf), cur(n + 1, inf);
  for (std::size_t i = 1; i <= n; ++i) prev[i] = cost(0, i);
  // split[j][i]: start of the last cluster in the optimum for (j+1, i).
  std::vector<std::vector<std::uint32_t>> split(k, std::vector<std::uint32_t>(n + 1, 0));

  for (std::size_t j = 1; j < k; ++j) {
    std::fill(cur.begin(), cur.end(), inf);
    auto& row = split[j];
    // Fill cur[i] for i in [lo, hi] knowing the optimal split lies in [slo, shi].
    auto solve = [&](auto&& self, std::size_t lo, std::size_t hi, std::size_t slo, std::size_t shi) -> void {
      if (lo > hi) return;
      const std::size_t mid = lo + (hi - lo) / 2;
      double best = inf;
      std::size_t best_s = slo;
      const std::size_t s_end = std::min(shi, mid - 1);
      for (std::size_t s = slo; s <= s_end; ++s) {
        const double v = prev[s] + cost(s, mid);
        if (v < best) {
          best = v;
          best_s = s;
        }
      }
      cur[mid] = best;
      row[mid] = static_cast<std::uint32_t>(best_s);
      if (mid > lo) self(self, lo, mid - 1, slo, best_s);
      self(self, mid + 1, hi, best_s, shi);
    };
    solve(solve, j + 1, n, j, n - 1);
    std::swap(prev, cur);
  }

  // Walk the split table back from (k, n).
  std::vector<std::size_t> bounds(k + 1, 0);
  bounds[k] = n;
  for (std::size_t j = k - 1; j >= 1; --j) bounds[j] = split[j][bounds[j + 1]];
  bounds[0] = 0;

  result.centroids.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    result.centroids[j] = detail::weighted_mean(pts, bounds[j], bounds[j + 1]);
    result.cost += detail::weighted_sse(pts, bounds[j], bounds[j + 1], result.centroids[j]);
  }
  return result;
}

/// Lloyd iteration with quantile initialization: centroid j starts at the
/// sorted value of rank floor((j + 0.5) / k * n). Assignment ties go to the
/// lower centroid; an empty cluster is reseeded at the point farthest from
/// its centroid. SSE never increases across recorded iterations. When the
/// input exceeds `sample_limit`, the fit runs on a strided subsample and the
/// returned cost covers every value.
inline KMeansResult lloyd_1d(std::span<const double> values, std::size_t k, const LloydOptions& opt = {}) {
  require(!values.empty(), ErrorCode::invalid_argument, "lloyd_1d: empty input");
  require(k >= 1, ErrorCode::invalid_argument, "lloyd_1d: k must be >= 1");
  require(opt.max_iters >= 0, ErrorCode::invalid_argument, "lloyd_1d: max_iters must be >= 0");
  for (double v : values) require(std::isfinite(v), ErrorCode::non_finite, "lloyd_1d: non-finite value");

  std::vector<double> all(values.begin(), values.end());
  std::sort(all.begin(), all.end());
  const std::size_t distinct_all = count_distinct_sorted(all);
  require(k <= distinct_all, ErrorCode::invalid_argument,
          "lloyd_1d: k=" + std::to_string(k) + " exceeds distinct value count " + std::to_string(distinct_all));

  std::vector<double> sample;
  const std::size_t n = values.size();
  if (opt.sample_limit > 0 && n > opt.sample_limit) {
    sample.reserve(opt.sample_limit);
    for (std::size_t i = 0; i < opt.sample_limit; ++i) {
      sample.push_back(values[static_cast<std::size_t>(static_cast<unsigned __int128>(i) * n / opt.sample_limit)]);
    }
    std::sort(sample.begin(), sample.end());
    // The subsample may have lost support; never ask for more clusters than it has.
    require(count_distinct_sorted(sample) >= k, ErrorCode::invalid_argument,
            "lloyd_1d: subsample has fewer than k distinct values; raise sample_limit");
  } else {
    sample = all;
  }
  const auto pts = detail::collapse_sorted(sample);
  const std::size_t m = sample.size();
  const std::size_t d = pts.x.size();

  std::vector<double> c(k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t rank = static_cast<std::size_t>((2 * j + 1) * static_cast<unsigned __int128>(m) / (2 * k));
    c[j] = sample[std::min(rank, m - 1)];
  }

  std::vector<std::size_t> assign(d);
  auto assign_all = [&](const std::vector<double>& cents) {
    double sse = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      assign[i] = detail::nearest_centroid(cents, pts.x[i]);
      const double diff = pts.x[i] - cents[assign[i]];
      sse += pts.w[i] * diff * diff;
    }
    return sse;
  };

  KMeansResult result;
  double sse = assign_all(c);
  result.sse_history.push_back(sse);

  for (int it = 0; it < opt.max_iters && sse > 0.0; ++it) {
    std::vector<double> sum(k, 0.0), weight(k, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      sum[assign[i]] += pts.w[i] * pts.x[i];
      weight[assign[i]] += pts.w[i];
    }
    std::vector<double> next(k);
    for (std::size_t j = 0; j < k; ++j) next[j] = weight[j] > 0.0 ? sum[j] / weight[j] : c[j];

    std::vector<double> dist(d);
    for (std::size_t i = 0; i < d; ++i) dist[i] = std::abs(pts.x[i] - next[assign[i]]);
    for (std::size_t j = 0; j < k; ++j) {
      if (weight[j] > 0.0) continue;
      const std::size_t far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
      next[j] = pts.x[far];
      dist[far] = 0.0;
    }
    std::sort(next.begin(), next.end());

    const std::vector<std::size_t> prev_assign = assign;
    const double next_sse = assign_all(next);
    if (next_sse > sse) {
      // rounding noise only; keep the previous state
      assign = prev_assign;
      break;
    }
    const double improvement = (sse - next_sse) / sse;
    c = std::move(next);
    sse = next_sse;
    result.sse_history.push_back(sse);
    result.iterations = it + 1;
    if (improvement < opt.rel_tol) break;
  }

  result.centroids = c;
  if (m == n) {
    result.cost = sse;
  } else {
    double total = 0.0;
    for (double v : values) {
      const double diff = v - c[detail::nearest_centroid(c, v)];
      total += diff * diff;
    }
    result.cost = total;
  }
  return result;
}

}  // namespace mfr
