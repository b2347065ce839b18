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

// Shared test helpers: scratch directories, a small seeded generator and
// brute-force reference solvers.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mfr/mfr.hpp"

namespace mfr::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "mfr") {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  fs::path path_;
};

struct Gen {
  explicit Gen(std::uint64_t seed) : eng(seed) {}

  std::int64_t range(std::int64_t lo, std::int64_t hi) {  // inclusive
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(eng);
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(range(0, static_cast<std::int64_t>(n) - 1)); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
  float normal(float sigma = 1.0f) { return std::normal_distribution<float>(0.0f, sigma)(eng); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(eng); }

  std::mt19937_64 eng;
};

inline double pearson(std::span<const float> a, std::span<const float> b) {
  const std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

/// Values of `img` over the pixels where `mask` >= 0.5, all channels.
inline std::vector<float> masked_values(const Image& img, const Image& mask) {
  std::vector<float> out;
  for (std::size_t p = 0; p < img.pixels(); ++p) {
    if (mask.data[p] < 0.5f) continue;
    for (int c = 0; c < img.channels; ++c) out.push_back(img.data[p * img.channels + c]);
  }
  return out;
}

/// Top half regenerated, bottom half preserved.
inline Image half_mask(int w, int h) {
  Image m(w, h, 1);
  for (int y = 0; y < h / 2; ++y)
    for (int x = 0; x < w; ++x) m.at(x, y, 0) = 1.0f;
  return m;
}

/// A smooth synthetic "photo" in [0,1].
inline Image synthetic_photo(int w, int h, std::uint64_t seed) {
  Gen g(seed);
  const double fx = g.uniform(0.05, 0.3), fy = g.uniform(0.05, 0.3), ph = g.uniform(0, 6.28);
  Image img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        img.at(x, y, c) = static_cast<float>(0.5 + 0.35 * std::sin(fx * x + fy * y + ph + 2.0 * c));
      }
  return img;
}

inline Image random_image(Gen& g, int w, int h, int channels) {
  Image img(w, h, channels);
  for (auto& v : img.data) v = static_cast<float>(g.uniform(0.0, 1.0));
  return img;
}

// ---------------------------------------------------------------- oracles

/// Minimum SSE over every split of `sorted` into exactly k non-empty
/// contiguous groups, by enumerating cut masks.
inline double brute_kmeans_cost(const std::vector<double>& sorted, std::size_t k) {
  const std::size_t n = sorted.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != k - 1) continue;
    double total = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool cut = i + 1 == n || (mask >> i) & 1u;
      if (!cut) continue;
      double mean = 0;
      for (std::size_t j = start; j <= i; ++j) mean += sorted[j];
      mean /= static_cast<double>(i + 1 - start);
      for (std::size_t j = start; j <= i; ++j) total += (sorted[j] - mean) * (sorted[j] - mean);
      start = i + 1;
    }
    best = std::min(best, total);
  }
  return best;
}

struct BruteSplit {
  std::uint64_t minimax = 0;
  std::vector<std::size_t> cuts;  // lexicographically smallest optimal cut list
};

/// Every choice of n-1 cut points; a cut c means a chunk ends before index c.
inline BruteSplit brute_split(const std::vector<std::uint64_t>& sizes, std::size_t n_chunks) {
  const std::size_t n = sizes.size();
  BruteSplit best{std::numeric_limits<std::uint64_t>::max(), {}};
  std::vector<std::size_t> cuts;
  auto rec = [&](auto&& self, std::size_t from) -> void {
    if (cuts.size() == n_chunks - 1) {
      std::uint64_t worst = 0;
      std::size_t begin = 0;
      for (std::size_t c = 0; c <= cuts.size(); ++c) {
        const std::size_t end = c < cuts.size() ? cuts[c] : n;
        worst = std::max(worst, std::accumulate(sizes.begin() + begin, sizes.begin() + end, std::uint64_t{0}));
        begin = end;
      }
      if (worst < best.minimax || (worst == best.minimax && cuts < best.cuts)) best = {worst, cuts};
      return;
    }
    for (std::size_t c = from; c < n; ++c) {
      cuts.push_back(c);
      self(self, c + 1);
      cuts.pop_back();
    }
  };
  rec(rec, 1);
  return best;
}

inline std::vector<std::size_t> plan_cuts(const std::vector<ChunkRange>& plan) {
  std::vector<std::size_t> cuts;
  for (std::size_t i = 1; i < plan.size(); ++i) cuts.push_back(plan[i].begin);
  return cuts;
}

struct BrutePlan {
  double score = 0;
  std::uint64_t size = 0;
  std::vector<std::string> ids;  // sorted
};

/// Subset enumeration with the planner's objective and tie-breaks, against
/// the exact byte budget.
inline BrutePlan brute_plan(const std::vector<DownloadCandidate>& items, std::uint64_t budget) {
  std::vector<DownloadCandidate> sorted = items;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  BrutePlan best;
  const std::size_t n = sorted.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    BrutePlan cur;
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1u) {
        cur.score += sorted[i].score;
        cur.size += sorted[i].size_bytes;
        cur.ids.push_back(sorted[i].id);
      }
    }
    if (cur.size > budget) continue;
    const bool better = cur.score != best.score ? cur.score > best.score
                        : cur.size != best.size ? cur.size < best.size
                                                : cur.ids < best.ids;
    if (mask == 0 || better) best = cur;
  }
  return best;
}

inline double plan_score(const std::vector<DownloadCandidate>& items, const std::vector<std::string>& ids) {
  double s = 0;
  for (const auto& it : items)
    if (std::find(ids.begin(), ids.end(), it.id) != ids.end()) s += it.score;
  return s;
}

/// Whole-KiB sizes and integer scores keep every comparison exact.
inline std::vector<DownloadCandidate> random_candidates(Gen& g, std::size_t max_items) {
  std::vector<DownloadCandidate> items;
  const std::size_t n = static_cast<std::size_t>(g.range(0, static_cast<std::int64_t>(max_items)));
  for (std::size_t i = 0; i < n; ++i) {
    items.push_back({"g" + std::to_string(g.range(0, 99)) + "_" + std::to_string(i),
                     static_cast<std::uint64_t>(g.range(0, 12)) * kPlanUnit, static_cast<double>(g.range(0, 9))});
  }
  return items;
}

// ------------------------------------------------------ artifact generators

inline ArtifactEntry random_entry(Gen& g, const std::string& name) {
  Shape shape;
  const int rank = static_cast<int>(g.range(1, 3));
  for (int i = 0; i < rank; ++i) shape.push_back(g.range(1, 7));
  const std::size_t n = element_count(shape);
  const DType dtype = g.coin() ? DType::f16 : DType::f32;
  if (g.coin(0.6)) {
    std::vector<float> data(n);
    for (auto& v : data) v = g.normal(3.0f);
    return make_tensor(name, dtype, shape, std::move(data));
  }
  PalettizedTensor p;
  p.name = name;
  p.n_bits = static_cast<int>(g.range(1, 8));
  p.lut_dtype = dtype;
  p.shape = shape;
  const std::size_t slots = std::size_t{1} << p.n_bits;
  const std::size_t used = static_cast<std::size_t>(g.range(1, static_cast<std::int64_t>(slots)));
  // strictly increasing prefix, exactly representable in f16
  float v = static_cast<float>(g.range(-64, 0)) / 4.0f;
  for (std::size_t i = 0; i < used; ++i) {
    p.lut.push_back(v);
    v += static_cast<float>(g.range(1, 8)) / 4.0f;
  }
  p.lut.resize(slots, p.lut.back());
  std::vector<std::uint32_t> idx(n);
  for (auto& i : idx) i = static_cast<std::uint32_t>(g.index(used));
  p.packed_indices = pack_indices(idx, p.n_bits);
  return p;
}

inline std::vector<ArtifactEntry> random_artifact(Gen& g, std::size_t max_tensors = 6) {
  std::vector<ArtifactEntry> out;
  const std::size_t n = static_cast<std::size_t>(g.range(0, static_cast<std::int64_t>(max_tensors)));
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_entry(g, "t" + std::to_string(i)));
  return out;
}

/// Raw file assembly for corrupt fixtures: preamble + header + blobs placed
/// at caller-chosen absolute offsets.
inline Bytes assemble_artifact(const std::string& header, const std::vector<std::pair<std::size_t, Bytes>>& blobs,
                               std::uint32_t version = 1, const char* magic = "MFRW") {
  Bytes out(magic, magic + 4);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(version >> (8 * i)));
  const std::uint64_t len = header.size();
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  out.insert(out.end(), header.begin(), header.end());
  for (const auto& [off, b] : blobs) {
    if (out.size() < off) out.resize(off, 0);
    out.resize(std::max(out.size(), off + b.size()), 0);
    std::copy(b.begin(), b.end(), out.begin() + static_cast<std::ptrdiff_t>(off));
  }
  return out;
}

inline Bytes f32_bytes(std::initializer_list<float> values) {
  Bytes out;
  for (float v : values) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
  return out;
}

}  // namespace mfr::test
