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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Runs without GoogleTest so it can be invoked standalone.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "support.hpp"

#ifndef MFR_CLI_PATH
#define MFR_CLI_PATH "mfr"
#endif

namespace mfr {
namespace {

using test::Gen;
using test::TempDir;

struct Outcome {
  bool ok = true;
  std::string detail;

  void check(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    } else if (!cond) {
      detail += "; " + what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

// ------------------------------------------------------------------ 1
Outcome kmeans_optimality() {
  Outcome o;
  Gen g(1001);
  double worst = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(g.range(1, 12)));
    const bool coarse = g.coin(0.3);
    for (auto& x : v) x = coarse ? static_cast<double>(g.range(-4, 4)) : g.uniform(-5, 5);
    std::sort(v.begin(), v.end());
    const auto distinct = static_cast<std::int64_t>(count_distinct_sorted(v));
    const auto k = static_cast<std::size_t>(g.range(1, std::min<std::int64_t>(4, distinct)));
    const double diff = std::abs(kmeans_1d_exact(v, k).cost - test::brute_kmeans_cost(v, k));
    worst = std::max(worst, diff);
  }
  const double secs = seconds_since(t0);
  o.check(worst <= 1e-9, "max |exact - brute| = " + fmt(worst));
  o.check(secs < 10.0, "took " + fmt(secs) + " s");
  if (o.ok) o.detail = "500 arrays, max diff " + fmt(worst);
  return o;
}

// ------------------------------------------------------------------ 2
Outcome palettization_exactness() {
  Outcome o;
  Gen g(1002);
  for (int bits = 1; bits <= 8; ++bits) {
    for (DType dt : {DType::f16, DType::f32}) {
      const std::size_t levels = std::size_t{1} << bits;
      const std::size_t used = static_cast<std::size_t>(g.range(1, static_cast<std::int64_t>(levels)));
      std::vector<float> palette(used);
      for (std::size_t i = 0; i < used; ++i) palette[i] = static_cast<float>(i) * 0.125f - 3.0f;
      std::vector<float> data(5000);
      for (auto& x : data) x = palette[g.index(used)];
      const Tensor t = make_tensor("t", dt, {static_cast<std::int64_t>(data.size())}, data);
      PalettizationConfig c;
      c.n_bits = bits;
      c.min_elements = 1;
      const auto r = palettize_tensor(t, c);
      o.check(r.palettized(), "not palettized at " + std::to_string(bits) + " bits");
      if (!r.palettized()) continue;
      o.check(depalettize_tensor(std::get<PalettizedTensor>(r.entry)).data == t.data,
              "lossy reconstruction at " + std::to_string(bits) + " bits");
    }
  }
  if (o.ok) o.detail = "bit-exact for n = 1..8 (f16 and f32)";
  return o;
}

// ------------------------------------------------------------------ 3
Outcome size_arithmetic() {
  Outcome o;
  TempDir dir("mfr-acc3");
  Gen g(1003);
  std::vector<float> data(1000);
  for (auto& v : data) v = g.normal(0.05f);
  write_artifact({make_tensor("w", DType::f16, {1000}, data)}, {{"model_id", "one"}}, dir / "one.mfrw");
  PalettizationConfig c;
  c.n_bits = 6;
  c.min_elements = 1;
  const auto r = compress_model(dir / "one.mfrw", dir / "one6.mfrw", c);
  o.check(r.rows.size() == 1 && r.rows[0].compressed_bytes == 878, "payload is not 878 bytes");
  o.check(fmt(r.reduction_percent, 3) == "56.1", "reduction " + fmt(r.reduction_percent) + "% != 56.1%");
  o.check(format_table(r).find("56.1%") != std::string::npos, "table does not print 56.1%");

  // totals equal row sums on every fixture
  make_fixture_catalog(dir / "fx");
  make_sample_model(dir / "fx" / "sample_model.mfrw");
  std::vector<fs::path> fixtures = {dir / "fx" / "sample_model.mfrw", dir / "one.mfrw", dir / "one6.mfrw"};
  for (const auto& e : fs::directory_iterator(dir / "fx" / "models"))
    if (e.path().extension() == ".mfrw") fixtures.push_back(e.path());
  std::size_t checked = 0;
  for (const auto& f : fixtures) {
    for (int bits : {2, 4, 6, 8}) {
      PalettizationConfig pc;
      pc.n_bits = bits;
      pc.min_elements = 64;
      const auto rep = compress_model(f, dir / "tmp.mfrw", pc);
      std::size_t raw = 0, comp = 0;
      for (const auto& row : rep.rows) {
        raw += row.raw_bytes;
        comp += row.compressed_bytes;
      }
      o.check(raw == rep.raw_bytes && comp == rep.compressed_bytes, "totals differ from row sums for " + f.string());
      o.check(fs::file_size(dir / "tmp.mfrw") == rep.compressed_file_bytes, "file size mismatch for " + f.string());
      ++checked;
    }
  }
  if (o.ok) o.detail = "878 B, 56.1%; totals = row sums on " + std::to_string(checked) + " reports";
  return o;
}

// ------------------------------------------------------------------ 4
Outcome chunking() {
  Outcome o;
  Gen g(1004);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::uint64_t> sizes(static_cast<std::size_t>(g.range(1, 10)));
    const std::int64_t hi = g.coin() ? 4 : 10000;
    for (auto& s : sizes) s = static_cast<std::uint64_t>(g.range(1, hi));
    const auto n = static_cast<std::size_t>(g.range(1, std::min<std::int64_t>(3, static_cast<std::int64_t>(sizes.size()))));
    const auto plan = split_plan(sizes, n);
    std::uint64_t worst = 0;
    for (const auto& r : plan) {
      std::uint64_t s = 0;
      for (std::size_t i = r.begin; i < r.end; ++i) s += sizes[i];
      worst = std::max(worst, s);
    }
    if (worst != test::brute_split(sizes, n).minimax) {
      o.check(false, "suboptimal plan in trial " + std::to_string(trial));
      break;
    }
  }

  TempDir dir("mfr-acc4");
  std::vector<ArtifactEntry> tensors;
  for (int i = 0; i < 9; ++i) tensors.push_back(test::random_entry(g, "t" + std::to_string(i)));
  write_artifact(tensors, {{"model_id", "m"}}, dir / "m.mfrw");
  for (std::size_t n = 1; n <= 3; ++n) {
    const fs::path out = dir / ("c" + std::to_string(n));
    write_chunks(dir / "m.mfrw", out, n);
    o.check(load_chunked(out / "m.manifest.json").tensors == tensors, "round trip differs at n=" + std::to_string(n));
  }
  const fs::path victim = dir / "c3" / "m.chunk1.mfrw";
  Bytes b = read_file(victim);
  b[b.size() - 1] ^= 0x40;
  write_file_atomic(victim, b);
  try {
    load_chunked(dir / "c3" / "m.manifest.json");
    o.check(false, "tampered chunk accepted");
  } catch (const Error& e) {
    o.check(e.code() == ErrorCode::digest_mismatch, std::string("wrong error: ") + e.what());
  }
  if (o.ok) o.detail = "1000 plans optimal; round trip n=1..3; tamper -> digest_mismatch";
  return o;
}

// ------------------------------------------------------------------ 5
Outcome kernel_equivalence() {
  Outcome o;
  Gen g(1005);
  float worst = 0, worst_row = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 100; ++trial) {
    const AttentionShape s{static_cast<std::size_t>(g.range(1, 2)), static_cast<std::size_t>(g.range(1, 8)),
                           static_cast<std::size_t>(g.range(1, 64)), static_cast<std::size_t>(g.range(1, 64))};
    auto in = random_attention_inputs(s, 5000 + static_cast<std::uint64_t>(trial));
    worst = std::max(worst, max_abs_diff(attention_baseline(in), attention_split_einsum(in)));
    std::fill(in.v.data.begin(), in.v.data.end(), 1.0f);
    for (const Tensor& out : {attention_baseline(in), attention_split_einsum(in)})
      for (float x : out.data) worst_row = std::max(worst_row, std::abs(x - 1.0f));
  }
  const double secs = seconds_since(t0);
  o.check(worst <= 1e-5f, "max abs diff " + fmt(worst));
  o.check(worst_row <= 1e-6f, "row sum off by " + fmt(worst_row));
  o.check(secs < 30.0, "took " + fmt(secs) + " s");
  if (o.ok) o.detail = "100 shapes, max diff " + fmt(worst) + ", row sum err " + fmt(worst_row);
  return o;
}

// ------------------------------------------------------------------ 6
Outcome guidance_algebra() {
  Outcome o;
  Gen g(1006);
  for (int trial = 0; trial < 200; ++trial) {
    Image u(5, 3, 2), c(5, 3, 2);
    for (auto& v : u.data) v = g.normal(2.0f);
    for (auto& v : c.data) v = g.normal(2.0f);
    o.check(cfg_combine(u, c, 0.0f) == u, "w=0 is not unconditional");
    o.check(cfg_combine(u, c, 1.0f) == c, "w=1 is not conditional");
    const float w = static_cast<float>(g.uniform(-2, 12));
    const Image out = cfg_combine(u, c, w);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
      const double exact = static_cast<double>(u.data[i]) + static_cast<double>(w) * (c.data[i] - static_cast<double>(u.data[i]));
      if (out.data[i] != static_cast<float>(exact)) {
        o.check(false, "not the f32 rounding of the affine value");
        break;
      }
    }
    if (!o.ok) break;
  }
  if (o.ok) o.detail = "w=0, w=1 and affinity exact to f32 rounding on 200 cases";
  return o;
}

struct FixtureModels {
  TempDir dir{"mfr-accfx"};
  std::vector<std::pair<std::string, ToyDenoiser>> models;
  std::vector<Condition> conds;

  FixtureModels() {
    const Catalog c = make_fixture_catalog(dir.path());
    for (const auto& r : c.list_garments()) {
      models.emplace_back(r.garment_id, load_toy_denoiser(c.artifact_path(r)));
      conds.push_back(encode_prompt(c.prompt_for(r.garment_id)));
    }
  }
};

// ------------------------------------------------------------------ 7
Outcome inpainting_preservation(const FixtureModels& fx) {
  Outcome o;
  Gen g(1007);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = static_cast<int>(g.range(4, 40)), h = static_cast<int>(g.range(4, 40));
    const std::size_t which = g.index(fx.models.size());
    const ToyDenoiser model = fx.models[which].second.resized(w, h);
    const Image img = test::random_image(g, w, h, 3);
    Image mask(w, h, 1);
    const double p_keep = g.uniform(0, 1);
    for (auto& v : mask.data) v = g.coin(p_keep) ? 0.0f : static_cast<float>(g.uniform(0, 1));
    GenerationParams p;
    p.seed = static_cast<std::uint64_t>(g.range(0, 1 << 30));
    p.steps = static_cast<int>(g.range(1, 20));
    const Image out = inpaint_generate(img, mask, model, fx.conds[which], p);
    for (std::size_t px = 0; px < mask.pixels(); ++px) {
      if (mask.data[px] != 0.0f) continue;
      for (int c = 0; c < 3; ++c)
        if (out.data[px * 3 + c] != img.data[px * 3 + c]) {
          o.check(false, "mask=0 pixel changed in trial " + std::to_string(trial));
          return o;
        }
    }
    if (encode_png(inpaint_generate(img, mask, model, fx.conds[which], p)) != encode_png(out)) {
      o.check(false, "same seed gave different bytes in trial " + std::to_string(trial));
      return o;
    }
  }
  o.detail = "50 images/masks: unmasked pixels bit-exact, reruns byte-identical";
  return o;
}

// ------------------------------------------------------------------ 8
Outcome tryon_signal(const FixtureModels& fx) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Image mask = test::half_mask(kFixtureTextureSize, kFixtureTextureSize);
  double min_margin = 1e9, min_corr = 1e9;
  for (std::size_t gi = 0; gi < fx.models.size(); ++gi) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Image photo = test::synthetic_photo(kFixtureTextureSize, kFixtureTextureSize, 100 + seed);
      GenerationParams p;  // 20 steps, guidance 5
      p.seed = seed;
      const Image out = inpaint_generate(photo, mask, fx.models[gi].second, fx.conds[gi], p);
      const auto got = test::masked_values(out, mask);
      const double own = test::pearson(got, test::masked_values(fx.models[gi].second.texture(), mask));
      min_corr = std::min(min_corr, own);
      o.check(own > 0.9, fx.models[gi].first + " seed " + std::to_string(seed) + " corr " + fmt(own));
      for (std::size_t other = 0; other < fx.models.size(); ++other) {
        if (other == gi) continue;
        const double c = test::pearson(got, test::masked_values(fx.models[other].second.texture(), mask));
        min_margin = std::min(min_margin, own - c);
        o.check(own > c, fx.models[gi].first + " seed " + std::to_string(seed) + " closer to " + fx.models[other].first);
      }
    }
  }
  const double secs = seconds_since(t0);
  o.check(secs < 60.0, "took " + fmt(secs) + " s");
  if (o.ok) o.detail = "min own corr " + fmt(min_corr) + ", min margin " + fmt(min_margin) + ", " + fmt(secs, 3) + " s";
  return o;
}

// ------------------------------------------------------------------ 9
Outcome knapsack() {
  Outcome o;
  Gen g(1009);
  for (int trial = 0; trial < 200; ++trial) {
    const auto items = test::random_candidates(g, 12);
    const auto budget = static_cast<std::uint64_t>(g.range(0, 48 * 1024));
    if (plan_downloads(items, budget) != test::brute_plan(items, budget).ids) {
      o.check(false, "differs from enumeration in trial " + std::to_string(trial));
      break;
    }
    double prev = -1;
    for (std::uint64_t b = 0; b <= 64 * 1024; b += 1024) {
      const double s = test::plan_score(items, plan_downloads(items, b));
      if (s < prev) {
        o.check(false, "score fell as budget grew in trial " + std::to_string(trial));
        break;
      }
      prev = s;
    }
  }
  if (o.ok) o.detail = "200 catalogs match enumeration; monotone in budget";
  return o;
}

// ------------------------------------------------------------------ 10
std::optional<ErrorCode> read_error(const Bytes& b) {
  try {
    parse_artifact(b);
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

Outcome format_round_trip() {
  Outcome o;
  Gen g(1010);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto tensors = test::random_artifact(g);
    const Metadata meta = {{"model_id", "m" + std::to_string(trial)}};
    const Bytes a = serialize_artifact(tensors, meta);
    const Artifact back = parse_artifact(a);
    if (back.tensors != tensors || back.metadata != meta) {
      o.check(false, "round trip differs in trial " + std::to_string(trial));
      break;
    }
    if (sha256_hex(serialize_artifact(back.tensors, back.metadata)) != sha256_hex(a)) {
      o.check(false, "re-serialization hash differs in trial " + std::to_string(trial));
      break;
    }
  }

  PalettizedTensor p;
  p.name = "pal";
  p.n_bits = 2;
  p.lut_dtype = DType::f32;
  p.lut = {-1.0f, 0.0f, 2.0f, 2.0f};
  p.shape = {8};
  p.packed_indices = pack_indices(std::vector<std::uint32_t>{0, 1, 2, 1, 0, 2, 2, 1}, 2);
  const std::vector<ArtifactEntry> fixture = {make_tensor("raw", DType::f32, {3}, {1, 2, 3}), p};
  const Bytes good = serialize_artifact(fixture, {{"model_id", "fx"}});
  o.check(!read_error(good), "clean fixture rejected");

  const json header = json::parse(good.begin() + 16, good.begin() + 16 + static_cast<std::ptrdiff_t>(detail::get_le(good, 8, 8)));
  std::size_t pal_data = 0;
  for (const auto& e : header["tensors"])
    if (e["name"] == "pal") pal_data = e["data_offset"].get<std::size_t>();

  auto raw1 = [](const char* name, std::size_t off) {
    return json{{"name", name}, {"kind", "raw"}, {"dtype", "f32"}, {"shape", {1}}, {"data_offset", off}, {"data_len", 4}};
  };
  std::vector<std::pair<std::string, std::pair<Bytes, ErrorCode>>> cases;
  Bytes b = good;
  std::memcpy(b.data(), "MFRX", 4);
  cases.push_back({"bad magic", {b, ErrorCode::bad_magic}});
  b = good;
  b[4] = 9;
  cases.push_back({"version", {b, ErrorCode::unsupported_version}});
  cases.push_back({"truncated blob", {Bytes(good.begin(), good.end() - 1), ErrorCode::truncated}});
  cases.push_back({"truncated header", {Bytes(good.begin(), good.begin() + 30), ErrorCode::truncated}});
  cases.push_back({"empty file", {Bytes{}, ErrorCode::truncated}});
  cases.push_back({"malformed header", {test::assemble_artifact("{oops", {}), ErrorCode::malformed_header}});
  b = good;
  b[pal_data] |= 0x03;
  cases.push_back({"padding index", {b, ErrorCode::index_out_of_range}});
  cases.push_back({"unaligned blob",
                   {test::assemble_artifact(json{{"tensors", {raw1("a", 260)}}}.dump(), {{260, test::f32_bytes({1})}}),
                    ErrorCode::bad_region}});
  cases.push_back({"non-finite",
                   {test::assemble_artifact(json{{"tensors", {raw1("a", 256)}}}.dump(), {{256, test::f32_bytes({NAN})}}),
                    ErrorCode::non_finite}});
  cases.push_back({"duplicate name",
                   {test::assemble_artifact(json{{"tensors", {raw1("a", 256), raw1("a", 272)}}}.dump(),
                                            {{256, test::f32_bytes({1})}, {272, test::f32_bytes({2})}}),
                    ErrorCode::duplicate_name}});
  for (const auto& [name, c] : cases) {
    const auto got = read_error(c.first);
    o.check(got == c.second, name + ": got " + (got ? std::string(code_name(*got)) : "no error"));
    o.check(!verify_artifact_bytes(c.first).empty(), name + ": verify reported nothing");
  }
  if (o.ok) o.detail = "1000 artifacts bit-exact, hashes stable, " + std::to_string(cases.size()) + " corrupt fixtures";
  return o;
}

// ------------------------------------------------------------------ 11
int sh(const std::string& cmd) {
  const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
#ifdef WEXITSTATUS
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
#else
  return rc;
#endif
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome end_to_end() {
  Outcome o;
  TempDir dir("mfr-acc11");
  const std::string mfr = std::string("'") + MFR_CLI_PATH + "' --data-dir " + q(dir.path()) + " ";
  auto step = [&](const std::string& args, int want, const std::string& what) {
    const int rc = sh(mfr + args);
    o.check(rc == want, what + " exited " + std::to_string(rc) + ", expected " + std::to_string(want));
  };

  step("catalog add --fixtures", 0, "fixtures");
  step("compress --bits 6 --in " + q(dir / "sample_model.mfrw") + " --out " + q(dir / "pal.mfrw"), 0, "compress");
  step("chunk --n 2 --in " + q(dir / "pal.mfrw") + " --out-dir " + q(dir / "chunks"), 0, "chunk");
  step("verify " + q(dir / "chunks" / "sample-model.manifest.json"), 0, "verify manifest");

  const Image photo = test::synthetic_photo(48, 40, 11);
  write_png(dir / "photo.png", photo);
  write_png(dir / "mask.png", test::half_mask(48, 40));
  Image eraser(48, 40, 1);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 24; ++x) eraser.at(x, y, 0) = 1.0f;  // left part of the generated half
  write_png(dir / "eraser.png", eraser);

  step("generate --garment stripes-shirt --image " + q(dir / "photo.png") + " --mask " + q(dir / "mask.png") +
           " --out " + q(dir / "gen.png") + " --seed 3",
       0, "generate");
  step("erase --original " + q(dir / "photo.png") + " --current " + q(dir / "gen.png") + " --mask " +
           q(dir / "eraser.png") + " --out " + q(dir / "final.png"),
       0, "erase");
  if (o.ok) {
    const Image orig = read_png(dir / "photo.png", 3);
    const Image gen = read_png(dir / "gen.png", 3);
    const Image fin = read_png(dir / "final.png", 3);
    bool erased_equal = true, generated_kept = true, changed = false;
    for (int y = 0; y < 40; ++y)
      for (int x = 0; x < 48; ++x)
        for (int c = 0; c < 3; ++c) {
          if (eraser.at(x, y, 0) == 1.0f) {
            erased_equal &= fin.at(x, y, c) == orig.at(x, y, c);
          } else {
            generated_kept &= fin.at(x, y, c) == gen.at(x, y, c);
          }
          changed |= y < 20 && gen.at(x, y, c) != orig.at(x, y, c);
        }
    o.check(changed, "generate left the masked region unchanged");
    o.check(erased_equal, "erased pixels differ from the original");
    o.check(generated_kept, "pixels outside the eraser changed");
  }

  step("frobnicate", 2, "unknown subcommand");
  step("generate --garment no-such --image " + q(dir / "photo.png") + " --mask " + q(dir / "mask.png") + " --out " +
           q(dir / "x.png"),
       1, "unknown garment");
  write_file_atomic(dir / "junk.mfrw", Bytes{'M', 'F', 'R', 'W', 1, 0, 0, 0, 0xff, 0xff, 0xff, 0, 0, 0, 0, 0});
  step("verify " + q(dir / "junk.mfrw"), 1, "corrupt verify");
  if (o.ok) o.detail = "fixtures -> compress -> chunk -> verify -> generate -> erase; exit codes 0/1/2";
  return o;
}

}  // namespace
}  // namespace mfr

int main() {
  using namespace mfr;
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  std::unique_ptr<FixtureModels> fx;
  auto fixtures = [&]() -> const FixtureModels& {
    if (!fx) fx = std::make_unique<FixtureModels>();
    return *fx;
  };
  const std::vector<Entry> criteria = {
      {1, "palettization optimality", kmeans_optimality},
      {2, "palettization exactness", palettization_exactness},
      {3, "size arithmetic", size_arithmetic},
      {4, "chunking optimality and integrity", chunking},
      {5, "attention kernel equivalence", kernel_equivalence},
      {6, "guidance algebra", guidance_algebra},
      {7, "inpainting preservation", [&] { return inpainting_preservation(fixtures()); }},
      {8, "try-on signal", [&] { return tryon_signal(fixtures()); }},
      {9, "download planner", knapsack},
      {10, "format round trip and corruption", format_round_trip},
      {11, "end-to-end CLI scenario", end_to_end},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s [%2d] %-36s %7.2f s  %s\n", o.ok ? "PASS" : "FAIL", c.id, c.name, seconds_since(t0),
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.ok;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
