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

// Per-garment toy denoisers stored as MFRW artifacts, the fixture catalog
// built from them, and a synthetic multi-tensor sample model.
//
// A toy artifact holds `texture` (H x W x 3, values in [0,1]) and `strength`
// (shape [1], in (0,1]), with metadata garment_token / garment_class. When
// the condition matches the garment's prompt, the predicted noise is exactly
// the noise that makes the clean estimate equal the texture (mapped to
// [-1,1]); otherwise it points at neutral gray, scaled by `strength`.

#include <cmath>
#include <string>
#include <vector>

#include "mfr/catalog.hpp"
#include "mfr/chunker.hpp"
#include "mfr/diffusion.hpp"
#include "mfr/image.hpp"
#include "mfr/palettizer.hpp"
#include "mfr/prompt.hpp"
#include "mfr/rng.hpp"
#include "mfr/weight_store.hpp"

namespace mfr {

class ToyDenoiser final : public Denoiser {
 public:
  ToyDenoiser(Image texture, float strength, std::string token, std::string garment_class)
      : texture_(std::move(texture)),
        strength_(strength),
        token_(std::move(token)),
        class_(std::move(garment_class)),
        condition_(encode_prompt(make_prompt(token_, class_))) {
    require(texture_.channels == 3, ErrorCode::invalid_tensor, "toy texture must have 3 channels");
    for (float v : texture_.data) {
      require(v >= 0.0f && v <= 1.0f, ErrorCode::invalid_tensor, "toy texture values must lie in [0,1]");
    }
    require(strength_ > 0.0f && strength_ <= 1.0f, ErrorCode::invalid_tensor, "toy strength must lie in (0,1]");
  }

  static ToyDenoiser from_artifact(const Artifact& a) {
    const ArtifactEntry* tex = a.find("texture");
    const ArtifactEntry* str = a.find("strength");
    require(tex && str, ErrorCode::invalid_tensor, "toy artifact needs 'texture' and 'strength' tensors");
    const Tensor t = to_dense(*tex);
    const Tensor s = to_dense(*str);
    require(t.shape.size() == 3 && t.shape[2] == 3, ErrorCode::invalid_tensor, "texture must have shape [H,W,3]");
    require(s.data.size() == 1, ErrorCode::invalid_tensor, "strength must be a single value");
    Image img(static_cast<int>(t.shape[1]), static_cast<int>(t.shape[0]), 3);
    img.data = t.data;
    auto meta = [&](const char* key) {
      auto it = a.metadata.find(key);
      require(it != a.metadata.end(), ErrorCode::invalid_tensor, std::string("toy artifact missing metadata ") + key);
      return it->second;
    };
    return ToyDenoiser(std::move(img), s.data[0], meta("garment_token"), meta("garment_class"));
  }

  /// Copy with the texture nearest-neighbour resampled to (w, h).
  ToyDenoiser resized(int w, int h) const {
    return ToyDenoiser(resize_nearest(texture_, w, h), strength_, token_, class_);
  }

  Image predict(const Image& x_t, const Timestep& step, const Condition* cond) const override {
    require(x_t.same_shape(texture_), ErrorCode::dim_mismatch, "toy denoiser: input does not match texture size");
    const float sa = std::sqrt(step.alpha_bar), sn = std::sqrt(1.0f - step.alpha_bar);
    Image eps = x_t;
    if (cond && *cond == condition_) {
      for (std::size_t i = 0; i < eps.data.size(); ++i) {
        eps.data[i] = (x_t.data[i] - sa * (2.0f * texture_.data[i] - 1.0f)) / sn;
      }
    } else {
      // neutral gray is 0 in [-1,1]
      for (std::size_t i = 0; i < eps.data.size(); ++i) eps.data[i] = strength_ * x_t.data[i] / sn;
    }
    return eps;
  }

  const Image& texture() const { return texture_; }
  float strength() const { return strength_; }
  const Condition& condition() const { return condition_; }
  const std::string& token() const { return token_; }
  const std::string& garment_class() const { return class_; }

 private:
  Image texture_;
  float strength_;
  std::string token_;
  std::string class_;
  Condition condition_;
};

inline std::vector<ArtifactEntry> toy_tensors(const Image& texture, float strength) {
  std::vector<ArtifactEntry> out;
  out.push_back(make_tensor("texture", DType::f16, {texture.height, texture.width, 3}, texture.data));
  out.push_back(make_tensor("strength", DType::f32, {1}, {strength}));
  return out;
}

inline void write_toy_artifact(const fs::path& path, const std::string& model_id, const Image& texture,
                               float strength, const std::string& token, const std::string& garment_class) {
  // Store exactly what will be read back.
  Image t = texture;
  for (auto& v : t.data) v = round_to_half(v);
  write_artifact(toy_tensors(t, strength),
                 {{"model_id", model_id}, {"garment_token", token}, {"garment_class", garment_class}}, path);
}

namespace textures {

/// Vertical two-colour stripes, 4 px wide.
inline Image stripes(int w, int h) {
  Image img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const bool on = (x / 4) % 2 == 0;
      img.at(x, y, 0) = on ? 0.85f : 0.15f;
      img.at(x, y, 1) = on ? 0.20f : 0.25f;
      img.at(x, y, 2) = on ? 0.20f : 0.80f;
    }
  return img;
}

/// 8 px checkerboard.
inline Image checker(int w, int h) {
  Image img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const bool on = ((x / 8) + (y / 8)) % 2 == 0;
      img.at(x, y, 0) = on ? 0.90f : 0.10f;
      img.at(x, y, 1) = on ? 0.85f : 0.30f;
      img.at(x, y, 2) = on ? 0.15f : 0.70f;
    }
  return img;
}

/// Low-contrast diagonal gradient centred on gray, so guidance-scaled
/// predictions stay inside [0,1].
inline Image gradient(int w, int h) {
  Image img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float u = w > 1 ? static_cast<float>(x) / (w - 1) : 0.0f;
      const float v = h > 1 ? static_cast<float>(y) / (h - 1) : 0.0f;
      img.at(x, y, 0) = 0.42f + 0.16f * u;
      img.at(x, y, 1) = 0.50f + 0.08f * (v - 0.5f);
      img.at(x, y, 2) = 0.58f - 0.16f * v;
    }
  return img;
}

}  // namespace textures

struct FixtureGarment {
  std::string id;
  std::string display_name;
  std::string garment_class;
  std::string token;
  Image (*texture)(int, int);
  float strength;
  double interest;
  bool chunked;
  bool downloaded;
};

inline constexpr int kFixtureTextureSize = 64;

inline std::vector<FixtureGarment> fixture_garments() {
  return {
      {"stripes-shirt", "Striped Shirt", "shirt", "rtr", &textures::stripes, 1.0f, 3.0, false, true},
      {"checker-dress", "Checkered Dress", "dress", "zq", &textures::checker, 1.0f, 2.0, false, true},
      {"gradient-shirt", "Gradient Shirt", "shirt", "vlx", &textures::gradient, 1.0f, 1.0, true, false},
  };
}

/// Writes toy artifacts for every fixture garment under `out_dir` (one of
/// them chunked in two) plus `catalog.json`. Output bytes depend only on
/// this code.
inline Catalog make_fixture_catalog(const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir / "models", ec);
  if (ec) fail(ErrorCode::io, "cannot create " + (out_dir / "models").string() + ": " + ec.message());
  fs::remove(out_dir / "catalog.json", ec);

  {
    Catalog catalog(out_dir);
    for (const auto& g : fixture_garments()) {
      const Image tex = g.texture(kFixtureTextureSize, kFixtureTextureSize);
      const fs::path single = out_dir / "models" / (g.id + ".mfrw");
      write_toy_artifact(single, g.id, tex, g.strength, g.token, g.garment_class);
      std::string rel = "models/" + g.id + ".mfrw";
      if (g.chunked) {
        write_chunks(single, out_dir / "models", 2);
        fs::remove(single);
        rel = "models/" + manifest_file_name(g.id);
      }
      catalog.register_garment({g.id, g.display_name, g.garment_class, g.token, rel, 0, g.interest, g.downloaded});
    }
  }
  return Catalog(out_dir);
}

/// A synthetic multi-tensor "model": large f16 weight matrices with
/// Gaussian values plus small f32 biases.
inline void make_sample_model(const fs::path& path, std::uint64_t seed = 7) {
  struct Spec {
    const char* name;
    DType dtype;
    Shape shape;
    float sigma;
  };
  const std::vector<Spec> specs = {
      {"text_encoder.token_embedding", DType::f16, {512, 64}, 0.02f},
      {"text_encoder.layer0.mlp.weight", DType::f16, {256, 64}, 0.05f},
      {"text_encoder.layer0.mlp.bias", DType::f32, {256}, 0.01f},
      {"unet.down0.conv.weight", DType::f16, {64, 32, 3, 3}, 0.04f},
      {"unet.down0.conv.bias", DType::f32, {64}, 0.01f},
      {"unet.mid.attn.qkv.weight", DType::f16, {192, 64}, 0.03f},
      {"unet.up0.conv.weight", DType::f16, {32, 64, 3, 3}, 0.04f},
      {"unet.out.bias", DType::f32, {4}, 0.01f},
  };
  CounterStream rng(seed);
  std::vector<ArtifactEntry> tensors;
  for (const auto& s : specs) {
    std::vector<float> data(element_count(s.shape));
    for (auto& v : data) v = s.sigma * static_cast<float>(rng.next_normal());
    tensors.push_back(make_tensor(s.name, s.dtype, s.shape, std::move(data)));
  }
  write_artifact(tensors, {{"model_id", "sample-model"}}, path);
}

/// Loads a garment's toy denoiser from a single artifact or a manifest.
inline ToyDenoiser load_toy_denoiser(const fs::path& artifact_path) {
  return ToyDenoiser::from_artifact(load_any(artifact_path));
}

}  // namespace mfr
