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

// Deterministic DDIM sampling with classifier-free guidance, mask-constrained
// inpainting, and the eraser blend.
//
// Steps are numbered t = T..1; alpha_bar(t) comes from the schedule and
// alpha_bar(0) is defined as 1 so the last step lands on the clean estimate.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mfr/error.hpp"
#include "mfr/image.hpp"
#include "mfr/rng.hpp"

namespace mfr {

struct Schedule {
  std::vector<float> beta;
  std::vector<float> alpha;
  std::vector<float> alpha_bar;

  int steps() const { return static_cast<int>(beta.size()); }

  /// alpha_bar for 1-based step t; t = 0 gives 1.
  float alpha_bar_at(int t) const {
    require(t >= 0 && t <= steps(), ErrorCode::invalid_argument, "step " + std::to_string(t) + " out of range");
    return t == 0 ? 1.0f : alpha_bar[static_cast<std::size_t>(t - 1)];
  }
};

/// Linear beta from 1e-4 to 0.02 over T steps; cumulative products in f64.
inline Schedule make_schedule(int steps) {
  require(steps >= 1, ErrorCode::invalid_argument, "schedule needs at least one step");
  constexpr double beta_start = 1e-4, beta_end = 0.02;
  Schedule s;
  double cumulative = 1.0;
  for (int i = 0; i < steps; ++i) {
    const double b = steps == 1 ? beta_start : beta_start + (beta_end - beta_start) * i / (steps - 1);
    cumulative *= 1.0 - b;
    s.beta.push_back(static_cast<float>(b));
    s.alpha.push_back(static_cast<float>(1.0 - b));
    s.alpha_bar.push_back(static_cast<float>(cumulative));
  }
  return s;
}

using Condition = std::vector<float>;

struct Timestep {
  int t = 1;
  float alpha_bar = 1.0f;
};

/// Predicts the noise component of x_t. Must be deterministic in its
/// arguments; `cond == nullptr` asks for the unconditional prediction.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Image predict(const Image& x_t, const Timestep& step, const Condition* cond) const = 0;
};

/// eps_u + w * (eps_c - eps_u), evaluated in f64 so that w = 0 and w = 1
/// reproduce their endpoints exactly.
inline Image cfg_combine(const Image& eps_uncond, const Image& eps_cond, float w) {
  require(eps_uncond.same_shape(eps_cond), ErrorCode::shape_mismatch, "cfg_combine: shapes differ");
  require(std::isfinite(w), ErrorCode::invalid_argument, "guidance weight must be finite");
  Image out = eps_uncond;
  const double wd = w;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double u = eps_uncond.data[i];
    out.data[i] = static_cast<float>(u + wd * (static_cast<double>(eps_cond.data[i]) - u));
  }
  return out;
}

inline Image predict_x0(const Image& x_t, const Image& eps, float alpha_bar_t) {
  require(x_t.same_shape(eps), ErrorCode::shape_mismatch, "predict_x0: shapes differ");
  const float sa = std::sqrt(alpha_bar_t), sn = std::sqrt(1.0f - alpha_bar_t);
  Image x0 = x_t;
  for (std::size_t i = 0; i < x0.data.size(); ++i) x0.data[i] = (x_t.data[i] - sn * eps.data[i]) / sa;
  return x0;
}

/// Deterministic DDIM update between explicit noise levels.
inline Image ddim_update(const Image& x_t, const Image& eps, float alpha_bar_t, float alpha_bar_prev) {
  Image x = predict_x0(x_t, eps, alpha_bar_t);
  const float sa = std::sqrt(alpha_bar_prev), sn = std::sqrt(1.0f - alpha_bar_prev);
  for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] = sa * x.data[i] + sn * eps.data[i];
  return x;
}

inline Image ddim_step(const Image& x_t, const Image& eps, int t, const Schedule& schedule) {
  require(t >= 1 && t <= schedule.steps(), ErrorCode::invalid_argument, "ddim_step: t out of range");
  return ddim_update(x_t, eps, schedule.alpha_bar_at(t), schedule.alpha_bar_at(t - 1));
}

struct GenerationParams {
  float guidance = 5.0f;
  int steps = 20;
  std::uint64_t seed = 0;

  void validate() const {
    require(steps >= 1, ErrorCode::invalid_argument, "steps must be >= 1");
    require(std::isfinite(guidance) && guidance >= 0.0f, ErrorCode::invalid_argument,
            "guidance must be finite and >= 0");
  }
};

/// Keeps x where the binary mask is set and substitutes the forward-noised
/// known image elsewhere: (1 - m_b) * (sqrt(ab) x0 + sqrt(1 - ab) noise) + m_b * x.
inline void reimpose_known(Image& x, const Image& known_x0, const std::vector<std::uint8_t>& mask_bin,
                           float alpha_bar_prev, const std::vector<float>& noise) {
  const float sa = std::sqrt(alpha_bar_prev), sn = std::sqrt(1.0f - alpha_bar_prev);
  const int c = x.channels;
  for (std::size_t p = 0; p < x.pixels(); ++p) {
    if (mask_bin[p]) continue;
    for (int k = 0; k < c; ++k) {
      const std::size_t i = p * c + k;
      x.data[i] = sa * known_x0.data[i] + sn * noise[i];
    }
  }
}

inline void check_mask(const Image& mask, const Image& target) {
  require(mask.channels == 1, ErrorCode::dim_mismatch, "mask must be single-channel");
  require(mask.same_dims(target), ErrorCode::dim_mismatch,
          "mask is " + std::to_string(mask.width) + "x" + std::to_string(mask.height) + " but image is " +
              std::to_string(target.width) + "x" + std::to_string(target.height));
}

/// Optional per-step hook: (t, x_{t-1} after re-imposition).
using StepObserver = std::function<void(int, const Image&)>;

/// Regenerates the masked region of `original` (values in [0,1]). Pixels with
/// mask 0 come back bit-identical. All randomness comes from one stream
/// seeded by `params.seed`: first x_T, then one noise image per step.
inline Image inpaint_generate(const Image& original, const Image& mask, const Denoiser& denoiser,
                              const Condition& cond, const GenerationParams& params,
                              const StepObserver& observer = {}) {
  params.validate();
  require(original.channels >= 1, ErrorCode::invalid_argument, "image has no channels");
  check_mask(mask, original);
  for (float v : original.data) {
    require(v >= 0.0f && v <= 1.0f, ErrorCode::invalid_argument, "image values must lie in [0,1]");
  }

  const Schedule schedule = make_schedule(params.steps);
  Image soft = mask;
  std::vector<std::uint8_t> binary(mask.pixels());
  for (std::size_t p = 0; p < mask.pixels(); ++p) {
    soft.data[p] = std::clamp(mask.data[p], 0.0f, 1.0f);
    binary[p] = soft.data[p] >= 0.5f ? 1 : 0;
  }

  Image known = original;
  for (auto& v : known.data) v = 2.0f * v - 1.0f;

  CounterStream rng(params.seed);
  auto draw = [&](std::vector<float>& buf) {
    for (auto& v : buf) v = static_cast<float>(rng.next_normal());
  };

  Image x(original.width, original.height, original.channels);
  draw(x.data);
  std::vector<float> noise(x.data.size());

  for (int t = params.steps; t >= 1; --t) {
    const Timestep step{t, schedule.alpha_bar_at(t)};
    const Image eps_u = denoiser.predict(x, step, nullptr);
    const Image eps_c = denoiser.predict(x, step, &cond);
    require(eps_u.same_shape(x) && eps_c.same_shape(x), ErrorCode::shape_mismatch,
            "denoiser output shape differs from its input");
    const Image eps = cfg_combine(eps_u, eps_c, params.guidance);
    x = ddim_step(x, eps, t, schedule);
    draw(noise);
    reimpose_known(x, known, binary, schedule.alpha_bar_at(t - 1), noise);
    if (observer) observer(t, x);
  }

  Image out = original;
  const int c = original.channels;
  for (std::size_t p = 0; p < original.pixels(); ++p) {
    const float m = soft.data[p];
    for (int k = 0; k < c; ++k) {
      const std::size_t i = p * c + k;
      const float generated = std::clamp((x.data[i] + 1.0f) * 0.5f, 0.0f, 1.0f);
      out.data[i] = std::clamp((1.0f - m) * original.data[i] + m * generated, 0.0f, 1.0f);
    }
  }
  return out;
}

/// e * original + (1 - e) * current, with a single-channel e broadcast over
/// colour channels.
inline Image erase_blend(const Image& original, const Image& current, const Image& eraser) {
  require(original.same_shape(current), ErrorCode::dim_mismatch, "erase_blend: original and current differ in size");
  check_mask(eraser, original);
  Image out = current;
  const int c = original.channels;
  for (std::size_t p = 0; p < original.pixels(); ++p) {
    const float e = std::clamp(eraser.data[p], 0.0f, 1.0f);
    for (int k = 0; k < c; ++k) {
      const std::size_t i = p * c + k;
      out.data[i] = e * original.data[i] + (1.0f - e) * current.data[i];
    }
  }
  return out;
}

}  // namespace mfr
