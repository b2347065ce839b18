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

#include <cstdint>
#include <string>
#include <string_view>

#include "mfr/diffusion.hpp"
#include "mfr/rng.hpp"

namespace mfr {

inline constexpr std::size_t kConditionWidth = 16;

/// "a photo of a <token> <class>", with "an" when the token is spoken with a
/// leading vowel sound. Tokens are rare strings read letter by letter, so
/// "rtr" ("ar-tee-ar") takes "an" while "zq" takes "a".
inline std::string make_prompt(std::string_view identifier_token, std::string_view garment_class) {
  constexpr std::string_view vowel_sound = "aeioufhlmnrsxAEIOUFHLMNRSX";
  const bool an = !identifier_token.empty() && vowel_sound.find(identifier_token.front()) != std::string_view::npos;
  std::string p = an ? "a photo of an " : "a photo of a ";
  p += identifier_token;
  p += ' ';
  p += garment_class;
  return p;
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Stand-in text encoder: a stable hash of the prompt expanded into a
/// fixed-width vector in [-1, 1).
inline Condition encode_prompt(std::string_view prompt) {
  CounterStream rng(fnv1a64(prompt));
  Condition c(kConditionWidth);
  for (auto& v : c) v = static_cast<float>(2.0 * rng.next_unit() - 1.0);
  return c;
}

}  // namespace mfr
