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

#include <stdexcept>
#include <string>
#include <string_view>

namespace mfr {

enum class ErrorCode {
  invalid_argument,
  io,
  bad_magic,
  unsupported_version,
  truncated,
  malformed_header,
  bad_region,
  invalid_tensor,
  duplicate_name,
  non_finite,
  index_out_of_range,
  shape_mismatch,
  missing_chunk,
  digest_mismatch,
  duplicate,
  verification_failed,
  unknown_garment,
  invalid_image,
  image_too_large,
  unknown_session,
  dim_mismatch,
  no_mask,
  model_unavailable,
  no_result,
};

constexpr std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::io: return "io";
    case ErrorCode::bad_magic: return "bad_magic";
    case ErrorCode::unsupported_version: return "unsupported_version";
    case ErrorCode::truncated: return "truncated";
    case ErrorCode::malformed_header: return "malformed_header";
    case ErrorCode::bad_region: return "bad_region";
    case ErrorCode::invalid_tensor: return "invalid_tensor";
    case ErrorCode::duplicate_name: return "duplicate_name";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::index_out_of_range: return "index_out_of_range";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::missing_chunk: return "missing_chunk";
    case ErrorCode::digest_mismatch: return "digest_mismatch";
    case ErrorCode::duplicate: return "duplicate";
    case ErrorCode::verification_failed: return "verification_failed";
    case ErrorCode::unknown_garment: return "unknown_garment";
    case ErrorCode::invalid_image: return "invalid_image";
    case ErrorCode::image_too_large: return "image_too_large";
    case ErrorCode::unknown_session: return "unknown_session";
    case ErrorCode::dim_mismatch: return "dim_mismatch";
    case ErrorCode::no_mask: return "no_mask";
    case ErrorCode::model_unavailable: return "model_unavailable";
    case ErrorCode::no_result: return "no_result";
  }
  return "unknown";
}

/// The one exception type thrown by the toolkit; `code()` is stable and
/// machine-readable, `what()` is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace mfr
