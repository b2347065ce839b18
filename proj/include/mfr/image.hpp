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

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "mfr/error.hpp"
#include "mfr/io.hpp"

namespace mfr {

/// Interleaved float image, row-major HWC. Colour images hold values in
/// [0,1]; working buffers inside the sampler may hold any real value.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

  std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
  std::size_t size() const { return data.size(); }
  float& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  float at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  bool same_dims(const Image& o) const { return width == o.width && height == o.height; }
  bool same_shape(const Image& o) const { return same_dims(o) && channels == o.channels; }

  bool operator==(const Image&) const = default;
};

inline std::uint8_t to_u8(float v) {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

inline float from_u8(std::uint8_t v) { return static_cast<float>(v) / 255.0f; }

inline std::vector<std::uint8_t> image_to_u8(const Image& img) {
  std::vector<std::uint8_t> out(img.data.size());
  std::transform(img.data.begin(), img.data.end(), out.begin(), to_u8);
  return out;
}

inline Image image_from_u8(int w, int h, int c, std::span<const std::uint8_t> bytes) {
  Image img(w, h, c);
  require(bytes.size() == img.data.size(), ErrorCode::invalid_argument, "pixel buffer size mismatch");
  std::transform(bytes.begin(), bytes.end(), img.data.begin(), from_u8);
  return img;
}

/// Encodes an 8-bit RGB (3 channels) or grayscale (1 channel) PNG. Output is
/// deterministic for identical pixels.
inline Bytes encode_png(const Image& img) {
  require(img.channels == 1 || img.channels == 3, ErrorCode::invalid_argument, "PNG export needs 1 or 3 channels");
  const auto pixels = image_to_u8(img);
  png_image pi;
  std::memset(&pi, 0, sizeof pi);
  pi.version = PNG_IMAGE_VERSION;
  pi.width = static_cast<png_uint_32>(img.width);
  pi.height = static_cast<png_uint_32>(img.height);
  pi.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&pi, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    const std::string msg = pi.message;
    png_image_free(&pi);
    fail(ErrorCode::io, "PNG encode failed: " + msg);
  }
  Bytes out(size);
  if (!png_image_write_to_memory(&pi, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    const std::string msg = pi.message;
    png_image_free(&pi);
    fail(ErrorCode::io, "PNG encode failed: " + msg);
  }
  out.resize(size);
  return out;
}

struct PngDims {
  int width = 0;
  int height = 0;
};

/// Reads just the header; throws invalid_image for anything that is not a PNG.
inline PngDims png_dims(std::span<const std::uint8_t> bytes) {
  png_image pi;
  std::memset(&pi, 0, sizeof pi);
  pi.version = PNG_IMAGE_VERSION;
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0 ||
      !png_image_begin_read_from_memory(&pi, bytes.data(), bytes.size())) {
    png_image_free(&pi);
    fail(ErrorCode::invalid_image, "invalid image: not a PNG");
  }
  PngDims d{static_cast<int>(pi.width), static_cast<int>(pi.height)};
  png_image_free(&pi);
  return d;
}

/// Decodes any PNG to 8-bit RGB (channels = 3) or grayscale (channels = 1),
/// returned as floats v/255.
inline Image decode_png(std::span<const std::uint8_t> bytes, int channels) {
  require(channels == 1 || channels == 3, ErrorCode::invalid_argument, "decode_png: channels must be 1 or 3");
  png_image pi;
  std::memset(&pi, 0, sizeof pi);
  pi.version = PNG_IMAGE_VERSION;
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0 ||
      !png_image_begin_read_from_memory(&pi, bytes.data(), bytes.size())) {
    png_image_free(&pi);
    fail(ErrorCode::invalid_image, "invalid image: not a PNG");
  }
  pi.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(pi));
  if (!png_image_finish_read(&pi, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = pi.message;
    png_image_free(&pi);
    fail(ErrorCode::invalid_image, "invalid image: " + msg);
  }
  return image_from_u8(static_cast<int>(pi.width), static_cast<int>(pi.height), channels, buf);
}

inline Image read_png(const fs::path& path, int channels) { return decode_png(read_file(path), channels); }

inline void write_png(const fs::path& path, const Image& img) { write_file_atomic(path, encode_png(img)); }

/// Nearest-neighbour resample to (w, h).
inline Image resize_nearest(const Image& src, int w, int h) {
  Image out(w, h, src.channels);
  for (int y = 0; y < h; ++y) {
    const int sy = std::min(src.height - 1, static_cast<int>(static_cast<long long>(y) * src.height / h));
    for (int x = 0; x < w; ++x) {
      const int sx = std::min(src.width - 1, static_cast<int>(static_cast<long long>(x) * src.width / w));
      for (int c = 0; c < src.channels; ++c) out.at(x, y, c) = src.at(sx, sy, c);
    }
  }
  return out;
}

}  // namespace mfr
