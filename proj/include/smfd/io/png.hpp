// Copyright 2026 The SMFD Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <png.h>

#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "smfd/error.hpp"
#include "smfd/tensor.hpp"

namespace smfd {

// 8-bit interleaved pixels, 1 (gray) or 3 (RGB) channels.
struct Image8 {
  int height = 0, width = 0, channels = 0;
  std::vector<std::uint8_t> pixels;

  bool operator==(const Image8&) const = default;

  template <typename T = float>
  Tensor<T> tensor() const {
    return Tensor<T>({height, width, channels}, std::vector<T>(pixels.begin(), pixels.end()));
  }
};

namespace detail {

inline png_uint_32 png_format(int channels) {
  if (channels == 1) return PNG_FORMAT_GRAY;
  if (channels == 3) return PNG_FORMAT_RGB;
  throw InputError("PNG images must have 1 or 3 channels, got " + std::to_string(channels));
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("cannot write '" + path + "'");
}

}  // namespace detail

// Any PNG converted to `channels` by libpng (alpha composited onto black). With
// `exact_gray`, colour or palette files are rejected so label values are never remapped.
inline Image8 decode_png(const std::vector<std::uint8_t>& bytes, int channels, bool exact_gray = false,
                         const std::string& what = "PNG") {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
    throw InputError(what + ": " + img.message);
  if (exact_gray && (img.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_COLORMAP | PNG_FORMAT_FLAG_LINEAR))) {
    png_image_free(&img);
    throw InputError(what + ": label masks must be 8-bit grayscale PNGs");
  }
  img.format = detail::png_format(channels);
  Image8 out{static_cast<int>(img.height), static_cast<int>(img.width), channels, {}};
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  const png_color black{0, 0, 0};
  if (!png_image_finish_read(&img, &black, out.pixels.data(), 0, nullptr)) throw InputError(what + ": " + img.message);
  return out;
}

inline Image8 read_png(const std::string& path, int channels, bool exact_gray = false) {
  return decode_png(detail::read_file(path), channels, exact_gray, "'" + path + "'");
}

// libpng's simplified writer emits IHDR, a constant sRGB chunk, IDAT and IEND; no
// timestamps, so equal pixels always give equal bytes.
inline std::vector<std::uint8_t> encode_png(const Image8& image) {
  if (image.height <= 0 || image.width <= 0) throw InputError("PNG extents must be positive");
  if (image.pixels.size() != static_cast<std::size_t>(image.height) * image.width * image.channels)
    throw ShapeError("PNG pixel buffer does not match its extents");
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = detail::png_format(image.channels);
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(img, size, 0, image.pixels.data(), 0, nullptr))
    throw InputError(std::string("PNG encode: ") + img.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.pixels.data(), 0, nullptr))
    throw InputError(std::string("PNG encode: ") + img.message);
  out.resize(size);
  return out;
}

inline void write_png(const std::string& path, const Image8& image) { detail::write_file(path, encode_png(image)); }

}  // namespace smfd
