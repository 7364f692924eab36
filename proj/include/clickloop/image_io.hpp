// Copyright 2026 The clickloop Authors
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

// PNG (via libpng's simplified API) and binary PPM/PGM reading and writing.

#pragma once

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "clickloop/errors.hpp"
#include "clickloop/grid.hpp"

namespace clickloop {

/// 8-bit interleaved pixels straight from a file.
struct RawImage {
  Shape shape{};
  int channels = 0;  // 1 (gray) or 3 (RGB)
  std::vector<std::uint8_t> pixels;
};

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

inline bool is_png(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kSig, 8) == 0;
}

/// Decodes a PNG converting to `channels` (1 or 3) 8-bit channels.
inline RawImage decode_png(std::span<const std::uint8_t> bytes, int channels) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw IoError(std::string("PNG decode failed: ") + img.message);
  }
  img.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  RawImage out;
  out.shape = {static_cast<int>(img.height), static_cast<int>(img.width)};
  out.channels = channels;
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    throw IoError(std::string("PNG decode failed: ") + img.message);
  }
  if (out.shape.height < 1 || out.shape.width < 1) throw IoError("PNG has no pixels");
  return out;
}

inline std::vector<std::uint8_t> encode_png(const RawImage& raw) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(raw.shape.width);
  img.height = static_cast<png_uint_32>(raw.shape.height);
  img.format = raw.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, raw.pixels.data(), 0, nullptr)) {
    throw IoError(std::string("PNG encode failed: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, raw.pixels.data(), 0, nullptr)) {
    throw IoError(std::string("PNG encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

namespace detail {

inline int read_pnm_int(std::istream& in) {
  int c = in.peek();
  while (c == '#' || std::isspace(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else {
      in.get();
    }
    c = in.peek();
  }
  int v = -1;
  in >> v;
  if (!in) throw IoError("malformed PNM header");
  return v;
}

}  // namespace detail

/// Binary PGM (P5) or PPM (P6) with maxval 255.
inline RawImage decode_pnm(std::span<const std::uint8_t> bytes) {
  std::string text(bytes.begin(), bytes.end());
  std::istringstream in(text);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P6") throw IoError("unsupported PNM type '" + magic + "'");
  RawImage out;
  out.channels = magic == "P6" ? 3 : 1;
  out.shape.width = detail::read_pnm_int(in);
  out.shape.height = detail::read_pnm_int(in);
  const int maxval = detail::read_pnm_int(in);
  if (out.shape.width < 1 || out.shape.height < 1 || maxval != 255) {
    throw IoError("unsupported PNM dimensions or maxval");
  }
  in.get();  // single whitespace before the raster
  const std::size_t n = out.shape.size() * static_cast<std::size_t>(out.channels);
  const auto offset = static_cast<std::size_t>(in.tellg());
  if (offset + n > bytes.size()) throw IoError("truncated PNM raster");
  out.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                    bytes.begin() + static_cast<std::ptrdiff_t>(offset + n));
  return out;
}

inline std::vector<std::uint8_t> encode_pnm(const RawImage& raw) {
  const std::string header = std::string(raw.channels == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(raw.shape.width) + " " +
                             std::to_string(raw.shape.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), raw.pixels.begin(), raw.pixels.end());
  return out;
}

inline RawImage decode_any(std::span<const std::uint8_t> bytes, int png_channels) {
  if (is_png(bytes)) return decode_png(bytes, png_channels);
  if (bytes.size() >= 2 && bytes[0] == 'P') return decode_pnm(bytes);
  throw IoError("unrecognised image format");
}

/// Float colour image from 8-bit pixels; grayscale is replicated to RGB.
inline Image image_from_raw(const RawImage& raw) {
  Image img(raw.shape);
  for (std::size_t i = 0; i < raw.shape.size(); ++i) {
    for (int ch = 0; ch < 3; ++ch) {
      const std::uint8_t v = raw.channels == 3 ? raw.pixels[i * 3 + ch] : raw.pixels[i];
      img.rgb[i * 3 + ch] = static_cast<float>(v) / 255.0F;
    }
  }
  return img;
}

/// Colour image from PNG/PPM/PGM bytes.
inline Image decode_image(std::span<const std::uint8_t> bytes) { return image_from_raw(decode_any(bytes, 3)); }

/// Single-channel mask; values >= 128 are foreground.
inline BinaryMask decode_mask(std::span<const std::uint8_t> bytes) {
  RawImage raw = decode_any(bytes, 1);
  BinaryMask m(raw.shape);
  for (std::size_t i = 0; i < raw.shape.size(); ++i) {
    const std::uint8_t v = raw.channels == 3 ? raw.pixels[i * 3] : raw.pixels[i];
    m.values()[i] = v >= 128 ? 1 : 0;
  }
  return m;
}

inline RawImage to_raw(const Image& img) {
  RawImage raw{img.shape, 3, std::vector<std::uint8_t>(img.rgb.size())};
  for (std::size_t i = 0; i < img.rgb.size(); ++i) {
    raw.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(img.rgb[i], 0.0F, 1.0F) * 255.0F));
  }
  return raw;
}

inline RawImage to_raw(const BinaryMask& m) {
  RawImage raw{m.shape(), 1, std::vector<std::uint8_t>(m.size())};
  for (std::size_t i = 0; i < m.size(); ++i) raw.pixels[i] = m.values()[i] ? 255 : 0;
  return raw;
}

/// 8-bit quantisation of a probability map, for display.
inline RawImage to_raw(const ProbabilityMap& p) {
  RawImage raw{p.shape(), 1, std::vector<std::uint8_t>(p.size())};
  for (std::size_t i = 0; i < p.size(); ++i) {
    raw.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(p.values()[i], 0.0, 1.0) * 255.0));
  }
  return raw;
}

inline Image load_image(const std::filesystem::path& path) {
  try {
    return decode_image(read_file_bytes(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline BinaryMask load_mask(const std::filesystem::path& path) {
  try {
    return decode_mask(read_file_bytes(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace clickloop
