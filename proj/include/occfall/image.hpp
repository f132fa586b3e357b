/*
 * Copyright 2026 The occfall Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "occfall/common.hpp"

namespace occfall {

// Dense row-major single-channel image.
template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  std::vector<T> pixels;

  Image() = default;
  Image(int w, int h, T fill = T{})
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  T& at(int x, int y) {
    assert(x >= 0 && x < width && y >= 0 && y < height);
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
  }
  const T& at(int x, int y) const {
    assert(x >= 0 && x < width && y >= 0 && y < height);
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
  }

  // Edge-replicated access.
  const T& clamped(int x, int y) const {
    return at(std::clamp(x, 0, width - 1), std::clamp(y, 0, height - 1));
  }

  bool same_size(const Image& other) const { return width == other.width && height == other.height; }
  bool empty() const { return pixels.empty(); }

  friend bool operator==(const Image&, const Image&) = default;
};

using GrayImage = Image<std::uint8_t>;

inline std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>(std::lround(0.299 * r + 0.587 * g + 0.114 * b));
}

namespace detail {

inline int read_pnm_int(std::istream& in) {
  int c = in.peek();
  while (in && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else {
      in.get();
    }
    c = in.peek();
  }
  int v = -1;
  if (!(in >> v)) throw IoError("truncated PNM header");
  return v;
}

}  // namespace detail

// Reads binary PGM (P5). Binary PPM (P6) is accepted and converted to luma.
inline GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(concat("cannot open image ", path.string()));
  char magic[2] = {};
  in.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    throw IoError(concat(path.string(), ": not a binary PGM/PPM file"));
  }
  const bool color = magic[1] == '6';
  const int w = detail::read_pnm_int(in);
  const int h = detail::read_pnm_int(in);
  const int maxval = detail::read_pnm_int(in);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw IoError(concat(path.string(), ": unsupported PNM geometry or maxval"));
  }
  in.get();  // single whitespace after maxval
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  std::vector<std::uint8_t> raw(color ? 3 * n : n);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw IoError(concat(path.string(), ": truncated pixel data"));
  }
  GrayImage img(w, h);
  auto rescale = [maxval](int v) {
    return maxval == 255 ? static_cast<std::uint8_t>(v)
                         : static_cast<std::uint8_t>(std::lround(v * 255.0 / maxval));
  };
  if (color) {
    for (std::size_t i = 0; i < n; ++i) {
      img.pixels[i] = luma(rescale(raw[3 * i]), rescale(raw[3 * i + 1]), rescale(raw[3 * i + 2]));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) img.pixels[i] = rescale(raw[i]);
  }
  return img;
}

inline void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(concat("cannot write image ", path.string()));
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw IoError(concat("write failed for ", path.string()));
}

// Area-averaging resample. Each output pixel is the coverage-weighted mean
// of the source pixels under its footprint.
inline GrayImage resize_area(const GrayImage& src, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) throw ValidationError("resize target must be positive");
  if (src.width == out_w && src.height == out_h) return src;

  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;

  // Per-axis lists of (source index, coverage weight).
  auto footprints = [](int out_n, int src_n, double scale) {
    std::vector<std::vector<std::pair<int, double>>> fp(static_cast<std::size_t>(out_n));
    for (int o = 0; o < out_n; ++o) {
      const double a = o * scale;
      const double b = (o + 1) * scale;
      for (int s = static_cast<int>(std::floor(a)); s < std::min(src_n, static_cast<int>(std::ceil(b))); ++s) {
        const double cover = std::min<double>(b, s + 1) - std::max<double>(a, s);
        if (cover > 0) fp[static_cast<std::size_t>(o)].emplace_back(s, cover);
      }
    }
    return fp;
  };
  const auto fx = footprints(out_w, src.width, sx);
  const auto fy = footprints(out_h, src.height, sy);

  GrayImage dst(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      double area = 0.0;
      for (auto [syi, wy] : fy[static_cast<std::size_t>(y)]) {
        for (auto [sxi, wx] : fx[static_cast<std::size_t>(x)]) {
          acc += wx * wy * src.at(sxi, syi);
          area += wx * wy;
        }
      }
      dst.at(x, y) = static_cast<std::uint8_t>(std::clamp<long>(std::lround(acc / area), 0, 255));
    }
  }
  return dst;
}

}  // namespace occfall
