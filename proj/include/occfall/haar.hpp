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

// Dynamic Haar features over short frame windows.
//
// A window of N frames (N = 4 by default) is turned into six channels:
//   appearance  the first frame
//   diff        mean over consecutive pairs of |f[i+1] - f[i]|
//   up/down/left/right
//               mean over pairs of |f[i+1](p + m) - f[i](p)|, the residual
//               left after compensating a one-pixel motion m in that
//               direction (edge pixels replicated). A region moving left
//               has a small `left` channel.
// Filters are rectangle patterns evaluated on these channels through
// integral images.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "occfall/common.hpp"
#include "occfall/image.hpp"

namespace occfall {

enum class Channel : int { appearance = 0, diff, up, down, left, right };
inline constexpr int kNumChannels = 6;

inline const char* to_string(Channel c) {
  static constexpr const char* names[] = {"appearance", "diff", "up", "down", "left", "right"};
  return names[static_cast<int>(c)];
}

inline Channel parse_channel(std::string_view s) {
  for (int i = 0; i < kNumChannels; ++i) {
    if (s == to_string(static_cast<Channel>(i))) return static_cast<Channel>(i);
  }
  throw ValidationError(concat("unknown channel '", s, "'"));
}

inline bool is_shift_channel(Channel c) { return c >= Channel::up; }

// Channel values are held as integer sums over frame pairs; divide by
// `pairs` for the mean. The appearance channel is not scaled.
struct ChannelSet {
  int pairs = 1;
  std::array<Image<std::int32_t>, kNumChannels> channels;

  const Image<std::int32_t>& operator[](Channel c) const { return channels[static_cast<std::size_t>(c)]; }
  Image<std::int32_t>& operator[](Channel c) { return channels[static_cast<std::size_t>(c)]; }

  double scale(Channel c) const { return c == Channel::appearance ? 1.0 : 1.0 / pairs; }
  double value(Channel c, int x, int y) const { return (*this)[c].at(x, y) * scale(c); }
  int width() const { return channels[0].width; }
  int height() const { return channels[0].height; }
};

inline ChannelSet build_channels(std::span<const GrayImage> window) {
  if (window.size() < 2) throw ValidationError("channel window needs at least 2 frames");
  const int w = window[0].width;
  const int h = window[0].height;
  for (const auto& f : window) {
    if (f.width != w || f.height != h) throw ValidationError("channel window frames differ in size");
  }
  ChannelSet cs;
  cs.pairs = static_cast<int>(window.size()) - 1;
  cs[Channel::appearance] = Image<std::int32_t>(w, h);
  for (std::size_t i = 0; i < w * static_cast<std::size_t>(h); ++i) {
    cs[Channel::appearance].pixels[i] = window[0].pixels[i];
  }
  for (int c = 1; c < kNumChannels; ++c) cs.channels[static_cast<std::size_t>(c)] = Image<std::int32_t>(w, h, 0);

  // Motion offsets (dx, dy) per shift channel; image y grows downward.
  static constexpr int dx[] = {0, 0, -1, 1};
  static constexpr int dy[] = {-1, 1, 0, 0};

  for (std::size_t i = 0; i + 1 < window.size(); ++i) {
    const auto& cur = window[i];
    const auto& next = window[i + 1];
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int c = cur.at(x, y);
        cs[Channel::diff].at(x, y) += std::abs(next.at(x, y) - c);
        for (int d = 0; d < 4; ++d) {
          cs.channels[static_cast<std::size_t>(2 + d)].at(x, y) += std::abs(next.clamped(x + dx[d], y + dy[d]) - c);
        }
      }
    }
  }
  return cs;
}

// Summed-area table with a zero first row and column: (W+1) x (H+1).
template <typename Acc = std::int64_t>
class IntegralImage {
 public:
  IntegralImage() = default;

  template <typename T>
  explicit IntegralImage(const Image<T>& img) : width_(img.width), height_(img.height) {
    table_.assign(static_cast<std::size_t>(width_ + 1) * static_cast<std::size_t>(height_ + 1), Acc{0});
    compute(img, table_.data());
  }

  // Writes the (W+1)x(H+1) table of img into out.
  template <typename T>
  static void compute(const Image<T>& img, Acc* out) {
    const std::size_t stride = static_cast<std::size_t>(img.width) + 1;
    std::fill(out, out + stride, Acc{0});
    for (int y = 0; y < img.height; ++y) {
      Acc row = 0;
      Acc* dst = out + (static_cast<std::size_t>(y) + 1) * stride;
      const Acc* above = dst - stride;
      dst[0] = 0;
      for (int x = 0; x < img.width; ++x) {
        row += static_cast<Acc>(img.at(x, y));
        dst[x + 1] = above[x + 1] + row;
      }
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }

  Acc at(int x, int y) const {
    return table_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_ + 1) + static_cast<std::size_t>(x)];
  }

  Acc rect_sum(int x, int y, int w, int h) const {
    if (x < 0 || y < 0 || w < 0 || h < 0 || x + w > width_ || y + h > height_) {
      throw ValidationError(concat("rect (", x, ",", y, ",", w, ",", h, ") outside ", width_, "x", height_));
    }
    return at(x + w, y + h) - at(x + w, y) - at(x, y + h) + at(x, y);
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Acc> table_;
};

enum class FilterKind : int {
  single_rect_sum = 0,
  two_rect_h,
  two_rect_v,
  three_rect_h,
  three_rect_v,
  four_rect,
  motion_direction
};
inline constexpr int kNumFilterKinds = 7;

inline const char* to_string(FilterKind k) {
  static constexpr const char* names[] = {"single_rect_sum", "two_rect_h",  "two_rect_v",      "three_rect_h",
                                          "three_rect_v",    "four_rect",   "motion_direction"};
  return names[static_cast<int>(k)];
}

inline FilterKind parse_filter_kind(std::string_view s) {
  for (int i = 0; i < kNumFilterKinds; ++i) {
    if (s == to_string(static_cast<FilterKind>(i))) return static_cast<FilterKind>(i);
  }
  throw ValidationError(concat("unknown filter kind '", s, "'"));
}

// Sub-rectangle grid (columns, rows) of a kind.
inline std::pair<int, int> kind_grid(FilterKind k) {
  switch (k) {
    case FilterKind::two_rect_h: return {2, 1};
    case FilterKind::two_rect_v: return {1, 2};
    case FilterKind::three_rect_h: return {3, 1};
    case FilterKind::three_rect_v: return {1, 3};
    case FilterKind::four_rect: return {2, 2};
    default: return {1, 1};
  }
}

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  friend bool operator==(const Rect&, const Rect&) = default;
};

// One Haar filter. For motion_direction, `channel` is the shift channel S
// and the response is sum(diff) - sum(S) over the rectangle.
struct FilterSpec {
  Channel channel = Channel::appearance;
  FilterKind kind = FilterKind::single_rect_sum;
  Rect rect;

  friend bool operator==(const FilterSpec&, const FilterSpec&) = default;

  std::string to_text() const {
    return concat(occfall::to_string(channel), ' ', occfall::to_string(kind), ' ', rect.x, ' ', rect.y, ' ', rect.w,
                  ' ', rect.h);
  }

  static FilterSpec from_text(std::string_view line) {
    std::istringstream in{std::string(line)};
    std::string ch, kind;
    FilterSpec f;
    if (!(in >> ch >> kind >> f.rect.x >> f.rect.y >> f.rect.w >> f.rect.h)) {
      throw ValidationError(concat("malformed filter line '", line, "'"));
    }
    f.channel = parse_channel(ch);
    f.kind = parse_filter_kind(kind);
    return f;
  }

  void validate(int width, int height) const {
    const auto [gc, gr] = kind_grid(kind);
    if (rect.w < 1 || rect.h < 1 || rect.x < 0 || rect.y < 0 || rect.x + rect.w > width ||
        rect.y + rect.h > height) {
      throw ValidationError(concat("filter '", to_text(), "' outside ", width, "x", height));
    }
    if (rect.w % gc != 0 || rect.h % gr != 0) {
      throw ValidationError(concat("filter '", to_text(), "' does not divide into its sub-rectangles"));
    }
    if (kind == FilterKind::motion_direction && !is_shift_channel(channel)) {
      throw ValidationError("motion_direction filters need a shift channel");
    }
  }

  // (sub-rect, channel, weight) terms whose weighted sums give the response.
  struct Term {
    Channel channel;
    Rect rect;
    int weight;
  };

  std::vector<Term> terms() const {
    const auto [gc, gr] = kind_grid(kind);
    const int cw = rect.w / gc;
    const int chh = rect.h / gr;
    auto cell = [&](int i, int j) { return Rect{rect.x + i * cw, rect.y + j * chh, cw, chh}; };
    switch (kind) {
      case FilterKind::single_rect_sum: return {{channel, rect, 1}};
      case FilterKind::two_rect_h: return {{channel, cell(0, 0), 1}, {channel, cell(1, 0), -1}};
      case FilterKind::two_rect_v: return {{channel, cell(0, 0), 1}, {channel, cell(0, 1), -1}};
      case FilterKind::three_rect_h:
        return {{channel, cell(0, 0), -1}, {channel, cell(1, 0), 1}, {channel, cell(2, 0), -1}};
      case FilterKind::three_rect_v:
        return {{channel, cell(0, 0), -1}, {channel, cell(0, 1), 1}, {channel, cell(0, 2), -1}};
      case FilterKind::four_rect:
        return {{channel, cell(0, 0), 1}, {channel, cell(1, 0), -1}, {channel, cell(0, 1), -1}, {channel, cell(1, 1), 1}};
      case FilterKind::motion_direction: return {{Channel::diff, rect, 1}, {channel, rect, -1}};
    }
    return {};
  }
};

struct Shape {
  int w = 0;
  int h = 0;
  friend bool operator==(const Shape&, const Shape&) = default;
};

// Square, 2:1 and 1:2 shapes for each side length.
inline std::vector<Shape> shapes_from_sides(const std::vector<int>& sides) {
  std::vector<Shape> out;
  for (int s : sides) {
    for (Shape sh : {Shape{s, s}, Shape{2 * s, s}, Shape{s, 2 * s}}) {
      if (std::find(out.begin(), out.end(), sh) == out.end()) out.push_back(sh);
    }
  }
  return out;
}

inline std::vector<FilterKind> all_filter_kinds() {
  std::vector<FilterKind> k;
  for (int i = 0; i < kNumFilterKinds; ++i) k.push_back(static_cast<FilterKind>(i));
  return k;
}

struct BankConfig {
  int width = 64;
  int height = 48;
  int pos_step = 4;
  std::vector<Shape> shapes = shapes_from_sides({8, 16, 32});
  std::vector<FilterKind> kinds = all_filter_kinds();
};

struct FilterBank {
  int width = 0;
  int height = 0;
  std::vector<FilterSpec> filters;

  std::size_t size() const { return filters.size(); }

  std::string to_text() const {
    std::string out = concat("# occfall filter bank v1\n", width, ' ', height, ' ', filters.size(), '\n');
    for (const auto& f : filters) {
      out += f.to_text();
      out += '\n';
    }
    return out;
  }

  std::uint64_t checksum() const {
    Fnv1a h;
    h.update(to_text());
    return h.value();
  }

  static FilterBank from_text(std::istream& in) {
    FilterBank bank;
    std::string line;
    std::size_t expected = 0;
    bool header = false;
    while (std::getline(in, line)) {
      if (trim(line).empty() || line.front() == '#') continue;
      if (!header) {
        std::istringstream hs(line);
        if (!(hs >> bank.width >> bank.height >> expected)) throw ValidationError("malformed filter bank header");
        header = true;
        continue;
      }
      bank.filters.push_back(FilterSpec::from_text(line));
      bank.filters.back().validate(bank.width, bank.height);
    }
    if (!header || bank.filters.size() != expected) throw ValidationError("filter bank truncated");
    return bank;
  }

  FilterBank subset(std::span<const int> indices) const {
    FilterBank out{width, height, {}};
    for (int i : indices) {
      if (i < 0 || static_cast<std::size_t>(i) >= filters.size()) {
        throw ValidationError(concat("filter index ", i, " outside bank of ", filters.size()));
      }
      out.filters.push_back(filters[static_cast<std::size_t>(i)]);
    }
    return out;
  }
};

inline void save_bank(const fs::path& path, const FilterBank& bank) {
  std::ofstream out(path);
  if (!out) throw IoError(concat("cannot write ", path.string()));
  out << bank.to_text();
}

inline FilterBank load_bank(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(concat("cannot open ", path.string()));
  return FilterBank::from_text(in);
}

// Order: channel, kind, shape, y, x. Grid kinds trim the shape down to a
// multiple of their grid; motion_direction is enumerated under the four
// shift channels only.
inline FilterBank enumerate_filters(const BankConfig& cfg) {
  if (cfg.width < 8 || cfg.height < 8) throw ValidationError("filter bank needs at least 8x8 pixels");
  if (cfg.pos_step < 1) throw ValidationError("pos_step must be >= 1");
  FilterBank bank{cfg.width, cfg.height, {}};
  std::vector<FilterKind> kinds = cfg.kinds;
  std::sort(kinds.begin(), kinds.end());
  kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());

  for (int c = 0; c < kNumChannels; ++c) {
    const auto channel = static_cast<Channel>(c);
    for (FilterKind kind : kinds) {
      if (kind == FilterKind::motion_direction && !is_shift_channel(channel)) continue;
      const auto [gc, gr] = kind_grid(kind);
      std::vector<Shape> shapes;
      for (Shape s : cfg.shapes) {
        Shape t{gc * (s.w / gc), gr * (s.h / gr)};
        if (t.w < 1 || t.h < 1) continue;
        if (std::find(shapes.begin(), shapes.end(), t) == shapes.end()) shapes.push_back(t);
      }
      for (Shape s : shapes) {
        for (int y = 0; y + s.h <= cfg.height; y += cfg.pos_step) {
          for (int x = 0; x + s.w <= cfg.width; x += cfg.pos_step) {
            bank.filters.push_back({channel, kind, {x, y, s.w, s.h}});
          }
        }
      }
    }
  }
  return bank;
}

// A bank flattened to weighted lookups into six stacked integral images.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(FilterBank bank) : bank_(std::move(bank)) {
    const std::size_t stride = static_cast<std::size_t>(bank_.width) + 1;
    plane_ = stride * (static_cast<std::size_t>(bank_.height) + 1);
    starts_.reserve(bank_.size() + 1);
    starts_.push_back(0);
    for (const auto& f : bank_.filters) {
      f.validate(bank_.width, bank_.height);
      std::map<std::uint32_t, std::int32_t> corners;
      bool motion = false;
      for (const auto& t : f.terms()) {
        motion = motion || t.channel != Channel::appearance;
        const std::size_t base = static_cast<std::size_t>(t.channel) * plane_;
        auto off = [&](int x, int y) {
          return static_cast<std::uint32_t>(base + static_cast<std::size_t>(y) * stride + static_cast<std::size_t>(x));
        };
        const auto& r = t.rect;
        corners[off(r.x + r.w, r.y + r.h)] += t.weight;
        corners[off(r.x + r.w, r.y)] -= t.weight;
        corners[off(r.x, r.y + r.h)] -= t.weight;
        corners[off(r.x, r.y)] += t.weight;
      }
      for (auto [o, wgt] : corners) {
        if (wgt == 0) continue;
        offsets_.push_back(o);
        weights_.push_back(wgt);
      }
      starts_.push_back(static_cast<std::uint32_t>(offsets_.size()));
      motion_.push_back(motion);
    }
  }

  const FilterBank& bank() const { return bank_; }
  std::size_t size() const { return bank_.size(); }

  // Scratch buffers, one per thread.
  struct Workspace {
    std::vector<std::int64_t> tables;
    std::vector<GrayImage> resized;
  };

  // Frames of a different size are area-downscaled to the bank resolution.
  void extract(std::span<const GrayImage> window, std::span<float> out, Workspace& ws) const {
    if (out.size() != bank_.size()) throw ValidationError("feature output size differs from bank size");
    std::span<const GrayImage> frames = window;
    if (!window.empty() && (window[0].width != bank_.width || window[0].height != bank_.height)) {
      ws.resized.clear();
      for (const auto& f : window) ws.resized.push_back(resize_area(f, bank_.width, bank_.height));
      frames = ws.resized;
    }
    const ChannelSet cs = build_channels(frames);
    ws.tables.resize(plane_ * kNumChannels);
    for (int c = 0; c < kNumChannels; ++c) {
      IntegralImage<std::int64_t>::compute(cs.channels[static_cast<std::size_t>(c)],
                                           ws.tables.data() + static_cast<std::size_t>(c) * plane_);
    }
    const double motion_scale = 1.0 / cs.pairs;
    const std::int64_t* t = ws.tables.data();
    for (std::size_t f = 0; f < bank_.size(); ++f) {
      std::int64_t acc = 0;
      for (std::uint32_t k = starts_[f]; k < starts_[f + 1]; ++k) acc += weights_[k] * t[offsets_[k]];
      out[f] = static_cast<float>(motion_[f] ? static_cast<double>(acc) * motion_scale : static_cast<double>(acc));
    }
  }

  std::vector<float> extract(std::span<const GrayImage> window) const {
    Workspace ws;
    std::vector<float> out(bank_.size());
    extract(window, out, ws);
    return out;
  }

 private:
  FilterBank bank_;
  std::size_t plane_ = 0;
  std::vector<std::uint32_t> starts_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::int32_t> weights_;
  std::vector<bool> motion_;
};

// Reference evaluation of one filter straight from the channel images.
inline double evaluate_filter(const ChannelSet& cs, const FilterSpec& f) {
  double total = 0.0;
  for (const auto& t : f.terms()) {
    const IntegralImage<std::int64_t> ii(cs[t.channel]);
    total += t.weight * static_cast<double>(ii.rect_sum(t.rect.x, t.rect.y, t.rect.w, t.rect.h)) * cs.scale(t.channel);
  }
  return total;
}

// Row-major float matrix; one row per segment.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}

  std::span<float> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const float> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  float at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  float& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }

  FeatureMatrix select_rows(std::span<const std::size_t> idx) const {
    FeatureMatrix out(idx.size(), cols);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      std::copy_n(data.data() + idx[k] * cols, cols, out.data.data() + k * cols);
    }
    return out;
  }

  FeatureMatrix select_cols(std::span<const int> idx) const {
    FeatureMatrix out(rows, idx.size());
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t k = 0; k < idx.size(); ++k) {
        out.data[i * idx.size() + k] = data[i * cols + static_cast<std::size_t>(idx[k])];
      }
    }
    return out;
  }
};

inline constexpr char kFeatureMagic[4] = {'O', 'F', 'M', '1'};

namespace detail {

template <typename T>
void write_le(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (in.gcount() != sizeof(T)) throw IoError("truncated binary file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

}  // namespace detail

// Layout: "OFM1", uint64 rows, uint64 cols, rows*cols float32, all little-endian.
inline void write_feature_matrix(const fs::path& path, const FeatureMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(concat("cannot write ", path.string()));
  out.write(kFeatureMagic, 4);
  detail::write_le<std::uint64_t>(out, m.rows);
  detail::write_le<std::uint64_t>(out, m.cols);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(m.data.data()), static_cast<std::streamsize>(m.data.size() * sizeof(float)));
  } else {
    for (float v : m.data) detail::write_le(out, v);
  }
  if (!out) throw IoError(concat("write failed for ", path.string()));
}

inline FeatureMatrix read_feature_matrix(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(concat("cannot open ", path.string()));
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kFeatureMagic, 4) != 0) {
    throw IoError(concat(path.string(), ": not a feature matrix"));
  }
  const auto rows = detail::read_le<std::uint64_t>(in);
  const auto cols = detail::read_le<std::uint64_t>(in);
  FeatureMatrix m(rows, cols);
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(m.data.data()), static_cast<std::streamsize>(m.data.size() * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(m.data.size() * sizeof(float))) {
      throw IoError(concat(path.string(), ": truncated payload"));
    }
  } else {
    for (auto& v : m.data) v = detail::read_le<float>(in);
  }
  return m;
}

}  // namespace occfall
