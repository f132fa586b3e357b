// Copyright 2026 The occfall Authors
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

#include <chrono>
#include <fstream>

#include "test_util.hpp"

namespace occfall {
namespace {

std::vector<GrayImage> random_window(int w, int h, Rng& r, int frames = 4) {
  std::vector<GrayImage> out;
  for (int i = 0; i < frames; ++i) out.push_back(testing::random_image(w, h, r));
  return out;
}

// Straight per-pixel definition of one channel value.
double channel_oracle(const std::vector<GrayImage>& win, Channel c, int x, int y) {
  if (c == Channel::appearance) return win[0].at(x, y);
  static const std::map<Channel, std::pair<int, int>> shift = {
      {Channel::diff, {0, 0}}, {Channel::up, {0, -1}}, {Channel::down, {0, 1}}, {Channel::left, {-1, 0}},
      {Channel::right, {1, 0}}};
  const auto [dx, dy] = shift.at(c);
  double s = 0;
  for (std::size_t i = 0; i + 1 < win.size(); ++i) {
    const int nx = std::clamp(x + dx, 0, win[i].width - 1);
    const int ny = std::clamp(y + dy, 0, win[i].height - 1);
    s += std::abs(int(win[i + 1].at(nx, ny)) - int(win[i].at(x, y)));
  }
  return s / static_cast<double>(win.size() - 1);
}

double rect_oracle(const std::vector<GrayImage>& win, Channel c, const Rect& r) {
  double s = 0;
  for (int y = r.y; y < r.y + r.h; ++y) {
    for (int x = r.x; x < r.x + r.w; ++x) s += channel_oracle(win, c, x, y);
  }
  return s;
}

double filter_oracle(const std::vector<GrayImage>& win, const FilterSpec& f) {
  double s = 0;
  for (const auto& t : f.terms()) s += t.weight * rect_oracle(win, t.channel, t.rect);
  return s;
}

TEST(Channels, StaticSceneHasNoMotion) {
  // flat frames: every motion channel vanishes
  const std::vector<GrayImage> flat(4, GrayImage(16, 12, 90));
  const auto cs = build_channels(flat);
  for (int c = 1; c < kNumChannels; ++c) {
    for (auto v : cs.channels[static_cast<std::size_t>(c)].pixels) ASSERT_EQ(v, 0);
  }
  // textured frames: no temporal difference, A is the frame, and the shift
  // channels reduce to the spatial neighbour difference
  Rng r(1);
  const auto f = testing::random_image(16, 12, r);
  const std::vector<GrayImage> win(4, f);
  const auto ct = build_channels(win);
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 16; ++x) {
      EXPECT_EQ(ct.value(Channel::appearance, x, y), f.at(x, y));
      EXPECT_EQ(ct.value(Channel::diff, x, y), 0.0);
      EXPECT_EQ(ct.value(Channel::right, x, y), std::abs(int(f.clamped(x + 1, y)) - int(f.at(x, y))));
    }
  }
}

TEST(Channels, SinglePixelChange) {
  std::vector<GrayImage> win(4, GrayImage(8, 8, 50));
  win[1].at(3, 4) = 60;
  win[2].at(3, 4) = 60;
  win[3].at(3, 4) = 60;
  const auto cs = build_channels(win);
  EXPECT_DOUBLE_EQ(cs.value(Channel::diff, 3, 4), 10.0 / 3.0);
  EXPECT_DOUBLE_EQ(cs.value(Channel::diff, 2, 4), 0.0);
}

TEST(Channels, LeftwardMotionFavoursLeftChannel) {
  std::vector<GrayImage> win;
  for (int f = 0; f < 4; ++f) {
    GrayImage img(8, 8, 0);
    for (int y = 2; y < 5; ++y) {
      for (int x = 4 - f; x < 7 - f; ++x) img.at(x, y) = 200;
    }
    win.push_back(img);
  }
  const auto cs = build_channels(win);
  double left = 0, right = 0;
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      left += cs.value(Channel::left, x, y);
      right += cs.value(Channel::right, x, y);
      EXPECT_DOUBLE_EQ(cs.value(Channel::left, x, y), channel_oracle(win, Channel::left, x, y));
    }
  }
  EXPECT_LT(left, right);
}

TEST(Channels, RandomWindowsMatchPerPixelDefinition) {
  Rng r(2);
  const auto win = random_window(11, 7, r);
  const auto cs = build_channels(win);
  for (int c = 0; c < kNumChannels; ++c) {
    for (int y = 0; y < 7; ++y) {
      for (int x = 0; x < 11; ++x) {
        ASSERT_NEAR(cs.value(static_cast<Channel>(c), x, y), channel_oracle(win, static_cast<Channel>(c), x, y),
                    1e-12);
      }
    }
  }
}

TEST(Channels, DifferenceChannelsIgnoreGlobalOffset) {
  Rng r(3);
  auto win = random_window(10, 10, r);
  for (auto& f : win) {
    for (auto& p : f.pixels) p = static_cast<std::uint8_t>(p / 2);
  }
  auto shifted = win;
  for (auto& f : shifted) {
    for (auto& p : f.pixels) p = static_cast<std::uint8_t>(p + 40);
  }
  const auto a = build_channels(win);
  const auto b = build_channels(shifted);
  for (int c = 1; c < kNumChannels; ++c) EXPECT_EQ(a.channels[c].pixels, b.channels[c].pixels);
}

TEST(Channels, MismatchedFramesRejected) {
  std::vector<GrayImage> win = {GrayImage(4, 4), GrayImage(4, 5)};
  EXPECT_THROW(build_channels(win), ValidationError);
}

TEST(Integral, TinyImage) {
  Image<int> img(2, 2);
  img.pixels = {1, 2, 3, 4};
  const IntegralImage ii(img);
  EXPECT_EQ(ii.rect_sum(0, 0, 2, 2), 10);
  EXPECT_EQ(ii.rect_sum(0, 1, 2, 1), 7);
  EXPECT_THROW(ii.rect_sum(1, 1, 2, 1), ValidationError);
}

TEST(Integral, ThousandRandomRectsMatchBruteForce) {
  Rng r(4);
  const auto img = testing::random_image(64, 48, r);
  const IntegralImage ii(img);
  for (int k = 0; k < 1000; ++k) {
    const int x = static_cast<int>(r.uniform_int(0, 63));
    const int y = static_cast<int>(r.uniform_int(0, 47));
    const int w = static_cast<int>(r.uniform_int(0, 64 - x));
    const int h = static_cast<int>(r.uniform_int(0, 48 - y));
    std::int64_t brute = 0;
    for (int yy = y; yy < y + h; ++yy) {
      for (int xx = x; xx < x + w; ++xx) brute += img.at(xx, yy);
    }
    ASSERT_EQ(ii.rect_sum(x, y, w, h), brute);
  }
}

TEST(Integral, ExhaustiveOnSmallImage) {
  Rng r(5);
  const auto img = testing::random_image(6, 5, r);
  const IntegralImage ii(img);
  for (int x = 0; x <= 6; ++x) {
    for (int y = 0; y <= 5; ++y) {
      for (int w = 0; x + w <= 6; ++w) {
        for (int h = 0; y + h <= 5; ++h) {
          std::int64_t brute = 0;
          for (int yy = y; yy < y + h; ++yy) {
            for (int xx = x; xx < x + w; ++xx) brute += img.at(xx, yy);
          }
          ASSERT_EQ(ii.rect_sum(x, y, w, h), brute);
        }
      }
    }
  }
}

TEST(Bank, EightByEightSingleScale) {
  BankConfig c;
  c.width = 8;
  c.height = 8;
  c.pos_step = 8;
  c.shapes = {{8, 8}};
  c.kinds = {FilterKind::single_rect_sum};
  const auto bank = enumerate_filters(c);
  ASSERT_EQ(bank.size(), 6u);
  for (int ch = 0; ch < 6; ++ch) EXPECT_EQ(bank.filters[ch].channel, static_cast<Channel>(ch));
}

TEST(Bank, DeterministicValidAndOrdered) {
  BankConfig c;
  c.pos_step = 8;
  const auto a = enumerate_filters(c);
  const auto b = enumerate_filters(c);
  EXPECT_EQ(a.filters, b.filters);
  EXPECT_EQ(a.checksum(), b.checksum());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_NO_THROW(a.filters[i].validate(64, 48));
    if (i == 0) continue;
    const auto& p = a.filters[i - 1];
    const auto& q = a.filters[i];
    ASSERT_LE(static_cast<int>(p.channel), static_cast<int>(q.channel));
    if (p.channel == q.channel) {
      ASSERT_LE(static_cast<int>(p.kind), static_cast<int>(q.kind));
    }
    if (p.channel == q.channel && p.kind == q.kind && p.rect.w == q.rect.w && p.rect.h == q.rect.h) {
      ASSERT_TRUE(std::pair(p.rect.y, p.rect.x) < std::pair(q.rect.y, q.rect.x));
    }
  }
  for (const auto& f : a.filters) {
    if (f.kind == FilterKind::motion_direction) {
      ASSERT_TRUE(is_shift_channel(f.channel));
    }
  }
}

TEST(Bank, TextRoundTripAndSubset) {
  BankConfig c;
  c.pos_step = 16;
  const auto bank = enumerate_filters(c);
  std::istringstream in(bank.to_text());
  const auto back = FilterBank::from_text(in);
  EXPECT_EQ(back.filters, bank.filters);
  EXPECT_EQ(back.checksum(), bank.checksum());
  const std::vector<int> idx = {5, 0, 7};
  const auto sub = bank.subset(idx);
  ASSERT_EQ(sub.size(), 3u);
  EXPECT_EQ(sub.filters[0], bank.filters[5]);
  EXPECT_THROW(bank.subset(std::vector<int>{static_cast<int>(bank.size())}), ValidationError);
  std::istringstream bad("# x\n64 48 2\nappearance single_rect_sum 0 0 8 8\n");
  EXPECT_THROW(FilterBank::from_text(bad), ValidationError);
}

TEST(Bank, InvalidFiltersRejected) {
  EXPECT_THROW((FilterSpec{Channel::appearance, FilterKind::two_rect_h, {0, 0, 3, 4}}.validate(8, 8)),
               ValidationError);
  EXPECT_THROW((FilterSpec{Channel::appearance, FilterKind::single_rect_sum, {6, 0, 4, 4}}.validate(8, 8)),
               ValidationError);
  EXPECT_THROW((FilterSpec{Channel::diff, FilterKind::motion_direction, {0, 0, 4, 4}}.validate(8, 8)),
               ValidationError);
}

TEST(Extract, MatchesPerPixelOracle) {
  Rng r(6);
  BankConfig c;
  c.width = 24;
  c.height = 16;
  c.pos_step = 4;
  c.shapes = shapes_from_sides({4, 8});
  const auto bank = enumerate_filters(c);
  const FeatureExtractor ex(bank);
  const auto win = random_window(24, 16, r);
  const auto v = ex.extract(win);
  ASSERT_EQ(v.size(), bank.size());
  const auto cs = build_channels(win);
  for (std::size_t i = 0; i < bank.size(); i += 7) {
    const double oracle = filter_oracle(win, bank.filters[i]);
    ASSERT_NEAR(v[i], oracle, 1e-4 * (1.0 + std::abs(oracle))) << bank.filters[i].to_text();
    ASSERT_NEAR(evaluate_filter(cs, bank.filters[i]), oracle, 1e-9 * (1.0 + std::abs(oracle)));
  }
}

TEST(Extract, ZeroFramesGiveZeroFeatures) {
  BankConfig c;
  c.pos_step = 16;
  const FeatureExtractor ex(enumerate_filters(c));
  const std::vector<GrayImage> win(4, GrayImage(64, 48, 0));
  for (float v : ex.extract(win)) ASSERT_EQ(v, 0.0f);
}

TEST(Extract, TwoRectHorizontalContrast) {
  GrayImage f(4, 4, 0);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 2; ++x) f.at(x, y) = 100;
  }
  const FeatureExtractor ex(FilterBank{4, 4, {{Channel::appearance, FilterKind::two_rect_h, {0, 0, 4, 4}}}});
  const std::vector<GrayImage> win(4, f);
  EXPECT_FLOAT_EQ(ex.extract(win)[0], 800.0f);
}

TEST(Extract, SubsetOfThreeHundred) {
  BankConfig c;
  c.pos_step = 8;
  const auto bank = enumerate_filters(c);
  std::vector<int> idx;
  for (int i = 0; i < 300; ++i) idx.push_back(i * 13 % static_cast<int>(bank.size()));
  const FeatureExtractor full(bank);
  const FeatureExtractor sub(bank.subset(idx));
  Rng r(7);
  const auto win = random_window(64, 48, r);
  const auto a = full.extract(win);
  const auto b = sub.extract(win);
  ASSERT_EQ(b.size(), 300u);
  for (std::size_t k = 0; k < idx.size(); ++k) EXPECT_EQ(b[k], a[static_cast<std::size_t>(idx[k])]);
}

TEST(Extract, TranslationConsistentAwayFromBorders) {
  Rng r(8);
  const int step = 4;
  const auto win = random_window(40, 32, r);
  std::vector<GrayImage> moved;
  for (const auto& f : win) {
    GrayImage g(40, 32, 0);
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 40; ++x) g.at(x, y) = f.clamped(x - step, y - step);
    }
    moved.push_back(g);
  }
  BankConfig c;
  c.width = 40;
  c.height = 32;
  c.pos_step = step;
  c.shapes = shapes_from_sides({8});
  const auto bank = enumerate_filters(c);
  std::vector<FilterSpec> shifted;
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    auto f = bank.filters[i];
    if (f.rect.x < 2 || f.rect.y < 2 || f.rect.x + f.rect.w + step > 38 || f.rect.y + f.rect.h + step > 30) continue;
    f.rect.x += step;
    f.rect.y += step;
    shifted.push_back(f);
    used.push_back(i);
  }
  ASSERT_FALSE(used.empty());
  const auto a = FeatureExtractor(bank).extract(win);
  const auto b = FeatureExtractor(FilterBank{40, 32, shifted}).extract(moved);
  for (std::size_t k = 0; k < used.size(); ++k) ASSERT_FLOAT_EQ(a[used[k]], b[k]);
}

TEST(Extract, ResizesOtherFrameSizes) {
  Rng r(9);
  const auto big = random_window(128, 96, r);
  std::vector<GrayImage> small;
  for (const auto& f : big) small.push_back(resize_area(f, 64, 48));
  BankConfig c;
  c.pos_step = 16;
  const FeatureExtractor ex(enumerate_filters(c));
  EXPECT_EQ(ex.extract(big), ex.extract(small));
}

TEST(Extract, ThreeHundredFiltersWithinFrameBudget) {
  BankConfig c;
  const auto bank = enumerate_filters(c);
  std::vector<int> idx;
  for (int i = 0; i < 300; ++i) idx.push_back(i * 97 % static_cast<int>(bank.size()));
  const FeatureExtractor ex(bank.subset(idx));
  Rng r(10);
  const auto win = random_window(64, 48, r);
  FeatureExtractor::Workspace ws;
  std::vector<float> out(300);
  std::vector<double> ms;
  for (int k = 0; k < 50; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    ex.extract(win, out, ws);
    ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  EXPECT_LE(percentile(ms, 0.5), 33.0);
}

TEST(FeatureFile, RoundTripAndBadMagic) {
  testing::TempDir dir("ofm");
  FeatureMatrix m(3, 4);
  for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = static_cast<float>(i) * 0.5f - 1.0f;
  write_feature_matrix(dir / "m.ofm", m);
  const auto back = read_feature_matrix(dir / "m.ofm");
  EXPECT_EQ(back.rows, 3u);
  EXPECT_EQ(back.cols, 4u);
  EXPECT_EQ(back.data, m.data);
  std::ifstream raw(dir / "m.ofm", std::ios::binary);
  char head[4];
  raw.read(head, 4);
  EXPECT_EQ(std::string(head, 4), "OFM1");
  std::ofstream(dir / "bad.ofm") << "NOPE";
  EXPECT_THROW(read_feature_matrix(dir / "bad.ofm"), IoError);
}

}  // namespace
}  // namespace occfall
