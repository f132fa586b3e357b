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

#include <fstream>

#include "test_util.hpp"

namespace occfall {
namespace {

TEST(Seeds, DeriveIsDeterministicAndSpreads) {
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
  EXPECT_NE(derive_seed(7, 3), derive_seed(7, 4));
  EXPECT_NE(derive_seed(7, 3), derive_seed(8, 3));
  EXPECT_EQ(derive_seed(1, "split"), derive_seed(1, "split"));
  EXPECT_NE(derive_seed(1, "split"), derive_seed(1, "fall-assignment"));
}

TEST(Seeds, SplitMixReferenceValue) {
  // first output of splitmix64 seeded with 0
  EXPECT_EQ(mix_seed(0), 0xE220A8397B1DCDAFull);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, RangesHold) {
  Rng r(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const auto k = r.uniform_int(-3, 3);
    ASSERT_GE(k, -3);
    ASSERT_LE(k, 3);
  }
}

TEST(Rng, ShuffleIsPermutation) {
  Rng r(9);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  r.shuffle(w);
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}

TEST(Fnv1a, ReferenceVectors) {
  Fnv1a empty;
  EXPECT_EQ(empty.value(), 0xcbf29ce484222325ull);
  Fnv1a a;
  a.update("a");
  EXPECT_EQ(a.value(), 0xaf63dc4c8601ec8cull);
  Fnv1a foobar;
  foobar.update("foo");
  foobar.update("bar");
  EXPECT_EQ(foobar.value(), 0x85944171f73967e8ull);
}

TEST(Text, HexRoundTrip) {
  for (std::uint64_t v : {0ull, 1ull, 0xdeadbeefcafef00dull, ~0ull}) EXPECT_EQ(parse_hex(to_hex(v)), v);
  EXPECT_THROW(parse_hex("xyz"), ValidationError);
}

TEST(Text, NumbersAndLists) {
  EXPECT_EQ(parse_number<int>(" 12 ", "n"), 12);
  EXPECT_THROW(parse_number<int>("12a", "n"), ValidationError);
  EXPECT_THROW(parse_number<int>("", "n"), ValidationError);
  EXPECT_EQ(parse_list<int>("10,100,200", "k"), (std::vector<int>{10, 100, 200}));
  EXPECT_TRUE(parse_list<int>("", "k").empty());
  EXPECT_EQ(split("a\t\tb", '\t'), (std::vector<std::string>{"a", "", "b"}));
  for (double d : {0.1, 1.0 / 3.0, 1e-300, -2.5}) EXPECT_EQ(parse_number<double>(format_double(d), "d"), d);
}

// ---------------------------------------------------------------- image

TEST(Image, PgmRoundTrip) {
  testing::TempDir dir("pgm");
  Rng r(3);
  const auto img = testing::random_image(17, 9, r);
  write_pgm(dir / "a.pgm", img);
  EXPECT_EQ(read_pgm(dir / "a.pgm"), img);
}

TEST(Image, PgmWithCommentsAndSmallMaxval) {
  testing::TempDir dir("pgm");
  {
    std::ofstream out(dir / "b.pgm", std::ios::binary);
    out << "P5\n# comment\n2 1\n# another\n15\n";
    out.put(static_cast<char>(15));
    out.put(static_cast<char>(0));
  }
  const auto img = read_pgm(dir / "b.pgm");
  ASSERT_EQ(img.width, 2);
  EXPECT_EQ(img.at(0, 0), 255);
  EXPECT_EQ(img.at(1, 0), 0);
}

TEST(Image, PpmConvertsWithLuma) {
  testing::TempDir dir("ppm");
  {
    std::ofstream out(dir / "c.ppm", std::ios::binary);
    out << "P6 1 1 255\n";
    out.put(static_cast<char>(200));
    out.put(static_cast<char>(100));
    out.put(static_cast<char>(50));
  }
  // round(0.299*200 + 0.587*100 + 0.114*50) = round(124.2)
  EXPECT_EQ(read_pgm(dir / "c.ppm").at(0, 0), 124);
}

TEST(Image, TruncatedFileIsRejected) {
  testing::TempDir dir("bad");
  std::ofstream(dir / "d.pgm", std::ios::binary) << "P5 4 4 255\nab";
  EXPECT_ANY_THROW(read_pgm(dir / "d.pgm"));
  EXPECT_THROW(read_pgm(dir / "missing.pgm"), IoError);
}

TEST(Image, AreaResizeAveragesBlocks) {
  GrayImage img(4, 2);
  const std::uint8_t px[] = {0, 10, 20, 30, 40, 50, 60, 70};
  std::copy(std::begin(px), std::end(px), img.pixels.begin());
  const auto half = resize_area(img, 2, 1);
  EXPECT_EQ(half.at(0, 0), 25);  // (0+10+40+50)/4
  EXPECT_EQ(half.at(1, 0), 45);
  EXPECT_EQ(resize_area(img, 4, 2), img);
}

}  // namespace
}  // namespace occfall
