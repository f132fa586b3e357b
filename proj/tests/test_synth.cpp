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
#include <iterator>

#include "test_util.hpp"

namespace occfall {
namespace {

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    out[fs::relative(e.path(), root).string()] = std::string(std::istreambuf_iterator<char>(in), {});
  }
  return out;
}

TEST(Synth, SameSeedSameBytes) {
  testing::TempDir dir("synth_bytes");
  SynthCorpusSpec spec;
  spec.videos = 6;
  spec.seed = 77;
  auto a = generate_synth_corpus(spec);
  auto b = generate_synth_corpus(spec);
  write_corpus(dir / "a", a);
  write_corpus(dir / "b", b);
  const auto ta = read_tree(dir / "a");
  const auto tb = read_tree(dir / "b");
  ASSERT_FALSE(ta.empty());
  ASSERT_EQ(ta.size(), tb.size());
  for (const auto& [name, bytes] : ta) {
    if (name == "manifest.tsv") continue;  // holds absolute paths
    ASSERT_EQ(bytes, tb.at(name)) << name;
  }
  spec.seed = 78;
  auto c = generate_synth_corpus(spec);
  EXPECT_NE(c[0].frames.frames[5].pixels, a[0].frames.frames[5].pixels);
}

TEST(Synth, FallCountAndAnnotation) {
  SynthCorpusSpec spec;
  spec.videos = 40;
  spec.fall_fraction = 0.5;
  std::vector<SynthScript> scripts;
  const auto videos = generate_synth_corpus(spec, &scripts);
  int falls = 0;
  for (std::size_t i = 0; i < videos.size(); ++i) {
    const auto& v = videos[i];
    const bool fall = v.desc.annotation.has_fall();
    falls += fall;
    EXPECT_EQ(fall, scripts[i] == SynthScript::fall);
    EXPECT_EQ(v.length(), spec.frames);
    EXPECT_NO_THROW(v.frames.validate());
    if (fall) {
      // the duration counts frame-to-frame steps; the annotation spans both ends
      const int steps = *v.desc.annotation.fall_end - *v.desc.annotation.fall_start;
      EXPECT_GE(steps, spec.min_fall_frames);
      EXPECT_LE(steps, spec.max_fall_frames);
    }
  }
  EXPECT_EQ(falls, 20);
}

TEST(Synth, VisibleKeypointsInsideTheFrame) {
  SynthCorpusSpec spec;
  spec.videos = 12;
  spec.seed = 3;
  for (const auto& v : generate_synth_corpus(spec)) {
    ASSERT_TRUE(v.keypoints.has_value());
    ASSERT_EQ(v.keypoints->size(), static_cast<std::size_t>(v.length()));
    for (const auto& pose : v.keypoints->poses) {
      for (const auto& j : pose) {
        if (j.c != 1.0f) continue;
        EXPECT_GE(j.x, 0.0f);
        EXPECT_GE(j.y, 0.0f);
        EXPECT_LT(j.x, float(spec.width));
        EXPECT_LT(j.y, float(spec.height));
      }
    }
  }
}

TEST(Synth, VideoDependsOnlyOnIndex) {
  SynthCorpusSpec spec;
  spec.seed = 9;
  const auto a = generate_synth_video(spec, 4, true);
  spec.videos = 500;
  const auto b = generate_synth_video(spec, 4, true);
  EXPECT_EQ(a.frames.frames.back().pixels, b.frames.frames.back().pixels);
  EXPECT_EQ(*a.keypoints, *b.keypoints);
}

TEST(Synth, WrittenCorpusLoadsBack) {
  testing::TempDir dir("synth_load");
  SynthCorpusSpec spec;
  spec.videos = 5;
  spec.seed = 12;
  auto videos = generate_synth_corpus(spec);
  const auto manifest = write_corpus(dir.path(), videos);
  const auto descs = load_manifest(manifest);
  ASSERT_EQ(descs.size(), 5u);
  EXPECT_NO_THROW(validate_manifest(descs));
  for (std::size_t i = 0; i < descs.size(); ++i) {
    const auto v = load_video(descs[i]);
    EXPECT_EQ(v.desc.annotation, videos[i].desc.annotation);
    EXPECT_EQ(v.frames.frames.size(), videos[i].frames.frames.size());
    EXPECT_EQ(v.frames.frames[3].pixels, videos[i].frames.frames[3].pixels);
    ASSERT_TRUE(v.keypoints.has_value());
    EXPECT_EQ(v.keypoints->size(), videos[i].keypoints->size());
  }
}

TEST(Synth, InvalidSpecRejected) {
  SynthCorpusSpec spec;
  spec.fall_fraction = 1.5;
  EXPECT_THROW(generate_synth_corpus(spec), ValidationError);
  spec = {};
  spec.width = 8;
  EXPECT_THROW(generate_synth_corpus(spec), ValidationError);
  spec = {};
  spec.frames = 10;
  EXPECT_THROW(generate_synth_corpus(spec), ValidationError);
  spec = {};
  spec.min_root_x = 0.8;
  spec.max_root_x = 0.2;
  EXPECT_THROW(generate_synth_corpus(spec), ValidationError);
}

}  // namespace
}  // namespace occfall
