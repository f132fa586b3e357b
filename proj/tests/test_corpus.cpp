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
#include <set>
#include <sstream>

#include "test_util.hpp"

namespace occfall {
namespace {

std::string manifest_row(const std::string& id, const std::string& origin, const std::string& parent,
                         const std::string& start = "-", const std::string& end = "-") {
  return concat(id, "\tframes/", id, "\t-\t", start, '\t', end, '\t', origin, '\t', parent, '\n');
}

TEST(Manifest, EmptyGivesNoEntries) {
  std::istringstream in("");
  EXPECT_TRUE(parse_manifest(in, "/data").empty());
}

TEST(Manifest, ParentWithTenChildren) {
  std::string text = manifest_row("v1", "normal", "-", "3", "9");
  for (int i = 0; i < 10; ++i) text += manifest_row(concat("v1_occ", i), "dynamic_occluded", "v1", "3", "9");
  std::istringstream in(text);
  const auto entries = parse_manifest(in, "/data");
  ASSERT_EQ(entries.size(), 11u);
  EXPECT_EQ(std::count_if(entries.begin(), entries.end(), [](const auto& d) { return d.parent_id.has_value(); }),
            10);
  EXPECT_EQ(entries[0].frames_dir, fs::path("/data/frames/v1"));
  EXPECT_EQ(entries[3].annotation.fall_start, 3);
}

TEST(Manifest, DanglingParentIsRejected) {
  std::istringstream in(manifest_row("c", "dynamic_occluded", "ghost"));
  EXPECT_THROW(parse_manifest(in, "/data"), ValidationError);
}

TEST(Manifest, MalformedLinesAreRejected) {
  std::istringstream few("a\tb\tc\n");
  EXPECT_THROW(parse_manifest(few, "/"), ValidationError);
  std::istringstream origin(manifest_row("a", "blurred", "-"));
  EXPECT_THROW(parse_manifest(origin, "/"), ValidationError);
  std::istringstream half(manifest_row("a", "normal", "-", "3", "-"));
  EXPECT_THROW(parse_manifest(half, "/"), ValidationError);
  std::istringstream orphan_parent(manifest_row("a", "normal", "b"));
  EXPECT_THROW(parse_manifest(orphan_parent, "/"), ValidationError);
  std::istringstream dup(manifest_row("a", "normal", "-") + manifest_row("a", "normal", "-"));
  EXPECT_THROW(parse_manifest(dup, "/"), ValidationError);
  EXPECT_THROW(load_manifest("/nonexistent/manifest.tsv"), IoError);
}

TEST(Manifest, WriteThenLoadRoundTrips) {
  testing::TempDir dir("m");
  std::vector<VideoDescriptor> entries(3);
  entries[0] = {"p", dir / "p/frames", dir / "p/keypoints", {4, 8}, Origin::normal, std::nullopt};
  entries[1] = {"q", dir / "q/frames", std::nullopt, {}, Origin::normal, std::nullopt};
  entries[2] = {"p_occ", dir / "x/frames", dir / "x/kp", {4, 8}, Origin::dynamic_occluded, "p"};
  write_manifest(dir / "manifest.tsv", entries);
  auto loaded = load_manifest(dir / "manifest.tsv");
  auto key = [](const VideoDescriptor& d) { return d.id; };
  std::sort(loaded.begin(), loaded.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
  std::sort(entries.begin(), entries.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
  for (auto& e : entries) {
    e.frames_dir = e.frames_dir.lexically_normal();
    if (e.keypoints_dir) e.keypoints_dir = e.keypoints_dir->lexically_normal();
  }
  EXPECT_EQ(loaded, entries);
}

// ---------------------------------------------------------------- keypoints

nlohmann::json person(float base_c, float x0 = 0) {
  nlohmann::json arr = nlohmann::json::array();
  for (int j = 0; j < kNumJoints; ++j) {
    arr.push_back(x0 + j);
    arr.push_back(2.0 * j);
    arr.push_back(base_c);
  }
  return {{"pose_keypoints_2d", arr}};
}

TEST(Keypoints, NoPeopleGivesZeroConfidence) {
  const auto pose = parse_keypoint_json(nlohmann::json{{"people", nlohmann::json::array()}});
  for (const auto& j : pose) EXPECT_EQ(j.c, 0.0f);
}

TEST(Keypoints, OnePersonInBody25Order) {
  const auto pose = parse_keypoint_json(nlohmann::json{{"people", {person(0.5f)}}});
  for (int j = 0; j < kNumJoints; ++j) {
    EXPECT_EQ(pose[static_cast<std::size_t>(j)].x, static_cast<float>(j));
    EXPECT_EQ(pose[static_cast<std::size_t>(j)].y, 2.0f * j);
    EXPECT_EQ(pose[static_cast<std::size_t>(j)].c, 0.5f);
  }
}

TEST(Keypoints, MostConfidentPersonWins) {
  // summed confidences 18.2 vs 12.1
  auto a = person(18.2f / 25, 100);
  auto b = person(12.1f / 25, 200);
  EXPECT_EQ(parse_keypoint_json(nlohmann::json{{"people", {a, b}}})[0].x, 100.0f);
  EXPECT_EQ(parse_keypoint_json(nlohmann::json{{"people", {b, a}}})[0].x, 100.0f);
}

TEST(Keypoints, BadDocumentsAreRejected) {
  EXPECT_THROW(parse_keypoint_json(nlohmann::json{{"persons", 1}}), ValidationError);
  nlohmann::json short_arr = {{"people", {{{"pose_keypoints_2d", {1, 2, 3}}}}}};
  EXPECT_THROW(parse_keypoint_json(short_arr), ValidationError);
}

TEST(Keypoints, DirectoryRoundTripAndCountCheck) {
  testing::TempDir dir("kp");
  KeypointTrack track;
  for (int f = 0; f < 5; ++f) track.poses.push_back(testing::full_pose(10.0f + f, 20.0f));
  save_keypoints(dir / "kp", track);
  EXPECT_EQ(load_keypoints(dir / "kp", 5), track);
  EXPECT_THROW(load_keypoints(dir / "kp", 6), ValidationError);
  std::ofstream(dir / "kp" / "frame_000009_keypoints.json") << "{not json";
  EXPECT_THROW(load_keypoints(dir / "kp", 6), ValidationError);
}

// ---------------------------------------------------------------- labels

TEST(FrameLabels, NoAnnotationAllNonFall) {
  const auto labels = frame_labels({}, 100);
  ASSERT_EQ(labels.size(), 100u);
  EXPECT_TRUE(std::all_of(labels.begin(), labels.end(), [](FrameLabel l) { return l == FrameLabel::non_fall; }));
}

TEST(FrameLabels, IntervalIsInclusive) {
  const auto labels = frame_labels({40, 60}, 100);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(labels[static_cast<std::size_t>(i)] == FrameLabel::fall, i >= 40 && i <= 60) << i;
  }
}

TEST(FrameLabels, WholeVideo) {
  const auto labels = frame_labels({0, 99}, 100);
  EXPECT_TRUE(std::all_of(labels.begin(), labels.end(), [](FrameLabel l) { return l == FrameLabel::fall; }));
}

TEST(FrameLabels, OutOfBoundsRejected) {
  EXPECT_THROW(frame_labels({90, 100}, 100), ValidationError);
  EXPECT_THROW(frame_labels({-1, 3}, 100), ValidationError);
  EXPECT_THROW(frame_labels({5, 4}, 100), ValidationError);
}

TEST(FrameLabels, PropertySingleContiguousRun) {
  Rng r(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int len = static_cast<int>(r.uniform_int(1, 60));
    FallAnnotation a;
    if (r.uniform() < 0.7) {
      const int s = static_cast<int>(r.uniform_int(0, len - 1));
      a = {s, static_cast<int>(r.uniform_int(s, len - 1))};
    }
    const auto labels = frame_labels(a, len);
    ASSERT_EQ(static_cast<int>(labels.size()), len);
    int runs = 0;
    for (int i = 0; i < len; ++i) {
      if (labels[static_cast<std::size_t>(i)] == FrameLabel::fall &&
          (i == 0 || labels[static_cast<std::size_t>(i - 1)] != FrameLabel::fall)) {
        ++runs;
      }
    }
    EXPECT_EQ(runs, a.has_fall() ? 1 : 0);
  }
}

// ---------------------------------------------------------------- videos

TEST(Video, SaveLoadRoundTrip) {
  testing::TempDir dir("v");
  auto v = testing::make_video("clip", 6, 12, 10, 3, {2, 4});
  const auto original = v;
  save_video(v, dir.path());
  const auto loaded = load_video(v.desc);
  EXPECT_EQ(loaded.frames.frames, original.frames.frames);
  EXPECT_EQ(*loaded.keypoints, *original.keypoints);
  EXPECT_EQ(loaded.desc.annotation, original.desc.annotation);
  EXPECT_EQ(loaded.keypoints->size(), static_cast<std::size_t>(loaded.length()));
}

TEST(Video, TooShortOrMixedSizesRejected) {
  FrameSequence s;
  s.frames.assign(3, GrayImage(4, 4));
  EXPECT_THROW(s.validate(), ValidationError);
  s.frames.push_back(GrayImage(5, 4));
  EXPECT_THROW(s.validate(), ValidationError);
}

}  // namespace
}  // namespace occfall
