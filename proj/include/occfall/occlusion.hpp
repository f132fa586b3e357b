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

// Synthetic occluders: rectangles anchored to skeleton joint groups that
// follow the subject, and static random rectangles for ablations.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "occfall/common.hpp"
#include "occfall/corpus.hpp"

namespace occfall {

// Half-open pixel box [x0, x1) x [y0, y1).
struct Box {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
  bool intersects(const Box& o) const {
    return std::max(x0, o.x0) < std::min(x1, o.x1) && std::max(y0, o.y0) < std::min(y1, o.y1);
  }
  friend bool operator==(const Box&, const Box&) = default;
};

struct OccluderPreset {
  std::string name;
  std::vector<int> joints;
  double padding = 0.0;  // pixels, added on every side
  int min_side = 1;      // pixels

  void validate() const {
    if (joints.empty()) throw ValidationError(concat("preset ", name, " has no joints"));
    for (int j : joints) {
      if (j < 0 || j >= kNumJoints) throw ValidationError(concat("preset ", name, ": joint index ", j, " out of range"));
    }
    if (padding < 0) throw ValidationError(concat("preset ", name, ": negative padding"));
    if (min_side < 1) throw ValidationError(concat("preset ", name, ": min_side must be >= 1"));
  }
};

inline double default_padding(int width, int height) {
  return 0.05 * std::hypot(static_cast<double>(width), static_cast<double>(height));
}

inline constexpr int kDefaultMinSide = 8;

// The ten body-part occluders, in generation order.
inline std::vector<OccluderPreset> standard_presets(double padding, int min_side = kDefaultMinSide) {
  auto range = [](int a, int b) {
    std::vector<int> v;
    for (int i = a; i <= b; ++i) v.push_back(i);
    return v;
  };
  auto join = [](std::vector<int> a, const std::vector<int>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  std::vector<OccluderPreset> p = {
      {"both_legs", join(range(9, 14), range(19, 24)), padding, min_side},
      {"head_neck", join({0, 1}, range(15, 18)), padding, min_side},
      {"torso_hands", join(range(1, 9), {12}), padding, min_side},
      {"torso", {1, 2, 5, 8, 9, 12}, padding, min_side},
      {"right_arm", {2, 3, 4}, padding, min_side},
      {"left_arm", {5, 6, 7}, padding, min_side},
      {"right_leg", {9, 10, 11, 22, 23, 24}, padding, min_side},
      {"left_leg", {12, 13, 14, 19, 20, 21}, padding, min_side},
      {"right_side", {0, 1, 2, 3, 4, 8, 9, 10, 11, 15, 17, 22, 23, 24}, padding, min_side},
      {"left_side", {0, 1, 5, 6, 7, 8, 12, 13, 14, 16, 18, 19, 20, 21}, padding, min_side},
  };
  return p;
}

inline std::vector<OccluderPreset> standard_presets(int width, int height) {
  return standard_presets(default_padding(width, height), kDefaultMinSide);
}

// Grows [lo, hi) symmetrically until it is at least min_side long.
inline void grow_to(int& lo, int& hi, int min_side) {
  const int deficit = min_side - (hi - lo);
  if (deficit > 0) {
    lo -= deficit / 2;
    hi += deficit - deficit / 2;
  }
}

inline Box clamp_box(Box b, int width, int height) {
  b.x0 = std::clamp(b.x0, 0, width);
  b.x1 = std::clamp(b.x1, b.x0, width);
  b.y0 = std::clamp(b.y0, 0, height);
  b.y1 = std::clamp(b.y1, b.y0, height);
  return b;
}

// Bounding box of the preset's visible joints, padded and grown to min_side,
// clamped to the image. Falls back to last_rect when no joint is visible.
inline std::optional<Box> occluder_rect(const KeypointTrack& track, const OccluderPreset& preset, int frame,
                                        const std::optional<Box>& last_rect, int width, int height) {
  if (frame < 0 || frame >= static_cast<int>(track.size())) {
    throw ValidationError(concat("frame ", frame, " outside keypoint track of length ", track.size()));
  }
  const auto& pose = track.poses[static_cast<std::size_t>(frame)];
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  bool any = false;
  for (int j : preset.joints) {
    const auto& jt = pose[static_cast<std::size_t>(j)];
    if (!jt.visible()) continue;
    if (!any) {
      min_x = max_x = jt.x;
      min_y = max_y = jt.y;
      any = true;
    } else {
      min_x = std::min<double>(min_x, jt.x);
      max_x = std::max<double>(max_x, jt.x);
      min_y = std::min<double>(min_y, jt.y);
      max_y = std::max<double>(max_y, jt.y);
    }
  }
  if (!any) return last_rect;
  Box b{static_cast<int>(std::floor(min_x - preset.padding)), static_cast<int>(std::floor(min_y - preset.padding)),
        static_cast<int>(std::ceil(max_x + preset.padding)), static_cast<int>(std::ceil(max_y + preset.padding))};
  grow_to(b.x0, b.x1, preset.min_side);
  grow_to(b.y0, b.y1, preset.min_side);
  return clamp_box(b, width, height);
}

struct OccluderTrack {
  std::vector<std::optional<Box>> rects;  // per frame
  std::uint8_t fill = 0;
};

class NoVisibleJoints : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

inline OccluderTrack occluder_track(const KeypointTrack& track, const OccluderPreset& preset, int width, int height) {
  OccluderTrack out;
  std::optional<Box> last;
  out.rects.reserve(track.size());
  for (int f = 0; f < static_cast<int>(track.size()); ++f) {
    last = occluder_rect(track, preset, f, last, width, height);
    out.rects.push_back(last);
  }
  return out;
}

inline void fill_box(GrayImage& img, const Box& b, std::uint8_t value) {
  for (int y = b.y0; y < b.y1; ++y) {
    for (int x = b.x0; x < b.x1; ++x) img.at(x, y) = value;
  }
}

inline VideoRecord make_child(const VideoRecord& parent, Origin origin, const std::string& suffix) {
  VideoRecord child;
  child.desc.id = concat(parent.id(), "__", suffix);
  child.desc.annotation = parent.desc.annotation;
  child.desc.origin = origin;
  child.desc.parent_id = parent.id();
  child.frames = parent.frames;
  child.frames.id = child.desc.id;
  child.keypoints = parent.keypoints;
  return child;
}

inline void require_normal(const VideoRecord& video) {
  if (video.desc.origin != Origin::normal) {
    throw ValidationError(concat("video ", video.id(), " is not a normal video"));
  }
}

inline VideoRecord apply_dynamic_occlusion(const VideoRecord& video, const OccluderPreset& preset,
                                           std::uint64_t seed) {
  require_normal(video);
  preset.validate();
  if (!video.keypoints || video.keypoints->empty()) {
    throw ValidationError(concat("video ", video.id(), " has no keypoints"));
  }
  if (static_cast<int>(video.keypoints->size()) != video.length()) {
    throw ValidationError(concat("video ", video.id(), ": keypoint track length differs from frame count"));
  }
  auto track = occluder_track(*video.keypoints, preset, video.frames.width(), video.frames.height());
  if (std::none_of(track.rects.begin(), track.rects.end(), [](const auto& r) { return r.has_value(); })) {
    throw NoVisibleJoints(concat("preset ", preset.name, " never visible in ", video.id()));
  }
  Rng rng(seed);
  track.fill = static_cast<std::uint8_t>(rng.uniform_int(0, 255));

  auto child = make_child(video, Origin::dynamic_occluded, concat("dyn_", preset.name));
  for (std::size_t f = 0; f < child.frames.frames.size(); ++f) {
    if (track.rects[f]) fill_box(child.frames.frames[f], *track.rects[f], track.fill);
  }
  return child;
}

struct AugmentResult {
  std::vector<VideoRecord> videos;
  std::vector<std::pair<std::string, std::string>> omitted;  // (preset, reason)
};

// One dynamic occlusion per preset, in preset order. Presets whose joints
// never appear are skipped and reported.
inline AugmentResult augment_video(const VideoRecord& video, std::uint64_t seed,
                                   const std::vector<OccluderPreset>& presets) {
  require_normal(video);
  if (!video.keypoints || video.keypoints->empty()) {
    throw ValidationError(concat("video ", video.id(), " has an empty keypoint track"));
  }
  AugmentResult out;
  for (std::size_t i = 0; i < presets.size(); ++i) {
    try {
      out.videos.push_back(apply_dynamic_occlusion(video, presets[i], derive_seed(seed, i)));
    } catch (const NoVisibleJoints& e) {
      out.omitted.emplace_back(presets[i].name, e.what());
    }
  }
  return out;
}

inline AugmentResult augment_video(const VideoRecord& video, std::uint64_t seed) {
  return augment_video(video, seed, standard_presets(video.frames.width(), video.frames.height()));
}

// Static rectangle with sides drawn from [0.15, 0.35] of the frame size,
// placed uniformly at random, identical in every frame.
inline Box constant_occluder_box(int width, int height, Rng& rng) {
  const int w = std::max(1, static_cast<int>(std::lround(rng.uniform(0.15, 0.35) * width)));
  const int h = std::max(1, static_cast<int>(std::lround(rng.uniform(0.15, 0.35) * height)));
  const int x0 = static_cast<int>(rng.uniform_int(0, width - w));
  const int y0 = static_cast<int>(rng.uniform_int(0, height - h));
  return {x0, y0, x0 + w, y0 + h};
}

inline VideoRecord apply_constant_occlusion(const VideoRecord& video, std::uint64_t seed,
                                            const std::string& suffix = "const") {
  require_normal(video);
  video.frames.validate();
  Rng rng(seed);
  const Box box = constant_occluder_box(video.frames.width(), video.frames.height(), rng);
  const auto fill = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  auto child = make_child(video, Origin::constant_occluded, suffix);
  for (auto& frame : child.frames.frames) fill_box(frame, box, fill);
  return child;
}

// count constant variants, matched in number to the dynamic augmentation.
inline std::vector<VideoRecord> augment_constant(const VideoRecord& video, std::uint64_t seed, int count = 10) {
  std::vector<VideoRecord> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(apply_constant_occlusion(video, derive_seed(derive_seed(seed, "constant"), static_cast<std::uint64_t>(i)),
                                           concat("const_", i)));
  }
  return out;
}

}  // namespace occfall
