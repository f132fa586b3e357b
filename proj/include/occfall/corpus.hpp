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

// Videos, skeleton tracks, fall annotations and dataset manifests.
//
// Manifest format: one record per line, tab separated
//   id  frames_dir  keypoints_dir|-  fall_start|-  fall_end|-  origin  parent_id|-
// Blank lines and lines starting with '#' are ignored. Relative directories
// are resolved against the manifest's own directory.

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "occfall/common.hpp"
#include "occfall/image.hpp"

namespace occfall {

inline constexpr int kNumJoints = 25;

// Joints with confidence at or below this are treated as missing.
inline constexpr float kKeypointConfidenceThreshold = 0.1f;

// BODY-25 joint indices.
enum Body25 : int {
  kNose = 0, kNeck, kRShoulder, kRElbow, kRWrist, kLShoulder, kLElbow, kLWrist,
  kMidHip, kRHip, kRKnee, kRAnkle, kLHip, kLKnee, kLAnkle, kREye, kLEye, kREar,
  kLEar, kLBigToe, kLSmallToe, kLHeel, kRBigToe, kRSmallToe, kRHeel
};

struct Joint {
  float x = 0;
  float y = 0;
  float c = 0;

  bool visible() const { return c > kKeypointConfidenceThreshold; }
  friend bool operator==(const Joint&, const Joint&) = default;
};

using Pose = std::array<Joint, kNumJoints>;

struct KeypointTrack {
  std::vector<Pose> poses;  // one per frame

  std::size_t size() const { return poses.size(); }
  bool empty() const { return poses.empty(); }
  friend bool operator==(const KeypointTrack&, const KeypointTrack&) = default;
};

enum class Origin { normal, dynamic_occluded, constant_occluded, realistic_occluded };

inline const char* to_string(Origin o) {
  switch (o) {
    case Origin::normal: return "normal";
    case Origin::dynamic_occluded: return "dynamic_occluded";
    case Origin::constant_occluded: return "constant_occluded";
    case Origin::realistic_occluded: return "realistic_occluded";
  }
  return "?";
}

inline Origin parse_origin(std::string_view s) {
  if (s == "normal") return Origin::normal;
  if (s == "dynamic_occluded") return Origin::dynamic_occluded;
  if (s == "constant_occluded") return Origin::constant_occluded;
  if (s == "realistic_occluded") return Origin::realistic_occluded;
  throw ValidationError(concat("unknown origin '", s, "'"));
}

inline bool is_occluded(Origin o) { return o != Origin::normal; }

struct FallAnnotation {
  std::optional<int> fall_start;
  std::optional<int> fall_end;

  bool has_fall() const { return fall_start.has_value(); }

  void validate(int length) const {
    if (fall_start.has_value() != fall_end.has_value()) {
      throw ValidationError("fall_start and fall_end must both be present or both absent");
    }
    if (!fall_start) return;
    if (*fall_start < 0 || *fall_end >= length || *fall_start > *fall_end) {
      throw ValidationError(concat("fall interval [", *fall_start, ", ", *fall_end,
                                   "] invalid for length ", length));
    }
  }

  friend bool operator==(const FallAnnotation&, const FallAnnotation&) = default;
};

enum class FrameLabel { non_fall, fall };

// Frames inside [fall_start, fall_end] are fall frames, everything else is not.
inline std::vector<FrameLabel> frame_labels(const FallAnnotation& annotation, int length) {
  if (length < 0) throw ValidationError("negative length");
  annotation.validate(length);
  std::vector<FrameLabel> labels(static_cast<std::size_t>(length), FrameLabel::non_fall);
  if (annotation.has_fall()) {
    std::fill(labels.begin() + *annotation.fall_start, labels.begin() + *annotation.fall_end + 1,
              FrameLabel::fall);
  }
  return labels;
}

struct FrameSequence {
  std::string id;
  double fps = 30.0;
  std::vector<GrayImage> frames;

  int size() const { return static_cast<int>(frames.size()); }
  int width() const { return frames.empty() ? 0 : frames.front().width; }
  int height() const { return frames.empty() ? 0 : frames.front().height; }

  void validate() const {
    if (frames.size() < 4) {
      throw ValidationError(concat("video ", id, " has ", frames.size(), " frames, need at least 4"));
    }
    for (const auto& f : frames) {
      if (!f.same_size(frames.front())) throw ValidationError(concat("video ", id, " has mixed frame sizes"));
    }
  }
};

// One manifest line. Frames are not decoded until load_video().
struct VideoDescriptor {
  std::string id;
  fs::path frames_dir;
  std::optional<fs::path> keypoints_dir;
  FallAnnotation annotation;
  Origin origin = Origin::normal;
  std::optional<std::string> parent_id;

  friend bool operator==(const VideoDescriptor&, const VideoDescriptor&) = default;
};

struct VideoRecord {
  VideoDescriptor desc;
  FrameSequence frames;
  std::optional<KeypointTrack> keypoints;

  const std::string& id() const { return desc.id; }
  int length() const { return frames.size(); }
};

inline void validate_manifest(const std::vector<VideoDescriptor>& entries) {
  std::set<std::string> ids;
  for (const auto& e : entries) {
    if (e.id.empty()) throw ValidationError("manifest entry with empty id");
    if (!ids.insert(e.id).second) throw ValidationError(concat("duplicate video id '", e.id, "'"));
  }
  for (const auto& e : entries) {
    if ((e.origin == Origin::normal) != !e.parent_id.has_value()) {
      throw ValidationError(concat("video '", e.id, "': normal videos have no parent, occluded videos need one"));
    }
    if (e.parent_id && !ids.count(*e.parent_id)) {
      throw ValidationError(concat("video '", e.id, "' references unknown parent '", *e.parent_id, "'"));
    }
    if (e.annotation.fall_start.has_value() != e.annotation.fall_end.has_value() ||
        (e.annotation.fall_start && *e.annotation.fall_start > *e.annotation.fall_end)) {
      throw ValidationError(concat("video '", e.id, "' has an invalid fall interval"));
    }
  }
}

inline std::vector<VideoDescriptor> parse_manifest(std::istream& in, const fs::path& base_dir) {
  std::vector<VideoDescriptor> out;
  std::string line;
  int line_no = 0;
  auto optional_field = [](const std::string& s) -> std::optional<std::string> {
    if (s == "-") return std::nullopt;
    return s;
  };
  auto resolve = [&base_dir](const std::string& p) {
    fs::path path(p);
    return (path.is_absolute() ? path : base_dir / path).lexically_normal();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 7) {
      throw ValidationError(concat("manifest line ", line_no, ": expected 7 tab-separated fields, got ", f.size()));
    }
    try {
      VideoDescriptor d;
      d.id = f[0];
      d.frames_dir = resolve(f[1]);
      if (auto k = optional_field(f[2])) d.keypoints_dir = resolve(*k);
      if (auto s = optional_field(f[3])) d.annotation.fall_start = parse_number<int>(*s, "fall_start");
      if (auto e = optional_field(f[4])) d.annotation.fall_end = parse_number<int>(*e, "fall_end");
      d.origin = parse_origin(f[5]);
      d.parent_id = optional_field(f[6]);
      out.push_back(std::move(d));
    } catch (const ValidationError& e) {
      throw ValidationError(concat("manifest line ", line_no, ": ", e.what()));
    }
  }
  validate_manifest(out);
  return out;
}

inline std::vector<VideoDescriptor> load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(concat("cannot open manifest ", path.string()));
  return parse_manifest(in, fs::absolute(path).parent_path());
}

inline std::string manifest_line(const VideoDescriptor& d, const fs::path& base_dir) {
  auto rel = [&base_dir](const fs::path& p) { return p.lexically_proximate(base_dir).generic_string(); };
  auto opt_int = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string("-"); };
  return concat(d.id, '\t', rel(d.frames_dir), '\t', d.keypoints_dir ? rel(*d.keypoints_dir) : std::string("-"),
                '\t', opt_int(d.annotation.fall_start), '\t', opt_int(d.annotation.fall_end), '\t',
                to_string(d.origin), '\t', d.parent_id.value_or("-"));
}

// Directories are written relative to the manifest location.
inline void write_manifest(const fs::path& path, const std::vector<VideoDescriptor>& entries) {
  validate_manifest(entries);
  const auto base = fs::absolute(path).parent_path();
  std::ofstream out(path);
  if (!out) throw IoError(concat("cannot write manifest ", path.string()));
  for (const auto& d : entries) out << manifest_line(d, base) << '\n';
  if (!out) throw IoError(concat("write failed for ", path.string()));
}

inline std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06d.pgm", index + 1);
  return buf;
}

inline std::string keypoint_filename(int index) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "frame_%06d_keypoints.json", index + 1);
  return buf;
}

// Reads frame_000001.pgm, frame_000002.pgm, ... until the first gap.
inline FrameSequence load_frames(const fs::path& dir, std::string id) {
  FrameSequence seq;
  seq.id = std::move(id);
  if (!fs::is_directory(dir)) throw IoError(concat("frames directory not found: ", dir.string()));
  for (int i = 0;; ++i) {
    auto p = dir / frame_filename(i);
    if (!fs::exists(p)) break;
    seq.frames.push_back(read_pgm(p));
  }
  seq.validate();
  return seq;
}

inline void save_frames(const fs::path& dir, const FrameSequence& seq) {
  fs::create_directories(dir);
  for (int i = 0; i < seq.size(); ++i) write_pgm(dir / frame_filename(i), seq.frames[static_cast<std::size_t>(i)]);
}

// Parses one pose-estimator output document. Picks the person with the
// highest summed confidence; no people gives an all-zero pose.
inline Pose parse_keypoint_json(const nlohmann::json& doc) {
  Pose best{};
  if (!doc.is_object() || !doc.contains("people") || !doc["people"].is_array()) {
    throw ValidationError("keypoint document lacks a 'people' array");
  }
  double best_score = -1.0;
  for (const auto& person : doc["people"]) {
    if (!person.contains("pose_keypoints_2d")) throw ValidationError("person lacks pose_keypoints_2d");
    const auto& arr = person["pose_keypoints_2d"];
    if (!arr.is_array() || arr.size() != 3 * kNumJoints) {
      throw ValidationError(concat("pose_keypoints_2d must hold ", 3 * kNumJoints, " numbers"));
    }
    Pose pose{};
    double score = 0.0;
    for (int j = 0; j < kNumJoints; ++j) {
      auto idx = static_cast<std::size_t>(3 * j);
      if (!arr[idx].is_number() || !arr[idx + 1].is_number() || !arr[idx + 2].is_number()) {
        throw ValidationError("non-numeric keypoint value");
      }
      auto& jt = pose[static_cast<std::size_t>(j)];
      jt.x = arr[idx].get<float>();
      jt.y = arr[idx + 1].get<float>();
      jt.c = arr[idx + 2].get<float>();
      score += jt.c;
    }
    if (score > best_score) {
      best_score = score;
      best = pose;
    }
  }
  return best;
}

inline Pose read_keypoint_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(concat("cannot open keypoint file ", path.string()));
  try {
    return parse_keypoint_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(concat(path.string(), ": ", e.what()));
  } catch (const ValidationError& e) {
    throw ValidationError(concat(path.string(), ": ", e.what()));
  }
}

// One *.json per frame, in lexicographic filename order.
inline KeypointTrack load_keypoints(const fs::path& dir, int frame_count) {
  if (!fs::is_directory(dir)) throw IoError(concat("keypoint directory not found: ", dir.string()));
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (static_cast<int>(files.size()) != frame_count) {
    throw ValidationError(concat(dir.string(), ": ", files.size(), " keypoint files for ", frame_count, " frames"));
  }
  KeypointTrack track;
  track.poses.reserve(files.size());
  for (const auto& f : files) track.poses.push_back(read_keypoint_file(f));
  return track;
}

inline nlohmann::json keypoint_json(const Pose& pose) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& j : pose) {
    arr.push_back(j.x);
    arr.push_back(j.y);
    arr.push_back(j.c);
  }
  nlohmann::json person;
  person["pose_keypoints_2d"] = std::move(arr);
  nlohmann::json doc;
  doc["version"] = 1.3;
  doc["people"] = nlohmann::json::array({person});
  return doc;
}

inline void save_keypoints(const fs::path& dir, const KeypointTrack& track) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < track.poses.size(); ++i) {
    std::ofstream out(dir / keypoint_filename(static_cast<int>(i)));
    if (!out) throw IoError(concat("cannot write keypoints into ", dir.string()));
    out << keypoint_json(track.poses[i]).dump() << '\n';
  }
}

inline VideoRecord load_video(const VideoDescriptor& desc) {
  VideoRecord rec;
  rec.desc = desc;
  rec.frames = load_frames(desc.frames_dir, desc.id);
  desc.annotation.validate(rec.frames.size());
  if (desc.keypoints_dir) {
    rec.keypoints = load_keypoints(*desc.keypoints_dir, rec.frames.size());
  }
  return rec;
}

// Writes frames (and keypoints) under root/<id>/ and points the record's
// descriptor at them.
inline void save_video(VideoRecord& rec, const fs::path& root) {
  rec.frames.validate();
  rec.desc.annotation.validate(rec.length());
  const auto dir = (root / rec.desc.id).lexically_normal();
  rec.desc.frames_dir = fs::absolute(dir / "frames").lexically_normal();
  save_frames(rec.desc.frames_dir, rec.frames);
  if (rec.keypoints) {
    if (static_cast<int>(rec.keypoints->size()) != rec.length()) {
      throw ValidationError(concat("video ", rec.id(), ": keypoint track length differs from frame count"));
    }
    rec.desc.keypoints_dir = fs::absolute(dir / "keypoints").lexically_normal();
    save_keypoints(*rec.desc.keypoints_dir, *rec.keypoints);
  } else {
    rec.desc.keypoints_dir.reset();
  }
}

}  // namespace occfall
