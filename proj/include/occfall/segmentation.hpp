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

#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "occfall/common.hpp"
#include "occfall/corpus.hpp"

namespace occfall {

struct SegmentParams {
  int segment_len = 4;
  int sampling_rate = 1;  // keep every k-th frame
  int stride = 4;         // distance between first frames of consecutive windows

  // Number of source frames covered by one window.
  int span() const { return (segment_len - 1) * sampling_rate + 1; }

  void validate() const {
    if (segment_len < 2) throw ValidationError("segment_len must be >= 2");
    if (sampling_rate < 1) throw ValidationError("sampling_rate must be >= 1");
    if (stride < 1) throw ValidationError("stride must be >= 1");
  }
};

enum class SegmentLabel { non_fall, fall, discarded };
enum class LabelMode { train, test };

inline const char* to_string(SegmentLabel l) {
  switch (l) {
    case SegmentLabel::non_fall: return "non_fall";
    case SegmentLabel::fall: return "fall";
    case SegmentLabel::discarded: return "discarded";
  }
  return "?";
}

inline SegmentLabel parse_segment_label(std::string_view s) {
  if (s == "non_fall") return SegmentLabel::non_fall;
  if (s == "fall") return SegmentLabel::fall;
  if (s == "discarded") return SegmentLabel::discarded;
  throw ValidationError(concat("unknown segment label '", s, "'"));
}

struct Segment {
  std::string video_id;
  std::vector<int> frame_indices;
  SegmentLabel label = SegmentLabel::non_fall;
  Origin origin = Origin::normal;
};

// Windows start at 0, stride, 2*stride, ...; incomplete windows are dropped.
inline std::vector<std::vector<int>> segment_indices(int length, const SegmentParams& params) {
  params.validate();
  std::vector<std::vector<int>> windows;
  const int span = params.span();
  for (int start = 0; start + span <= length; start += params.stride) {
    std::vector<int> w(static_cast<std::size_t>(params.segment_len));
    for (int k = 0; k < params.segment_len; ++k) w[static_cast<std::size_t>(k)] = start + k * params.sampling_rate;
    windows.push_back(std::move(w));
  }
  return windows;
}

// Pure windows get their label. Mixed windows are discarded for training and
// decided by majority for testing; a tie counts as a fall.
inline SegmentLabel label_segment(const std::vector<int>& window, const std::vector<FrameLabel>& labels,
                                  LabelMode mode) {
  int falls = 0;
  for (int i : window) {
    if (i < 0 || i >= static_cast<int>(labels.size())) {
      throw ValidationError(concat("window index ", i, " outside ", labels.size(), " labels"));
    }
    falls += labels[static_cast<std::size_t>(i)] == FrameLabel::fall;
  }
  const int total = static_cast<int>(window.size());
  if (falls == total) return SegmentLabel::fall;
  if (falls == 0) return SegmentLabel::non_fall;
  if (mode == LabelMode::train) return SegmentLabel::discarded;
  return 2 * falls >= total ? SegmentLabel::fall : SegmentLabel::non_fall;
}

inline std::vector<Segment> segment_video(const VideoDescriptor& desc, int length, const SegmentParams& params,
                                          LabelMode mode) {
  const auto labels = frame_labels(desc.annotation, length);
  std::vector<Segment> out;
  for (auto& w : segment_indices(length, params)) {
    Segment s;
    s.video_id = desc.id;
    s.label = label_segment(w, labels, mode);
    s.origin = desc.origin;
    s.frame_indices = std::move(w);
    out.push_back(std::move(s));
  }
  return out;
}

enum class Split { train, val, test };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw ValidationError(concat("unknown split '", s, "'"));
}

inline LabelMode label_mode(Split s) { return s == Split::train ? LabelMode::train : LabelMode::test; }

using SplitTable = std::map<std::string, Split>;

struct SplitFractions {
  double train = 0.6;
  double val = 0.2;
};

// Whole normal videos are shuffled and cut 60/20/20; every occluded video
// inherits its parent's split.
inline SplitTable assign_splits(const std::vector<VideoDescriptor>& videos, std::uint64_t seed,
                                SplitFractions fractions = {}) {
  validate_manifest(videos);
  std::vector<std::string> roots;
  for (const auto& v : videos) {
    if (!v.parent_id) roots.push_back(v.id);
  }
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(roots);
  const auto n = roots.size();
  const auto n_train = static_cast<std::size_t>(std::lround(fractions.train * static_cast<double>(n)));
  const auto n_val = std::min(n - std::min(n, n_train),
                              static_cast<std::size_t>(std::lround(fractions.val * static_cast<double>(n))));
  SplitTable table;
  for (std::size_t i = 0; i < n; ++i) {
    table[roots[i]] = i < n_train ? Split::train : (i < n_train + n_val ? Split::val : Split::test);
  }
  for (const auto& v : videos) {
    if (v.parent_id) table[v.id] = table.at(*v.parent_id);
  }
  return table;
}

// Throws if any occluded video is placed in a different split than its parent.
inline void check_split_hygiene(const std::vector<VideoDescriptor>& videos, const SplitTable& splits) {
  for (const auto& v : videos) {
    auto it = splits.find(v.id);
    if (it == splits.end()) throw ValidationError(concat("video ", v.id, " has no split"));
    if (!v.parent_id) continue;
    auto p = splits.find(*v.parent_id);
    if (p == splits.end() || p->second != it->second) {
      throw ValidationError(concat("split contamination: ", v.id, " is in ", to_string(it->second),
                                   " but its parent ", *v.parent_id, " is not"));
    }
  }
}

// Tab-separated (video_id, split), in the order of `videos`.
inline void write_splits(const fs::path& path, const std::vector<VideoDescriptor>& videos, const SplitTable& splits) {
  std::ofstream out(path);
  if (!out) throw IoError(concat("cannot write ", path.string()));
  for (const auto& v : videos) out << v.id << '\t' << to_string(splits.at(v.id)) << '\n';
}

inline SplitTable read_splits(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(concat("cannot open ", path.string()));
  SplitTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 2) throw ValidationError(concat(path.string(), ":", line_no, ": expected 2 fields"));
    table[f[0]] = parse_split(trim(f[1]));
  }
  return table;
}

}  // namespace occfall
