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

// Labelled segment features: one row per kept segment with the metadata
// needed for weighting, split hygiene and per-origin reporting.

#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "occfall/corpus.hpp"
#include "occfall/haar.hpp"
#include "occfall/segmentation.hpp"

namespace occfall {

struct SampleTable {
  FeatureMatrix features;
  std::vector<int> labels;  // +1 fall, -1 non-fall
  std::vector<Origin> origins;
  std::vector<Split> splits;
  std::vector<std::string> video_ids;
  std::vector<std::string> parent_ids;  // empty for normal videos

  std::size_t size() const { return labels.size(); }

  std::vector<std::size_t> rows_where(const std::function<bool(std::size_t)>& pred) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i) {
      if (pred(i)) out.push_back(i);
    }
    return out;
  }

  SampleTable subset(std::span<const std::size_t> rows) const {
    SampleTable out;
    out.features = features.select_rows(rows);
    for (std::size_t i : rows) {
      out.labels.push_back(labels[i]);
      out.origins.push_back(origins[i]);
      out.splits.push_back(splits[i]);
      out.video_ids.push_back(video_ids[i]);
      out.parent_ids.push_back(parent_ids[i]);
    }
    return out;
  }

  // Rows of one split whose origin passes the filter.
  SampleTable select(Split split, const std::function<bool(Origin)>& origin_ok) const {
    return subset(rows_where([&](std::size_t i) { return splits[i] == split && origin_ok(origins[i]); }));
  }

  void append(const SampleTable& other) {
    if (size() == 0) {
      *this = other;
      return;
    }
    if (other.features.cols != features.cols) throw ValidationError("sample tables use different banks");
    features.data.insert(features.data.end(), other.features.data.begin(), other.features.data.end());
    features.rows += other.features.rows;
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    origins.insert(origins.end(), other.origins.begin(), other.origins.end());
    splits.insert(splits.end(), other.splits.begin(), other.splits.end());
    video_ids.insert(video_ids.end(), other.video_ids.begin(), other.video_ids.end());
    parent_ids.insert(parent_ids.end(), other.parent_ids.begin(), other.parent_ids.end());
  }
};

inline bool any_origin(Origin) { return true; }
inline bool normal_only(Origin o) { return o == Origin::normal; }

// Segments every video under its split's labelling rule, drops discarded
// windows and extracts one feature row per remaining window.
inline SampleTable build_samples(const std::vector<const VideoRecord*>& videos, const SplitTable& splits,
                                 const SegmentParams& params, const FeatureExtractor& extractor) {
  SampleTable table;
  std::vector<std::vector<float>> rows;
  FeatureExtractor::Workspace ws;
  std::vector<GrayImage> window;
  table.features.cols = extractor.size();
  for (const VideoRecord* v : videos) {
    auto it = splits.find(v->id());
    if (it == splits.end()) throw ValidationError(concat("video ", v->id(), " has no split"));
    const Split split = it->second;
    for (const auto& seg : segment_video(v->desc, v->length(), params, label_mode(split))) {
      if (seg.label == SegmentLabel::discarded) continue;
      window.clear();
      for (int f : seg.frame_indices) window.push_back(v->frames.frames[static_cast<std::size_t>(f)]);
      const std::size_t offset = table.features.data.size();
      table.features.data.resize(offset + extractor.size());
      extractor.extract(window, std::span(table.features.data).subspan(offset, extractor.size()), ws);
      table.features.rows += 1;
      table.labels.push_back(seg.label == SegmentLabel::fall ? 1 : -1);
      table.origins.push_back(v->desc.origin);
      table.splits.push_back(split);
      table.video_ids.push_back(v->id());
      table.parent_ids.push_back(v->desc.parent_id.value_or(""));
    }
  }
  return table;
}

// Sidecar: one tab-separated line per feature row
//   video_id  label  origin  split  parent_id|-
inline void write_sample_table(const fs::path& matrix_path, const fs::path& sidecar_path, const SampleTable& t) {
  write_feature_matrix(matrix_path, t.features);
  std::ofstream out(sidecar_path);
  if (!out) throw IoError(concat("cannot write ", sidecar_path.string()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << t.video_ids[i] << '\t' << (t.labels[i] == 1 ? "fall" : "non_fall") << '\t' << to_string(t.origins[i])
        << '\t' << to_string(t.splits[i]) << '\t' << (t.parent_ids[i].empty() ? "-" : t.parent_ids[i]) << '\n';
  }
}

inline SampleTable read_sample_table(const fs::path& matrix_path, const fs::path& sidecar_path) {
  SampleTable t;
  t.features = read_feature_matrix(matrix_path);
  std::ifstream in(sidecar_path);
  if (!in) throw IoError(concat("cannot open ", sidecar_path.string()));
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto f = split(line, '\t');
    if (f.size() != 5) throw ValidationError(concat(sidecar_path.string(), ": expected 5 fields per line"));
    t.video_ids.push_back(f[0]);
    const auto label = parse_segment_label(f[1]);
    if (label == SegmentLabel::discarded) throw ValidationError("sidecar holds a discarded segment");
    t.labels.push_back(label == SegmentLabel::fall ? 1 : -1);
    t.origins.push_back(parse_origin(f[2]));
    t.splits.push_back(parse_split(f[3]));
    t.parent_ids.push_back(f[4] == "-" ? std::string() : f[4]);
  }
  if (t.size() != t.features.rows) throw ValidationError("sidecar row count differs from the feature matrix");
  return t;
}

}  // namespace occfall
