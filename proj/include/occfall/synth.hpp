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

// Desk-scale synthetic corpus: stick figures drawn as bright strokes on a
// textured background, performing scripted falls and everyday motions.
// Keypoints come straight from the figure's skeleton.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "occfall/common.hpp"
#include "occfall/corpus.hpp"

namespace occfall {

enum class SynthScript { fall, walk, sit_down, lie_down, bend, idle, lying };

inline const char* to_string(SynthScript s) {
  static constexpr const char* names[] = {"fall", "walk", "sit_down", "lie_down", "bend", "idle", "lying"};
  return names[static_cast<int>(s)];
}

struct SynthCorpusSpec {
  int videos = 200;
  int width = 64;
  int height = 48;
  double fps = 30.0;
  int frames = 20;
  double fall_fraction = 0.5;
  double min_body = 0.50;  // body height as a fraction of the frame height
  double max_body = 0.65;
  double min_root_x = 0.3;  // horizontal placement as a fraction of the frame width
  double max_root_x = 0.7;
  double min_walk_speed = 0.6;  // pixels per frame
  double max_walk_speed = 1.4;
  int min_fall_frames = 6;
  int max_fall_frames = 10;
  int min_lie_frames = 28;  // lying down on purpose is much slower than falling
  int max_lie_frames = 40;
  int noise = 2;  // per-frame pixel noise amplitude
  std::uint64_t seed = 0;
  std::string id_prefix = "synth";

  int fall_count() const { return static_cast<int>(std::lround(fall_fraction * videos)); }

  void validate() const {
    if (videos < 0) throw ValidationError("video count must be >= 0");
    if (width < 16 || height < 16) throw ValidationError("synthetic frames must be at least 16x16");
    if (frames < 4) throw ValidationError("synthetic videos need at least 4 frames");
    if (!(fps > 0)) throw ValidationError("fps must be > 0");
    if (!(fall_fraction >= 0 && fall_fraction <= 1)) throw ValidationError("fall fraction must lie in [0, 1]");
    if (!(min_body > 0 && min_body <= max_body && max_body <= 0.9)) throw ValidationError("invalid body size range");
    if (!(min_root_x >= 0 && min_root_x <= max_root_x && max_root_x <= 1)) throw ValidationError("invalid root placement range");
    if (!(min_walk_speed >= 0 && min_walk_speed <= max_walk_speed)) throw ValidationError("invalid walk speed range");
    if (min_fall_frames < 2 || min_fall_frames > max_fall_frames) throw ValidationError("invalid fall duration range");
    if (max_fall_frames + 4 > frames) throw ValidationError("videos too short for the fall duration");
    if (min_lie_frames < 2 || min_lie_frames > max_lie_frames) throw ValidationError("invalid lie-down duration range");
    if (noise < 0 || noise > 64) throw ValidationError("noise must lie in [0, 64]");
  }
};

namespace synth {

struct Vec {
  double x = 0;
  double y = 0;
};

inline Vec operator+(Vec a, Vec b) { return {a.x + b.x, a.y + b.y}; }
inline Vec operator-(Vec a, Vec b) { return {a.x - b.x, a.y - b.y}; }
inline Vec operator*(double s, Vec a) { return {s * a.x, s * a.y}; }

// Joint angles in radians; "forward" is the facing direction.
struct Articulation {
  double lean = 0;  // torso, forward positive
  double thigh[2] = {0, 0};  // right, left; from straight down
  double knee[2] = {0, 0};   // flexion, shin swings back
  double arm[2] = {0, 0};    // upper arm from straight down
  double elbow[2] = {0, 0};
  double tilt = 0;  // whole-body rotation about the feet
};

inline double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3 - 2 * u);
}

// Accelerating: slow start, fast impact.
inline double fall_ease(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return 0.5 * u + 0.5 * u * u;
}

inline double lerp(double a, double b, double u) { return a + (b - a) * u; }

// Joints in body units (height about 1), hip at the origin, y down. The
// returned pose is already tilted about the ankle midpoint.
inline std::array<Vec, kNumJoints> skeleton(const Articulation& a, int facing, int tilt_sign) {
  std::array<Vec, kNumJoints> j{};
  const double f = facing;
  auto dir_up = [&](double ang) { return Vec{f * std::sin(ang), -std::cos(ang)}; };
  auto dir_down = [&](double ang) { return Vec{f * std::sin(ang), std::cos(ang)}; };

  const Vec up = dir_up(a.lean);
  const Vec side{-up.y, up.x};
  j[kMidHip] = {0, 0};
  j[kNeck] = 0.32 * up;
  j[kNose] = j[kNeck] + 0.10 * up;
  j[kREye] = j[kNose] + 0.02 * up - 0.02 * side;
  j[kLEye] = j[kNose] + 0.02 * up + 0.02 * side;
  j[kREar] = j[kNose] - 0.045 * side;
  j[kLEar] = j[kNose] + 0.045 * side;
  j[kRShoulder] = j[kNeck] - 0.09 * side;
  j[kLShoulder] = j[kNeck] + 0.09 * side;
  j[kRHip] = {-0.055, 0};
  j[kLHip] = {0.055, 0};

  const int shoulder[2] = {kRShoulder, kLShoulder};
  const int elbow[2] = {kRElbow, kLElbow};
  const int wrist[2] = {kRWrist, kLWrist};
  const int hip[2] = {kRHip, kLHip};
  const int knee[2] = {kRKnee, kLKnee};
  const int ankle[2] = {kRAnkle, kLAnkle};
  const int big_toe[2] = {kRBigToe, kLBigToe};
  const int small_toe[2] = {kRSmallToe, kLSmallToe};
  const int heel[2] = {kRHeel, kLHeel};
  for (int s = 0; s < 2; ++s) {
    // Arms hang relative to the torso.
    j[elbow[s]] = j[shoulder[s]] + 0.16 * dir_down(a.arm[s] + a.lean);
    j[wrist[s]] = j[elbow[s]] + 0.14 * dir_down(a.arm[s] + a.elbow[s] + a.lean);
    j[knee[s]] = j[hip[s]] + 0.25 * dir_down(a.thigh[s]);
    j[ankle[s]] = j[knee[s]] + 0.25 * dir_down(a.thigh[s] - a.knee[s]);
    j[heel[s]] = j[ankle[s]] + Vec{-f * 0.02, 0.02};
    j[big_toe[s]] = j[ankle[s]] + Vec{f * 0.07, 0.02};
    j[small_toe[s]] = j[ankle[s]] + Vec{f * 0.06, 0.025};
  }

  const Vec pivot = 0.5 * (j[kRAnkle] + j[kLAnkle]);
  const double t = tilt_sign * a.tilt;
  const double c = std::cos(t), s = std::sin(t);
  for (auto& p : j) {
    const Vec d = p - pivot;
    p = Vec{d.x * c - d.y * s, d.x * s + d.y * c};  // pivot at the origin
  }
  return j;
}

struct Script {
  SynthScript kind = SynthScript::idle;
  int facing = 1;
  int tilt_sign = 1;  // which way a fall or lie-down goes
  double speed = 0;   // pixels per frame while walking
  double phase0 = 0;
  double omega = 0.4;  // gait frequency, radians per frame
  int start = 0;
  int duration = 1;
  bool walk_before = false;
};

inline Articulation gait(double phase) {
  Articulation a;
  a.thigh[0] = 0.35 * std::sin(phase);
  a.thigh[1] = -0.35 * std::sin(phase);
  a.knee[0] = 0.35 * std::max(0.0, std::sin(phase + 1.2));
  a.knee[1] = 0.35 * std::max(0.0, -std::sin(phase + 1.2));
  a.arm[0] = -0.3 * std::sin(phase);
  a.arm[1] = 0.3 * std::sin(phase);
  a.elbow[0] = a.elbow[1] = 0.2;
  return a;
}

inline Articulation rest(double t) {
  Articulation a;
  a.arm[0] = 0.08 * std::sin(0.21 * t);
  a.arm[1] = -0.08 * std::sin(0.17 * t + 1.0);
  a.elbow[0] = a.elbow[1] = 0.1;
  a.lean = 0.03 * std::sin(0.13 * t);
  return a;
}

// Articulation and horizontal root displacement (pixels) at frame t.
inline std::pair<Articulation, double> script_state(const Script& sc, int t) {
  const double time = t;
  switch (sc.kind) {
    case SynthScript::walk:
      return {gait(sc.phase0 + sc.omega * time), sc.speed * time};
    case SynthScript::idle:
      return {rest(time + sc.phase0), 0.0};
    case SynthScript::lying: {
      auto a = rest(time + sc.phase0);
      a.tilt = std::numbers::pi / 2;
      a.arm[0] += 0.3;
      a.knee[1] = 0.4;
      return {a, 0.0};
    }
    case SynthScript::bend: {
      const double down = smoothstep((time - sc.start) / sc.duration);
      const double up = smoothstep((time - sc.start - sc.duration - 3) / sc.duration);
      auto a = rest(time + sc.phase0);
      const double amount = down - up;
      a.lean = 1.1 * amount;
      a.arm[0] = a.arm[1] = 0.5 * amount;
      a.knee[0] = a.knee[1] = 0.15 * amount;
      a.thigh[0] = a.thigh[1] = -0.15 * amount;
      return {a, 0.0};
    }
    case SynthScript::sit_down: {
      const double u = smoothstep((time - sc.start) / sc.duration);
      auto a = rest(time + sc.phase0);
      a.thigh[0] = a.thigh[1] = 1.4 * u;
      a.knee[0] = a.knee[1] = 1.5 * u;
      a.lean = 0.25 * u;
      a.arm[0] = a.arm[1] = 0.4 * u;
      return {a, 0.0};
    }
    case SynthScript::lie_down: {
      // Crouch first, then lower the body slowly.
      const double u = (time - sc.start) / sc.duration;
      const double crouch = smoothstep(u / 0.4) - smoothstep((u - 0.6) / 0.4);
      auto a = rest(time + sc.phase0);
      a.thigh[0] = a.thigh[1] = 0.8 * crouch;
      a.knee[0] = a.knee[1] = 1.0 * crouch;
      a.tilt = std::numbers::pi / 2 * smoothstep(u);
      a.arm[0] = a.arm[1] = 0.6 * crouch;
      return {a, 0.0};
    }
    case SynthScript::fall: {
      double shift = 0.0;
      Articulation a;
      const double before = std::min<double>(time, sc.start);
      if (sc.walk_before) {
        a = gait(sc.phase0 + sc.omega * before);
        shift = sc.speed * before;
      } else {
        a = rest(before + sc.phase0);
      }
      if (t >= sc.start) {
        const double u = (time - sc.start) / sc.duration;
        const double e = fall_ease(u);
        a.tilt = std::numbers::pi / 2 * e;
        a.arm[0] = lerp(a.arm[0], 1.3, smoothstep(u));
        a.arm[1] = lerp(a.arm[1], 1.1, smoothstep(u));
        a.knee[0] = lerp(a.knee[0], 0.3, smoothstep(u));
        a.knee[1] = lerp(a.knee[1], 0.1, smoothstep(u));
        a.lean = lerp(a.lean, -0.2, smoothstep(u));
        if (u > 1.0) {
          const auto r = rest(time + sc.phase0);
          a.arm[0] += r.arm[0];
          a.arm[1] += r.arm[1];
        }
      }
      return {a, shift};
    }
  }
  return {Articulation{}, 0.0};
}

// Distance from p to the segment [a, b].
inline double segment_distance(Vec p, Vec a, Vec b) {
  const Vec ab = b - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  double u = len2 > 0 ? ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  const Vec d = p - (a + u * ab);
  return std::sqrt(d.x * d.x + d.y * d.y);
}

inline constexpr std::array<std::pair<int, int>, 16> kBones = {{
    {kNeck, kNose}, {kNeck, kMidHip}, {kRShoulder, kLShoulder}, {kRShoulder, kRElbow},
    {kRElbow, kRWrist}, {kLShoulder, kLElbow}, {kLElbow, kLWrist}, {kRHip, kLHip},
    {kRHip, kRKnee}, {kRKnee, kRAnkle}, {kLHip, kLKnee}, {kLKnee, kLAnkle},
    {kRHeel, kRBigToe}, {kLHeel, kLBigToe}, {kRAnkle, kRHeel}, {kLAnkle, kLHeel},
}};

inline Image<std::uint8_t> background(int w, int h, Rng& rng) {
  const double base = rng.uniform(55, 110);
  double amp[3], period[3], phase[3];
  for (int k = 0; k < 3; ++k) {
    amp[k] = rng.uniform(6, 14);
    period[k] = rng.uniform(10, 40);
    phase[k] = rng.uniform(0, 2 * std::numbers::pi);
  }
  GrayImage img(w, h);
  const double tau = 2 * std::numbers::pi;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = base + amp[0] * std::sin(tau * x / period[0] + phase[0]) +
                 amp[1] * std::sin(tau * y / period[1] + phase[1]) +
                 amp[2] * std::sin(tau * (x + y) / period[2] + phase[2]) +
                 static_cast<double>(rng.uniform_int(-6, 6));
      img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return img;
}

}  // namespace synth

// One video per index; video i depends only on (spec, i).
inline VideoRecord generate_synth_video(const SynthCorpusSpec& spec, int index, bool is_fall,
                                       SynthScript* script = nullptr) {
  using namespace synth;
  Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(index)));
  const int W = spec.width, H = spec.height, L = spec.frames;

  Script sc;
  if (is_fall) {
    sc.kind = SynthScript::fall;
  } else {
    static constexpr SynthScript others[] = {SynthScript::walk, SynthScript::sit_down, SynthScript::lie_down,
                                             SynthScript::bend, SynthScript::idle,     SynthScript::lying};
    sc.kind = others[rng.uniform_int(0, 5)];
  }
  sc.facing = rng.uniform_int(0, 1) ? 1 : -1;
  sc.tilt_sign = rng.uniform_int(0, 1) ? 1 : -1;
  sc.speed = sc.facing * rng.uniform(spec.min_walk_speed, spec.max_walk_speed);
  sc.phase0 = rng.uniform(0, 2 * std::numbers::pi);
  sc.omega = rng.uniform(0.35, 0.5);
  switch (sc.kind) {
    case SynthScript::fall:
      sc.duration = static_cast<int>(rng.uniform_int(spec.min_fall_frames, spec.max_fall_frames));
      sc.start = static_cast<int>(rng.uniform_int(2, std::max(2, L - sc.duration - 2)));
      sc.walk_before = rng.uniform() < 0.5;
      break;
    case SynthScript::sit_down:
      sc.duration = static_cast<int>(rng.uniform_int(10, 16));
      sc.start = static_cast<int>(rng.uniform_int(0, std::max(0, L / 3)));
      break;
    case SynthScript::lie_down:
      sc.duration = static_cast<int>(rng.uniform_int(spec.min_lie_frames, spec.max_lie_frames));
      sc.start = static_cast<int>(rng.uniform_int(-sc.duration / 3, std::max(0, L / 4)));
      break;
    case SynthScript::bend:
      sc.duration = static_cast<int>(rng.uniform_int(6, 10));
      sc.start = static_cast<int>(rng.uniform_int(0, std::max(0, L / 3)));
      break;
    default:
      break;
  }

  if (script) *script = sc.kind;
  const double body = rng.uniform(spec.min_body, spec.max_body) * H;
  const double thickness = std::max(1.6, 0.065 * body);
  const double head = std::max(1.5, 0.065 * body);
  const auto ink = static_cast<int>(rng.uniform_int(170, 240));
  const double floor_y = H - 2.0 - rng.uniform(0, 0.08 * H);
  const double root_x = rng.uniform(spec.min_root_x, spec.max_root_x) * W;
  GrayImage bg = background(W, H, rng);

  // Joint positions in pixels; the lowest point rests on the floor.
  std::vector<std::array<Vec, kNumJoints>> track(static_cast<std::size_t>(L));
  for (int t = 0; t < L; ++t) {
    auto [art, dx] = script_state(sc, t);
    auto j = skeleton(art, sc.facing, sc.tilt_sign);
    double lowest = -1e9;
    for (const auto& p : j) lowest = std::max(lowest, p.y);
    for (auto& p : j) p = Vec{root_x + dx + body * p.x, floor_y + body * (p.y - lowest)};
    track[static_cast<std::size_t>(t)] = j;
  }

  // Shift the whole track so every joint and the head stay inside the frame.
  double min_x = 1e9, max_x = -1e9, min_y = 1e9;
  for (const auto& j : track) {
    for (const auto& p : j) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
    }
  }
  const double margin = head + 1.0;
  double shift_x = 0.0;
  if (min_x < margin) shift_x = margin - min_x;
  if (max_x + shift_x > W - 1 - margin) shift_x = (W - 1 - margin) - max_x;
  const double shift_y = min_y < margin ? margin - min_y : 0.0;
  for (auto& j : track) {
    for (auto& p : j) {
      p.x = std::clamp(p.x + shift_x, 0.0, W - 1.0);
      p.y = std::clamp(p.y + shift_y, 0.0, H - 1.0);
    }
  }

  VideoRecord rec;
  char id[64];
  std::snprintf(id, sizeof(id), "%s_%04d", spec.id_prefix.c_str(), index);
  rec.desc.id = id;
  rec.desc.origin = Origin::normal;
  if (sc.kind == SynthScript::fall) {
    rec.desc.annotation.fall_start = sc.start;
    rec.desc.annotation.fall_end = std::min(sc.start + sc.duration, L - 1);
  }
  rec.frames.id = rec.desc.id;
  rec.frames.fps = spec.fps;
  KeypointTrack kp;
  for (int t = 0; t < L; ++t) {
    const auto& j = track[static_cast<std::size_t>(t)];
    GrayImage img = bg;
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const Vec p{x + 0.0, y + 0.0};
        bool on = segment_distance(p, j[kNose], j[kNose]) <= head;
        for (std::size_t b = 0; b < kBones.size() && !on; ++b) {
          on = segment_distance(p, j[kBones[b].first], j[kBones[b].second]) <= 0.5 * thickness;
        }
        int v = on ? ink : img.at(x, y);
        if (spec.noise > 0) v += static_cast<int>(rng.uniform_int(-spec.noise, spec.noise));
        img.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
    }
    rec.frames.frames.push_back(std::move(img));
    Pose pose{};
    for (int k = 0; k < kNumJoints; ++k) {
      pose[static_cast<std::size_t>(k)] = {static_cast<float>(j[static_cast<std::size_t>(k)].x),
                                           static_cast<float>(j[static_cast<std::size_t>(k)].y), 1.0f};
    }
    kp.poses.push_back(pose);
  }
  rec.keypoints = std::move(kp);
  return rec;
}

// Exactly round(fall_fraction * videos) fall videos, at seeded positions.
inline std::vector<VideoRecord> generate_synth_corpus(const SynthCorpusSpec& spec,
                                                     std::vector<SynthScript>* scripts = nullptr) {
  spec.validate();
  std::vector<char> fall(static_cast<std::size_t>(spec.videos), 0);
  std::fill_n(fall.begin(), spec.fall_count(), 1);
  Rng rng(derive_seed(spec.seed, "fall-assignment"));
  rng.shuffle(fall);
  std::vector<VideoRecord> out;
  out.reserve(fall.size());
  if (scripts) scripts->assign(fall.size(), SynthScript::idle);
  for (int i = 0; i < spec.videos; ++i) {
    out.push_back(generate_synth_video(spec, i, fall[static_cast<std::size_t>(i)],
                                       scripts ? &(*scripts)[static_cast<std::size_t>(i)] : nullptr));
  }
  return out;
}

// Writes every video under root and a manifest.tsv listing them.
inline fs::path write_corpus(const fs::path& root, std::vector<VideoRecord>& videos) {
  fs::create_directories(root);
  std::vector<VideoDescriptor> descs;
  for (auto& v : videos) {
    save_video(v, root);
    descs.push_back(v.desc);
  }
  const auto manifest = root / "manifest.tsv";
  write_manifest(manifest, descs);
  return manifest;
}

}  // namespace occfall
