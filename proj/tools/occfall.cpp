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

// occfall command line. Every subcommand takes --config <file> with
// key=value lines named after its long options; values from the file win
// over the same flag given on the command line.
//
// exit codes: 0 ok, 2 validation error, 1 runtime failure

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "occfall/occfall.hpp"

namespace fs = std::filesystem;
using namespace occfall;

namespace {

// ------------------------------------------------------------ helpers

std::pair<int, int> parse_resolution(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw ValidationError(concat("resolution must look like 64x48, got ", s));
  return {parse_number<int>(s.substr(0, x), "width"), parse_number<int>(s.substr(x + 1), "height")};
}

template <typename T>
std::vector<T> nonempty_list(const std::string& s, const char* what) {
  auto out = occfall::parse_list<T>(s, what);
  if (out.empty()) throw ValidationError(concat("empty ", what, " list"));
  return out;
}

// Frames of another size are area-resampled to the bank resolution.
void fit_frames(VideoRecord& v, int width, int height) {
  for (auto& f : v.frames.frames) {
    if (f.width != width || f.height != height) f = resize_area(f, width, height);
  }
}

// Output of `extract`: the bank, one feature row per window, the split table
// and the parameters used.
struct DataDir {
  fs::path dir;
  ExperimentConfig meta;
  FilterBank bank;
  SampleTable table;
  SplitTable splits;

  static DataDir load(const fs::path& dir, bool with_table = true) {
    DataDir d;
    d.dir = dir;
    d.meta = ExperimentConfig::load(dir / "extract.txt");
    d.bank = load_bank(dir / "bank.txt");
    d.splits = read_splits(dir / "splits.tsv");
    if (with_table) {
      d.table = read_sample_table(dir / "features.ofm", dir / "samples.tsv");
      if (d.table.features.cols != d.bank.size()) throw ValidationError("feature matrix does not match the bank");
    }
    return d;
  }

  SegmentParams segment_params() const {
    SegmentParams p;
    p.segment_len = meta.get_number<int>("segment-len", p.segment_len);
    p.sampling_rate = meta.get_number<int>("sampling-rate", p.sampling_rate);
    p.stride = meta.get_number<int>("stride", p.stride);
    return p;
  }
};

Split parse_split_arg(const std::string& s) { return parse_split(s); }

void print_sweep(const char* name, const std::vector<SweepRow>& rows, std::ostream& out) {
  out << name << "  accuracy  rounds  features  train_s\n";
  for (const auto& r : rows) {
    out << std::setw(6) << format_double(r.value) << "  " << std::setw(8) << metric_text(r.accuracy) << "  "
        << std::setw(6) << r.rounds << "  " << std::setw(8) << r.distinct_features << "  "
        << metric_text(r.train_seconds) << '\n';
  }
}

void write_sweep_csv(const char* name, const std::vector<SweepRow>& rows, std::ostream& out) {
  out << name << ",accuracy,rounds,distinct_features,train_seconds\n";
  for (const auto& r : rows) {
    out << format_double(r.value) << ',' << format_double(r.accuracy) << ',' << r.rounds << ','
        << r.distinct_features << ',' << format_double(r.train_seconds) << '\n';
  }
}

// ------------------------------------------------------------ commands

struct SynthArgs {
  fs::path out;
  SynthCorpusSpec spec;
};

void run_synth(const SynthArgs& a) {
  a.spec.validate();
  auto videos = generate_synth_corpus(a.spec);
  const auto manifest = write_corpus(a.out, videos);
  std::cout << "wrote " << videos.size() << " videos (" << a.spec.fall_count() << " falls) to " << manifest.string()
            << '\n';
}

struct AugmentArgs {
  fs::path manifest;
  fs::path out;
  std::string mode = "dynamic";
  std::uint64_t seed = 0;
  int variants = 10;
};

void run_augment(const AugmentArgs& a) {
  if (a.mode != "dynamic" && a.mode != "constant") throw ValidationError("mode must be dynamic or constant");
  if (a.variants < 1) throw ValidationError("variants must be >= 1");
  auto entries = load_manifest(a.manifest);
  std::vector<VideoDescriptor> out_entries;
  std::size_t made = 0;
  for (const auto& d : entries) {
    out_entries.push_back(d);
    if (d.origin != Origin::normal) continue;
    const auto video = load_video(d);
    const auto seed = derive_seed(a.seed, video.id());
    std::vector<VideoRecord> children;
    if (a.mode == "dynamic") {
      auto r = augment_video(video, seed);
      for (const auto& [preset, reason] : r.omitted) {
        std::cerr << "warning: " << video.id() << ": preset " << preset << " skipped: " << reason << '\n';
      }
      children = std::move(r.videos);
    } else {
      children = augment_constant(video, seed, a.variants);
    }
    for (auto& c : children) {
      save_video(c, a.out);
      out_entries.push_back(c.desc);
      ++made;
    }
  }
  fs::create_directories(a.out);
  write_manifest(a.out / "manifest.tsv", out_entries);
  std::cout << "wrote " << made << " " << a.mode << " variants; manifest " << (a.out / "manifest.tsv").string() << '\n';
}

struct SegmentArgs {
  fs::path manifest;
  fs::path out;
  SegmentParams params;
  std::uint64_t split_seed = 0;
};

void run_segment(const SegmentArgs& a) {
  a.params.validate();
  const auto entries = load_manifest(a.manifest);
  const auto splits = assign_splits(entries, a.split_seed);
  check_split_hygiene(entries, splits);
  std::ofstream out(a.out);
  if (!out) throw IoError(concat("cannot write ", a.out.string()));
  out << "video_id\tsplit\tstart\tlabel\tframes\n";
  std::size_t kept = 0, dropped = 0;
  for (const auto& d : entries) {
    const int length = load_frames(d.frames_dir, d.id).size();
    const Split s = splits.at(d.id);
    for (const auto& seg : segment_video(d, length, a.params, label_mode(s))) {
      (seg.label == SegmentLabel::discarded ? dropped : kept) += 1;
      out << d.id << '\t' << to_string(s) << '\t' << seg.frame_indices.front() << '\t' << to_string(seg.label) << '\t';
      for (std::size_t i = 0; i < seg.frame_indices.size(); ++i) out << (i ? "," : "") << seg.frame_indices[i];
      out << '\n';
    }
  }
  std::cout << kept << " segments, " << dropped << " discarded (mixed windows in train)\n";
}

struct ExtractArgs {
  fs::path manifest;
  fs::path out;
  std::string resolution = "64x48";
  int pos_step = 4;
  std::string scales = "8,16,32";
  SegmentParams params;
  std::uint64_t split_seed = 0;
};

void run_extract(const ExtractArgs& a) {
  a.params.validate();
  const auto [w, h] = parse_resolution(a.resolution);
  BankConfig bc;
  bc.width = w;
  bc.height = h;
  bc.pos_step = a.pos_step;
  bc.shapes = shapes_from_sides(nonempty_list<int>(a.scales, "scale"));
  const auto bank = enumerate_filters(bc);
  const FeatureExtractor extractor(bank);

  const auto entries = load_manifest(a.manifest);
  const auto splits = assign_splits(entries, a.split_seed);
  check_split_hygiene(entries, splits);

  SampleTable table;
  for (const auto& d : entries) {
    auto v = load_video(d);
    fit_frames(v, w, h);
    table.append(build_samples({&v}, splits, a.params, extractor));
  }
  if (table.size() == 0) throw ValidationError("no segments survived labelling");

  fs::create_directories(a.out);
  save_bank(a.out / "bank.txt", bank);
  write_sample_table(a.out / "features.ofm", a.out / "samples.tsv", table);
  write_splits(a.out / "splits.tsv", entries, splits);
  ExperimentConfig meta;
  meta.set("manifest", fs::absolute(a.manifest).string());
  meta.set("resolution", a.resolution);
  meta.set("pos-step", std::to_string(a.pos_step));
  meta.set("scales", a.scales);
  meta.set("segment-len", std::to_string(a.params.segment_len));
  meta.set("sampling-rate", std::to_string(a.params.sampling_rate));
  meta.set("stride", std::to_string(a.params.stride));
  meta.set("split-seed", std::to_string(a.split_seed));
  meta.set("bank-checksum", to_hex(bank.checksum()));
  std::ofstream(a.out / "extract.txt") << meta.to_text();
  std::cout << "bank " << bank.size() << " filters, " << table.size() << " feature rows -> " << a.out.string()
            << '\n';
}

struct TrainArgs {
  fs::path data;
  fs::path out;
  TrainConfig cfg;
};

void run_train(const TrainArgs& a) {
  const auto d = DataDir::load(a.data);
  const auto train = d.table.select(Split::train, any_origin);
  TrainingReport rep;
  const auto pipe = train_pipeline(train, d.splits, d.bank.checksum(), a.cfg, nullptr, &rep);
  save_pipeline(a.out, pipe);
  ExperimentConfig used;
  used.set("data", fs::absolute(a.data).string());
  used.set("lambda", format_double(a.cfg.lambda));
  used.set("features", std::to_string(a.cfg.features));
  used.set("svm-c", format_double(a.cfg.svm_c));
  used.set("seed", std::to_string(a.cfg.seed));
  std::ofstream(a.out / "config.txt") << used.to_text();

  std::cout << "trained on " << train.size() << " rows (n=" << rep.policy.n << ", o=" << rep.policy.o
            << ", occluded weight " << format_double(rep.policy.occluded_weight()) << ")\n"
            << "boosting: " << rep.rounds << " rounds, " << rep.distinct_features << " distinct features, stop: "
            << rep.boost.stop_reason << '\n';
  if (!rep.svm.objective_trace.empty()) {
    std::cout << "svm objective " << format_double(rep.svm.objective_trace.back()) << '\n';
  }
  std::cout << "train accuracy " << metric_text(accuracy(pipe, train)) << ", " << metric_text(rep.seconds)
            << " s -> " << a.out.string() << '\n';
}

struct EvalArgs {
  fs::path data;
  fs::path model;
  fs::path compare;
  std::string split = "test";
  fs::path csv;
};

void run_eval(const EvalArgs& a) {
  const auto d = DataDir::load(a.data);
  const auto test = d.table.select(parse_split_arg(a.split), any_origin);
  const auto pipe = load_pipeline(a.model);
  if (pipe.bank_checksum != d.bank.checksum()) throw ValidationError("model was trained on a different bank");
  const auto rep = evaluate(pipe, test);
  std::cout << rep.to_text();
  if (!a.compare.empty()) {
    const auto base = evaluate(load_pipeline(a.compare), test);
    const auto ch = accuracy_change(base.accuracy(), rep.accuracy());
    std::cout << "change vs " << a.compare.string() << ": " << format_double(ch.points) << " points, "
              << format_double(ch.relative_percent) << " % relative\n";
  }
  if (!a.csv.empty()) {
    std::ofstream out(a.csv);
    if (!out) throw IoError(concat("cannot write ", a.csv.string()));
    out << rep.to_csv();
  } else {
    std::cout << '\n' << rep.to_csv();
  }
}

struct SweepArgs {
  fs::path data;
  fs::path runs;
  std::string grid;
  std::string split;
  TrainConfig cfg;
};

void finish_sweep(const SweepArgs& a, const char* name, const std::vector<SweepRow>& rows, ExperimentConfig used) {
  print_sweep(name, rows, std::cout);
  if (a.runs.empty()) {
    write_sweep_csv(name, rows, std::cout);
    return;
  }
  used.set("data", fs::absolute(a.data).string());
  used.set("grid", a.grid);
  used.set("split", a.split);
  const auto dir = make_run_dir(a.runs, used);
  std::ofstream out(dir / "sweep.csv");
  write_sweep_csv(name, rows, out);
  std::cout << "run directory " << dir.string() << '\n';
}

void run_sweep_lambda(const SweepArgs& a) {
  const auto d = DataDir::load(a.data);
  const auto lambdas = a.grid.empty() ? lambda_grid() : nonempty_list<double>(a.grid, "lambda");
  const auto rows = lambda_sweep(d.table.select(Split::train, any_origin),
                                 d.table.select(parse_split_arg(a.split), any_origin), d.splits, d.bank.checksum(),
                                 lambdas, a.cfg);
  ExperimentConfig used;
  used.set("features", std::to_string(a.cfg.features));
  used.set("svm-c", format_double(a.cfg.svm_c));
  used.set("seed", std::to_string(a.cfg.seed));
  finish_sweep(a, "lambda", rows, used);
}

void run_sweep_features(const SweepArgs& a) {
  const auto d = DataDir::load(a.data);
  const auto counts = nonempty_list<int>(a.grid, "feature count");
  const auto rows = feature_sweep(d.table.select(Split::train, any_origin),
                                  d.table.select(parse_split_arg(a.split), any_origin), d.splits, d.bank.checksum(),
                                  counts, a.cfg);
  ExperimentConfig used;
  used.set("lambda", format_double(a.cfg.lambda));
  used.set("svm-c", format_double(a.cfg.svm_c));
  used.set("seed", std::to_string(a.cfg.seed));
  finish_sweep(a, "K", rows, used);
}

struct BenchArgs {
  fs::path data;
  fs::path model;
  int repeats = 3;
  int max_windows = 1000;
};

void run_bench(const BenchArgs& a) {
  const auto d = DataDir::load(a.data, false);
  const auto pipe = load_pipeline(a.model);
  const auto params = d.segment_params();
  const auto [w, h] = parse_resolution(d.meta.get("resolution", "64x48"));
  std::vector<std::vector<GrayImage>> windows;
  for (const auto& desc : load_manifest(d.meta.get("manifest", ""))) {
    auto v = load_video(desc);
    fit_frames(v, w, h);
    for (const auto& idx : segment_indices(v.length(), params)) {
      std::vector<GrayImage> win;
      for (int f : idx) win.push_back(v.frames.frames[static_cast<std::size_t>(f)]);
      windows.push_back(std::move(win));
      if (static_cast<int>(windows.size()) >= a.max_windows) break;
    }
    if (static_cast<int>(windows.size()) >= a.max_windows) break;
  }
  const auto s = benchmark(pipe, d.bank, windows, a.repeats);
  std::cout << "windows " << s.windows << " (" << pipe.selected().size() << " filters, " << w << 'x' << h << ")\n"
            << "ms/frame median " << metric_text(s.median_ms) << ", p95 " << metric_text(s.p95_ms) << ", mean "
            << metric_text(s.mean_ms) << " +- " << metric_text(s.stddev_ms) << '\n';
}

struct PcaArgs {
  fs::path data;
  fs::path out;
  std::string split = "test";
};

void run_pca(const PcaArgs& a) {
  const auto d = DataDir::load(a.data);
  const auto t = a.split == "all" ? d.table : d.table.select(parse_split_arg(a.split), any_origin);
  const auto pca = pca_project_2d(to_eigen(t.features));
  if (a.out.empty()) {
    write_pca_csv(std::cout, pca, t);
  } else {
    std::ofstream out(a.out);
    if (!out) throw IoError(concat("cannot write ", a.out.string()));
    write_pca_csv(out, pca, t);
    std::cout << t.size() << " rows, explained variance ratio " << format_double(pca.ratio[0]) << ' '
              << format_double(pca.ratio[1]) << " -> " << a.out.string() << '\n';
  }
}

// ------------------------------------------------------------ wiring

// Applies key=value lines from the subcommand's --config file on top of
// whatever was parsed from the command line.
void apply_config(CLI::App& sub, const std::string& path) {
  if (path.empty()) return;
  const auto cfg = ExperimentConfig::load(path);
  for (const auto& [key, value] : cfg.values()) {
    if (key == "config") throw ValidationError("config files cannot include other config files");
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (!opt) opt = sub.get_option_no_throw(key);
    if (!opt) throw ValidationError(concat("unknown config key '", key, "' for ", sub.get_name()));
    opt->clear();
    opt->add_result(value);
    opt->run_callback();
  }
}

// Required options are checked after the config file is applied.
void check_required(CLI::App& sub) {
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_option_text() == "(required)" && opt->count() == 0) {
      throw ValidationError(concat(sub.get_name(), ": ", opt->get_name(), " is required"));
    }
  }
}

void add_segment_options(CLI::App* sub, SegmentParams& p) {
  sub->add_option("--segment-len", p.segment_len, "frames per window")->capture_default_str();
  sub->add_option("--sampling-rate", p.sampling_rate, "keep every k-th frame")->capture_default_str();
  sub->add_option("--stride", p.stride, "frames between window starts")->capture_default_str();
}

void add_train_options(CLI::App* sub, TrainConfig& c) {
  sub->add_option("--lambda", c.lambda, "occluded loss balance")->capture_default_str();
  sub->add_option("--features,-K", c.features, "boosting rounds")->capture_default_str();
  sub->add_option("--svm-c", c.svm_c, "svm trade-off")->capture_default_str();
  sub->add_option("--seed", c.seed, "training seed")->capture_default_str();
  sub->add_option("--threads", c.threads, "threads for the stump search")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"occlusion-robust fall detection: haar motion features, weighted boosting and svm"};
  app.require_subcommand(1);
  std::map<CLI::App*, std::string> config_paths;
  std::map<CLI::App*, std::function<void()>> actions;

  auto command = [&](const char* name, const char* help, std::function<void()> fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_paths[sub], "key=value file overriding flags");
    actions[sub] = std::move(fn);
    return sub;
  };

  SynthArgs synth_a;
  {
    auto* s = command("synth", "generate a synthetic stick-figure corpus", [&] { run_synth(synth_a); });
    auto& sp = synth_a.spec;
    s->add_option("--out", synth_a.out, "corpus directory")->option_text("(required)");
    s->add_option("--videos", sp.videos)->capture_default_str();
    s->add_option("--width", sp.width)->capture_default_str();
    s->add_option("--height", sp.height)->capture_default_str();
    s->add_option("--frames", sp.frames, "frames per video")->capture_default_str();
    s->add_option("--fps", sp.fps)->capture_default_str();
    s->add_option("--fall-fraction", sp.fall_fraction)->capture_default_str();
    s->add_option("--min-body", sp.min_body, "body height / frame height")->capture_default_str();
    s->add_option("--max-body", sp.max_body)->capture_default_str();
    s->add_option("--min-root-x", sp.min_root_x, "figure placement / frame width")->capture_default_str();
    s->add_option("--max-root-x", sp.max_root_x)->capture_default_str();
    s->add_option("--min-walk-speed", sp.min_walk_speed, "pixels per frame")->capture_default_str();
    s->add_option("--max-walk-speed", sp.max_walk_speed)->capture_default_str();
    s->add_option("--min-fall-frames", sp.min_fall_frames)->capture_default_str();
    s->add_option("--max-fall-frames", sp.max_fall_frames)->capture_default_str();
    s->add_option("--min-lie-frames", sp.min_lie_frames)->capture_default_str();
    s->add_option("--max-lie-frames", sp.max_lie_frames)->capture_default_str();
    s->add_option("--noise", sp.noise)->capture_default_str();
    s->add_option("--seed", sp.seed)->capture_default_str();
    s->add_option("--prefix", sp.id_prefix, "video id prefix")->capture_default_str();
  }

  AugmentArgs aug_a;
  {
    auto* s = command("augment", "write occluded variants of every normal video", [&] { run_augment(aug_a); });
    s->add_option("mode", aug_a.mode, "dynamic|constant")->capture_default_str();
    s->add_option("--manifest", aug_a.manifest)->option_text("(required)");
    s->add_option("--out", aug_a.out, "directory for the variants and the merged manifest")->option_text("(required)");
    s->add_option("--seed", aug_a.seed)->capture_default_str();
    s->add_option("--variants", aug_a.variants, "constant variants per video")->capture_default_str();
  }

  SegmentArgs seg_a;
  {
    auto* s = command("segment", "cut videos into labelled windows", [&] { run_segment(seg_a); });
    s->add_option("--manifest", seg_a.manifest)->option_text("(required)");
    s->add_option("--out", seg_a.out, "segment table (tsv)")->option_text("(required)");
    s->add_option("--split-seed", seg_a.split_seed)->capture_default_str();
    add_segment_options(s, seg_a.params);
  }

  ExtractArgs ext_a;
  {
    auto* s = command("extract", "build the filter bank and extract one feature row per window",
                      [&] { run_extract(ext_a); });
    s->add_option("--manifest", ext_a.manifest)->option_text("(required)");
    s->add_option("--out", ext_a.out, "data directory")->option_text("(required)");
    s->add_option("--resolution", ext_a.resolution, "WxH")->capture_default_str();
    s->add_option("--pos-step", ext_a.pos_step, "filter placement step in pixels")->capture_default_str();
    s->add_option("--scales", ext_a.scales, "filter side lengths")->capture_default_str();
    s->add_option("--split-seed", ext_a.split_seed)->capture_default_str();
    add_segment_options(s, ext_a.params);
  }

  TrainArgs train_a;
  {
    auto* s = command("train", "boost features and fit the weighted svm", [&] { run_train(train_a); });
    s->add_option("--data", train_a.data, "directory written by extract")->option_text("(required)");
    s->add_option("--out", train_a.out, "model directory")->option_text("(required)");
    add_train_options(s, train_a.cfg);
  }

  EvalArgs eval_a;
  {
    auto* s = command("eval", "metrics per slice", [&] { run_eval(eval_a); });
    s->add_option("--data", eval_a.data)->option_text("(required)");
    s->add_option("--model", eval_a.model)->option_text("(required)");
    s->add_option("--compare", eval_a.compare, "baseline model; prints the accuracy change");
    s->add_option("--split", eval_a.split)->capture_default_str();
    s->add_option("--csv", eval_a.csv, "write machine rows here instead of stdout");
  }

  SweepArgs sl_a;
  sl_a.split = "val";
  sl_a.cfg.features = 100;
  {
    auto* s = command("sweep-lambda", "train once per lambda, score on validation", [&] { run_sweep_lambda(sl_a); });
    s->add_option("--data", sl_a.data)->option_text("(required)");
    s->add_option("--grid", sl_a.grid, "comma separated lambdas (default 0,0.1,...,1)");
    s->add_option("--split", sl_a.split)->capture_default_str();
    s->add_option("--runs", sl_a.runs, "base directory for a timestamped run directory");
    add_train_options(s, sl_a.cfg);
  }

  SweepArgs sf_a;
  sf_a.split = "test";
  sf_a.grid = "10,100,200,300,400";
  {
    auto* s = command("sweep-features", "train once per feature count", [&] { run_sweep_features(sf_a); });
    s->add_option("--data", sf_a.data)->option_text("(required)");
    s->add_option("--grid", sf_a.grid)->capture_default_str();
    s->add_option("--split", sf_a.split)->capture_default_str();
    s->add_option("--runs", sf_a.runs, "base directory for a timestamped run directory");
    add_train_options(s, sf_a.cfg);
  }

  BenchArgs bench_a;
  {
    auto* s = command("bench", "time extraction + classification per frame", [&] { run_bench(bench_a); });
    s->add_option("--data", bench_a.data)->option_text("(required)");
    s->add_option("--model", bench_a.model)->option_text("(required)");
    s->add_option("--repeats", bench_a.repeats)->capture_default_str();
    s->add_option("--max-windows", bench_a.max_windows)->capture_default_str();
  }

  PcaArgs pca_a;
  {
    auto* s = command("pca", "2-d pca projection of the feature rows (csv)", [&] { run_pca(pca_a); });
    s->add_option("--data", pca_a.data)->option_text("(required)");
    s->add_option("--split", pca_a.split, "train|val|test|all")->capture_default_str();
    s->add_option("--out", pca_a.out, "csv path (stdout if omitted)");
  }

  try {
    app.parse(argc, argv);
    for (auto* sub : app.get_subcommands()) {
      apply_config(*sub, config_paths[sub]);
      check_required(*sub);
      actions.at(sub)();
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    app.exit(e);
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
