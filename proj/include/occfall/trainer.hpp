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

// Weighted training of the boosting + SVM pipeline.
//
// Normal samples carry weight 1 and occluded samples weight lambda * n / o,
// so the total loss is L_normal + lambda * (n / o) * L_occluded and the
// occluded share does not grow with the number of occluded variants. The
// weights seed AdaBoost's initial distribution and scale the SVM hinge
// costs.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "occfall/boosting.hpp"
#include "occfall/dataset.hpp"
#include "occfall/segmentation.hpp"
#include "occfall/svm.hpp"

namespace occfall {

struct WeightingPolicy {
  double lambda = 0.6;
  std::size_t n = 1;  // normal training samples
  std::size_t o = 0;  // occluded training samples

  void validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in [0, 1]");
    if (n < 1) throw ValidationError("weighting needs at least one normal sample");
  }

  double occluded_weight() const {
    return o == 0 ? 0.0 : lambda * static_cast<double>(n) / static_cast<double>(o);
  }
};

inline WeightingPolicy policy_for(std::span<const Origin> origins, double lambda) {
  WeightingPolicy p{lambda, 0, 0};
  for (Origin o : origins) (is_occluded(o) ? p.o : p.n) += 1;
  return p;
}

inline std::vector<double> sample_weights(std::span<const Origin> origins, const WeightingPolicy& policy) {
  policy.validate();
  const auto counted = policy_for(origins, policy.lambda);
  if (counted.n != policy.n || counted.o != policy.o) {
    throw ValidationError(concat("policy counts (n=", policy.n, ", o=", policy.o, ") differ from the samples (n=",
                                 counted.n, ", o=", counted.o, ")"));
  }
  const double ow = policy.occluded_weight();
  std::vector<double> w;
  w.reserve(origins.size());
  for (Origin o : origins) w.push_back(is_occluded(o) ? ow : 1.0);
  return w;
}

struct TrainConfig {
  double lambda = 0.6;
  int features = 300;  // boosting rounds
  double svm_c = 1.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  SvmOptions svm = pipeline_svm_options();  // svm.c is overridden by svm_c

  // looser inner tolerance: same held-out predictions, a fraction of the epochs
  static SvmOptions pipeline_svm_options() {
    SvmOptions o;
    o.inner_tolerance = 1e-3;
    return o;
  }
};

struct TrainedPipeline {
  BoostModel boost;
  SvmModel svm;
  WeightingPolicy policy;
  std::uint64_t bank_checksum = 0;
  std::uint64_t split_seed = 0;

  const std::vector<int>& selected() const { return boost.selected_features; }

  // Row over the full bank.
  double decision(std::span<const float> bank_row) const {
    thread_local std::vector<float> picked;
    picked.resize(boost.selected_features.size());
    for (std::size_t k = 0; k < picked.size(); ++k) {
      picked[k] = bank_row[static_cast<std::size_t>(boost.selected_features[k])];
    }
    return svm.decision(picked);
  }

  // Row over the selected filters only, in selection order.
  double decision_selected(std::span<const float> selected_row) const { return svm.decision(selected_row); }

  int predict(std::span<const float> bank_row) const { return decision(bank_row) > 0.0 ? 1 : -1; }
};

struct TrainingReport {
  WeightingPolicy policy;
  BoostReport boost;
  SvmReport svm;
  std::size_t rounds = 0;
  std::size_t distinct_features = 0;
  double seconds = 0.0;
};

// Throws if any occluded sample's parent video is not in the training split.
inline void check_contamination(const SampleTable& train, const SplitTable& splits) {
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train.parent_ids[i].empty()) continue;
    auto it = splits.find(train.parent_ids[i]);
    if (it == splits.end() || it->second != Split::train) {
      throw ValidationError(concat("contamination: training sample of ", train.video_ids[i], " has parent ",
                                   train.parent_ids[i], " outside the training split"));
    }
  }
}

inline TrainedPipeline train_pipeline(const SampleTable& train, const SplitTable& splits, std::uint64_t bank_checksum,
                                      const TrainConfig& cfg, const SortedColumns* presorted = nullptr,
                                      TrainingReport* report = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  check_contamination(train, splits);
  if (train.size() == 0) throw ValidationError("empty training set");

  TrainedPipeline pipe;
  pipe.policy = policy_for(train.origins, cfg.lambda);
  pipe.bank_checksum = bank_checksum;
  pipe.split_seed = cfg.seed;
  const auto weights = sample_weights(train.origins, pipe.policy);

  BoostReport boost_report;
  pipe.boost = adaboost_train(train.features, train.labels, weights, BoostOptions{cfg.features, cfg.threads},
                              presorted, &boost_report);
  pipe.boost.bank_checksum = bank_checksum;

  SvmOptions svm_opt = cfg.svm;
  svm_opt.c = cfg.svm_c;
  svm_opt.seed = cfg.seed;
  SvmReport svm_report;
  const auto selected = train.features.select_cols(pipe.boost.selected_features);
  pipe.svm = train_weighted_svm(selected, train.labels, weights, svm_opt, &svm_report);
  pipe.svm.bank_checksum = bank_checksum;
  pipe.svm.selection_checksum = pipe.boost.selection_checksum();

  if (report) {
    report->policy = pipe.policy;
    report->boost = std::move(boost_report);
    report->svm = std::move(svm_report);
    report->rounds = pipe.boost.rounds();
    report->distinct_features = pipe.boost.selected_features.size();
    report->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return pipe;
}

// Fraction of rows whose predicted label matches.
inline double accuracy(const TrainedPipeline& pipe, const SampleTable& table) {
  if (table.size() == 0) throw ValidationError("accuracy of an empty table");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < table.size(); ++i) ok += pipe.predict(table.features.row(i)) == table.labels[i];
  return static_cast<double>(ok) / static_cast<double>(table.size());
}

struct SweepRow {
  double value = 0.0;  // lambda or K
  double accuracy = 0.0;
  double train_seconds = 0.0;
  std::size_t rounds = 0;
  std::size_t distinct_features = 0;
};

inline std::vector<double> lambda_grid(double step = 0.1) {
  std::vector<double> g;
  const int n = static_cast<int>(std::lround(1.0 / step));
  for (int i = 0; i <= n; ++i) g.push_back(std::min(1.0, i * step));
  return g;
}

// One full train + validate per lambda; the presort is shared.
inline std::vector<SweepRow> lambda_sweep(const SampleTable& train, const SampleTable& validation,
                                          const SplitTable& splits, std::uint64_t bank_checksum,
                                          const std::vector<double>& lambdas, const TrainConfig& base) {
  if (validation.size() == 0) throw ValidationError("empty validation set");
  const SortedColumns presorted(train.features);
  std::vector<SweepRow> rows;
  for (double lambda : lambdas) {
    TrainConfig cfg = base;
    cfg.lambda = lambda;
    TrainingReport rep;
    const auto pipe = train_pipeline(train, splits, bank_checksum, cfg, &presorted, &rep);
    rows.push_back({lambda, accuracy(pipe, validation), rep.seconds, rep.rounds, rep.distinct_features});
  }
  return rows;
}

inline std::vector<SweepRow> feature_sweep(const SampleTable& train, const SampleTable& test, const SplitTable& splits,
                                           std::uint64_t bank_checksum, const std::vector<int>& counts,
                                           const TrainConfig& base) {
  if (test.size() == 0) throw ValidationError("empty evaluation set");
  const SortedColumns presorted(train.features);
  std::vector<SweepRow> rows;
  for (int k : counts) {
    TrainConfig cfg = base;
    cfg.features = k;
    TrainingReport rep;
    const auto pipe = train_pipeline(train, splits, bank_checksum, cfg, &presorted, &rep);
    rows.push_back({static_cast<double>(k), accuracy(pipe, test), rep.seconds, rep.rounds, rep.distinct_features});
  }
  return rows;
}

inline void save_pipeline(const fs::path& dir, const TrainedPipeline& pipe) {
  fs::create_directories(dir);
  save_boost_model(dir / "boost.txt", pipe.boost);
  save_svm_model(dir / "svm.txt", pipe.svm);
  std::ofstream meta(dir / "pipeline.txt");
  if (!meta) throw IoError(concat("cannot write into ", dir.string()));
  meta << "# occfall pipeline v1\n"
       << "lambda " << format_double(pipe.policy.lambda) << "\nn " << pipe.policy.n << "\no " << pipe.policy.o
       << "\nbank_checksum " << to_hex(pipe.bank_checksum) << "\nsplit_seed " << pipe.split_seed << '\n';
}

inline TrainedPipeline load_pipeline(const fs::path& dir) {
  TrainedPipeline pipe;
  std::ifstream meta(dir / "pipeline.txt");
  if (!meta) throw IoError(concat("no pipeline in ", dir.string()));
  std::string line;
  while (std::getline(meta, line)) {
    if (trim(line).empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    std::string key, value;
    ls >> key >> value;
    if (key == "lambda") pipe.policy.lambda = parse_number<double>(value, "lambda");
    else if (key == "n") pipe.policy.n = parse_number<std::size_t>(value, "n");
    else if (key == "o") pipe.policy.o = parse_number<std::size_t>(value, "o");
    else if (key == "bank_checksum") pipe.bank_checksum = parse_hex(value);
    else if (key == "split_seed") pipe.split_seed = parse_number<std::uint64_t>(value, "split_seed");
  }
  pipe.boost = load_boost_model(dir / "boost.txt", pipe.bank_checksum);
  pipe.svm = load_svm_model(dir / "svm.txt");
  if (pipe.svm.bank_checksum != pipe.bank_checksum || pipe.svm.selection_checksum != pipe.boost.selection_checksum() ||
      pipe.svm.dimension() != pipe.boost.selected_features.size()) {
    throw ValidationError(concat(dir.string(), ": boosting and svm models do not belong together"));
  }
  return pipe;
}

// key=value experiment configuration. Unknown keys are kept verbatim.
class ExperimentConfig {
 public:
  static ExperimentConfig parse(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      auto eq = t.find('=');
      if (eq == std::string_view::npos) throw ValidationError(concat("config line ", line_no, ": expected key=value"));
      cfg.values_[std::string(trim(t.substr(0, eq)))] = std::string(trim(t.substr(eq + 1)));
    }
    return cfg;
  }

  static ExperimentConfig load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(concat("cannot open config ", path.string()));
    return parse(in);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  template <typename T>
  T get_number(const std::string& key, T fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_number<T>(it->second, key);
  }

  std::string to_text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += concat(k, '=', v, '\n');
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
};

// base/run-YYYYmmdd-HHMMSS[-k], holding a copy of the configuration.
inline fs::path make_run_dir(const fs::path& base, const ExperimentConfig& cfg) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "run-%Y%m%d-%H%M%S", &tm);
  fs::path dir = base / stamp;
  for (int k = 1; fs::exists(dir); ++k) dir = base / concat(stamp, '-', k);
  fs::create_directories(dir);
  std::ofstream out(dir / "config.txt");
  out << cfg.to_text();
  return dir;
}

}  // namespace occfall
