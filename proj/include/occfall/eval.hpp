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

// Metrics (fall is the positive class), PCA diagnostics and timing.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "occfall/dataset.hpp"
#include "occfall/trainer.hpp"

namespace occfall {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fn + fp + tn; }

  void add(int truth, int predicted) {
    if (truth == 1) {
      (predicted == 1 ? tp : fn) += 1;
    } else {
      (predicted == 1 ? fp : tn) += 1;
    }
  }

  std::optional<double> accuracy() const {
    if (total() == 0) return std::nullopt;
    return static_cast<double>(tp + tn) / static_cast<double>(total());
  }
  std::optional<double> recall() const {
    if (tp + fn == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  std::optional<double> precision() const {
    if (tp + fp == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
};

inline std::string metric_text(std::optional<double> v) {
  if (!v) return "n/a";
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << *v;
  return os.str();
}

struct EvalReport {
  Confusion all;
  std::map<std::string, Confusion> by_origin;  // keyed by origin name
  std::vector<std::string> warnings;
  std::optional<double> median_ms;  // per frame, filled by benchmark()
  std::optional<double> p95_ms;

  double accuracy() const { return all.accuracy().value_or(0.0); }

  // Slices: all, normal, occluded (any occluded origin), then each origin.
  std::vector<std::pair<std::string, Confusion>> slices() const {
    std::vector<std::pair<std::string, Confusion>> out{{"all", all}};
    Confusion normal, occluded;
    for (const auto& [name, c] : by_origin) {
      Confusion& dst = parse_origin(name) == Origin::normal ? normal : occluded;
      dst.tp += c.tp;
      dst.fn += c.fn;
      dst.fp += c.fp;
      dst.tn += c.tn;
    }
    out.emplace_back("normal", normal);
    out.emplace_back("occluded", occluded);
    for (const auto& [name, c] : by_origin) {
      if (name != "normal") out.emplace_back(name, c);
    }
    return out;
  }

  std::string to_text() const {
    std::ostringstream os;
    os << std::left << std::setw(20) << "slice" << std::right << std::setw(8) << "samples" << std::setw(7) << "TP"
       << std::setw(7) << "FN" << std::setw(7) << "FP" << std::setw(7) << "TN" << std::setw(10) << "accuracy"
       << std::setw(10) << "recall" << std::setw(11) << "precision" << '\n';
    for (const auto& [name, c] : slices()) {
      os << std::left << std::setw(20) << name << std::right << std::setw(8) << c.total() << std::setw(7) << c.tp
         << std::setw(7) << c.fn << std::setw(7) << c.fp << std::setw(7) << c.tn << std::setw(10)
         << metric_text(c.accuracy()) << std::setw(10) << metric_text(c.recall()) << std::setw(11)
         << metric_text(c.precision()) << '\n';
    }
    if (median_ms) {
      os << "time per frame: median " << metric_text(median_ms) << " ms, p95 " << metric_text(p95_ms) << " ms\n";
    }
    for (const auto& w : warnings) os << "warning: " << w << '\n';
    return os.str();
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "slice,samples,tp,fn,fp,tn,accuracy,recall,precision\n";
    for (const auto& [name, c] : slices()) {
      os << name << ',' << c.total() << ',' << c.tp << ',' << c.fn << ',' << c.fp << ',' << c.tn << ','
         << metric_text(c.accuracy()) << ',' << metric_text(c.recall()) << ',' << metric_text(c.precision()) << '\n';
    }
    return os.str();
  }
};

inline void add_metric_warnings(const std::string& name, const Confusion& c, std::vector<std::string>& warnings) {
  if (c.total() == 0) return;
  if (!c.recall()) warnings.push_back(concat(name, ": no fall samples, recall is undefined"));
  if (!c.precision()) warnings.push_back(concat(name, ": no fall predictions, precision is undefined"));
}

inline EvalReport report_from_predictions(std::span<const int> truth, std::span<const int> predicted,
                                          std::span<const Origin> origins) {
  if (truth.empty()) throw ValidationError("empty test set");
  if (predicted.size() != truth.size() || origins.size() != truth.size()) {
    throw ValidationError("evaluation inputs differ in length");
  }
  EvalReport r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    r.all.add(truth[i], predicted[i]);
    r.by_origin[to_string(origins[i])].add(truth[i], predicted[i]);
  }
  add_metric_warnings("all", r.all, r.warnings);
  return r;
}

inline EvalReport evaluate(const TrainedPipeline& pipe, const SampleTable& test) {
  if (test.size() == 0) throw ValidationError("empty test set");
  std::vector<int> predicted(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) predicted[i] = pipe.predict(test.features.row(i));
  return report_from_predictions(test.labels, predicted, test.origins);
}

// Accuracy change between two conditions, in both readings: percentage
// points and relative percent of the baseline.
struct AccuracyChange {
  double points = 0.0;
  double relative_percent = 0.0;
};

inline AccuracyChange accuracy_change(double baseline, double other) {
  AccuracyChange c;
  c.points = 100.0 * (other - baseline);
  c.relative_percent = baseline > 0.0 ? 100.0 * (other - baseline) / baseline : 0.0;
  return c;
}

// ---------------------------------------------------------------- PCA

struct PcaResult {
  Eigen::MatrixXd projection;  // n x 2
  Eigen::MatrixXd components;  // 2 x d, unit rows (a zero row for a missing component)
  Eigen::VectorXd mean;        // d
  double variance[2] = {0.0, 0.0};  // eigenvalues of the sample covariance
  double ratio[2] = {0.0, 0.0};     // share of the total variance
};

// Mean-centred projection onto the top two covariance eigenvectors. Each
// component's largest-magnitude loading is made positive.
inline PcaResult pca_project_2d(const Eigen::MatrixXd& x) {
  const auto n = x.rows();
  const auto d = x.cols();
  if (n < 3) throw ValidationError("pca needs at least 3 samples");
  if (d < 2) throw ValidationError("pca needs at least 2 dimensions");
  if (!x.allFinite()) throw ValidationError("pca input has non-finite values");

  PcaResult r;
  r.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd xc = x.rowwise() - r.mean.transpose();
  const double denom = static_cast<double>(n - 1);
  const double total = xc.squaredNorm() / denom;

  r.components = Eigen::MatrixXd::Zero(2, d);
  if (d <= n) {
    const Eigen::MatrixXd cov = (xc.transpose() * xc) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    for (int k = 0; k < 2; ++k) {
      r.variance[k] = std::max(0.0, es.eigenvalues()(d - 1 - k));
      r.components.row(k) = es.eigenvectors().col(d - 1 - k).transpose();
    }
  } else {
    // More dimensions than samples: work on the n x n Gram matrix.
    const Eigen::MatrixXd gram = (xc * xc.transpose()) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    for (int k = 0; k < 2; ++k) {
      r.variance[k] = std::max(0.0, es.eigenvalues()(n - 1 - k));
      Eigen::VectorXd v = xc.transpose() * es.eigenvectors().col(n - 1 - k);
      const double norm = v.norm();
      if (norm > 0.0) r.components.row(k) = (v / norm).transpose();
    }
  }

  const double scale = std::max(r.variance[0], 1e-300);
  for (int k = 0; k < 2; ++k) {
    if (r.variance[k] <= 1e-12 * scale) {
      r.variance[k] = 0.0;
      r.components.row(k).setZero();
      continue;
    }
    Eigen::Index arg = 0;
    r.components.row(k).cwiseAbs().maxCoeff(&arg);
    if (r.components(k, arg) < 0.0) r.components.row(k) *= -1.0;
  }
  for (int k = 0; k < 2; ++k) r.ratio[k] = total > 0.0 ? r.variance[k] / total : 0.0;
  r.projection = xc * r.components.transpose();
  return r;
}

inline Eigen::MatrixXd to_eigen(const FeatureMatrix& m) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols));
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.at(i, j);
    }
  }
  return x;
}

inline void write_pca_csv(std::ostream& out, const PcaResult& pca, const SampleTable& table) {
  out << "# pca of dynamic haar features; explained variance " << format_double(pca.variance[0]) << ' '
      << format_double(pca.variance[1]) << " (ratio " << format_double(pca.ratio[0]) << ' '
      << format_double(pca.ratio[1]) << ")\n";
  out << "video_id,label,origin,pc1,pc2\n";
  for (Eigen::Index i = 0; i < pca.projection.rows(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    out << table.video_ids[k] << ',' << (table.labels[k] == 1 ? "fall" : "non_fall") << ','
        << to_string(table.origins[k]) << ',' << format_double(pca.projection(i, 0)) << ','
        << format_double(pca.projection(i, 1)) << '\n';
  }
}

// ---------------------------------------------------------------- timing

struct BenchStats {
  std::size_t windows = 0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double mean_ms = 0.0;
  double stddev_ms = 0.0;
};

inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

// Wall time of extraction (selected filters only) plus classification for
// each window. A new frame completes one window, so the time per window is
// reported as the time per frame.
inline BenchStats benchmark(const TrainedPipeline& pipe, const FilterBank& full_bank,
                            const std::vector<std::vector<GrayImage>>& windows, int repeats = 1) {
  if (windows.size() < 100) throw ValidationError("benchmark needs at least 100 segments");
  if (full_bank.checksum() != pipe.bank_checksum) throw ValidationError("pipeline was trained on a different bank");
  const FeatureExtractor extractor(full_bank.subset(pipe.selected()));
  FeatureExtractor::Workspace ws;
  std::vector<float> row(extractor.size());
  std::vector<double> times;
  times.reserve(windows.size() * static_cast<std::size_t>(std::max(1, repeats)));
  volatile double sink = 0.0;
  for (int r = 0; r < std::max(1, repeats); ++r) {
    for (const auto& w : windows) {
      const auto t0 = std::chrono::steady_clock::now();
      extractor.extract(w, row, ws);
      sink = sink + pipe.decision_selected(row);
      const auto t1 = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
  }
  BenchStats s;
  s.windows = times.size();
  s.median_ms = percentile(times, 0.5);
  s.p95_ms = percentile(times, 0.95);
  double sum = 0.0, sq = 0.0;
  for (double t : times) sum += t;
  s.mean_ms = sum / static_cast<double>(times.size());
  for (double t : times) sq += (t - s.mean_ms) * (t - s.mean_ms);
  s.stddev_ms = times.size() > 1 ? std::sqrt(sq / static_cast<double>(times.size() - 1)) : 0.0;
  return s;
}

}  // namespace occfall
