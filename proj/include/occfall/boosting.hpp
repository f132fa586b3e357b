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

// Discrete AdaBoost over decision stumps, used to pick the most
// discriminative filters of a bank under per-sample importance weights.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "occfall/common.hpp"
#include "occfall/haar.hpp"

namespace occfall {

// h(x) = polarity if x >= threshold, else -polarity.
struct DecisionStump {
  int feature_index = 0;
  double threshold = 0.0;
  int polarity = 1;
  double alpha = 0.0;

  int predict(double x) const { return x >= threshold ? polarity : -polarity; }
  friend bool operator==(const DecisionStump&, const DecisionStump&) = default;
};

struct StumpFit {
  double threshold = 0.0;
  int polarity = 1;
  double error = std::numeric_limits<double>::infinity();

  bool valid() const { return std::isfinite(error); }
};

namespace detail {

struct ClassTotals {
  double pos = 0.0;
  double neg = 0.0;
};

inline ClassTotals class_totals(std::span<const int> labels, std::span<const double> weights) {
  ClassTotals t;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      t.pos += weights[i];
    } else if (labels[i] == -1) {
      t.neg += weights[i];
    } else {
      throw ValidationError(concat("label ", labels[i], " is not +1/-1"));
    }
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) throw ValidationError("weights must be finite and >= 0");
  }
  return t;
}

// A column's sort order with a flag bit marking each position whose value
// differs from the previous one. Values are not stored: the scan only needs
// to know where distinct values begin, which halves the memory traffic.
inline constexpr std::uint32_t kNewValueBit = 0x80000000u;
inline constexpr std::uint32_t kRowMask = 0x7FFFFFFFu;

// Sorted scan over one coded column. Zero-weight samples are skipped, so
// candidate thresholds lie between adjacent distinct values of weighted
// samples. signed_w[i] = w[i] * y[i], zero exactly when w[i] is.
//   error(+1, t) = W- + S(<t),   error(-1, t) = W+ - S(<t)
// Returns the error, polarity and the rows holding the values on either
// side of the best threshold.
struct ScanResult {
  double error = std::numeric_limits<double>::infinity();
  int polarity = 1;
  std::uint32_t lo_row = 0;
  std::uint32_t hi_row = 0;

  bool valid() const { return std::isfinite(error); }
};

inline ScanResult scan_sorted(std::span<const std::uint32_t> coded, std::span<const double> signed_w,
                              ClassTotals totals) {
  // No data-dependent branches in the common path: columns are full of ties.
  double best_error = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  std::uint32_t best_lo = 0;
  std::uint32_t best_hi = 0;
  double s = 0.0;
  std::uint32_t have_prev = 0;
  std::uint32_t pending = 0;  // a new value started since the last weighted sample
  std::uint32_t last = 0;
  const double neg = totals.neg;
  const double pos = totals.pos;
  for (const std::uint32_t c : coded) {
    const std::uint32_t row = c & kRowMask;
    pending |= c >> 31;
    const double sw = signed_w[row];
    const std::uint32_t weighted = sw != 0.0;
    const double e = std::min(neg + s, pos - s);
    if ((weighted & have_prev & pending) && e < best_error) {
      best_error = e;
      best_s = s;
      best_lo = last;
      best_hi = row;
    }
    s += sw;
    last = weighted ? row : last;
    pending &= weighted ^ 1u;
    have_prev |= weighted;
  }
  ScanResult best;
  best.error = best_error;
  best.polarity = neg + best_s <= pos - best_s ? 1 : -1;
  best.lo_row = best_lo;
  best.hi_row = best_hi;
  return best;
}

// Same scan when every sample carries weight: a flagged position is then
// exactly a candidate threshold.
inline ScanResult scan_sorted_dense(std::span<const std::uint32_t> coded, std::span<const double> signed_w,
                                    ClassTotals totals) {
  double best_error = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  std::size_t best_k = 0;
  double s = 0.0;
  const double neg = totals.neg;
  const double pos = totals.pos;
  const std::size_t n = coded.size();
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint32_t c = coded[k];
    const double e = std::min(neg + s, pos - s);
    if ((c & kNewValueBit) && e < best_error) {
      best_error = e;
      best_s = s;
      best_k = k;
    }
    s += signed_w[c & kRowMask];
  }
  ScanResult best;
  best.error = best_error;
  if (best.valid()) {
    best.polarity = neg + best_s <= pos - best_s ? 1 : -1;
    best.lo_row = coded[best_k - 1] & kRowMask;
    best.hi_row = coded[best_k] & kRowMask;
  }
  return best;
}

template <typename Column>
std::vector<std::uint32_t> code_column(std::size_t n, const Column& value) {
  if (n > kRowMask) throw ValidationError("too many samples for a sorted column");
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return value(a) < value(b); });
  for (std::size_t k = 1; k < n; ++k) {
    if (value(order[k]) != value(order[k - 1] & kRowMask)) order[k] |= kNewValueBit;
  }
  return order;
}

}  // namespace detail

// Best (threshold, polarity) for one column by a single sorted scan. The
// threshold is the midpoint between adjacent distinct values; ties go to
// the smaller threshold, then to polarity +1.
inline StumpFit train_stump(std::span<const float> column, std::span<const int> labels,
                            std::span<const double> weights) {
  if (column.size() != labels.size() || column.size() != weights.size()) {
    throw ValidationError("stump inputs differ in length");
  }
  if (column.size() < 2) throw ValidationError("stump training needs at least 2 samples");
  for (float v : column) {
    if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
  }
  const auto totals = detail::class_totals(labels, weights);
  if (!(totals.pos > 0.0) || !(totals.neg > 0.0)) throw ValidationError("stump training needs both classes");

  const auto coded = detail::code_column(column.size(), [&](std::uint32_t i) { return column[i]; });
  std::vector<double> signed_w(column.size());
  for (std::size_t i = 0; i < column.size(); ++i) signed_w[i] = weights[i] * labels[i];
  const auto r = detail::scan_sorted(coded, signed_w, totals);
  if (!r.valid()) throw ValidationError("column has a single distinct value among weighted samples");
  return {0.5 * (static_cast<double>(column[r.lo_row]) + static_cast<double>(column[r.hi_row])), r.polarity, r.error};
}

// Coded sort order of every column, computed once and shared by every
// boosting round (and by every training run on the same matrix).
class SortedColumns {
 public:
  explicit SortedColumns(const FeatureMatrix& x) : rows_(x.rows), cols_(x.cols) {
    for (float v : x.data) {
      if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
    }
    coded_.resize(rows_ * cols_);
    for (std::size_t j = 0; j < cols_; ++j) {
      const auto c = detail::code_column(rows_, [&](std::uint32_t i) { return x.data[i * cols_ + j]; });
      std::copy(c.begin(), c.end(), coded_.begin() + static_cast<std::ptrdiff_t>(j * rows_));
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const std::uint32_t> coded(std::size_t j) const { return std::span(coded_).subspan(j * rows_, rows_); }

  // The same columns over a subset of rows (given in increasing order),
  // renumbered 0..k-1. Linear time, no re-sorting.
  SortedColumns restrict_rows(std::span<const std::size_t> keep) const {
    std::vector<std::uint32_t> remap(rows_, kDropped);
    for (std::size_t k = 0; k < keep.size(); ++k) {
      if (keep[k] >= rows_ || (k > 0 && keep[k] <= keep[k - 1])) throw ValidationError("invalid row subset");
      remap[keep[k]] = static_cast<std::uint32_t>(k);
    }
    SortedColumns out;
    out.rows_ = keep.size();
    out.cols_ = cols_;
    out.coded_.resize(out.rows_ * cols_);
    for (std::size_t j = 0; j < cols_; ++j) {
      auto dst = out.coded_.begin() + static_cast<std::ptrdiff_t>(j * out.rows_);
      bool pending = false;
      bool first = true;
      for (std::uint32_t c : coded(j)) {
        pending = pending || (c & detail::kNewValueBit);
        const std::uint32_t r = remap[c & detail::kRowMask];
        if (r == kDropped) continue;
        *dst++ = r | (pending && !first ? detail::kNewValueBit : 0u);
        pending = false;
        first = false;
      }
    }
    return out;
  }

 private:
  static constexpr std::uint32_t kDropped = 0xFFFFFFFFu;
  SortedColumns() = default;

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint32_t> coded_;
};

struct BoostModel {
  std::vector<DecisionStump> stumps;
  std::vector<int> selected_features;  // distinct, in order of first selection
  std::uint64_t bank_checksum = 0;

  std::size_t rounds() const { return stumps.size(); }

  double margin(std::span<const float> row) const {
    double m = 0.0;
    for (const auto& s : stumps) m += s.alpha * s.predict(row[static_cast<std::size_t>(s.feature_index)]);
    return m;
  }

  // Zero margin counts as +1.
  int predict(std::span<const float> row) const { return margin(row) >= 0.0 ? 1 : -1; }

  std::uint64_t selection_checksum() const {
    Fnv1a h;
    for (int f : selected_features) h.update(concat(f, ','));
    return h.value();
  }

  friend bool operator==(const BoostModel&, const BoostModel&) = default;
};

struct BoostReport {
  std::vector<double> round_errors;
  std::vector<double> weight_sums;  // after each renormalisation
  std::string stop_reason;
};

struct BoostOptions {
  int rounds = 300;
  unsigned threads = 1;
};

inline constexpr double kAlphaCap = 20.72326583694641;  // ln(1e9)

// Discrete AdaBoost started from the normalised init_weights. Stops early
// when the best stump is no better than chance or classifies perfectly
// (the perfect stump is kept).
inline BoostModel adaboost_train(const FeatureMatrix& x, std::span<const int> labels,
                                 std::span<const double> init_weights, const BoostOptions& options,
                                 const SortedColumns* presorted = nullptr, BoostReport* report = nullptr) {
  const std::size_t n = x.rows;
  if (labels.size() != n || init_weights.size() != n) throw ValidationError("boosting inputs differ in length");
  if (options.rounds < 1) throw ValidationError("boosting needs at least one round");
  if (n < 2 || x.cols == 0) throw ValidationError("boosting needs at least 2 samples and 1 feature");

  if (presorted && (presorted->rows() != n || presorted->cols() != x.cols)) {
    throw ValidationError("presorted columns do not match");
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(init_weights[i] >= 0.0) || !std::isfinite(init_weights[i])) throw ValidationError("sample weights must be finite and non-negative");
    if (init_weights[i] > 0.0) keep.push_back(i);
  }
  // zero-weight samples stay at zero under the multiplicative update, so
  // they never influence a round; train on the weighted rows only
  if (keep.size() < n && keep.size() >= 2) {
    std::vector<int> sub_labels(keep.size());
    std::vector<double> sub_w(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
      sub_labels[k] = labels[keep[k]];
      sub_w[k] = init_weights[keep[k]];
    }
    const FeatureMatrix sub_x = x.select_rows(keep);
    std::optional<SortedColumns> sub_sorted;
    if (presorted) sub_sorted.emplace(presorted->restrict_rows(keep));
    return adaboost_train(sub_x, sub_labels, sub_w, options, sub_sorted ? &*sub_sorted : nullptr, report);
  }

  std::optional<SortedColumns> own;
  if (!presorted) {
    own.emplace(x);
    presorted = &*own;
  }

  std::vector<double> w(init_weights.begin(), init_weights.end());
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0.0)) throw ValidationError("initial weights are all zero");
  for (auto& v : w) v /= total;
  {
    const auto t = detail::class_totals(labels, w);
    if (!(t.pos > 0.0) || !(t.neg > 0.0)) throw ValidationError("boosting needs both classes with positive weight");
  }

  BoostModel model;
  std::vector<double> signed_w(n);
  std::vector<int> h(n);
  const unsigned threads = std::max(1u, options.threads);

  for (int round = 0; round < options.rounds; ++round) {
    const auto totals = detail::class_totals(labels, w);
    for (std::size_t i = 0; i < n; ++i) signed_w[i] = w[i] * labels[i];

    struct Best {
      detail::ScanResult fit;
      std::size_t feature = 0;
    };
    auto search = [&](std::size_t begin, std::size_t end) {
      Best best;
      for (std::size_t j = begin; j < end; ++j) {
        auto fit = detail::scan_sorted_dense(presorted->coded(j), signed_w, totals);
        if (fit.error < best.fit.error) best = {fit, j};
      }
      return best;
    };
    Best best;
    if (threads == 1) {
      best = search(0, x.cols);
    } else {
      std::vector<Best> partial(threads);
      std::vector<std::thread> pool;
      const std::size_t chunk = (x.cols + threads - 1) / threads;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          partial[t] = search(std::min(x.cols, t * chunk), std::min(x.cols, (t + 1) * chunk));
        });
      }
      for (auto& th : pool) th.join();
      for (const auto& p : partial) {  // chunks are in feature order, so ties keep the lower index
        if (p.fit.error < best.fit.error) best = p;
      }
    }
    if (!best.fit.valid()) {
      if (model.stumps.empty()) throw ValidationError("no feature separates the weighted samples");
      if (report) report->stop_reason = "no usable feature";
      break;
    }

    const double threshold =
        0.5 * (static_cast<double>(x.at(best.fit.lo_row, best.feature)) + static_cast<double>(x.at(best.fit.hi_row, best.feature)));
    DecisionStump stump{static_cast<int>(best.feature), threshold, best.fit.polarity, 0.0};
    double eps = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = stump.predict(x.at(i, best.feature));
      if (h[i] != labels[i]) eps += w[i];
    }
    if (eps >= 0.5 - 1e-9) {
      if (model.stumps.empty()) throw ValidationError("first boosting round is no better than chance");
      if (report) report->stop_reason = "weak learner at chance level";
      break;
    }
    stump.alpha = eps > 0.0 ? std::min(0.5 * std::log((1.0 - eps) / eps), kAlphaCap) : kAlphaCap;
    model.stumps.push_back(stump);
    if (std::find(model.selected_features.begin(), model.selected_features.end(), stump.feature_index) ==
        model.selected_features.end()) {
      model.selected_features.push_back(stump.feature_index);
    }
    if (report) report->round_errors.push_back(eps);
    if (eps == 0.0) {
      if (report) report->stop_reason = "zero training error";
      break;
    }

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= std::exp(-stump.alpha * labels[i] * h[i]);
      sum += w[i];
    }
    for (auto& v : w) v /= sum;
    if (report) report->weight_sums.push_back(std::accumulate(w.begin(), w.end(), 0.0));
  }
  if (report && report->stop_reason.empty()) report->stop_reason = "round limit";
  return model;
}

inline BoostModel adaboost_train(const FeatureMatrix& x, std::span<const int> labels,
                                 std::span<const double> init_weights, int rounds) {
  return adaboost_train(x, labels, init_weights, BoostOptions{rounds, 1});
}

struct BoostPrediction {
  std::vector<int> labels;
  std::vector<double> margins;
};

inline BoostPrediction boost_predict(const BoostModel& model, const FeatureMatrix& x) {
  if (model.stumps.empty()) throw ValidationError("empty boosting model");
  for (const auto& s : model.stumps) {
    if (s.feature_index < 0 || static_cast<std::size_t>(s.feature_index) >= x.cols) {
      throw ValidationError(concat("feature column ", s.feature_index, " missing from a ", x.cols, "-column matrix"));
    }
  }
  BoostPrediction out;
  out.labels.reserve(x.rows);
  out.margins.reserve(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double m = model.margin(x.row(i));
    out.margins.push_back(m);
    out.labels.push_back(m >= 0.0 ? 1 : -1);
  }
  return out;
}

// Weighted 0-1 error of the ensemble, weights normalised internally.
inline double ensemble_error(const BoostModel& model, const FeatureMatrix& x, std::span<const int> labels,
                             std::span<const double> weights) {
  const auto pred = boost_predict(model, x);
  double err = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    total += weights[i];
    if (pred.labels[i] != labels[i]) err += weights[i];
  }
  return err / total;
}

inline std::string boost_model_text(const BoostModel& m) {
  std::string out = concat("# occfall boost model v1\nbank_checksum ", to_hex(m.bank_checksum), "\nstumps ",
                           m.stumps.size(), '\n');
  for (const auto& s : m.stumps) {
    out += concat(s.feature_index, ' ', format_double(s.threshold), ' ', s.polarity, ' ', format_double(s.alpha), '\n');
  }
  return out;
}

inline BoostModel parse_boost_model(std::istream& in) {
  BoostModel m;
  std::string line;
  std::size_t expected = 0;
  bool have_checksum = false;
  bool have_count = false;
  while (std::getline(in, line)) {
    if (trim(line).empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "bank_checksum") {
      std::string hex;
      ls >> hex;
      m.bank_checksum = parse_hex(hex);
      have_checksum = true;
    } else if (key == "stumps") {
      ls >> expected;
      have_count = true;
    } else {
      auto f = split(std::string(trim(line)), ' ');
      if (f.size() != 4) throw ValidationError(concat("malformed stump line '", line, "'"));
      DecisionStump s;
      s.feature_index = parse_number<int>(f[0], "feature_index");
      s.threshold = parse_number<double>(f[1], "threshold");
      s.polarity = parse_number<int>(f[2], "polarity");
      s.alpha = parse_number<double>(f[3], "alpha");
      if (s.polarity != 1 && s.polarity != -1) throw ValidationError("stump polarity must be +1 or -1");
      if (s.alpha < 0) throw ValidationError("stump alpha must be >= 0");
      m.stumps.push_back(s);
      if (std::find(m.selected_features.begin(), m.selected_features.end(), s.feature_index) ==
          m.selected_features.end()) {
        m.selected_features.push_back(s.feature_index);
      }
    }
  }
  if (!have_checksum || !have_count || m.stumps.size() != expected) throw ValidationError("boost model truncated");
  return m;
}

inline void save_boost_model(const fs::path& path, const BoostModel& m) {
  std::ofstream out(path);
  if (!out) throw IoError(concat("cannot write ", path.string()));
  out << boost_model_text(m);
}

inline BoostModel load_boost_model(const fs::path& path, std::optional<std::uint64_t> expected_bank = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw IoError(concat("cannot open ", path.string()));
  auto m = parse_boost_model(in);
  if (expected_bank && *expected_bank != m.bank_checksum) {
    throw ValidationError(concat(path.string(), ": model was trained on a different filter bank"));
  }
  return m;
}

}  // namespace occfall
