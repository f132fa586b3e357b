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

// Linear SVM with per-sample importance weights g_i:
//
//   minimise  1/2 |w|^2 + C * sum_i g_i * max(0, 1 - y_i (w.z_i + b))
//
// over standardised features z. For a fixed bias b the problem is solved
// in the dual by coordinate descent (box 0 <= a_i <= C g_i). The optimal
// value V(b) is convex with V'(b) = -sum_i a_i y_i, so the bias is found by
// bracketing and bisecting on the sign of that sum. Each outer iteration
// records the best primal objective seen so far, and a final exact solve on
// the identified active set removes what error coordinate descent leaves.
//
// Samples with g_i = 0 have an empty dual box and are removed before
// standardisation, so they have no influence on the model at all.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "occfall/common.hpp"
#include "occfall/haar.hpp"

namespace occfall {

struct SvmModel {
  std::vector<double> mean;
  std::vector<double> stddev;  // 1 for dropped features
  std::vector<double> w;       // 0 for dropped features
  double bias = 0.0;
  std::vector<int> dropped;    // zero-variance features
  std::uint64_t bank_checksum = 0;
  std::uint64_t selection_checksum = 0;

  std::size_t dimension() const { return w.size(); }

  double decision(std::span<const float> x) const {
    if (x.size() != w.size()) {
      throw ValidationError(concat("feature vector has ", x.size(), " values, model expects ", w.size()));
    }
    double m = bias;
    for (std::size_t j = 0; j < w.size(); ++j) m += w[j] * ((x[j] - mean[j]) / stddev[j]);
    return m;
  }

  // +1 (fall) only for a strictly positive margin.
  int predict(std::span<const float> x) const { return decision(x) > 0.0 ? 1 : -1; }
};

struct SvmOptions {
  double c = 1.0;
  int max_outer_iterations = 100;
  int max_inner_epochs = 1000;
  double inner_tolerance = 1e-6;   // max projected dual gradient
  double tolerance = 1e-6;         // relative objective change between outer iterations
  std::uint64_t seed = 0;
};

struct SvmReport {
  std::vector<double> objective_trace;  // best primal objective after each outer iteration
  std::vector<double> alpha;            // dual variables of the g > 0 samples, in input order
  std::vector<std::size_t> active;      // input indices of the g > 0 samples
  int inner_epochs = 0;
  bool converged = false;
  double kkt_residual = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

struct SvmProblem {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> z;     // n x d standardised
  std::vector<double> q;     // |z_i|^2
  std::vector<int> y;
  std::vector<double> cost;  // C * g_i

  std::span<const double> row(std::size_t i) const { return {z.data() + i * d, d}; }

  double dot(std::span<const double> w, std::size_t i) const {
    const double* zi = z.data() + i * d;
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += w[j] * zi[j];
    return s;
  }

  double objective(std::span<const double> w, double b) const {
    double reg = 0.0;
    for (double v : w) reg += v * v;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) loss += cost[i] * std::max(0.0, 1.0 - y[i] * (dot(w, i) + b));
    return 0.5 * reg + loss;
  }
};

// Dual coordinate descent for a fixed bias. Updates alpha and w in place;
// returns the number of epochs run.
inline int solve_fixed_bias(const SvmProblem& p, double b, std::vector<double>& alpha, std::vector<double>& w,
                            const SvmOptions& opt, Rng& rng) {
  std::vector<std::size_t> perm(p.n);
  std::iota(perm.begin(), perm.end(), 0);
  int epoch = 0;
  for (; epoch < opt.max_inner_epochs; ++epoch) {
    rng.shuffle(perm);
    double max_violation = 0.0;
    for (std::size_t i : perm) {
      const double g = p.y[i] * (p.dot(w, i) + b) - 1.0;
      const double a = alpha[i];
      double pg = g;
      if (a <= 0.0) {
        pg = std::min(g, 0.0);
      } else if (a >= p.cost[i]) {
        pg = std::max(g, 0.0);
      }
      max_violation = std::max(max_violation, std::abs(pg));
      if (pg == 0.0) continue;
      double next;
      if (p.q[i] > 0.0) {
        next = std::clamp(a - g / p.q[i], 0.0, p.cost[i]);
      } else {
        next = g < 0.0 ? p.cost[i] : 0.0;
      }
      const double delta = (next - a) * p.y[i];
      if (delta != 0.0) {
        const double* zi = p.z.data() + i * p.d;
        for (std::size_t j = 0; j < p.d; ++j) w[j] += delta * zi[j];
      }
      alpha[i] = next;
    }
    if (max_violation < opt.inner_tolerance) return epoch + 1;
  }
  return epoch;
}

inline double signed_alpha_sum(const SvmProblem& p, const std::vector<double>& alpha) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.n; ++i) s += alpha[i] * p.y[i];
  return s;
}

// Norm of a subgradient of the primal at (w, b), with the multipliers of
// samples on the margin taken from the dual solution.
inline double kkt_residual(const SvmProblem& p, std::span<const double> w, double b,
                           const std::vector<double>& alpha, double margin_tol = 1e-6) {
  std::vector<double> r(w.begin(), w.end());
  double rb = 0.0;
  for (std::size_t i = 0; i < p.n; ++i) {
    const double m = p.y[i] * (p.dot(w, i) + b);
    double a;
    if (m < 1.0 - margin_tol) {
      a = p.cost[i];
    } else if (m > 1.0 + margin_tol) {
      a = 0.0;
    } else {
      a = std::clamp(alpha[i], 0.0, p.cost[i]);
    }
    const double* zi = p.z.data() + i * p.d;
    for (std::size_t j = 0; j < p.d; ++j) r[j] -= a * p.y[i] * zi[j];
    rb -= a * p.y[i];
  }
  double s = rb * rb;
  for (double v : r) s += v * v;
  return std::sqrt(s);
}

// Exact solve on a guessed active set: samples below the margin by more
// than tol sit at their bound C g_i, samples above it at 0, and the rest lie
// on the margin, which with sum a_i y_i = 0 is a square linear system in
// (a_F, b). Accepted only when the result is consistent with the guess.
inline bool polish_on_active_set(const SvmProblem& p, double tol, std::vector<double>& w, double& b,
                                 std::vector<double>& alpha) {
  constexpr std::size_t kMaxFree = 1500;
  std::vector<std::size_t> free;
  std::vector<double> a(p.n, 0.0);
  std::vector<double> w0(p.d, 0.0);
  double bound_sum = 0.0;
  for (std::size_t i = 0; i < p.n; ++i) {
    const double m = p.y[i] * (p.dot(w, i) + b);
    if (std::abs(m - 1.0) <= tol) {
      free.push_back(i);
    } else if (m < 1.0) {
      a[i] = p.cost[i];
      bound_sum += p.cost[i] * p.y[i];
      const double* zi = p.z.data() + i * p.d;
      for (std::size_t j = 0; j < p.d; ++j) w0[j] += p.cost[i] * p.y[i] * zi[j];
    }
  }
  const std::size_t f = free.size();
  if (f == 0 || f > kMaxFree) return false;

  Eigen::MatrixXd zf(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(p.d));
  for (std::size_t k = 0; k < f; ++k) {
    for (std::size_t j = 0; j < p.d; ++j) zf(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = p.row(free[k])[j] * p.y[free[k]];
  }
  const auto fi = static_cast<Eigen::Index>(f);
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(fi + 1, fi + 1);
  Eigen::VectorXd rhs(fi + 1);
  sys.topLeftCorner(fi, fi) = zf * zf.transpose();
  for (std::size_t k = 0; k < f; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    sys(kk, fi) = p.y[free[k]];
    sys(fi, kk) = p.y[free[k]];
    rhs(kk) = 1.0 - p.y[free[k]] * p.dot(w0, free[k]);
  }
  rhs(fi) = -bound_sum;
  const Eigen::VectorXd sol = sys.completeOrthogonalDecomposition().solve(rhs);
  if (!sol.allFinite() || (sys * sol - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) return false;

  for (std::size_t k = 0; k < f; ++k) {
    const double v = sol(static_cast<Eigen::Index>(k));
    const double c = p.cost[free[k]];
    if (v < -1e-10 * (1.0 + c) || v > c * (1.0 + 1e-10) + 1e-12) return false;
    a[free[k]] = std::clamp(v, 0.0, c);
  }
  std::vector<double> nw(p.d, 0.0);
  for (std::size_t i = 0; i < p.n; ++i) {
    if (a[i] == 0.0) continue;
    const double* zi = p.z.data() + i * p.d;
    for (std::size_t j = 0; j < p.d; ++j) nw[j] += a[i] * p.y[i] * zi[j];
  }
  const double nb = sol(fi);
  for (std::size_t i = 0; i < p.n; ++i) {
    const double m = p.y[i] * (p.dot(nw, i) + nb);
    if (a[i] >= p.cost[i] && m > 1.0 + 1e-8) return false;
    if (a[i] <= 0.0 && m < 1.0 - 1e-8) return false;
  }
  if (p.objective(nw, nb) > p.objective(w, b) + 1e-12 * (1.0 + std::abs(p.objective(w, b)))) return false;
  w = std::move(nw);
  b = nb;
  alpha = std::move(a);
  return true;
}

}  // namespace detail

inline SvmModel train_weighted_svm(const FeatureMatrix& x, std::span<const int> y, std::span<const double> g,
                                   const SvmOptions& opt = {}, SvmReport* report = nullptr) {
  if (y.size() != x.rows || g.size() != x.rows) throw ValidationError("svm inputs differ in length");
  if (!(opt.c > 0.0) || !std::isfinite(opt.c)) throw ValidationError("svm C must be > 0");
  if (x.cols == 0) throw ValidationError("svm needs at least one feature");
  for (float v : x.data) {
    if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
  }
  std::vector<std::size_t> active;
  double pos_weight = 0.0;
  double neg_weight = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    if (y[i] != 1 && y[i] != -1) throw ValidationError(concat("label ", y[i], " is not +1/-1"));
    if (!(g[i] >= 0.0) || !std::isfinite(g[i])) throw ValidationError("sample weights must be finite and >= 0");
    if (g[i] > 0.0) {
      active.push_back(i);
      (y[i] == 1 ? pos_weight : neg_weight) += g[i];
    }
  }
  if (!(pos_weight > 0.0) || !(neg_weight > 0.0)) {
    throw ValidationError("svm needs both classes with positive weight");
  }

  // Weighted standardisation over the active samples.
  const std::size_t dim = x.cols;
  SvmModel model;
  model.mean.assign(dim, 0.0);
  model.stddev.assign(dim, 1.0);
  model.w.assign(dim, 0.0);
  const double total_g = pos_weight + neg_weight;
  std::vector<double> var(dim, 0.0);
  for (std::size_t i : active) {
    for (std::size_t j = 0; j < dim; ++j) model.mean[j] += g[i] * x.at(i, j);
  }
  for (auto& m : model.mean) m /= total_g;
  for (std::size_t i : active) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double dv = x.at(i, j) - model.mean[j];
      var[j] += g[i] * dv * dv;
    }
  }
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < dim; ++j) {
    const double sd = std::sqrt(var[j] / total_g);
    if (sd > 1e-12 * (1.0 + std::abs(model.mean[j]))) {
      model.stddev[j] = sd;
      kept.push_back(j);
    } else {
      model.dropped.push_back(static_cast<int>(j));
    }
  }

  detail::SvmProblem p;
  p.n = active.size();
  p.d = kept.size();
  p.z.resize(p.n * p.d);
  p.q.assign(p.n, 0.0);
  p.y.resize(p.n);
  p.cost.resize(p.n);
  for (std::size_t k = 0; k < p.n; ++k) {
    const std::size_t i = active[k];
    for (std::size_t j = 0; j < p.d; ++j) {
      const double v = (x.at(i, kept[j]) - model.mean[kept[j]]) / model.stddev[kept[j]];
      p.z[k * p.d + j] = v;
      p.q[k] += v * v;
    }
    p.y[k] = y[i];
    p.cost[k] = opt.c * g[i];
  }

  Rng rng(derive_seed(opt.seed, "svm"));
  std::vector<double> alpha(p.n, 0.0);
  std::vector<double> w(p.d, 0.0);
  int inner_epochs = 0;

  struct Point {
    double b = 0.0;
    double objective = std::numeric_limits<double>::infinity();
    std::vector<double> w;
    std::vector<double> alpha;
  } best;
  std::vector<double> trace;
  // latest dual solutions on either side of the sign change
  std::vector<double> alpha_pos, alpha_neg;
  double f_pos = 0.0, f_neg = 0.0;

  // Solves at bias b, keeps the best point, returns sum a_i y_i (= -V'(b)).
  auto evaluate = [&](double b) {
    inner_epochs += detail::solve_fixed_bias(p, b, alpha, w, opt, rng);
    const double obj = p.objective(w, b);
    if (obj < best.objective) best = {b, obj, w, alpha};
    trace.push_back(best.objective);
    const double f = detail::signed_alpha_sum(p, alpha);
    if (f > 0.0) {
      alpha_pos = alpha;
      f_pos = f;
    } else {
      alpha_neg = alpha;
      f_neg = f;
    }
    return f;
  };

  const double flat_tol = 1e-12 * (opt.c * total_g);
  bool converged = false;
  double lo = 0.0;
  double hi = 0.0;
  double f0 = evaluate(0.0);
  int iter = 1;
  if (std::abs(f0) <= flat_tol) {
    converged = true;
  } else {
    // f(b) = sum a_i y_i is non-increasing in b; bracket its sign change.
    const double dir = f0 > 0.0 ? 1.0 : -1.0;
    double step = 1.0;
    double inner = 0.0;
    double outer = dir * step;
    while (iter < opt.max_outer_iterations) {
      const double f = evaluate(outer);
      ++iter;
      if (std::abs(f) <= flat_tol) {
        converged = true;
        break;
      }
      if ((f > 0.0) != (dir > 0.0)) break;
      inner = outer;
      step *= 2.0;
      outer = dir * step;
    }
    lo = std::min(inner, outer);
    hi = std::max(inner, outer);
    double previous = best.objective;
    while (!converged && iter < opt.max_outer_iterations) {
      const double mid = 0.5 * (lo + hi);
      const double f = evaluate(mid);
      ++iter;
      if (std::abs(f) <= flat_tol) {
        converged = true;
        break;
      }
      (f > 0.0 ? lo : hi) = mid;
      const double width = hi - lo;
      const double change = std::abs(previous - best.objective) / std::max(1.0, std::abs(best.objective));
      previous = best.objective;
      if (width <= 1e-12 * (1.0 + std::abs(mid)) || (change < opt.tolerance && width <= 1e-6 * (1.0 + std::abs(mid)))) {
        converged = true;
      }
    }
  }

  // At a kink of V the one-sided duals both miss sum a_i y_i = 0; their
  // convex combination that hits it certifies optimality.
  std::vector<double> cert = best.alpha;
  if (std::abs(detail::signed_alpha_sum(p, cert)) > flat_tol && !alpha_pos.empty() && !alpha_neg.empty()) {
    const double t = -f_neg / (f_pos - f_neg);
    for (std::size_t i = 0; i < p.n; ++i) cert[i] = t * alpha_pos[i] + (1.0 - t) * alpha_neg[i];
  }
  // Coordinate descent crawls near such kinks; finish with an exact solve
  // on the active set it has found.
  for (double tol : {1e-9, 1e-7, 1e-5, 1e-3}) {
    if (detail::polish_on_active_set(p, tol, best.w, best.b, cert)) {
      best.objective = p.objective(best.w, best.b);
      trace.push_back(std::min(trace.back(), best.objective));
      break;
    }
  }

  for (std::size_t j = 0; j < p.d; ++j) model.w[kept[j]] = best.w[j];
  model.bias = best.b;

  if (report) {
    report->objective_trace = std::move(trace);
    report->alpha = cert;
    report->active = active;
    report->inner_epochs = inner_epochs;
    report->converged = converged;
    report->kkt_residual = detail::kkt_residual(p, best.w, best.b, cert);
  }
  return model;
}

inline std::string svm_model_text(const SvmModel& m) {
  auto row = [](std::string_view key, const std::vector<double>& v) {
    std::string out(key);
    for (double d : v) {
      out += ' ';
      out += format_double(d);
    }
    return out + '\n';
  };
  std::string out = concat("# occfall svm model v1\ndimension ", m.w.size(), "\nbank_checksum ", to_hex(m.bank_checksum),
                           "\nselection_checksum ", to_hex(m.selection_checksum), "\ndropped");
  for (int d : m.dropped) out += concat(' ', d);
  out += '\n';
  out += row("mean", m.mean);
  out += row("std", m.stddev);
  out += row("w", m.w);
  out += concat("b ", format_double(m.bias), '\n');
  return out;
}

inline SvmModel parse_svm_model(std::istream& in) {
  SvmModel m;
  std::string line;
  std::size_t dim = 0;
  bool have_dim = false;
  bool have_b = false;
  auto values = [](std::istringstream& ls) {
    std::vector<double> v;
    std::string tok;
    while (ls >> tok) v.push_back(parse_number<double>(tok, "svm model value"));
    return v;
  };
  while (std::getline(in, line)) {
    if (trim(line).empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "dimension") {
      ls >> dim;
      have_dim = true;
    } else if (key == "bank_checksum" || key == "selection_checksum") {
      std::string hex;
      ls >> hex;
      (key == "bank_checksum" ? m.bank_checksum : m.selection_checksum) = parse_hex(hex);
    } else if (key == "dropped") {
      for (double d : values(ls)) m.dropped.push_back(static_cast<int>(d));
    } else if (key == "mean") {
      m.mean = values(ls);
    } else if (key == "std") {
      m.stddev = values(ls);
    } else if (key == "w") {
      m.w = values(ls);
    } else if (key == "b") {
      auto v = values(ls);
      if (v.size() != 1) throw ValidationError("svm bias line must hold one value");
      m.bias = v[0];
      have_b = true;
    } else {
      throw ValidationError(concat("unknown svm model key '", key, "'"));
    }
  }
  if (!have_dim || !have_b || m.w.size() != dim || m.mean.size() != dim || m.stddev.size() != dim) {
    throw ValidationError("svm model truncated or inconsistent");
  }
  for (double s : m.stddev) {
    if (!(s > 0.0)) throw ValidationError("svm model has a non-positive std");
  }
  return m;
}

inline void save_svm_model(const fs::path& path, const SvmModel& m) {
  std::ofstream out(path);
  if (!out) throw IoError(concat("cannot write ", path.string()));
  out << svm_model_text(m);
}

inline SvmModel load_svm_model(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(concat("cannot open ", path.string()));
  return parse_svm_model(in);
}

}  // namespace occfall
