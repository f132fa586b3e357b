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

#include "test_util.hpp"

namespace occfall {
namespace {

SvmOptions strict() {
  SvmOptions o;
  o.inner_tolerance = 1e-9;
  o.tolerance = 1e-12;
  o.max_inner_epochs = 20000;
  o.max_outer_iterations = 200;
  return o;
}

struct Problem {
  FeatureMatrix x;
  std::vector<int> y;
  std::vector<double> g;
};

Problem noisy_problem(std::uint64_t seed, std::size_t n = 60, std::size_t d = 4) {
  Rng r(seed);
  Problem p{FeatureMatrix(n, d), std::vector<int>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const double v = testing::normal(r) * (1.0 + static_cast<double>(j)) + 3.0;
      p.x.at(i, j) = static_cast<float>(v);
      s += (j % 2 ? -1.0 : 1.0) * v / (1.0 + static_cast<double>(j));
    }
    p.y[i] = s + 0.8 * testing::normal(r) > 0.0 ? 1 : -1;
    p.g[i] = 0.1 + r.uniform();
  }
  return p;
}

// Primal objective in the standardised space the model was trained in.
double primal(const SvmModel& m, const Problem& p, double c) {
  double reg = 0;
  for (double v : m.w) reg += v * v;
  double loss = 0;
  for (std::size_t i = 0; i < p.x.rows; ++i) {
    loss += c * p.g[i] * std::max(0.0, 1.0 - p.y[i] * m.decision(p.x.row(i)));
  }
  return 0.5 * reg + loss;
}

void expect_models_near(const SvmModel& a, const SvmModel& b, double tol) {
  ASSERT_EQ(a.dimension(), b.dimension());
  for (std::size_t j = 0; j < a.dimension(); ++j) {
    EXPECT_NEAR(a.w[j], b.w[j], tol) << j;
    EXPECT_NEAR(a.mean[j], b.mean[j], tol) << j;
    EXPECT_NEAR(a.stddev[j], b.stddev[j], tol) << j;
  }
  EXPECT_NEAR(a.bias, b.bias, tol);
}

TEST(Svm, SeparableToyHasZeroHingeLoss) {
  Problem p{FeatureMatrix(4, 2), {-1, -1, 1, 1}, std::vector<double>(4, 1.0)};
  p.x.data = {0, 0, 1, 0, 3, 3, 4, 3};
  const auto m = train_weighted_svm(p.x, p.y, p.g, strict());
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_GE(p.y[i] * m.decision(p.x.row(i)), 1.0 - 1e-6) << i;
    EXPECT_EQ(m.predict(p.x.row(i)), p.y[i]);
  }
}

TEST(Svm, ZeroWeightSampleIsRemoved) {
  auto p = noisy_problem(1);
  // flip a point far on the wrong side
  p.y[5] = -p.y[5];
  auto without = p;
  p.g[5] = 0.0;
  without.x = p.x.select_rows([&] {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < p.x.rows; ++i) {
      if (i != 5) keep.push_back(i);
    }
    return keep;
  }());
  without.y.erase(without.y.begin() + 5);
  without.g.erase(without.g.begin() + 5);
  const auto a = train_weighted_svm(p.x, p.y, p.g, strict());
  const auto b = train_weighted_svm(without.x, without.y, without.g, strict());
  expect_models_near(a, b, 1e-4);
}

TEST(Svm, WeightAndCostTradeOff) {
  const auto p = noisy_problem(2);
  auto scaled = p.g;
  for (auto& v : scaled) v *= 10.0;
  auto o = strict();
  const auto a = train_weighted_svm(p.x, p.y, p.g, o);
  o.c /= 10.0;
  const auto b = train_weighted_svm(p.x, p.y, scaled, o);
  expect_models_near(a, b, 1e-6);
}

TEST(Svm, KktAndMonotoneTrace) {
  for (std::uint64_t seed = 3; seed < 8; ++seed) {
    const auto p = noisy_problem(seed, 80, 5);
    SvmReport rep;
    train_weighted_svm(p.x, p.y, p.g, strict(), &rep);
    EXPECT_TRUE(rep.converged);
    EXPECT_LT(rep.kkt_residual, 1e-3);
    ASSERT_FALSE(rep.objective_trace.empty());
    for (std::size_t k = 1; k < rep.objective_trace.size(); ++k) {
      EXPECT_LE(rep.objective_trace[k], rep.objective_trace[k - 1]);
    }
    EXPECT_EQ(rep.active.size(), p.x.rows);
  }
}

TEST(Svm, NoRandomPerturbationImprovesObjective) {
  const auto p = noisy_problem(9, 50, 3);
  const auto m = train_weighted_svm(p.x, p.y, p.g, strict());
  const double base = primal(m, p, 1.0);
  Rng r(10);
  for (int k = 0; k < 500; ++k) {
    auto q = m;
    const double scale = k < 250 ? 1e-2 : 1e-4;
    for (auto& v : q.w) v += scale * testing::normal(r);
    q.bias += scale * testing::normal(r);
    EXPECT_GE(primal(q, p, 1.0), base - 1e-7 * (1.0 + base));
  }
}

TEST(Svm, DecisionIsAffineAndZeroIsNonFall) {
  SvmModel m;
  m.mean = {1.0, 2.0};
  m.stddev = {2.0, 1.0};
  m.w = {0.5, -1.0};
  m.bias = 0.25;
  const std::vector<float> a = {3.0f, 1.0f}, b = {-1.0f, 4.0f};
  std::vector<float> mid = {1.0f, 2.5f};
  EXPECT_NEAR(m.decision(mid), 0.5 * (m.decision(a) + m.decision(b)), 1e-12);
  m.bias = 0.5;  // puts mid exactly on the boundary
  EXPECT_DOUBLE_EQ(m.decision(mid), 0.0);
  EXPECT_EQ(m.predict(mid), -1);
  const std::vector<float> short_row = {1.0f};
  EXPECT_THROW(m.decision(short_row), ValidationError);
}

TEST(Svm, ContinuousInSampleWeights) {
  const auto p = noisy_problem(11);
  const auto base = train_weighted_svm(p.x, p.y, p.g, strict());
  auto nudged = p.g;
  nudged[3] += 1e-6;
  const auto m = train_weighted_svm(p.x, p.y, nudged, strict());
  expect_models_near(base, m, 1e-3);
}

TEST(Svm, MoreWeightOnAMistakeReducesItsLoss) {
  auto p = noisy_problem(12);
  const auto m0 = train_weighted_svm(p.x, p.y, p.g, strict());
  std::size_t bad = p.x.rows;
  for (std::size_t i = 0; i < p.x.rows; ++i) {
    if (p.y[i] * m0.decision(p.x.row(i)) < 0.0) {
      bad = i;
      break;
    }
  }
  ASSERT_LT(bad, p.x.rows);
  double previous = std::max(0.0, 1.0 - p.y[bad] * m0.decision(p.x.row(bad)));
  for (double factor : {2.0, 5.0, 20.0, 100.0}) {
    auto g = p.g;
    g[bad] *= factor;
    const auto m = train_weighted_svm(p.x, p.y, g, strict());
    const double loss = std::max(0.0, 1.0 - p.y[bad] * m.decision(p.x.row(bad)));
    EXPECT_LE(loss, previous + 1e-6) << factor;
    previous = loss;
  }
}

TEST(Svm, ConstantFeatureIsDropped) {
  auto p = noisy_problem(13, 40, 3);
  for (std::size_t i = 0; i < 40; ++i) p.x.at(i, 1) = 7.0f;
  const auto m = train_weighted_svm(p.x, p.y, p.g, strict());
  ASSERT_EQ(m.dropped, std::vector<int>{1});
  EXPECT_EQ(m.w[1], 0.0);
}

TEST(Svm, RejectsBadInput) {
  const auto p = noisy_problem(14, 10, 2);
  auto o = strict();
  o.c = 0.0;
  EXPECT_THROW(train_weighted_svm(p.x, p.y, p.g, o), ValidationError);
  auto g = p.g;
  g[0] = -1.0;
  EXPECT_THROW(train_weighted_svm(p.x, p.y, g, strict()), ValidationError);
  std::vector<int> one(10, 1);
  EXPECT_THROW(train_weighted_svm(p.x, one, p.g, strict()), ValidationError);
  std::vector<int> bad(p.y);
  bad[0] = 0;
  EXPECT_THROW(train_weighted_svm(p.x, bad, p.g, strict()), ValidationError);
}

TEST(Svm, ModelFileRoundTrip) {
  testing::TempDir dir("svm");
  const auto p = noisy_problem(15);
  auto m = train_weighted_svm(p.x, p.y, p.g, strict());
  m.bank_checksum = 42;
  m.selection_checksum = 43;
  save_svm_model(dir / "s.txt", m);
  const auto back = load_svm_model(dir / "s.txt");
  expect_models_near(m, back, 0.0);
  EXPECT_EQ(back.bank_checksum, 42u);
  EXPECT_EQ(back.selection_checksum, 43u);
}

}  // namespace
}  // namespace occfall
