//
// Copyright 2026 The DIPS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "dips/inference.hpp"
#include "test_util.hpp"

namespace dips {
namespace {

TEST(Combine, HandCase) {
  const auto c = combine({{1.0, 0.1}, {2.0, 0.1}, {3.0, 0.1}});
  EXPECT_NEAR(c.point, 2.0, 1e-12);
  EXPECT_NEAR(c.between_B, 1.0, 1e-12);
  EXPECT_NEAR(c.within_W, 0.1, 1e-12);
  EXPECT_NEAR(c.total_T, 1.0 / 3.0 + 0.1, 1e-12);
  EXPECT_NEAR(c.df, 2.0 * 1.3 * 1.3, 1e-12);
  const double q = testing::t_quantile_by_quadrature(0.975, c.df);
  EXPECT_NEAR(c.ci_high - c.point, q * std::sqrt(c.total_T), 1e-6);
}

TEST(Combine, ZeroBetweenUsesNormal) {
  const auto c = combine({{2.0, 0.04}, {2.0, 0.04}});
  EXPECT_TRUE(c.zero_between);
  EXPECT_TRUE(std::isinf(c.df));
  EXPECT_NEAR(c.ci_high, 2.0 + normal_quantile(0.975) * 0.2, 1e-12);
}

TEST(Combine, SingleSet) {
  const auto c = combine({{0.3, 0.01}});
  EXPECT_TRUE(c.single_set);
  EXPECT_NEAR(c.ci_low, 0.3 - normal_quantile(0.975) * 0.1, 1e-12);
}

TEST(Combine, RejectsBadInput) {
  EXPECT_THROW(combine(std::span<const PerSetEstimate>()), InvalidArgument);
  EXPECT_THROW(combine({{1.0, -0.1}}), InvalidArgument);
}

TEST(Combine, PropertyCiContainsPointAndTIsSum) {
  RngStream r(1, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + static_cast<int>(r.uniform_int(10));
    std::vector<PerSetEstimate> s;
    for (int j = 0; j < m; ++j) s.push_back({sample_normal(r, 0, 1), r.uniform()});
    const auto c = combine(s);
    EXPECT_LE(c.ci_low, c.point);
    EXPECT_GE(c.ci_high, c.point);
    if (m > 1) {
      EXPECT_NEAR(c.total_T, c.between_B / m + c.within_W, 1e-12);
    }
  }
}

TEST(Estimators, ProportionMeanVarianceCorrelation) {
  const std::vector<double> x = {0, 1, 1, 0, 1};
  const auto p = estimate_proportion(x, 1.0);
  EXPECT_NEAR(p.estimate, 0.6, 1e-15);
  EXPECT_NEAR(p.within_variance, 0.6 * 0.4 / 5, 1e-15);

  const std::vector<double> y = {1, 2, 3, 4, 5, 6};
  const auto m = estimate_mean(y);
  EXPECT_NEAR(m.estimate, 3.5, 1e-15);
  EXPECT_NEAR(m.within_variance, 3.5 / 6, 1e-15);

  const auto v = estimate_variance(y);
  EXPECT_NEAR(v.estimate, 3.5, 1e-14);
  // Central moments with divisor n: m2 = 35/12, m4 = 707/48.
  const double kappa = (707.0 / 48.0) / std::pow(35.0 / 12.0, 2) - 3.0;
  EXPECT_NEAR(v.within_variance, 3.5 * 3.5 * (2.0 / 5.0 + kappa / 6.0), 1e-12);

  const std::vector<double> z = {2, 4, 6, 8, 10, 12};
  EXPECT_NEAR(estimate_correlation(y, z).estimate, 1.0, 1e-15);
  EXPECT_NEAR(estimate_correlation(y, z).within_variance, 0.0, 1e-15);
}

TEST(Estimators, ConstantColumns) {
  const std::vector<double> c(10, 2.0);
  const auto v = estimate_variance(c);
  EXPECT_EQ(v.estimate, 0.0);
  EXPECT_EQ(v.within_variance, 0.0);
  EXPECT_THROW(estimate_correlation(c, c), Degenerate);
  EXPECT_THROW(estimate_mean(std::vector<double>{1.0}), Degenerate);
}

Matrix intercept(int n) { return Matrix::Ones(n, 1); }

TEST(Firth, InterceptOnlyClosedForm) {
  std::vector<int> y(100, 0);
  for (int i = 0; i < 30; ++i) y[i] = 1;
  const FirthFit f = firth_logistic(intercept(100), y);
  const double p = 1.0 / (1.0 + std::exp(-f.coef(0, 0)));
  EXPECT_NEAR(p, 30.5 / 101.0, 1e-6);
  EXPECT_NEAR(p, 0.30198, 1e-5);
  EXPECT_LT(f.max_abs_score, 1e-6);
}

TEST(Firth, MultinomialInterceptOnlyClosedForm) {
  // Penalty 1/2 log det I = 1/2 sum_j log p_j (+ const), so p_j = (n_j + 1/2) / (n + J/2).
  std::vector<int> y;
  for (int i = 0; i < 50; ++i) y.push_back(0);
  for (int i = 0; i < 7; ++i) y.push_back(1);
  for (int i = 0; i < 3; ++i) y.push_back(2);
  const FirthFit f = fit_multinomial_logit(intercept(60), y, 3);
  const double e1 = std::exp(f.coef(0, 0)), e2 = std::exp(f.coef(1, 0));
  EXPECT_NEAR(e1 / (1 + e1 + e2), 7.5 / 61.5, 1e-6);
  EXPECT_NEAR(e2 / (1 + e1 + e2), 3.5 / 61.5, 1e-6);
}

TEST(Firth, SeparatedDataStaysFinite) {
  Matrix x(10, 2);
  std::vector<int> y(10);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = i;
    y[i] = i >= 5;
  }
  const FirthFit f = firth_logistic(x, y);
  EXPECT_TRUE(f.coef.allFinite());
  EXPECT_GT(f.coef(0, 1), 0.0);
  EXPECT_LT(f.max_abs_score, 1e-6);
}

TEST(Firth, ModifiedScoreMatchesFiniteDifferences) {
  RngStream r(2, 0);
  const int n = 80;
  Matrix x(n, 3);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = sample_normal(r, 0, 1);
    x(i, 2) = sample_bernoulli(r, 0.4);
    y[i] = static_cast<int>(r.uniform_int(3));
  }
  Vector beta(6);
  beta << 0.2, -0.3, 0.5, -0.1, 0.4, -0.6;
  const Vector u = firth_modified_score(x, y, 3, beta);
  for (int k = 0; k < 6; ++k) {
    Vector bp = beta, bm = beta;
    const double h = 1e-5;
    bp(k) += h;
    bm(k) -= h;
    const double fd = (firth_objective(x, y, 3, bp) - firth_objective(x, y, 3, bm)) / (2 * h);
    EXPECT_NEAR(u(k), fd, 1e-5 * std::max(1.0, std::fabs(fd))) << k;
  }
}

TEST(Firth, LargeSampleRecoversCoefficients) {
  RngStream r(3, 0);
  const int n = 5000;
  Matrix x(n, 2);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = sample_normal(r, 0, 1);
    const double e1 = std::exp(-0.5 + 1.0 * x(i, 1)), e2 = std::exp(0.3 - 0.8 * x(i, 1));
    const double u = r.uniform() * (1 + e1 + e2);
    y[i] = u < 1 ? 0 : (u < 1 + e1 ? 1 : 2);
  }
  const FirthFit f = fit_multinomial_logit(x, y, 3);
  EXPECT_NEAR(f.coef(0, 0), -0.5, 0.15);
  EXPECT_NEAR(f.coef(0, 1), 1.0, 0.15);
  EXPECT_NEAR(f.coef(1, 0), 0.3, 0.15);
  EXPECT_NEAR(f.coef(1, 1), -0.8, 0.15);
  const auto est = f.estimates();
  ASSERT_EQ(est.size(), 4u);
  for (const auto& e : est) EXPECT_GT(e.within_variance, 0.0);
}

TEST(Firth, RankDeficientDesignThrows) {
  Matrix x(20, 3);
  std::vector<int> y(20);
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = i;
    x(i, 2) = 2.0 * i;
    y[i] = i % 2;
  }
  EXPECT_THROW(firth_logistic(x, y), RankDeficient);
  EXPECT_THROW(firth_logistic(Matrix::Ones(2, 2), std::vector<int>{0, 1}), RankDeficient);
}

TEST(EstimatesCsv, HeaderAndInfinityDf) {
  std::ostringstream out;
  const std::vector<NamedEstimate> rows = {{"mu", combine({{1.0, 0.1}, {1.0, 0.1}})}};
  write_estimates_csv(out, rows);
  EXPECT_EQ(out.str().substr(0, 36), "parameter,point,T,df,ci_low,ci_high\n");
  EXPECT_NE(out.str().find(",inf,"), std::string::npos);
}

}  // namespace
}  // namespace dips
