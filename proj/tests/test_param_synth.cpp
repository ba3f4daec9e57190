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
#include <vector>

#include "dips/models/bernoulli.hpp"
#include "dips/models/gaussian_mixture.hpp"
#include "dips/models/normal.hpp"
#include "dips/models/sequential_logistic.hpp"
#include "dips/param_synth.hpp"

namespace dips {
namespace {

TabularDataset binary(std::int64_t n1, std::int64_t n) {
  std::vector<std::vector<double>> cols(1, std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (std::int64_t i = 0; i < n1; ++i) cols[0][static_cast<std::size_t>(i)] = 1.0;
  return TabularDataset(Schema({ColumnSpec::categorical("x", 2)}), std::move(cols));
}

TabularDataset mixture_data(std::uint64_t seed, std::size_t n) {
  RngStream r(seed, 0);
  const Schema s({ColumnSpec::categorical("a", 2), ColumnSpec::categorical("b", 2),
                  ColumnSpec::continuous("z1", -6, 6), ColumnSpec::continuous("z2", -6, 6)});
  std::vector<std::vector<double>> cols(4);
  for (std::size_t i = 0; i < n; ++i) {
    const int a = static_cast<int>(r.uniform_int(2)), b = static_cast<int>(r.uniform_int(2));
    cols[0].push_back(a);
    cols[1].push_back(b);
    cols[2].push_back(std::clamp(sample_normal(r, a - b, 1.0), -6.0, 6.0));
    cols[3].push_back(std::clamp(sample_normal(r, a + b - 1.0, 1.0), -6.0, 6.0));
  }
  return TabularDataset(s, std::move(cols));
}

TEST(Md, AlphaFormula) {
  EXPECT_NEAR(md_alpha(100, 1.0), 100.0 / std::expm1(1.0), 1e-12);
  EXPECT_NEAR(md_alpha(100, 1000.0), 0.0, 1e-300);
  EXPECT_NEAR(md_alpha(40, 1e-4), 40.0 / std::expm1(1e-4), 1e-6);
}

TEST(Md, SetsPreserveTotalAndChargeExactly) {
  RngStream r(1, 0);
  PrivacyLedger l{PrivacyBudget(0.5)};
  const std::vector<std::int64_t> counts = {10, 0, 25, 5};
  const auto sets = md_synthesizer(r, counts, 0.5, 5, &l);
  ASSERT_EQ(sets.size(), 5u);
  for (const auto& s : sets) {
    std::int64_t t = 0;
    for (auto v : s) t += v;
    EXPECT_EQ(t, 40);
  }
  EXPECT_EQ(*l.exact_spend_share(), Fraction(1, 1));
}

TEST(Md, LargeEpsReproducesOriginalProportions) {
  RngStream r(2, 0);
  const std::vector<std::int64_t> counts = {300, 700};
  double mean = 0.0;
  for (int i = 0; i < 200; ++i) mean += md_synthesize_once(r, counts, 1e4)[1] / 1000.0 / 200.0;
  EXPECT_NEAR(mean, 0.7, 0.005);
}

TEST(Bbmr, AlphaAndProbability) {
  EXPECT_NEAR(bbmr_alpha(100, 1.0), 1.0 / std::expm1(0.01), 1e-9);
  EXPECT_NEAR(bbmr_probability(25, 100, 1e6), 0.25, 1e-12);
  EXPECT_NEAR(bbmr_probability(25, 100, 1e-9), 0.5, 1e-6);
  EXPECT_THROW(bbmr_probability(101, 100, 1.0), InvalidArgument);
}

TEST(LaplaceBinary, BitKeepsCountInRange) {
  RngStream r(3, 0);
  for (int i = 0; i < 500; ++i) {
    const auto v = laplace_sanitizer_binary(r, 3, 40, 0.01);
    EXPECT_GE(v, 0);
    EXPECT_LE(v, 40);
  }
}

TEST(Modips, BernoulliLedgerAndShape) {
  const auto d = binary(30, 100);
  RngStream r(4, 0);
  PrivacyLedger l{PrivacyBudget(1.0)};
  const auto sets = modips_release(r, d, models::BernoulliModel(d.schema()), &l);
  ASSERT_EQ(sets.size(), 5u);
  for (const auto& s : sets) {
    EXPECT_EQ(s.data.rows(), 100u);
    EXPECT_EQ(s.data.schema().to_json(), d.schema().to_json());
  }
  EXPECT_EQ(*l.exact_spend_share(), Fraction(1, 1));
  EXPECT_EQ(l.effective_spend(), 1.0);
}

TEST(Modips, UnsanitizedChargesNothing) {
  const auto d = binary(30, 100);
  RngStream r(5, 0);
  ModipsOptions opt;
  opt.sanitize = false;
  const auto sets = modips_release(r, d, models::BernoulliModel(d.schema()), nullptr, opt);
  EXPECT_EQ(sets.size(), 5u);
  EXPECT_FALSE(sets[0].groups[0].sanitized);
}

TEST(Modips, SanitizedNeedsLedger) {
  const auto d = binary(30, 100);
  RngStream r(6, 0);
  EXPECT_THROW(modips_release(r, d, models::BernoulliModel(d.schema()), nullptr),
               InvalidArgument);
}

TEST(Modips, DeterministicForSeed) {
  const auto d = binary(30, 100);
  auto run = [&] {
    RngStream r(7, 0);
    PrivacyLedger l{PrivacyBudget(1.0)};
    std::vector<double> out;
    for (const auto& s : modips_release(r, d, models::BernoulliModel(d.schema()), &l)) {
      out.push_back(s.params.p);
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(Modips, BernoulliLargeEpsApproachesMsBaseline) {
  const auto d = binary(30, 100);
  RngStream r(8, 0);
  double dp = 0.0, ms = 0.0;
  const int reps = 300;
  ModipsOptions ms_opt;
  ms_opt.sanitize = false;
  for (int i = 0; i < reps; ++i) {
    PrivacyLedger l{PrivacyBudget(1e6)};
    RngStream a = r.split(2 * i), b = r.split(2 * i + 1);
    dp += modips_release(a, d, models::BernoulliModel(d.schema()), &l)[0].params.p / reps;
    ms += modips_release(b, d, models::BernoulliModel(d.schema()), nullptr, ms_opt)[0].params.p /
          reps;
  }
  EXPECT_NEAR(dp, ms, 0.01);
}

TEST(Modips, NormalIndividualAndConjointLedgers) {
  RngStream r(9, 0);
  const Schema s({ColumnSpec::continuous("x", -3, 4)});
  std::vector<std::vector<double>> cols(1);
  for (int i = 0; i < 100; ++i) cols[0].push_back(std::clamp(sample_normal(r, 0, 1), -3.0, 4.0));
  const TabularDataset d(s, cols);
  for (bool conjoint : {false, true}) {
    models::NormalModel::Options o;
    o.conjoint = conjoint;
    PrivacyLedger l{PrivacyBudget(2.0)};
    const auto sets = modips_release(r, d, models::NormalModel(s, o), &l);
    EXPECT_EQ(*l.exact_spend_share(), Fraction(1, 1));
    EXPECT_EQ(l.entries().size(), conjoint ? 5u : 10u);
    for (const auto& set : sets) {
      for (double v : set.data.column(0)) {
        EXPECT_GE(v, -3.0);
        EXPECT_LE(v, 4.0);
      }
    }
  }
}

TEST(Modips, MixtureLedgerUsesParallelGroups) {
  const auto d = mixture_data(10, 400);
  Matrix lo = Matrix::Constant(4, 2, -6.0), hi = Matrix::Constant(4, 2, 6.0);
  models::GaussianMixtureModel model(d.schema(), {0, 1}, {2, 3}, lo, hi);
  RngStream r(11, 0);
  PrivacyLedger l{PrivacyBudget(1.0)};
  const auto sets = modips_release(r, d, model, &l);
  EXPECT_EQ(*l.exact_spend_share(), Fraction(1, 1));
  int parallel = 0;
  for (const auto& e : l.entries()) parallel += e.mode == Composition::kParallel;
  EXPECT_GT(parallel, 0);
  for (const auto& s : sets) {
    EXPECT_EQ(s.data.rows(), 400u);
    EXPECT_TRUE(s.params.sigma.is_pd());
  }
}

TEST(Modips, MixtureMsRecoversCellMeans) {
  const auto d = mixture_data(12, 4000);
  Matrix lo = Matrix::Constant(4, 2, -6.0), hi = Matrix::Constant(4, 2, 6.0);
  models::GaussianMixtureModel model(d.schema(), {0, 1}, {2, 3}, lo, hi);
  RngStream r(13, 0);
  ModipsOptions opt;
  opt.sanitize = false;
  opt.m = 1;
  const auto p = modips_release(r, d, model, nullptr, opt)[0].params;
  // Cell (a, b) has means (a - b, a + b - 1).
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      EXPECT_NEAR(p.mu(a * 2 + b, 0), a - b, 0.15);
      EXPECT_NEAR(p.mu(a * 2 + b, 1), a + b - 1, 0.15);
    }
  }
}

TEST(Modips, LogisticShortChainsRunAndCharge) {
  RngStream r(14, 0);
  const Schema s({ColumnSpec::continuous("z1", -4, 4), ColumnSpec::continuous("z2", -4, 4),
                  ColumnSpec::categorical("w1", 2), ColumnSpec::categorical("w2", 2),
                  ColumnSpec::categorical("w3", 3)});
  std::vector<std::vector<double>> cols(5);
  for (int i = 0; i < 200; ++i) {
    const double z1 = std::clamp(sample_normal(r, 0, 1), -4.0, 4.0);
    const double z2 = std::clamp(sample_normal(r, 0, 1), -4.0, 4.0);
    cols[0].push_back(z1);
    cols[1].push_back(z2);
    cols[2].push_back(sample_bernoulli(r, models::logistic(z1)));
    cols[3].push_back(sample_bernoulli(r, models::logistic(-z2)));
    cols[4].push_back(static_cast<double>(r.uniform_int(3)));
  }
  const TabularDataset d(s, cols);
  models::MhOptions mh;
  mh.chains = 1;
  mh.iterations = 600;
  mh.burn_in = 200;
  models::SequentialLogisticModel model(s, models::SequentialLogisticModel::Columns(), mh);
  PrivacyLedger l{PrivacyBudget(1.0)};
  ModipsOptions opt;
  opt.m = 2;
  const auto sets = modips_release(r, d, model, &l, opt);
  EXPECT_EQ(*l.exact_spend_share(), Fraction(1, 1));
  ASSERT_EQ(sets.size(), 2u);
  EXPECT_EQ(sets[0].params.beta1.size(), 40u);
  EXPECT_EQ(sets[0].data.rows(), 200u);

  // Without noise the chain concentrates near the w1 ~ z1 slope of 1.
  ModipsOptions ms;
  ms.sanitize = false;
  ms.m = 1;
  const auto p = modips_release(r, d, model, nullptr, ms)[0].params;
  double slope = 0.0;
  for (const auto& b : p.beta1) slope += b(1) / static_cast<double>(p.beta1.size());
  EXPECT_NEAR(slope, 1.0, 0.5);
}

TEST(Metropolis, SamplesStandardNormalTarget) {
  RngStream r(15, 0);
  models::MhOptions mh;
  mh.iterations = 20000;
  mh.burn_in = 2000;
  mh.thin = 5;
  const auto res = models::metropolis_hastings(
      r, 1, [](const Vector& x) { return -0.5 * x(0) * x(0); }, mh);
  double m = 0, v = 0;
  for (const auto& d : res.draws) m += d(0) / res.draws.size();
  for (const auto& d : res.draws) v += (d(0) - m) * (d(0) - m) / res.draws.size();
  EXPECT_NEAR(m, 0.0, 0.1);
  EXPECT_NEAR(v, 1.0, 0.15);
  EXPECT_GT(res.acceptance, 0.15);
  EXPECT_LT(res.acceptance, 0.6);
}

TEST(Release, ManifestListsFiles) {
  SyntheticRelease rel;
  rel.method = "md";
  rel.sets = {binary(1, 4), binary(2, 4)};
  rel.eps_total = 1.0;
  rel.per_set_eps = 0.5;
  const auto m = rel.manifest();
  EXPECT_EQ(m.at("m"), 2);
  EXPECT_EQ(m.at("files")[1], "set_2.csv");
}

}  // namespace
}  // namespace dips
