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
#pragma once

// Normal model with the reference prior f(mu, sigma^2) ~ 1 / sigma^2 for a
// single bounded continuous column.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "dips/dataset.hpp"
#include "dips/param_synth.hpp"
#include "dips/randvar.hpp"

namespace dips::models {

class NormalModel {
 public:
  struct Params {
    double mu = 0.0;
    double sigma2 = 1.0;
    bool degenerate = false;  // sanitized S^2 was legitimized to 0
  };

  struct Options {
    // Sanitize (mean, S^2) as one vector with summed sensitivity instead of
    // splitting the set's budget between them.
    bool conjoint = false;
    std::int64_t mean_weight = 1;
    std::int64_t var_weight = 1;
  };

  // `schema` must have one continuous column; its bounds are [c0, c1].
  explicit NormalModel(Schema schema) : NormalModel(std::move(schema), Options()) {}
  NormalModel(Schema schema, Options opt) : schema_(std::move(schema)), opt_(opt) {
    if (schema_.size() != 1 || schema_[0].is_categorical()) {
      throw InvalidArgument("NormalModel: schema must be one continuous column");
    }
  }

  const Schema& schema() const { return schema_; }
  double c0() const { return schema_[0].lo; }
  double c1() const { return schema_[0].hi; }

  std::vector<StatisticGroup> sufficient_statistics(const TabularDataset& data) const {
    const auto& x = data.column(0);
    const double n = static_cast<double>(x.size());
    if (x.size() < 2) throw Degenerate("NormalModel: need at least 2 rows");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double s2 = ss / (n - 1.0);
    const double range = c1() - c0();
    const double d_mean = range / n;
    const double d_var = range * range / n;
    const double var_hi = range * range / 4.0 * n / (n - 1.0);
    if (opt_.conjoint) {
      StatisticGroup g;
      g.label = "mean_var";
      g.values = {mean, s2};
      g.deltas = {d_mean, d_var};
      g.lo = {c0(), 0.0};
      g.hi = {c1(), var_hi};
      return {g};
    }
    StatisticGroup gm;
    gm.label = "mean";
    gm.values = {mean};
    gm.deltas = {d_mean};
    gm.lo = {c0()};
    gm.hi = {c1()};
    gm.weight = opt_.mean_weight;
    StatisticGroup gv;
    gv.label = "var";
    gv.values = {s2};
    gv.deltas = {d_var};
    gv.lo = {0.0};
    gv.hi = {var_hi};
    gv.weight = opt_.var_weight;
    return {gm, gv};
  }

  // sigma^2 ~ Inv-Gamma((n-1)/2, (n-1) S^2 / 2), mu ~ N(mean, sigma^2 / n).
  Params posterior_draw(RngStream& rng, std::span<const SanitizedGroup> groups,
                        std::size_t n) const {
    double mean, s2;
    if (opt_.conjoint) {
      const auto& g = find_group(groups, "mean_var");
      mean = g.value(0);
      s2 = g.value(1);
    } else {
      mean = find_group(groups, "mean").value(0);
      s2 = find_group(groups, "var").value(0);
    }
    Params p;
    if (!(s2 > 0.0)) {
      s2 = std::numeric_limits<double>::min();
      p.degenerate = true;
    }
    const double nn = static_cast<double>(n);
    p.sigma2 = sample_inv_gamma(rng, 0.5 * (nn - 1.0), 0.5 * (nn - 1.0) * s2);
    p.mu = sample_normal(rng, mean, std::sqrt(p.sigma2 / nn));
    return p;
  }

  // N(mu, sigma^2) draws clamped to [c0, c1].
  TabularDataset predictive_draw(RngStream& rng, const Params& params,
                                 std::size_t n) const {
    std::vector<std::vector<double>> cols(1);
    cols[0].resize(n);
    const double sd = std::sqrt(params.sigma2);
    for (auto& v : cols[0]) {
      v = std::clamp(sample_normal(rng, params.mu, sd), c0(), c1());
    }
    return TabularDataset(schema_, std::move(cols));
  }

 private:
  Schema schema_;
  Options opt_;
};

static_assert(ModipsModel<NormalModel>);

}  // namespace dips::models
