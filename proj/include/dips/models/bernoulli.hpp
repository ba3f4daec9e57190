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

// Beta-Bernoulli model for a single binary column.

#include <cstdint>
#include <span>
#include <vector>

#include "dips/dataset.hpp"
#include "dips/param_synth.hpp"
#include "dips/randvar.hpp"

namespace dips::models {

class BernoulliModel {
 public:
  struct Params {
    double p = 0.5;
  };

  // `schema` must have exactly one categorical column with two levels; level
  // code 1 is the "success".
  explicit BernoulliModel(Schema schema, double prior_a = 1.0 / 3.0,
                          double prior_b = 1.0 / 3.0, double count_delta = 1.0)
      : schema_(std::move(schema)), a_(prior_a), b_(prior_b), delta_(count_delta) {
    if (schema_.size() != 1 || !schema_[0].is_categorical() ||
        schema_[0].level_count() != 2) {
      throw InvalidArgument("BernoulliModel: schema must be one binary column");
    }
    if (!(a_ > 0.0 && b_ > 0.0)) throw InvalidArgument("BernoulliModel: prior must be > 0");
  }

  const Schema& schema() const { return schema_; }

  std::vector<StatisticGroup> sufficient_statistics(const TabularDataset& data) const {
    double n1 = 0.0;
    for (double v : data.column(0)) n1 += v;
    const double n = static_cast<double>(data.rows());
    StatisticGroup g;
    g.label = "n1";
    g.values = {n1};
    g.deltas = {delta_};
    g.lo = {0.0};
    g.hi = {n};
    return {g};
  }

  Params posterior_draw(RngStream& rng, std::span<const SanitizedGroup> groups,
                        std::size_t n) const {
    const double n1 = find_group(groups, "n1").value(0);
    const double nn = static_cast<double>(n);
    return {sample_beta(rng, a_ + n1, b_ + nn - n1)};
  }

  TabularDataset predictive_draw(RngStream& rng, const Params& params,
                                 std::size_t n) const {
    std::vector<std::vector<double>> cols(1);
    cols[0].resize(n);
    for (auto& v : cols[0]) v = sample_bernoulli(rng, params.p) ? 1.0 : 0.0;
    return TabularDataset(schema_, std::move(cols));
  }

 private:
  Schema schema_;
  double a_;
  double b_;
  double delta_;
};

static_assert(ModipsModel<BernoulliModel>);

}  // namespace dips::models
