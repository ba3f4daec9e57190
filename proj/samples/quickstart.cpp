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

// Releases five synthetic copies of a binary variable and of a bounded
// continuous variable, then analyzes them with the combining rules.

#include <iostream>
#include <vector>

#include "dips/dips.hpp"

int main() {
  dips::RngStream data_rng(7, 0);
  const std::size_t n = 200;

  // Binary variable with P(x = 1) = 0.3.
  const dips::Schema bin_schema({dips::ColumnSpec::categorical("smoker", 2)});
  std::vector<std::vector<double>> bin_cols(1, std::vector<double>(n));
  for (auto& v : bin_cols[0]) v = dips::sample_bernoulli(data_rng, 0.3) ? 1.0 : 0.0;
  const dips::TabularDataset binary(bin_schema, std::move(bin_cols));

  // Continuous variable on [0, 10].
  const dips::Schema cont_schema({dips::ColumnSpec::continuous("score", 0.0, 10.0)});
  std::vector<std::vector<double>> cont_cols(1, std::vector<double>(n));
  for (auto& v : cont_cols[0]) v = std::clamp(dips::sample_normal(data_rng, 5.0, 1.5), 0.0, 10.0);
  const dips::TabularDataset cont(cont_schema, std::move(cont_cols));

  const double eps = 1.0;
  const int m = 5;
  for (const auto& [method, data] :
       {std::pair{"modips-bernoulli", &binary}, std::pair{"modips-normal", &cont}}) {
    dips::PrivacyLedger ledger{dips::PrivacyBudget(eps)};
    const auto rel =
        dips::synthesize(*data, method, eps, m, 42, dips::PostProcessKind::kBit, ledger);
    std::vector<dips::PerSetEstimate> per;
    for (const auto& s : rel.sets) {
      per.push_back(method == std::string("modips-bernoulli")
                        ? dips::estimate_proportion(s.column(0), 1.0)
                        : dips::estimate_mean(s.column(0)));
    }
    const auto ce = dips::combine(per);
    const auto orig = method == std::string("modips-bernoulli")
                          ? dips::estimate_proportion(data->column(0), 1.0)
                          : dips::estimate_mean(data->column(0));
    std::cout << method << ": original " << orig.estimate << ", synthetic " << ce.point
              << " [" << ce.ci_low << ", " << ce.ci_high << "], spent "
              << ledger.effective_spend() << " of " << eps << '\n';
  }
  return 0;
}
