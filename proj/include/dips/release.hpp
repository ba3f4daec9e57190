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

// One-shot synthetic releases of a user dataset, dispatching on a method tag.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dips/budget.hpp"
#include "dips/dataset.hpp"
#include "dips/error.hpp"
#include "dips/hist_synth.hpp"
#include "dips/mechanisms.hpp"
#include "dips/models/bernoulli.hpp"
#include "dips/models/gaussian_mixture.hpp"
#include "dips/models/normal.hpp"
#include "dips/models/sequential_logistic.hpp"
#include "dips/param_synth.hpp"
#include "dips/randvar.hpp"

namespace dips {

inline const std::vector<std::string>& release_methods() {
  static const std::vector<std::string> kMethods = {
      "laplace",          "pert-hist",     "smooth-hist",      "md",
      "bbmr",             "modips-bernoulli", "modips-normal", "modips-mixture",
      "modips-logistic"};
  return kMethods;
}

namespace internal {

// Histogram grid over every column: categorical columns keep their levels,
// continuous columns get Scott-width bins over their declared bounds with
// d = number of continuous columns.
inline GridSpec full_grid(const TabularDataset& data) {
  const Schema& schema = data.schema();
  int d = 0;
  for (std::size_t j = 0; j < schema.size(); ++j) d += !schema[j].is_categorical();
  std::vector<Axis> axes;
  const double n = static_cast<double>(data.rows());
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& c = schema[j];
    if (c.is_categorical()) {
      axes.push_back(Axis::categorical(j, c.level_count()));
      continue;
    }
    const auto& x = data.column(j);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    const double h = sd > 0.0 ? bin_width_scott(sd, n, d) : c.hi - c.lo;
    axes.push_back(Axis::binned_by_width(j, c.lo, c.hi, h));
  }
  return GridSpec(std::move(axes));
}

inline std::int64_t count_ones(const TabularDataset& data) {
  std::int64_t n1 = 0;
  for (std::size_t i = 0; i < data.rows(); ++i) n1 += data.code(i, 0) == 1;
  return n1;
}

inline TabularDataset binary_rows(RngStream& rng, const Schema& schema, std::int64_t n1,
                                  std::int64_t n) {
  const GridSpec grid({Axis::categorical(0, 2)});
  const std::vector<std::int64_t> counts = {n - n1, n1};
  return rows_from_counts(rng, grid, counts, schema);
}

inline void require_binary(const Schema& schema, const std::string& method) {
  if (schema.size() != 1 || !schema[0].is_categorical() || schema[0].level_count() != 2) {
    throw ConfigError(method + " needs exactly one binary column");
  }
}

template <typename M>
void append_modips(RngStream& rng, const TabularDataset& data, const M& model,
                   PrivacyLedger& ledger, int m, PostProcessKind pp,
                   std::vector<TabularDataset>& out) {
  ModipsOptions opt;
  opt.m = m;
  opt.postprocess = pp;
  for (auto& s : modips_release(rng, data, model, &ledger, opt)) out.push_back(std::move(s.data));
}

}  // namespace internal

// Synthesizes m sets from `data` with total budget eps, charging `ledger`
// (whose total must be eps). Methods that release one set ignore m > 1 by
// splitting eps evenly across m independent sets.
inline SyntheticRelease synthesize(const TabularDataset& data, const std::string& method,
                                   double eps, int m, std::uint64_t seed,
                                   PostProcessKind pp, PrivacyLedger& ledger) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("eps must be finite and > 0");
  if (m < 1) throw ConfigError("m must be >= 1");
  if (data.rows() < 2) throw ConfigError("input needs at least 2 rows");
  const Schema& schema = data.schema();
  const auto n = static_cast<std::int64_t>(data.rows());
  RngStream rng(seed, 0);
  SyntheticRelease rel;
  rel.method = method;
  rel.eps_total = eps;
  rel.per_set_eps = eps / m;
  rel.seed = seed;
  const Fraction share(1, m);
  auto set_rng = [&](int j) { return rng.split(static_cast<std::uint64_t>(j)); };

  if (method == "laplace") {
    const GridSpec grid = crosstab_grid(schema);
    const Histogram raw = build_histogram(data, grid);
    for (int j = 0; j < m; ++j) {
      ledger.charge_share("laplace/set" + std::to_string(j), share);
      RngStream r = set_rng(j);
      rel.sets.push_back(
          sample_from_histogram(r, perturb_histogram(r, raw, eps / m), data.rows(), schema));
    }
  } else if (method == "pert-hist" || method == "smooth-hist") {
    const GridSpec grid = internal::full_grid(data);
    const Histogram raw = build_histogram(data, grid);
    for (int j = 0; j < m; ++j) {
      ledger.charge_share(method + "/set" + std::to_string(j), share);
      RngStream r = set_rng(j);
      if (method == "pert-hist") {
        rel.sets.push_back(
            sample_from_histogram(r, perturb_histogram(r, raw, eps / m), data.rows(), schema));
      } else {
        rel.sets.push_back(
            sample_from_histogram(r, smooth_histogram(raw, eps / m), data.rows(), schema));
      }
    }
  } else if (method == "md") {
    const GridSpec grid = crosstab_grid(schema);
    const Histogram raw = build_histogram(data, grid);
    std::vector<std::int64_t> counts(raw.counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
      counts[k] = static_cast<std::int64_t>(std::llround(raw.counts[k]));
    }
    const auto sets = md_synthesizer(rng, counts, eps, m, &ledger);
    for (std::size_t j = 0; j < sets.size(); ++j) {
      RngStream r = set_rng(1000 + static_cast<int>(j));
      rel.sets.push_back(rows_from_counts(r, grid, sets[j], schema));
    }
  } else if (method == "bbmr") {
    internal::require_binary(schema, method);
    const std::int64_t n1 = internal::count_ones(data);
    for (int j = 0; j < m; ++j) {
      ledger.charge_share("bbmr/set" + std::to_string(j), share);
      RngStream r = set_rng(j);
      const std::int64_t s = bbmr_synthesizer(r, n1, n, eps / m);
      rel.sets.push_back(internal::binary_rows(r, schema, s, n));
    }
  } else if (method == "modips-bernoulli") {
    internal::require_binary(schema, method);
    internal::append_modips(rng, data, models::BernoulliModel(schema), ledger, m, pp, rel.sets);
  } else if (method == "modips-normal") {
    if (schema.size() != 1 || schema[0].is_categorical()) {
      throw ConfigError(method + " needs exactly one continuous column");
    }
    internal::append_modips(rng, data, models::NormalModel(schema), ledger, m, pp, rel.sets);
  } else if (method == "modips-mixture") {
    std::vector<std::size_t> cats, zs;
    std::size_t cells = 1;
    for (std::size_t j = 0; j < schema.size(); ++j) {
      if (schema[j].is_categorical()) {
        cats.push_back(j);
        cells *= static_cast<std::size_t>(schema[j].level_count());
      } else {
        zs.push_back(j);
      }
    }
    if (cats.empty() || zs.empty()) {
      throw ConfigError(method + " needs categorical and continuous columns");
    }
    const auto k = static_cast<Eigen::Index>(cells);
    const auto p = static_cast<Eigen::Index>(zs.size());
    Matrix lo(k, p), hi(k, p);
    for (Eigen::Index c = 0; c < p; ++c) {
      lo.col(c).setConstant(schema[zs[static_cast<std::size_t>(c)]].lo);
      hi.col(c).setConstant(schema[zs[static_cast<std::size_t>(c)]].hi);
    }
    models::GaussianMixtureModel model(schema, cats, zs, lo, hi);
    internal::append_modips(rng, data, model, ledger, m, pp, rel.sets);
  } else if (method == "modips-logistic") {
    internal::append_modips(rng, data, models::SequentialLogisticModel(schema), ledger, m, pp,
                            rel.sets);
  } else {
    throw ConfigError("unknown method '" + method + "'");
  }
  rel.ledger = ledger.to_json();
  return rel;
}

// Writes set_1.csv .. set_m.csv and manifest.json into `dir`.
inline void write_release(const std::filesystem::path& dir, const SyntheticRelease& rel) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  for (std::size_t j = 0; j < rel.sets.size(); ++j) {
    write_csv((dir / ("set_" + std::to_string(j + 1) + ".csv")).string(), rel.sets[j]);
  }
  std::ofstream f(dir / "manifest.json", std::ios::binary);
  if (!f) throw IoError("cannot write manifest");
  f << rel.manifest().dump(2) << '\n';
  if (!f) throw IoError("write failed for manifest");
}

}  // namespace dips
