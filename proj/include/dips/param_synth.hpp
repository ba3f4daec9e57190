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

// Parametric synthesis: the Multinomial-Dirichlet and BB-MR synthesizers,
// and the MODIPS engine that sanitizes a model's sufficient statistics,
// draws parameters from the posterior given the sanitized values and
// simulates synthetic sets from the predictive.

#include <cmath>
#include <concepts>
#include <functional>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dips/budget.hpp"
#include "dips/dataset.hpp"
#include "dips/error.hpp"
#include "dips/hist_synth.hpp"
#include "dips/mechanisms.hpp"
#include "dips/randvar.hpp"
#include "json.hpp"

namespace dips {

// ---------------------------------------------------------------------------
// Multinomial-Dirichlet and BB-MR.

// log(e^x - 1) without overflow for large x.
inline double log_expm1(double x) {
  if (x > 40.0) return x + std::log1p(-std::exp(-x));
  return std::log(std::expm1(x));
}

// Prior pseudo-count n / (e^eps - 1), evaluated in log space.
inline double md_alpha(double n, double eps_set) {
  if (!(eps_set > 0.0)) throw InvalidArgument("md_alpha: eps must be > 0");
  if (!(n > 0.0)) throw InvalidArgument("md_alpha: n must be > 0");
  return std::exp(std::log(n) - log_expm1(eps_set));
}

// Dirichlet draw that tolerates zero shapes (those cells get probability 0).
inline std::vector<double> sample_dirichlet_or_zero(RngStream& rng,
                                                    std::span<const double> shape) {
  std::vector<double> positive;
  std::vector<std::size_t> where;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (shape[k] > 0.0) {
      positive.push_back(shape[k]);
      where.push_back(k);
    }
  }
  if (positive.empty()) throw PosteriorDegenerate("Dirichlet with all-zero shape");
  const auto p = sample_dirichlet(rng, positive);
  std::vector<double> out(shape.size(), 0.0);
  for (std::size_t i = 0; i < where.size(); ++i) out[where[i]] = p[i];
  return out;
}

// One MD synthesis from cell counts: pi* ~ Dirichlet(alpha* + n), then
// counts ~ Multinomial(n, pi*), with alpha* = n / (e^eps_set - 1).
inline std::vector<std::int64_t> md_synthesize_once(RngStream& rng,
                                                    std::span<const std::int64_t> counts,
                                                    double eps_set) {
  if (counts.empty()) throw InvalidArgument("md_synthesizer: no cells");
  std::int64_t n = 0;
  for (auto c : counts) {
    if (c < 0) throw InvalidArgument("md_synthesizer: negative count");
    n += c;
  }
  if (n <= 0) throw InvalidArgument("md_synthesizer: empty data");
  const double alpha = md_alpha(static_cast<double>(n), eps_set);
  std::vector<double> shape(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    shape[k] = alpha + static_cast<double>(counts[k]);
  }
  const auto pi = sample_dirichlet_or_zero(rng, shape);
  return sample_multinomial(rng, n, pi);
}

// m MD syntheses, each with eps / m. Charges the ledger (if given) once per
// set with an exact 1/m share of its total, which must equal eps.
inline std::vector<std::vector<std::int64_t>> md_synthesizer(
    RngStream& rng, std::span<const std::int64_t> counts, double eps, int m,
    PrivacyLedger* ledger = nullptr) {
  if (m < 1) throw InvalidArgument("md_synthesizer: m must be >= 1");
  if (!(eps > 0.0)) throw InvalidArgument("md_synthesizer: eps must be > 0");
  std::vector<std::vector<std::int64_t>> out;
  for (int j = 0; j < m; ++j) {
    if (ledger) ledger->charge_share("md/set" + std::to_string(j), Fraction(1, m));
    RngStream set_rng = rng.split(static_cast<std::uint64_t>(j));
    out.push_back(md_synthesize_once(set_rng, counts, eps / m));
  }
  return out;
}

// alpha = 1 / (e^(eps/n) - 1).
inline double bbmr_alpha(double n, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("bbmr: eps must be > 0");
  if (!(n > 0.0)) throw InvalidArgument("bbmr: n must be > 0");
  return std::exp(-log_expm1(eps / n));
}

// p* = (n1 + alpha) / (n + 2 alpha).
inline double bbmr_probability(std::int64_t n1, std::int64_t n, double eps) {
  if (n <= 0 || n1 < 0 || n1 > n) throw InvalidArgument("bbmr: need 0 <= n1 <= n");
  const double a = bbmr_alpha(static_cast<double>(n), eps);
  if (std::isinf(a)) return 0.5;
  return (static_cast<double>(n1) + a) / (static_cast<double>(n) + 2.0 * a);
}

// Number of ones in the single BB-MR synthetic set.
inline std::int64_t bbmr_synthesizer(RngStream& rng, std::int64_t n1, std::int64_t n,
                                     double eps, PrivacyLedger* ledger = nullptr) {
  const double p = bbmr_probability(n1, n, eps);
  if (ledger) ledger->charge_share("bbmr", Fraction(1, 1));
  return sample_binomial(rng, n, p);
}

// Laplace sanitizer for one binary variable: n1* = n1 + Lap(delta / eps),
// BIT into [0, n], rounded to the nearest count.
inline std::int64_t laplace_sanitizer_binary(RngStream& rng, std::int64_t n1,
                                             std::int64_t n, double eps,
                                             PostProcessKind pp = PostProcessKind::kBit,
                                             double delta = 1.0) {
  if (n <= 0 || n1 < 0 || n1 > n) {
    throw InvalidArgument("laplace_sanitizer_binary: need 0 <= n1 <= n");
  }
  const double raw = static_cast<double>(n1);
  SanitizedStatistic s = laplace_mechanism(rng, raw, SensitivitySpec(delta), eps);
  s = pp == PostProcessKind::kTruncate
          ? postprocess_truncate(rng, std::move(s), 0.0, static_cast<double>(n))
          : postprocess_bit(std::move(s), 0.0, static_cast<double>(n));
  return static_cast<std::int64_t>(std::llround(s.sanitized[0]));
}

// Rows realizing the given per-cell counts, uniformly placed within cells
// and shuffled.
inline TabularDataset rows_from_counts(RngStream& rng, const GridSpec& grid,
                                       std::span<const std::int64_t> counts,
                                       const Schema& schema) {
  std::vector<std::vector<double>> cols(schema.size());
  std::vector<double> row(schema.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (std::int64_t r = 0; r < counts[k]; ++r) {
      sample_point_in_cell(rng, grid, k, row);
      for (std::size_t j = 0; j < row.size(); ++j) cols[j].push_back(row[j]);
    }
  }
  shuffle_rows(rng, cols);
  return TabularDataset(schema, std::move(cols));
}

// ---------------------------------------------------------------------------
// MODIPS engine.

// A block of sufficient statistics sanitized together.
//
// Non-disjoint groups with several entries are sanitized conjointly: every
// entry gets Laplace noise at scale (sum of deltas) / eps. Disjoint groups
// hold statistics of disjoint row subsets (cell counts, cell means); each
// entry gets the group's full eps at scale delta_i / eps. Entries whose
// value is NaN do not exist for this data (an empty cell's mean) and are
// neither sanitized nor charged.
//
// A functional group has no values: the model sanitizes a data-dependent
// function itself, inside posterior_draw, with the group's eps and delta.
struct StatisticGroup {
  std::string label;
  std::vector<double> values;
  std::vector<double> deltas;
  std::vector<double> lo;
  std::vector<double> hi;
  bool disjoint = false;
  bool functional = false;
  std::int64_t weight = 1;
  // Functional groups: log of the function to sanitize at a parameter
  // value, and optionally the exact function used when sanitization is off.
  std::function<double(std::span<const double>)> log_functional;
  std::function<double(std::span<const double>)> log_exact;
};

struct SanitizedGroup {
  std::string label;
  std::vector<double> values;  // legitimized; NaN where absent
  std::vector<double> raw;
  std::vector<double> noise_scale;  // 0 when not sanitized
  std::vector<double> lo;
  std::vector<double> hi;
  double eps = std::numeric_limits<double>::infinity();
  double delta = 0.0;  // functional groups
  bool sanitized = false;
  PostProcessKind postprocess = PostProcessKind::kBit;
  std::function<double(std::span<const double>)> log_functional;
  std::function<double(std::span<const double>)> log_exact;

  double value(std::size_t i) const { return values.at(i); }

  // For functional groups: raw + Lap(delta / eps), legitimized into
  // [lo[0], hi[0]]. Returns raw unchanged when sanitization is off.
  double sanitize(RngStream& rng, double raw_value) const {
    if (!sanitized) return raw_value;
    const double scale = laplace_scale(delta, eps);
    double v = raw_value + sample_laplace(rng, 0.0, scale);
    if (postprocess == PostProcessKind::kTruncate) {
      long tries = 0;
      while (v < lo[0] || v > hi[0]) {
        if (++tries > 1'000'000) throw NonConvergence("functional truncation");
        v = raw_value + sample_laplace(rng, 0.0, scale);
      }
      return v;
    }
    return bit_clamp(v, lo[0], hi[0]);
  }

  // log of the (sanitized) functional at theta. Each call draws fresh noise.
  double log_value(RngStream& rng, std::span<const double> theta) const {
    if (!log_functional) throw InvalidArgument("group '" + label + "' is not functional");
    if (!sanitized) return log_exact ? log_exact(theta) : log_functional(theta);
    const double lraw = log_functional(theta);
    return std::log(sanitize(rng, std::exp(lraw)));
  }
};

inline const SanitizedGroup& find_group(std::span<const SanitizedGroup> groups,
                                        std::string_view label) {
  for (const auto& g : groups) {
    if (g.label == label) return g;
  }
  throw InvalidArgument("no sanitized group '" + std::string(label) + "'");
}

// A model plugged into the MODIPS engine.
template <typename M>
concept ModipsModel = requires(const M& model, const TabularDataset& data,
                               RngStream& rng, std::span<const SanitizedGroup> groups,
                               const typename M::Params& params, std::size_t n) {
  typename M::Params;
  { model.sufficient_statistics(data) } -> std::same_as<std::vector<StatisticGroup>>;
  { model.posterior_draw(rng, groups, n) } -> std::same_as<typename M::Params>;
  { model.predictive_draw(rng, params, n) } -> std::same_as<TabularDataset>;
};

struct ModipsOptions {
  int m = 5;
  PostProcessKind postprocess = PostProcessKind::kBit;
  // false gives the non-private multiple-synthesis baseline: the posterior
  // sees the raw statistics and nothing is charged.
  bool sanitize = true;
};

template <typename Params>
struct ModipsSet {
  TabularDataset data;
  Params params;
  std::vector<SanitizedGroup> groups;
};

namespace internal {

inline void check_group(const StatisticGroup& g) {
  if (g.weight <= 0) throw InvalidArgument("group '" + g.label + "': weight must be > 0");
  if (g.functional) {
    if (g.deltas.size() != 1 || g.lo.size() != 1 || g.hi.size() != 1 ||
        !g.log_functional) {
      throw InvalidArgument("functional group '" + g.label +
                            "' needs one delta and one bound pair");
    }
    return;
  }
  const auto k = g.values.size();
  if (g.deltas.size() != k || g.lo.size() != k || g.hi.size() != k) {
    throw InvalidArgument("group '" + g.label + "': length mismatch");
  }
}

// Sanitizes one group with `eps` (unused when !sanitize).
inline SanitizedGroup sanitize_group(RngStream& rng, const StatisticGroup& g, double eps,
                                     const ModipsOptions& opt) {
  SanitizedGroup s;
  s.label = g.label;
  s.raw = g.values;
  s.lo = g.lo;
  s.hi = g.hi;
  s.postprocess = opt.postprocess;
  s.sanitized = opt.sanitize;
  s.eps = opt.sanitize ? eps : std::numeric_limits<double>::infinity();
  if (g.functional) {
    s.delta = g.deltas[0];
    s.log_functional = g.log_functional;
    s.log_exact = g.log_exact;
    return s;
  }
  s.values = g.values;
  s.noise_scale.assign(g.values.size(), 0.0);
  if (!opt.sanitize) return s;

  double conjoint_delta = 0.0;
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    if (!std::isnan(g.values[i])) conjoint_delta += g.deltas[i];
  }
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    if (std::isnan(g.values[i])) continue;
    const double delta = g.disjoint ? g.deltas[i] : conjoint_delta;
    const double scale = laplace_scale(delta, eps);
    s.noise_scale[i] = scale;
    double v = g.values[i] + sample_laplace(rng, 0.0, scale);
    if (opt.postprocess == PostProcessKind::kTruncate) {
      long tries = 0;
      while (v < g.lo[i] || v > g.hi[i]) {
        if (++tries > 1'000'000) {
          throw NonConvergence("truncation redraw limit for '" + g.label + "'");
        }
        v = g.values[i] + sample_laplace(rng, 0.0, scale);
      }
    } else if (opt.postprocess == PostProcessKind::kBit) {
      v = bit_clamp(v, g.lo[i], g.hi[i]);
    }
    s.values[i] = v;
  }
  return s;
}

}  // namespace internal

// Generates m synthetic sets. Set j gets an exact 1/m share of the ledger's
// total; within a set, group g gets weight_g / (sum of weights) of that.
// Disjoint groups are charged per entry inside one parallel group.
template <ModipsModel M>
std::vector<ModipsSet<typename M::Params>> modips_release(RngStream& rng,
                                                          const TabularDataset& data,
                                                          const M& model,
                                                          PrivacyLedger* ledger,
                                                          const ModipsOptions& opt = {}) {
  if (opt.m < 1) throw InvalidArgument("modips_release: m must be >= 1");
  if (opt.sanitize && ledger == nullptr) {
    throw InvalidArgument("modips_release: sanitized release needs a ledger");
  }
  const std::vector<StatisticGroup> stats = model.sufficient_statistics(data);
  std::int64_t total_weight = 0;
  for (const auto& g : stats) {
    internal::check_group(g);
    total_weight += g.weight;
  }
  if (total_weight <= 0) throw InvalidArgument("modips_release: no statistics");

  std::vector<ModipsSet<typename M::Params>> out;
  out.reserve(static_cast<std::size_t>(opt.m));
  for (int j = 0; j < opt.m; ++j) {
    RngStream set_rng = rng.split(static_cast<std::uint64_t>(j));
    std::vector<SanitizedGroup> sanitized;
    sanitized.reserve(stats.size());
    for (const auto& g : stats) {
      double eps = std::numeric_limits<double>::infinity();
      if (opt.sanitize) {
        const Fraction share = Fraction(1, opt.m) * Fraction(g.weight, total_weight);
        eps = ledger->total().epsilon() * share.to_double();
        const std::string tag = "set" + std::to_string(j) + "/" + g.label;
        if (g.disjoint) {
          for (std::size_t i = 0; i < g.values.size(); ++i) {
            if (std::isnan(g.values[i])) continue;
            ledger->charge_share(tag + "[" + std::to_string(i) + "]", share,
                                 Composition::kParallel, tag);
          }
        } else {
          ledger->charge_share(tag, share);
        }
      }
      sanitized.push_back(internal::sanitize_group(set_rng, g, eps, opt));
    }
    auto params = model.posterior_draw(set_rng, sanitized, data.rows());
    TabularDataset synth = model.predictive_draw(set_rng, params, data.rows());
    out.push_back({std::move(synth), std::move(params), std::move(sanitized)});
  }
  return out;
}

// A released collection of synthetic sets with its provenance.
struct SyntheticRelease {
  std::string method;
  std::vector<TabularDataset> sets;
  double eps_total = 0.0;
  double per_set_eps = 0.0;
  std::uint64_t seed = 0;
  nlohmann::json ledger;

  nlohmann::json manifest() const {
    nlohmann::json files = nlohmann::json::array();
    for (std::size_t j = 0; j < sets.size(); ++j) {
      files.push_back("set_" + std::to_string(j + 1) + ".csv");
    }
    return {{"method", method},
            {"eps", eps_total},
            {"m", sets.size()},
            {"per_set_eps", per_set_eps},
            {"seed", seed},
            {"rows", sets.empty() ? 0 : sets[0].rows()},
            {"files", files},
            {"ledger", ledger}};
  }
};

}  // namespace dips
