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

// Laplace and discrete exponential mechanisms, plus the two legitimizing
// post-processing steps (clamping and noise re-draw).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dips/budget.hpp"
#include "dips/error.hpp"
#include "dips/randvar.hpp"
#include "json.hpp"

namespace dips {

// l1 global sensitivity of a statistic.
class SensitivitySpec {
 public:
  explicit SensitivitySpec(double delta_s) : delta_s_(delta_s) {
    if (!(delta_s > 0.0) || !std::isfinite(delta_s)) {
      throw InvalidArgument("SensitivitySpec: delta_s must be finite and > 0");
    }
  }
  double delta_s() const { return delta_s_; }

 private:
  double delta_s_;
};

enum class PostProcessKind { kNone, kTruncate, kBit };

inline const char* to_string(PostProcessKind k) {
  switch (k) {
    case PostProcessKind::kTruncate:
      return "truncate";
    case PostProcessKind::kBit:
      return "bit";
    default:
      return "none";
  }
}

struct PostProcess {
  PostProcessKind kind = PostProcessKind::kNone;
  double lo = 0.0;
  double hi = 0.0;
};

struct SanitizedStatistic {
  std::string label;
  std::vector<double> raw;
  std::vector<double> sanitized;
  double eps_spent = 0.0;
  SensitivitySpec sensitivity{1.0};
  // Laplace scale used for each entry; truncation re-draws noise at this
  // scale.
  std::vector<double> noise_scale;
  PostProcess postprocess;

  nlohmann::json to_json() const {
    nlohmann::json j{{"label", label},
                     {"raw", raw},
                     {"sanitized", sanitized},
                     {"eps_spent", eps_spent},
                     {"delta_s", sensitivity.delta_s()},
                     {"noise_scale", noise_scale}};
    nlohmann::json pp{{"kind", to_string(postprocess.kind)}};
    if (postprocess.kind != PostProcessKind::kNone) {
      pp["lo"] = postprocess.lo;
      pp["hi"] = postprocess.hi;
    }
    j["postprocess"] = std::move(pp);
    return j;
  }
};

// Laplace scale delta / eps, nudged up until fl(delta / scale) <= eps, so the
// log-density ratio |x - s'| / scale - |x - s| / scale never exceeds eps in
// floating point.
inline double laplace_scale(double delta, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw InvalidArgument("laplace: eps must be finite and > 0");
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw InvalidArgument("laplace: delta must be finite and > 0");
  }
  double scale = delta / eps;
  while (delta / scale > eps) {
    scale = std::nextafter(scale, std::numeric_limits<double>::infinity());
  }
  return scale;
}

// Conjoint sanitization: every entry gets Laplace(0, delta_s / eps) noise,
// with delta_s the l1 sensitivity of the whole vector.
inline SanitizedStatistic laplace_mechanism(RngStream& rng,
                                            std::span<const double> raw,
                                            const SensitivitySpec& sens,
                                            double eps,
                                            std::string label = {}) {
  const double scale = laplace_scale(sens.delta_s(), eps);
  SanitizedStatistic out;
  out.label = std::move(label);
  out.raw.assign(raw.begin(), raw.end());
  out.sanitized.resize(raw.size());
  out.noise_scale.assign(raw.size(), scale);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out.sanitized[i] = raw[i] + sample_laplace(rng, 0.0, scale);
  }
  out.eps_spent = eps;
  out.sensitivity = sens;
  return out;
}

inline SanitizedStatistic laplace_mechanism(RngStream& rng, double raw,
                                            const SensitivitySpec& sens,
                                            double eps,
                                            std::string label = {}) {
  return laplace_mechanism(rng, std::span<const double>(&raw, 1), sens, eps,
                           std::move(label));
}

// Individual sanitization: entry i has its own sensitivity deltas[i] and
// receives eps_shares[i]; the total spent is the sum of the shares.
inline SanitizedStatistic laplace_mechanism_individual(
    RngStream& rng, std::span<const double> raw,
    std::span<const double> deltas, std::span<const double> eps_shares,
    std::string label = {}) {
  if (raw.size() != deltas.size() || raw.size() != eps_shares.size()) {
    throw InvalidArgument("laplace_mechanism_individual: length mismatch");
  }
  SanitizedStatistic out;
  out.label = std::move(label);
  out.raw.assign(raw.begin(), raw.end());
  out.sanitized.resize(raw.size());
  out.noise_scale.resize(raw.size());
  CompensatedSum spent;
  double max_delta = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double scale = laplace_scale(deltas[i], eps_shares[i]);
    out.noise_scale[i] = scale;
    out.sanitized[i] = raw[i] + sample_laplace(rng, 0.0, scale);
    spent.add(eps_shares[i]);
    max_delta = std::max(max_delta, deltas[i]);
  }
  out.eps_spent = spent.value();
  out.sensitivity = SensitivitySpec(max_delta > 0.0 ? max_delta : 1.0);
  return out;
}

// Probabilities of the discrete exponential mechanism, normalized through
// log-sum-exp.
inline std::vector<double> exponential_probabilities(
    std::span<const double> utilities, double delta_u, double eps) {
  if (utilities.empty()) {
    throw InvalidArgument("exponential mechanism: no candidates");
  }
  if (!(delta_u > 0.0)) {
    throw InvalidArgument("exponential mechanism: delta_u must be > 0");
  }
  if (!(eps >= 0.0)) {
    throw InvalidArgument("exponential mechanism: eps must be >= 0");
  }
  std::vector<double> logits(utilities.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    if (std::isnan(utilities[i])) {
      throw InvalidArgument("exponential mechanism: NaN utility");
    }
    logits[i] = utilities[i] * eps / (2.0 * delta_u);
    mx = std::max(mx, logits[i]);
  }
  double total = 0.0;
  for (auto& l : logits) {
    l = std::exp(l - mx);
    total += l;
  }
  for (auto& l : logits) l /= total;
  return logits;
}

// Returns a candidate with probability proportional to
// exp(u(c) * eps / (2 * delta_u)).
template <typename T, typename Utility>
const T& exponential_mechanism_discrete(RngStream& rng,
                                        const std::vector<T>& candidates,
                                        Utility&& utility, double delta_u,
                                        double eps) {
  if (candidates.empty()) {
    throw InvalidArgument("exponential mechanism: no candidates");
  }
  std::vector<double> u(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    u[i] = static_cast<double>(utility(candidates[i]));
  }
  const std::vector<double> probs = exponential_probabilities(u, delta_u, eps);
  double r = rng.uniform();
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    if (r < probs[i]) return candidates[i];
    r -= probs[i];
  }
  return candidates.back();
}

inline double bit_clamp(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

// Boundary inflated truncation: out-of-range entries are moved to the
// nearest bound.
inline SanitizedStatistic postprocess_bit(SanitizedStatistic stat, double lo,
                                          double hi) {
  if (!(lo < hi)) throw InvalidArgument("postprocess_bit: lo must be < hi");
  for (auto& v : stat.sanitized) v = bit_clamp(v, lo, hi);
  stat.postprocess = {PostProcessKind::kBit, lo, hi};
  return stat;
}

// Truncation: each out-of-range entry gets fresh Laplace noise at its
// original scale, around the raw value, until it lands in [lo, hi].
inline SanitizedStatistic postprocess_truncate(RngStream& rng,
                                               SanitizedStatistic stat,
                                               double lo, double hi,
                                               long max_redraws = 1'000'000) {
  if (!(lo < hi)) {
    throw InvalidArgument("postprocess_truncate: lo must be < hi");
  }
  if (stat.noise_scale.size() != stat.sanitized.size()) {
    throw InvalidArgument("postprocess_truncate: missing noise scales");
  }
  for (std::size_t i = 0; i < stat.sanitized.size(); ++i) {
    long tries = 0;
    while (stat.sanitized[i] < lo || stat.sanitized[i] > hi) {
      if (++tries > max_redraws) {
        throw NonConvergence("postprocess_truncate: redraw limit reached for '" +
                             stat.label + "'");
      }
      stat.sanitized[i] =
          stat.raw[i] + sample_laplace(rng, 0.0, stat.noise_scale[i]);
    }
  }
  stat.postprocess = {PostProcessKind::kTruncate, lo, hi};
  return stat;
}

}  // namespace dips
