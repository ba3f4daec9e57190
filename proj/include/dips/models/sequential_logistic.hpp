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

// Bivariate normal z followed by a chain of logistic models:
//   w1 | z         ~ Bern(logit^-1((1, z1, z2) b1))
//   w2 | z, w1     ~ Bern(logit^-1((1, z1, z2, w1) b2))
//   w3 | z, w1, w2 ~ baseline-category logit with level 1 as reference,
//                    coefficients b3 (level 2) and b4 (level 3) on
//                    (1, z1, z2, w1, w2).
//
// Coefficient posteriors are proportional to the likelihood (flat priors);
// they are sampled by random-walk Metropolis-Hastings. Under sanitization
// the likelihood is replaced by its sanitized value, a product of per-row
// probabilities clamped into (1e-12, 0.99), perturbed with fresh Laplace
// noise on every evaluation and legitimized into [1e-300, 0.99^n].

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dips/dataset.hpp"
#include "dips/hist_synth.hpp"
#include "dips/param_synth.hpp"
#include "dips/randvar.hpp"

namespace dips::models {

struct MhOptions {
  int chains = 2;
  int iterations = 6500;
  int burn_in = 1500;
  int thin = 10;
  int adapt_every = 50;
  double initial_scale = 0.1;
  // Coefficients are restricted to [-box, box]; a sanitized likelihood
  // that is pure noise would otherwise let the chain drift without bound.
  double box = 20.0;
};

struct MhResult {
  std::vector<Vector> draws;
  double acceptance = 0.0;  // after burn-in
  double scale = 0.0;       // frozen proposal scale
};

// Random-walk Metropolis-Hastings with a scalar proposal scale tuned during
// burn-in towards an acceptance rate in [0.2, 0.5] and frozen afterwards.
template <typename LogTarget>
MhResult metropolis_hastings(RngStream& rng, int dim, LogTarget&& log_target,
                             const MhOptions& opt) {
  if (opt.chains < 1 || opt.iterations <= opt.burn_in || opt.thin < 1) {
    throw InvalidArgument("metropolis_hastings: bad chain settings");
  }
  MhResult res;
  long accepted_after = 0;
  long proposals_after = 0;
  double scale_sum = 0.0;
  for (int c = 0; c < opt.chains; ++c) {
    Vector cur = Vector::Zero(dim);
    if (c > 0) {
      for (int i = 0; i < dim; ++i) cur(i) = 0.5 * sample_standard_normal(rng);
    }
    double cur_lp = log_target(cur);
    double scale = opt.initial_scale;
    int window_accepts = 0;
    int window = 0;
    Vector prop(dim);
    for (int it = 0; it < opt.iterations; ++it) {
      bool inside = true;
      for (int i = 0; i < dim; ++i) {
        prop(i) = cur(i) + scale * sample_standard_normal(rng);
        if (std::fabs(prop(i)) > opt.box) inside = false;
      }
      bool accept = false;
      if (inside) {
        const double lp = log_target(prop);
        const double log_u = std::log(rng.uniform_open());
        if (lp >= cur_lp || log_u < lp - cur_lp) {
          accept = true;
          cur = prop;
          cur_lp = lp;
        }
      }
      if (it < opt.burn_in) {
        window_accepts += accept;
        if (++window == opt.adapt_every) {
          const double rate = static_cast<double>(window_accepts) / window;
          if (rate < 0.2) scale *= 0.7;
          if (rate > 0.5) scale *= 1.4;
          scale = std::clamp(scale, 1e-3, 10.0);
          window = 0;
          window_accepts = 0;
        }
      } else {
        ++proposals_after;
        accepted_after += accept;
        if ((it - opt.burn_in + 1) % opt.thin == 0) res.draws.push_back(cur);
      }
    }
    scale_sum += scale;
  }
  res.acceptance = proposals_after ? static_cast<double>(accepted_after) / proposals_after : 0.0;
  res.scale = scale_sum / opt.chains;
  return res;
}

inline double logistic(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// log(1 + e^x) without overflow.
inline double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

class SequentialLogisticModel {
 public:
  struct Params {
    Vector mu;
    SymmetricMatrix sigma;
    std::vector<Vector> beta1;   // 3 each
    std::vector<Vector> beta2;   // 4 each
    std::vector<Vector> beta34;  // 10 each: b3 then b4
    double acceptance[3] = {0.0, 0.0, 0.0};
    bool degenerate = false;
  };

  struct Columns {
    std::size_t z1 = 0, z2 = 1, w1 = 2, w2 = 3, w3 = 4;
  };

  // w1, w2 binary (codes 0/1); w3 three levels (codes 0, 1, 2; code 0 is the
  // reference level).
  explicit SequentialLogisticModel(Schema schema)
      : SequentialLogisticModel(std::move(schema), Columns(), MhOptions()) {}
  SequentialLogisticModel(Schema schema, Columns cols, MhOptions mh)
      : schema_(std::move(schema)), c_(cols), mh_(mh) {
    const auto& s = schema_;
    if (s.size() != 5 || s[c_.z1].is_categorical() || s[c_.z2].is_categorical() ||
        s[c_.w1].level_count() != 2 || s[c_.w2].level_count() != 2 ||
        s[c_.w3].level_count() != 3) {
      throw InvalidArgument("SequentialLogisticModel: unexpected schema");
    }
  }

  const Schema& schema() const { return schema_; }
  const MhOptions& mh_options() const { return mh_; }

  // Per-row probability clamp for the sanitized likelihood.
  static constexpr double kProbLo = 1e-12;
  static constexpr double kProbHi = 0.99;

  std::vector<StatisticGroup> sufficient_statistics(const TabularDataset& data) const {
    auto rows = std::make_shared<const RowData>(extract(data));
    const double n = static_cast<double>(data.rows());
    const double r1 = schema_[c_.z1].hi - schema_[c_.z1].lo;
    const double r2 = schema_[c_.z2].hi - schema_[c_.z2].lo;

    double m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < rows->z1.size(); ++i) {
      m1 += rows->z1[i];
      m2 += rows->z2[i];
    }
    m1 /= n;
    m2 /= n;
    double s11 = 0, s22 = 0, s12 = 0;
    for (std::size_t i = 0; i < rows->z1.size(); ++i) {
      const double a = rows->z1[i] - m1;
      const double b = rows->z2[i] - m2;
      s11 += a * a;
      s22 += b * b;
      s12 += a * b;
    }
    s11 /= n;
    s22 /= n;
    s12 /= n;

    std::vector<StatisticGroup> out;
    auto scalar = [&](std::string label, double v, double delta, double lo, double hi) {
      StatisticGroup g;
      g.label = std::move(label);
      g.values = {v};
      g.deltas = {delta};
      g.lo = {lo};
      g.hi = {hi};
      out.push_back(std::move(g));
    };
    scalar("zbar1", m1, r1 / n, schema_[c_.z1].lo, schema_[c_.z1].hi);
    scalar("zbar2", m2, r2 / n, schema_[c_.z2].lo, schema_[c_.z2].hi);
    scalar("S11", s11, r1 * r1 / n, 0.0, r1 * r1 / 4.0);
    scalar("S22", s22, r2 * r2 / n, 0.0, r2 * r2 / 4.0);
    scalar("S12", s12, r1 * r2 / n, -r1 * r2 / 4.0, r1 * r2 / 4.0);

    const double cap = std::pow(kProbHi, n);
    for (int block = 0; block < 3; ++block) {
      StatisticGroup g;
      g.label = "L" + std::to_string(block + 1);
      g.functional = true;
      g.deltas = {cap};
      g.lo = {1e-300};
      g.hi = {cap};
      g.log_functional = [rows, block](std::span<const double> b) {
        return log_likelihood(*rows, block, b, true);
      };
      g.log_exact = [rows, block](std::span<const double> b) {
        return log_likelihood(*rows, block, b, false);
      };
      out.push_back(std::move(g));
    }
    return out;
  }

  Params posterior_draw(RngStream& rng, std::span<const SanitizedGroup> groups,
                        std::size_t n) const {
    Params out;
    const double nn = static_cast<double>(n);
    Matrix s(2, 2);
    s(0, 0) = find_group(groups, "S11").value(0);
    s(1, 1) = find_group(groups, "S22").value(0);
    s(0, 1) = s(1, 0) = find_group(groups, "S12").value(0);
    SymmetricMatrix s_sym(s);
    if (!s_sym.is_pd() || s_sym.min_eigenvalue() <= 1e-10 * std::max(1.0, s.trace())) {
      s_sym = s_sym.clamp_eigenvalues(1e-6 * std::max(1e-3, s.trace()));
      out.degenerate = true;
    }
    out.sigma = sample_inv_wishart(rng, nn, SymmetricMatrix(nn * s_sym.matrix()));
    Vector center(2);
    center << find_group(groups, "zbar1").value(0), find_group(groups, "zbar2").value(0);
    out.mu = sample_mvnormal(rng, center, SymmetricMatrix(out.sigma.matrix() / nn));

    const int dims[3] = {3, 4, 10};
    std::vector<Vector>* dest[3] = {&out.beta1, &out.beta2, &out.beta34};
    for (int block = 0; block < 3; ++block) {
      const auto& g = find_group(groups, "L" + std::to_string(block + 1));
      auto target = [&](const Vector& b) {
        return g.log_value(rng, std::span<const double>(b.data(), b.size()));
      };
      MhResult res = metropolis_hastings(rng, dims[block], target, mh_);
      *dest[block] = std::move(res.draws);
      out.acceptance[block] = res.acceptance;
    }
    return out;
  }

  // Row i uses coefficient draw i (cycling when there are fewer draws than
  // rows).
  TabularDataset predictive_draw(RngStream& rng, const Params& params,
                                 std::size_t n) const {
    std::vector<std::vector<double>> cols(5);
    for (auto& c : cols) c.resize(n);
    const Matrix l = internal::psd_factor(params.sigma);
    const auto& z1s = schema_[c_.z1];
    const auto& z2s = schema_[c_.z2];
    for (std::size_t i = 0; i < n; ++i) {
      Vector e(2);
      e << sample_standard_normal(rng), sample_standard_normal(rng);
      const Vector z = params.mu + l * e;
      const double z1 = std::clamp(z(0), z1s.lo, z1s.hi);
      const double z2 = std::clamp(z(1), z2s.lo, z2s.hi);
      const Vector& b1 = params.beta1[i % params.beta1.size()];
      const Vector& b2 = params.beta2[i % params.beta2.size()];
      const Vector& b34 = params.beta34[i % params.beta34.size()];
      const double w1 = sample_bernoulli(rng, logistic(b1(0) + b1(1) * z1 + b1(2) * z2));
      const double w2 = sample_bernoulli(
          rng, logistic(b2(0) + b2(1) * z1 + b2(2) * z2 + b2(3) * w1));
      const double x[5] = {1.0, z1, z2, w1, w2};
      double eta3 = 0, eta4 = 0;
      for (int k = 0; k < 5; ++k) {
        eta3 += b34(k) * x[k];
        eta4 += b34(5 + k) * x[k];
      }
      const double mx = std::max({0.0, eta3, eta4});
      const double p1 = std::exp(-mx), p2 = std::exp(eta3 - mx), p3 = std::exp(eta4 - mx);
      const double u = rng.uniform() * (p1 + p2 + p3);
      const double w3 = u < p1 ? 0.0 : (u < p1 + p2 ? 1.0 : 2.0);
      cols[c_.z1][i] = z1;
      cols[c_.z2][i] = z2;
      cols[c_.w1][i] = w1;
      cols[c_.w2][i] = w2;
      cols[c_.w3][i] = w3;
    }
    return TabularDataset(schema_, std::move(cols));
  }

  struct RowData {
    std::vector<double> z1, z2, w1, w2;
    std::vector<int> w3;
  };

  RowData extract(const TabularDataset& data) const {
    RowData r;
    r.z1 = data.column(c_.z1);
    r.z2 = data.column(c_.z2);
    r.w1 = data.column(c_.w1);
    r.w2 = data.column(c_.w2);
    r.w3.resize(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) r.w3[i] = data.code(i, c_.w3);
    return r;
  }

  // log of the block's likelihood; with `clamp` each row's probability is
  // held inside (kProbLo, kProbHi).
  static double log_likelihood(const RowData& r, int block, std::span<const double> b,
                               bool clamp) {
    double total = 0.0;
    const std::size_t n = r.z1.size();
    auto add = [&](double log_p) {
      if (clamp) {
        log_p = std::clamp(log_p, std::log(kProbLo), std::log(kProbHi));
      }
      total += log_p;
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (block == 0) {
        const double eta = b[0] + b[1] * r.z1[i] + b[2] * r.z2[i];
        add(r.w1[i] > 0.5 ? -softplus(-eta) : -softplus(eta));
      } else if (block == 1) {
        const double eta = b[0] + b[1] * r.z1[i] + b[2] * r.z2[i] + b[3] * r.w1[i];
        add(r.w2[i] > 0.5 ? -softplus(-eta) : -softplus(eta));
      } else {
        const double x[5] = {1.0, r.z1[i], r.z2[i], r.w1[i], r.w2[i]};
        double e3 = 0, e4 = 0;
        for (int k = 0; k < 5; ++k) {
          e3 += b[k] * x[k];
          e4 += b[5 + k] * x[k];
        }
        const double mx = std::max({0.0, e3, e4});
        const double lse = mx + std::log(std::exp(-mx) + std::exp(e3 - mx) + std::exp(e4 - mx));
        const double eta = r.w3[i] == 0 ? 0.0 : (r.w3[i] == 1 ? e3 : e4);
        add(eta - lse);
      }
    }
    return total;
  }

 private:
  Schema schema_;
  Columns c_;
  MhOptions mh_;
};

static_assert(ModipsModel<SequentialLogisticModel>);

}  // namespace dips::models
