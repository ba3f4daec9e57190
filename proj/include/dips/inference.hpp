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

// Per-set estimators with their within-set variances, Firth-penalized
// logistic and baseline-category logit fits, and the rules that combine m
// per-set estimates into one point estimate, variance and interval.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dips/error.hpp"
#include "dips/randvar.hpp"

namespace dips {

struct PerSetEstimate {
  double estimate = 0.0;
  double within_variance = 0.0;  // a variance, not a standard error
};

struct CombinedEstimate {
  double point = 0.0;
  double between_B = 0.0;
  double within_W = 0.0;
  double total_T = 0.0;
  double df = std::numeric_limits<double>::infinity();
  double ci_low = 0.0;
  double ci_high = 0.0;
  double level = 0.95;
  int m = 0;
  bool single_set = false;    // m == 1: no between-set variance
  bool zero_between = false;  // B == 0: normal quantile used
};

// beta = mean, B = sample variance of the estimates, W = mean within-set
// variance, T = B/m + W, nu = (m-1)(1 + mW/B)^2, CI = beta +- t_nu sqrt(T).
inline CombinedEstimate combine(std::span<const PerSetEstimate> sets, double level = 0.95) {
  if (sets.empty()) throw InvalidArgument("combine: no estimates");
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("combine: level must be in (0,1)");
  CombinedEstimate c;
  c.level = level;
  c.m = static_cast<int>(sets.size());
  const double m = static_cast<double>(sets.size());
  for (const auto& s : sets) {
    if (!(s.within_variance >= 0.0)) {
      throw InvalidArgument("combine: within variance must be >= 0");
    }
  }
  if (sets.size() == 1) {
    c.point = sets[0].estimate;
    c.within_W = sets[0].within_variance;
    c.total_T = c.within_W;
    c.single_set = true;
  } else {
    double sum = 0.0;
    double wsum = 0.0;
    for (const auto& s : sets) {
      sum += s.estimate;
      wsum += s.within_variance;
    }
    c.point = sum / m;
    c.within_W = wsum / m;
    double ss = 0.0;
    for (const auto& s : sets) ss += (s.estimate - c.point) * (s.estimate - c.point);
    c.between_B = ss / (m - 1.0);
    c.total_T = c.between_B / m + c.within_W;
    if (c.between_B > 0.0) {
      const double r = 1.0 + m * c.within_W / c.between_B;
      c.df = (m - 1.0) * r * r;
    } else {
      c.zero_between = true;
    }
  }
  const double q = 1.0 - (1.0 - level) / 2.0;
  const double crit = std::isinf(c.df) ? normal_quantile(q) : t_quantile(q, c.df);
  const double half = crit * std::sqrt(c.total_T);
  c.ci_low = c.point - half;
  c.ci_high = c.point + half;
  return c;
}

inline CombinedEstimate combine(std::initializer_list<PerSetEstimate> sets,
                                double level = 0.95) {
  return combine(std::span<const PerSetEstimate>(sets.begin(), sets.size()), level);
}

// ---------------------------------------------------------------------------
// Per-set estimators.

// Proportion of entries equal to `level`; v = p(1-p)/n.
inline PerSetEstimate estimate_proportion(std::span<const double> x, double level = 1.0) {
  if (x.empty()) throw Degenerate("estimate_proportion: no rows");
  double k = 0.0;
  for (double v : x) k += (v == level);
  const double n = static_cast<double>(x.size());
  const double p = k / n;
  return {p, p * (1.0 - p) / n};
}

// Sample mean; v = s^2 / n.
inline PerSetEstimate estimate_mean(std::span<const double> x) {
  if (x.size() < 2) throw Degenerate("estimate_mean: need at least 2 rows");
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, ss / (n - 1.0) / n};
}

// Sample variance s^2; v = s^4 (2/(n-1) + kappa/n) with kappa the excess
// kurtosis m4/m2^2 - 3 from central moments with divisor n.
inline PerSetEstimate estimate_variance(std::span<const double> x) {
  if (x.size() < 4) throw Degenerate("estimate_variance: need at least 4 rows");
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d2 = (v - mean) * (v - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  // A constant column has s^2 = 0 and a delta-method variance of 0.
  if (!(m2 > 0.0)) return {0.0, 0.0};
  const double s2 = m2 / (n - 1.0);
  m2 /= n;
  m4 /= n;
  const double kappa = m4 / (m2 * m2) - 3.0;
  return {s2, s2 * s2 * (2.0 / (n - 1.0) + kappa / n)};
}

// Pearson correlation r; v = (1 - r^2) / (n - 2).
inline PerSetEstimate estimate_correlation(std::span<const double> x,
                                           std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("estimate_correlation: length mismatch");
  if (x.size() < 3) throw Degenerate("estimate_correlation: need at least 3 rows");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0 && syy > 0.0)) throw Degenerate("estimate_correlation: constant column");
  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return {r, (1.0 - r * r) / (n - 2.0)};
}

// ---------------------------------------------------------------------------
// Firth-penalized multinomial (baseline-category) logit.
//
// Response codes are 0..J-1 with 0 the reference. Parameters are J-1 blocks
// of q coefficients; block r holds the log-odds of level r+1 versus level 0.
// The penalized log-likelihood is l(b) + 1/2 log det I(b). J = 2 is ordinary
// Firth logistic regression.

struct FirthFit {
  Matrix coef;  // (J-1) x q
  Matrix cov;   // inverse penalized information, (J-1)q square, block-major
  int iterations = 0;
  double max_abs_score = 0.0;
  double penalized_loglik = 0.0;

  std::vector<PerSetEstimate> estimates() const {
    std::vector<PerSetEstimate> out;
    for (Eigen::Index r = 0; r < coef.rows(); ++r) {
      for (Eigen::Index j = 0; j < coef.cols(); ++j) {
        const Eigen::Index k = r * coef.cols() + j;
        out.push_back({coef(r, j), cov(k, k)});
      }
    }
    return out;
  }
};

namespace internal {

struct FirthState {
  Matrix probs;       // n x J
  Matrix info;        // (J-1)q square
  double loglik = 0.0;
  double logdet = 0.0;
  bool info_ok = false;
};

inline FirthState firth_evaluate(const Matrix& x, std::span<const int> y, int levels,
                                 const Vector& beta) {
  const Eigen::Index n = x.rows();
  const Eigen::Index q = x.cols();
  const int r_blocks = levels - 1;
  FirthState st;
  st.probs.resize(n, levels);
  st.info = Matrix::Zero(r_blocks * q, r_blocks * q);
  std::vector<double> eta(levels);
  for (Eigen::Index i = 0; i < n; ++i) {
    eta[0] = 0.0;
    double mx = 0.0;
    for (int r = 0; r < r_blocks; ++r) {
      eta[r + 1] = x.row(i).dot(beta.segment(r * q, q));
      mx = std::max(mx, eta[r + 1]);
    }
    double z = 0.0;
    for (int r = 0; r < levels; ++r) z += std::exp(eta[r] - mx);
    const double lse = mx + std::log(z);
    for (int r = 0; r < levels; ++r) st.probs(i, r) = std::exp(eta[r] - lse);
    st.loglik += eta[y[i]] - lse;
    const Matrix xx = x.row(i).transpose() * x.row(i);
    for (int r = 0; r < r_blocks; ++r) {
      const double pr = st.probs(i, r + 1);
      for (int t = 0; t < r_blocks; ++t) {
        const double pt = st.probs(i, t + 1);
        const double w = (r == t ? pr : 0.0) - pr * pt;
        st.info.block(r * q, t * q, q, q).noalias() += w * xx;
      }
    }
  }
  Eigen::LLT<Matrix> llt(st.info);
  if (llt.info() == Eigen::Success) {
    st.info_ok = true;
    const Matrix l = llt.matrixL();
    st.logdet = 2.0 * l.diagonal().array().log().sum();
  }
  return st;
}

// Modified score U + 1/2 d log det I / d beta.
inline Vector firth_score(const Matrix& x, std::span<const int> y, int levels,
                          const FirthState& st, const Matrix& info_inv) {
  const Eigen::Index n = x.rows();
  const Eigen::Index q = x.cols();
  const int rb = levels - 1;
  Vector u = Vector::Zero(rb * q);
  Matrix h(rb, rb);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector xi = x.row(i).transpose();
    for (int r = 0; r < rb; ++r) {
      for (int t = 0; t < rb; ++t) {
        h(r, t) = xi.dot(info_inv.block(r * q, t * q, q, q) * xi);
      }
    }
    for (int s = 0; s < rb; ++s) {
      const double ps = st.probs(i, s + 1);
      // dW[r][t] / d eta_s with W = diag(p) - p p'.
      double g = 0.0;
      for (int r = 0; r < rb; ++r) {
        const double pr = st.probs(i, r + 1);
        const double dpr = pr * ((r == s ? 1.0 : 0.0) - ps);
        for (int t = 0; t < rb; ++t) {
          const double pt = st.probs(i, t + 1);
          const double dpt = pt * ((t == s ? 1.0 : 0.0) - ps);
          const double dw = (r == t ? dpr : 0.0) - (dpr * pt + pr * dpt);
          g += h(r, t) * dw;
        }
      }
      const double resid = (y[i] == s + 1 ? 1.0 : 0.0) - ps;
      u.segment(s * q, q) += (resid + 0.5 * g) * xi;
    }
  }
  return u;
}

inline void check_design(const Matrix& x, std::span<const int> y, int levels) {
  if (x.rows() != static_cast<Eigen::Index>(y.size())) {
    throw InvalidArgument("firth: design and response lengths differ");
  }
  if (levels < 2) throw InvalidArgument("firth: need at least 2 response levels");
  if (x.rows() <= x.cols()) throw RankDeficient("firth: need n > q");
  for (int v : y) {
    if (v < 0 || v >= levels) throw InvalidArgument("firth: response code out of range");
  }
  // Rank on the column-standardized design (constant columns kept as is).
  Matrix z = x;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double mean = z.col(j).mean();
    const double sd = std::sqrt((z.col(j).array() - mean).square().mean());
    if (sd > 0.0) z.col(j) = (z.col(j).array() - mean) / sd;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(z);
  qr.setThreshold(1e-10);
  if (qr.rank() < z.cols()) throw RankDeficient("firth: design is rank deficient");
}

}  // namespace internal

// Penalized log-likelihood at beta (stacked block-major).
inline double firth_objective(const Matrix& x, std::span<const int> y, int levels,
                              const Vector& beta) {
  const auto st = internal::firth_evaluate(x, y, levels, beta);
  if (!st.info_ok) return -std::numeric_limits<double>::infinity();
  return st.loglik + 0.5 * st.logdet;
}

// Modified score at beta.
inline Vector firth_modified_score(const Matrix& x, std::span<const int> y, int levels,
                                   const Vector& beta) {
  const auto st = internal::firth_evaluate(x, y, levels, beta);
  if (!st.info_ok) throw RankDeficient("firth: singular information");
  const Matrix inv = st.info.llt().solve(Matrix::Identity(st.info.rows(), st.info.cols()));
  return internal::firth_score(x, y, levels, st, inv);
}

// Newton (Fisher scoring) on the modified score with step halving on the
// penalized log-likelihood. Converges when max |U*| < tol.
inline FirthFit fit_multinomial_logit(const Matrix& x, std::span<const int> y, int levels,
                                      double tol = 1e-6, int max_iter = 100) {
  internal::check_design(x, y, levels);
  const Eigen::Index q = x.cols();
  const int rb = levels - 1;
  Vector beta = Vector::Zero(rb * q);
  auto st = internal::firth_evaluate(x, y, levels, beta);
  if (!st.info_ok) throw RankDeficient("firth: singular information");
  const Eigen::Index dim = rb * q;
  for (int it = 0; it <= max_iter; ++it) {
    Eigen::LLT<Matrix> llt(st.info);
    const Matrix inv = llt.solve(Matrix::Identity(dim, dim));
    const Vector u = internal::firth_score(x, y, levels, st, inv);
    const double max_u = u.cwiseAbs().maxCoeff();
    if (max_u < tol) {
      FirthFit fit;
      fit.coef.resize(rb, q);
      for (int r = 0; r < rb; ++r) fit.coef.row(r) = beta.segment(r * q, q).transpose();
      fit.cov = inv;
      fit.iterations = it;
      fit.max_abs_score = max_u;
      fit.penalized_loglik = st.loglik + 0.5 * st.logdet;
      return fit;
    }
    if (it == max_iter) break;
    Vector step = inv * u;
    // Cap very long steps; quasi-separated data can propose huge jumps.
    const double len = step.cwiseAbs().maxCoeff();
    if (len > 5.0) step *= 5.0 / len;
    const double cur = st.loglik + 0.5 * st.logdet;
    bool moved = false;
    for (int half = 0; half < 40; ++half) {
      const Vector cand = beta + step;
      auto cst = internal::firth_evaluate(x, y, levels, cand);
      if (cst.info_ok && cst.loglik + 0.5 * cst.logdet >= cur - 1e-12 * std::fabs(cur)) {
        beta = cand;
        st = std::move(cst);
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      // No ascent direction left at machine precision; accept the point if
      // the score is already small, otherwise give up.
      if (max_u < 1e3 * tol) {
        FirthFit fit;
        fit.coef.resize(rb, q);
        for (int r = 0; r < rb; ++r) fit.coef.row(r) = beta.segment(r * q, q).transpose();
        fit.cov = inv;
        fit.iterations = it;
        fit.max_abs_score = max_u;
        fit.penalized_loglik = cur;
        return fit;
      }
      throw NonConvergence("firth: step halving failed");
    }
  }
  throw NonConvergence("firth: no convergence in " + std::to_string(max_iter) + " iterations");
}

// Binary Firth logistic regression; y in {0, 1}.
inline FirthFit firth_logistic(const Matrix& x, std::span<const int> y, double tol = 1e-6,
                               int max_iter = 100) {
  return fit_multinomial_logit(x, y, 2, tol, max_iter);
}

// ---------------------------------------------------------------------------
// CSV output: parameter, point, T, df, ci_low, ci_high.

struct NamedEstimate {
  std::string parameter;
  CombinedEstimate estimate;
};

inline void write_estimates_csv(std::ostream& out, std::span<const NamedEstimate> rows) {
  out << "parameter,point,T,df,ci_low,ci_high\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.parameter << ',' << r.estimate.point << ',' << r.estimate.total_T << ',';
    if (std::isinf(r.estimate.df)) {
      out << "inf";
    } else {
      out << r.estimate.df;
    }
    out << ',' << r.estimate.ci_low << ',' << r.estimate.ci_high << '\n';
  }
}

}  // namespace dips
