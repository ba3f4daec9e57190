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

// Seedable random variate generation and the quantile functions used by
// the synthesizers and the combining rules.
//
// Every generator below is written against RngStream's raw 64-bit output,
// so a (seed, stream) pair reproduces the same variates bit for bit on any
// standard library. Nothing here touches <random> distributions.

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dips/error.hpp"

namespace dips {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace internal {

// SplitMix64 finalizer; used only to decorrelate stream ids.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace internal

// A reproducible random stream identified by (seed, stream id). Streams are
// cheap values; derive independent children with split() instead of sharing
// one stream between workers.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Child stream keyed by `child`; independent of this stream's position.
  RngStream split(std::uint64_t child) const {
    return RngStream(seed_, internal::mix64(stream_ ^ internal::mix64(child + 1)));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  // Uniform integer on [0, bound) by rejection (no modulo bias).
  std::uint64_t uniform_int(std::uint64_t bound) {
    if (bound == 0) throw InvalidArgument("uniform_int: bound must be > 0");
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

// Dense symmetric matrix. Construction checks symmetry; PSD is checked where
// a covariance or scale matrix is required.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(Matrix m, double tol = 1e-12) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) {
      throw InvalidArgument("SymmetricMatrix: not square");
    }
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
      throw InvalidArgument("SymmetricMatrix: not symmetric");
    }
    m_ = 0.5 * (m_ + m_.transpose());
  }
  static SymmetricMatrix identity(Eigen::Index p) {
    return SymmetricMatrix(Matrix::Identity(p, p));
  }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
  bool is_psd(double tol = 1e-12) const {
    return min_eigenvalue() >= -tol * std::max(1.0, m_.cwiseAbs().maxCoeff());
  }
  bool is_pd() const {
    Eigen::LLT<Matrix> llt(m_);
    return llt.info() == Eigen::Success;
  }

  // Nearest matrix (in Frobenius norm) with eigenvalues >= floor.
  SymmetricMatrix clamp_eigenvalues(double floor) const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_);
    Vector ev = es.eigenvalues().cwiseMax(floor);
    return SymmetricMatrix(es.eigenvectors() * ev.asDiagonal() *
                           es.eigenvectors().transpose());
  }

 private:
  Matrix m_;
};

namespace internal {

inline void require(bool ok, const char* what) {
  if (!ok) throw ParameterDomain(what);
}

// Lower Cholesky factor of a PSD matrix. Falls back to a symmetric square
// root when the matrix is only semi-definite.
inline Matrix psd_factor(const SymmetricMatrix& s) {
  Eigen::LLT<Matrix> llt(s.matrix());
  if (llt.info() == Eigen::Success) return llt.matrixL();
  require(s.is_psd(1e-10), "covariance matrix is not positive semi-definite");
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix());
  Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

}  // namespace internal

inline double sample_uniform(RngStream& rng, double lo, double hi) {
  internal::require(lo < hi, "sample_uniform: lo must be < hi");
  const double x = lo + (hi - lo) * rng.uniform();
  return x < hi ? x : std::nextafter(hi, lo);
}

// Inverse-CDF draw: x = location - scale * sgn(u) * log(1 - 2|u|), u ~ U(-1/2, 1/2).
inline double sample_laplace(RngStream& rng, double location, double scale) {
  internal::require(scale > 0.0 && std::isfinite(scale),
                    "sample_laplace: scale must be finite and > 0");
  const double u = rng.uniform_open() - 0.5;
  if (u == 0.0) return location;
  const double mag = -scale * std::log1p(-2.0 * std::fabs(u));
  return u < 0.0 ? location - mag : location + mag;
}

inline double laplace_cdf(double x, double location, double scale) {
  const double z = (x - location) / scale;
  return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
}

inline double laplace_log_density(double x, double location, double scale) {
  return -std::log(2.0 * scale) - std::fabs(x - location) / scale;
}

// Marsaglia polar method; the second variate is discarded so a stream's
// position does not depend on hidden state.
inline double sample_standard_normal(RngStream& rng) {
  double u, v, s;
  do {
    u = 2.0 * rng.uniform() - 1.0;
    v = 2.0 * rng.uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

inline double sample_normal(RngStream& rng, double mean, double sd) {
  internal::require(sd >= 0.0 && std::isfinite(sd),
                    "sample_normal: sd must be finite and >= 0");
  return mean + sd * sample_standard_normal(rng);
}

// log of a Gamma(shape, 1) draw. Working in logs keeps very small shapes
// (Dirichlet(1/2) cells, Beta(1/3, .)) from underflowing to exact zero.
inline double sample_log_gamma(RngStream& rng, double shape) {
  internal::require(shape > 0.0 && std::isfinite(shape),
                    "sample_gamma: shape must be finite and > 0");
  double boost_log = 0.0;
  if (shape < 1.0) {
    // G(a) = G(a + 1) * U^(1/a)
    boost_log = std::log(rng.uniform_open()) / shape;
    shape += 1.0;
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = sample_standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 ||
        std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return std::log(d * v) + boost_log;
    }
  }
}

inline double sample_gamma(RngStream& rng, double shape, double scale = 1.0) {
  internal::require(scale > 0.0 && std::isfinite(scale),
                    "sample_gamma: scale must be finite and > 0");
  return scale * std::exp(sample_log_gamma(rng, shape));
}

// Inverse-Gamma(shape, scale): density proportional to x^(-shape-1) e^(-scale/x).
inline double sample_inv_gamma(RngStream& rng, double shape, double scale) {
  internal::require(scale > 0.0 && std::isfinite(scale),
                    "sample_inv_gamma: scale must be finite and > 0");
  return scale * std::exp(-sample_log_gamma(rng, shape));
}

inline double sample_beta(RngStream& rng, double a, double b) {
  internal::require(a > 0.0 && b > 0.0, "sample_beta: shapes must be > 0");
  const double la = sample_log_gamma(rng, a);
  const double lb = sample_log_gamma(rng, b);
  // x / (x + y) = 1 / (1 + exp(lb - la))
  return 1.0 / (1.0 + std::exp(lb - la));
}

inline std::vector<double> sample_dirichlet(RngStream& rng,
                                            std::span<const double> alpha) {
  internal::require(!alpha.empty(), "sample_dirichlet: empty alpha");
  std::vector<double> logs(alpha.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    internal::require(alpha[k] > 0.0 && std::isfinite(alpha[k]),
                      "sample_dirichlet: alpha must be finite and > 0");
    logs[k] = sample_log_gamma(rng, alpha[k]);
    mx = std::max(mx, logs[k]);
  }
  double total = 0.0;
  for (auto& l : logs) {
    l = std::exp(l - mx);
    total += l;
  }
  for (auto& l : logs) l /= total;
  return logs;
}

inline bool sample_bernoulli(RngStream& rng, double p) {
  internal::require(p >= 0.0 && p <= 1.0, "sample_bernoulli: p outside [0,1]");
  return rng.uniform() < p;
}

// Binomial(n, p). Small means use sequential inversion; large means reduce
// n through the order-statistic recursion on Beta draws until the mean is
// small. Both branches are exact.
inline std::int64_t sample_binomial(RngStream& rng, std::int64_t n, double p) {
  internal::require(n >= 0, "sample_binomial: n must be >= 0");
  internal::require(p >= 0.0 && p <= 1.0, "sample_binomial: p outside [0,1]");
  // The result is offset + sign * X with X ~ Binomial(n, p) for the current
  // (n, p); each reduction step below rewrites X in terms of a smaller draw.
  std::int64_t offset = 0;
  std::int64_t sign = 1;
  for (;;) {
    if (n == 0 || p == 0.0) return offset;
    if (p == 1.0) return offset + sign * n;
    if (p > 0.5) {
      // X = n - Binomial(n, 1 - p)
      offset += sign * n;
      sign = -sign;
      p = 1.0 - p;
      continue;
    }
    if (static_cast<double>(n) * p < 30.0) break;
    // x is the j-th order statistic of n uniforms.
    const std::int64_t j = (n + 1) / 2;
    const double x = sample_beta(rng, static_cast<double>(j),
                                 static_cast<double>(n - j + 1));
    if (x <= p) {
      offset += sign * j;
      n -= j;
      p = (p - x) / (1.0 - x);
    } else {
      n = j - 1;
      p = p / x;
    }
  }
  // Inversion by sequential search over the pmf.
  const double ratio = p / (1.0 - p);
  double pmf = std::exp(static_cast<double>(n) * std::log1p(-p));
  double u = rng.uniform();
  std::int64_t k = 0;
  while (u > pmf && k < n) {
    u -= pmf;
    pmf *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
    ++k;
  }
  return offset + sign * k;
}

// Multinomial(n, probs) by conditional binomials. probs must be
// non-negative; they are normalized internally.
inline std::vector<std::int64_t> sample_multinomial(
    RngStream& rng, std::int64_t n, std::span<const double> probs) {
  internal::require(n >= 0, "sample_multinomial: n must be >= 0");
  internal::require(!probs.empty(), "sample_multinomial: empty probs");
  double total = 0.0;
  for (double p : probs) {
    internal::require(p >= 0.0 && std::isfinite(p),
                      "sample_multinomial: probs must be finite and >= 0");
    total += p;
  }
  internal::require(total > 0.0, "sample_multinomial: probs sum to zero");
  std::vector<std::int64_t> out(probs.size(), 0);
  std::int64_t left = n;
  double mass_left = total;
  for (std::size_t k = 0; k + 1 < probs.size() && left > 0; ++k) {
    const double p = mass_left > 0.0 ? std::clamp(probs[k] / mass_left, 0.0, 1.0) : 0.0;
    out[k] = sample_binomial(rng, left, p);
    left -= out[k];
    mass_left -= probs[k];
  }
  out.back() += left;
  return out;
}

inline Vector sample_mvnormal(RngStream& rng, const Vector& mean,
                              const SymmetricMatrix& cov) {
  internal::require(mean.size() == cov.dim(),
                    "sample_mvnormal: dimension mismatch");
  const Matrix l = internal::psd_factor(cov);
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = sample_standard_normal(rng);
  return mean + l * z;
}

namespace internal {

// Bartlett factor A (lower triangular) such that A A' ~ Wishart(dof, I).
inline Matrix bartlett_factor(RngStream& rng, double dof, Eigen::Index p) {
  Matrix a = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    // chi^2 with dof - i degrees of freedom = 2 * Gamma((dof - i)/2)
    a(i, i) = std::sqrt(2.0 * sample_gamma(rng, 0.5 * (dof - static_cast<double>(i))));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = sample_standard_normal(rng);
  }
  return a;
}

}  // namespace internal

inline SymmetricMatrix sample_wishart(RngStream& rng, double dof,
                                      const SymmetricMatrix& scale) {
  const Eigen::Index p = scale.dim();
  internal::require(dof > static_cast<double>(p - 1),
                    "sample_wishart: dof must exceed p - 1");
  Eigen::LLT<Matrix> llt(scale.matrix());
  internal::require(llt.info() == Eigen::Success,
                    "sample_wishart: scale must be positive definite");
  const Matrix l = llt.matrixL();
  const Matrix la = l * internal::bartlett_factor(rng, dof, p);
  return SymmetricMatrix(la * la.transpose(), 1e-9);
}

// Inverse-Wishart(dof, scale) with E[X] = scale / (dof - p - 1).
//
// With scale = C C' and Bartlett factor A, X = (C A^-T)(C A^-T)'. Only
// triangular solves are needed; no general matrix is inverted.
inline SymmetricMatrix sample_inv_wishart(RngStream& rng, double dof,
                                          const SymmetricMatrix& scale) {
  const Eigen::Index p = scale.dim();
  internal::require(dof > static_cast<double>(p - 1),
                    "sample_inv_wishart: dof must exceed p - 1");
  Eigen::LLT<Matrix> llt(scale.matrix());
  internal::require(llt.info() == Eigen::Success,
                    "sample_inv_wishart: scale must be positive definite");
  const Matrix c = llt.matrixL();
  const Matrix a = internal::bartlett_factor(rng, dof, p);
  // B = C A^-T  <=>  B A^T = C  <=>  A B^T = C^T
  const Matrix bt = a.triangularView<Eigen::Lower>().solve(c.transpose());
  const Matrix b = bt.transpose();
  return SymmetricMatrix(b * b.transpose(), 1e-9);
}

// ---------------------------------------------------------------------------
// Quantiles.

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidArgument("normal_quantile: p must lie in (0, 1)");
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

// Student-t CDF through the regularized incomplete beta function.
inline double t_cdf(double t, double df) {
  if (!(df > 0.0)) throw InvalidArgument("t_cdf: df must be > 0");
  // Past 1e12 the difference from the normal is below double resolution.
  if (std::isinf(df) || df > 1e12) return normal_cdf(t);
  if (t == 0.0) return 0.5;
  // Complement form: df / (df + t^2) rounds to 1 for large df.
  const double y = t * t / (df + t * t);
  const double tail = 0.5 * boost::math::ibetac(0.5, 0.5 * df, y);
  return t > 0.0 ? 1.0 - tail : tail;
}

// Inverse of t_cdf by bracketed bisection to an absolute tolerance of 1e-10.
// df = +infinity gives the normal quantile.
inline double t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidArgument("t_quantile: p must lie in (0, 1)");
  }
  if (!(df > 0.0)) throw InvalidArgument("t_quantile: df must be > 0");
  if (std::isinf(df) || df > 1e12) return normal_quantile(p);
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -t_quantile(1.0 - p, df);
  double lo = 0.0;
  double hi = 1.0;
  while (t_cdf(hi, df) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return std::numeric_limits<double>::infinity();
  }
  while (hi - lo > 1e-10 * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    if (t_cdf(mid, df) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace dips
