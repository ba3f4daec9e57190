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

// Goodness-of-fit helpers and numerical oracles shared by the tests. These
// deliberately avoid the library's own quantile code.

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace dips::testing {

// Asymptotic Kolmogorov tail Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2)
// with the Stephens small-sample correction.
inline double ks_pvalue(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

// Pearson chi-square p-value for observed counts against expected counts;
// cells with expectation below 5 are pooled into their neighbour.
inline double chi2_pvalue(std::span<const double> observed, std::span<const double> expected) {
  std::vector<double> o, e;
  double ao = 0.0, ae = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    ao += observed[i];
    ae += expected[i];
    if (ae >= 5.0) {
      o.push_back(ao);
      e.push_back(ae);
      ao = ae = 0.0;
    }
  }
  if (ae > 0.0) {
    if (e.empty()) {
      o.push_back(ao);
      e.push_back(ae);
    } else {
      o.back() += ao;
      e.back() += ae;
    }
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < o.size(); ++i) stat += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
  if (o.size() < 2) return 1.0;
  boost::math::chi_squared dist(static_cast<double>(o.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

// Composite Simpson rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Student-t CDF for t > 0 by Simpson integration of the density on [0, t].
inline double t_cdf_by_quadrature(double t, double df) {
  const double c = std::exp(std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df)) /
                   std::sqrt(df * std::numbers::pi);
  auto dens = [&](double x) { return c * std::pow(1.0 + x * x / df, -0.5 * (df + 1.0)); };
  return 0.5 + simpson(dens, 0.0, t, 20000);
}

// Quantile of the quadrature CDF by bisection.
inline double t_quantile_by_quadrature(double p, double df) {
  double lo = 0.0, hi = 100.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (t_cdf_by_quadrature(mid, df) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace dips::testing
