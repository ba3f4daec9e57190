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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Metric tables from the study runs land in
// ./acceptance_out for inspection.

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/distributions/laplace.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dips/dips.hpp"
#include "test_util.hpp"

namespace {

using dips::harness::Study;
using dips::harness::StudyConfig;
using dips::harness::StudyResult;

const std::filesystem::path kOut = "acceptance_out";

// Collects failed checks for one criterion; the first few are printed.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (!ok) failures_.push_back(what);
  }
  bool ok() const { return failures_.empty(); }
  void note(const std::string& s) { notes_.push_back(s); }
  void print(int id, const char* title, double seconds) const {
    std::printf("criterion %2d: %s  %s  [%.1f s, %d checks]\n", id, ok() ? "PASS" : "FAIL",
                title, seconds, total_);
    for (const auto& n : notes_) std::printf("      %s\n", n.c_str());
    for (std::size_t i = 0; i < failures_.size() && i < 12; ++i) {
      std::printf("      failed: %s\n", failures_[i].c_str());
    }
    if (failures_.size() > 12) std::printf("      ... %zu more\n", failures_.size() - 12);
    std::fflush(stdout);
  }

 private:
  int total_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string fmt(const char* f, double a) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------

// The ratio is evaluated exactly for the scale the mechanism samples with;
// subtracting two rounded log densities would add an ulp of noise of its own.
Check criterion_dp_ratio() {
  using Big = boost::multiprecision::cpp_bin_float_50;
  Check c;
  for (double eps : {0.1, 1.0, 10.0}) {
    const double b = dips::laplace_scale(1.0, eps);
    const int points = 10000;
    const double lo = -20.0 * b, hi = 1.0 + 20.0 * b;
    Big worst = -1;
    double worst_fp = -HUGE_VAL;
    for (int i = 0; i < points; ++i) {
      const double y = lo + (hi - lo) * i / (points - 1);
      const Big r = abs(Big(y) - 1) - abs(Big(y));
      const Big ratio = abs(r) / Big(b);
      if (ratio > worst) worst = ratio;
      const double l0 = dips::laplace_log_density(y, 0.0, b);
      const double l1 = dips::laplace_log_density(y, 1.0, b);
      worst_fp = std::max({worst_fp, l0 - l1, l1 - l0});
    }
    c.expect(worst <= Big(eps), fmt("eps=%g max log ratio %.17g", eps, static_cast<double>(worst)));
    c.note(fmt("eps=%-4g max |log ratio| exact %.17g, double evaluation %.17g", eps,
               static_cast<double>(worst), worst_fp));
  }
  return c;
}

Check criterion_lambda() {
  using Big = boost::multiprecision::cpp_bin_float_50;
  Check c;
  auto oracle = [](double k, double n, double eps) {
    const Big e = exp(Big(eps) / Big(n)) - 1;
    return static_cast<double>(Big(k) / (Big(k) + Big(n) * e));
  };
  const double got = dips::smoothing_lambda(10.0, 100.0, 1.0);
  const double want = oracle(10.0, 100.0, 1.0);
  c.expect(std::abs(got - 0.90868) <= 1e-5, fmt("lambda(10,100,1) = %.10f", got));
  c.expect(std::abs(got - want) <= 1e-12, fmt("library %.17g vs oracle %.17g", got, want));
  c.note(fmt("lambda(10,100,1) = %.8f, oracle %.8f", got, want));
  std::vector<double> ks, es;
  for (int i = 0; i < 20; ++i) {
    ks.push_back(2.0 + 5.0 * i);
    es.push_back(std::exp(-4.0 + 8.0 * i / 19.0));
  }
  int bad = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t j = 0; j < 20; ++j) {
      const double v = dips::smoothing_lambda(ks[i], 100.0, es[j]);
      if (!(std::abs(v - oracle(ks[i], 100.0, es[j])) <= 1e-12)) ++bad;
      if (j + 1 < 20 && !(dips::smoothing_lambda(ks[i], 100.0, es[j + 1]) < v)) ++bad;
      if (i + 1 < 20 && !(dips::smoothing_lambda(ks[i + 1], 100.0, es[j]) > v)) ++bad;
    }
  }
  c.expect(bad == 0, fmt("%g grid violations", bad));
  return c;
}

Check criterion_combine() {
  Check c;
  const auto r = dips::combine({{1.0, 0.1}, {2.0, 0.1}, {3.0, 0.1}});
  c.expect(std::abs(r.point - 2.0) <= 1e-10, fmt("point %.12g", r.point));
  c.expect(std::abs(r.total_T - (1.0 / 3.0 + 0.1)) <= 1e-10, fmt("T %.12g", r.total_T));
  c.expect(std::abs(r.df - 3.38) <= 1e-10, fmt("df %.12g", r.df));
  c.note(fmt("hand case: point %.10g T %.10g df %.10g", r.point, r.total_T, r.df));
  const auto z = dips::combine({{0.5, 0.04}, {0.5, 0.04}, {0.5, 0.04}, {0.5, 0.04}});
  const double q = boost::math::quantile(boost::math::normal(), 0.975);
  c.expect(std::isinf(z.df) && z.zero_between, "B=0 df is not infinite");
  c.expect(std::abs(z.ci_low - (0.5 - q * 0.2)) <= 1e-12 &&
               std::abs(z.ci_high - (0.5 + q * 0.2)) <= 1e-12,
           fmt("B=0 ci [%.15g, %.15g]", z.ci_low, z.ci_high));
  return c;
}

// ---------------------------------------------------------------------------
// Study runs shared across criteria.

StudyResult run(StudyConfig cfg, const char* tag) {
  std::fprintf(stderr, "running %s: %d reps x %zu eps\n", tag, cfg.reps, cfg.eps_grid.size());
  auto res = dips::harness::run_study(cfg);
  dips::harness::write_report(res, kOut / tag);
  return res;
}

std::size_t eps_index(const StudyResult& r, double ln_eps) {
  for (std::size_t i = 0; i < r.config.eps_grid.size(); ++i) {
    if (std::abs(std::log(r.config.eps_grid[i]) - ln_eps) < 1e-9) return i;
  }
  throw std::runtime_error("eps not in grid");
}

double metric(const StudyResult& r, const std::string& method, const std::string& param,
              std::size_t e, double dips::harness::MetricRow::*field) {
  const auto* row = r.find(method, param, e);
  return row ? row->*field : std::nan("");
}

Check criterion_usable(const StudyResult& r) {
  using dips::harness::MetricRow;
  Check c;
  const double lap = metric(r, "laplace", "pi", eps_index(r, -10.0), &MetricRow::usable_fraction);
  c.expect(std::abs(lap - 0.937) <= 0.03, fmt("laplace ln eps=-10 usable %.3f", lap));
  c.note(fmt("laplace ln eps=-10: usable %.3f (target 0.937 +- 0.03)", lap));
  for (const char* m : {"modips", "md", "bbmr"}) {
    const double u = metric(r, m, "pi", eps_index(r, -9.0), &MetricRow::usable_fraction);
    c.expect(u >= 0.995, std::string(m) + fmt(" ln eps=-9 usable %.3f", u));
    c.note(std::string(m) + fmt(" ln eps=-9: usable %.3f (target >= 0.995)", u));
  }
  return c;
}

Check criterion_empty_cells(const StudyResult& r) {
  Check c;
  struct Target {
    const char* method;
    double ln_eps, value, tol;
  };
  for (const Target t : {Target{"np-dips", -6.0, 23.66, 0.5}, Target{"modips", -6.0, 4.58, 0.7},
                         Target{"np-dips", 4.0, 0.41, 0.3}, Target{"modips", 4.0, 1.00, 0.4}}) {
    const auto* d = r.find_diagnostic(t.method, eps_index(r, t.ln_eps));
    const double v = d ? d->mean_empty_cells : std::nan("");
    c.expect(std::abs(v - t.value) <= t.tol,
             std::string(t.method) + fmt(" ln eps=%g empty cells %.3f", t.ln_eps, v));
    c.note(std::string(t.method) +
           fmt(" ln eps=%g: mean empty cells %.3f (target %.2f)", t.ln_eps, v, t.value));
  }
  return c;
}

Check criterion_curves(const StudyResult& s1, const StudyResult& s2, const StudyResult& s3) {
  using dips::harness::MetricRow;
  Check c;
  const double band = 0.03;
  for (std::size_t e = 0; e < s1.config.eps_grid.size(); ++e) {
    const double le = std::log(s1.config.eps_grid[e]);
    const double cov_mod = metric(s1, "modips", "pi", e, &MetricRow::coverage);
    c.expect(cov_mod >= 0.90 - band, fmt("sim1 modips coverage %.3f at ln eps=%g", cov_mod, le));
    if (le <= -2.0) {
      for (const char* m : {"md", "bbmr"}) {
        const double b = metric(s1, m, "pi", e, &MetricRow::bias);
        c.expect(b > 0.0, std::string("sim1 ") + m + fmt(" bias %.4f at ln eps=%g", b, le));
      }
      const double cov_md = metric(s1, "md", "pi", e, &MetricRow::coverage);
      c.expect(cov_md < 0.90 + band, fmt("sim1 md coverage %.3f at ln eps=%g", cov_md, le));
    }
  }
  for (std::size_t e = 0; e < s2.config.eps_grid.size(); ++e) {
    const double le = std::log(s2.config.eps_grid[e]);
    if (le >= 0.0) {
      const double v = metric(s2, "modips", "sigma2", e, &MetricRow::coverage);
      c.expect(v >= 0.90, fmt("sim2 modips sigma2 coverage %.3f at ln eps=%g", v, le));
    }
    if (le <= 0.0) {
      const double v = metric(s2, "smooth-hist", "sigma2", e, &MetricRow::coverage);
      c.expect(v < 0.5, fmt("sim2 smooth-hist sigma2 coverage %.3f at ln eps=%g", v, le));
    }
  }
  for (std::size_t e = 0; e < s3.config.eps_grid.size(); ++e) {
    const double le = std::log(s3.config.eps_grid[e]);
    const double np = metric(s3, "np-dips", "rho", e, &MetricRow::coverage);
    c.expect(np < 0.95, fmt("sim3 np-dips rho coverage %.3f at ln eps=%g", np, le));
    if (le > 1.0) {
      const double v = metric(s3, "modips", "rho", e, &MetricRow::coverage);
      c.expect(v >= 0.92, fmt("sim3 modips rho coverage %.3f at ln eps=%g", v, le));
    }
  }
  return c;
}

// Monte-Carlo standard error of a bias, recovered from the bias and rmse.
double bias_se(const dips::harness::MetricRow& r) {
  const double var = std::max(0.0, r.rmse * r.rmse - r.bias * r.bias);
  return std::sqrt(var / std::max(1, r.reps_used));
}

void compare_to_baseline(Check& c, const StudyResult& r, const std::string& method,
                         const std::string& baseline, const std::vector<std::string>& params) {
  const std::size_t e = eps_index(r, 8.0);
  for (const auto& p : params) {
    const auto* a = r.find(method, p, e);
    const auto* b = r.find(baseline, p, e);
    if (!a || !b || a->reps_used == 0 || b->reps_used == 0) {
      c.expect(false, std::string(dips::harness::to_string(r.config.study)) + " " + method +
                          " " + p + ": no usable reps");
      continue;
    }
    const double se = std::hypot(bias_se(*a), bias_se(*b));
    const double z = (a->bias - b->bias) / se;
    const std::string label = std::string(dips::harness::to_string(r.config.study)) + " " +
                              method + " vs " + baseline + " " + p;
    c.expect(std::abs(z) <= 2.0, label + fmt(": bias %.4f vs %.4f (%.2f se)", a->bias, b->bias, z));
  }
}

Check criterion_consistency(const StudyResult& s1, const StudyResult& s2,
                            const StudyResult& s3) {
  Check c;
  for (const char* m : {"laplace", "md", "bbmr"}) compare_to_baseline(c, s1, m, "original", {"pi"});
  compare_to_baseline(c, s1, "modips", "ms", {"pi"});
  for (const char* m : {"modips", "pert-hist", "smooth-hist"}) {
    compare_to_baseline(c, s2, m, "ms", {"mu", "sigma2"});
  }
  for (const char* m : {"modips", "np-dips"}) {
    compare_to_baseline(c, s3, m, "ms", {"rho", "sigma2_1", "sigma2_2"});
  }
  return c;
}

void audit(Check& c, const StudyResult& r, const char* tag) {
  const long expected = static_cast<long>(r.config.reps) *
                        static_cast<long>(r.config.eps_grid.size()) * 2;  // modips, np-dips
  c.expect(r.ledger_checks == expected,
           std::string(tag) + fmt(": ledger checks %g, expected %g", static_cast<double>(r.ledger_checks),
               static_cast<double>(expected)));
  c.expect(r.ledger_violations == 0,
           std::string(tag) + fmt(": %g ledgers did not spend exactly eps", static_cast<double>(r.ledger_violations)));
  c.note(std::string(tag) + fmt(": %g ledgers audited, %g violations",
                                static_cast<double>(r.ledger_checks),
                                static_cast<double>(r.ledger_violations)));
}

// ---------------------------------------------------------------------------

Check criterion_samplers() {
  namespace bm = boost::math;
  using dips::RngStream;
  Check c;
  const int n = 100000;
  const double alpha = 0.01;
  auto ks = [&](const std::string& name, std::uint64_t seed, const std::function<double(RngStream&)>& draw,
                const std::function<double(double)>& cdf) {
    RngStream r(seed, 0);
    std::vector<double> x(n);
    for (auto& v : x) v = draw(r);
    const double p = dips::testing::ks_pvalue(x, cdf);
    c.expect(p > alpha, name + fmt(": KS p = %.4g", p));
    c.note(name + fmt(": KS p = %.3f", p));
  };
  auto chi2 = [&](const std::string& name, std::uint64_t seed, int support,
                  const std::function<int(RngStream&)>& draw,
                  const std::function<double(int)>& pmf) {
    RngStream r(seed, 0);
    std::vector<double> obs(support, 0.0), exp(support, 0.0);
    for (int i = 0; i < n; ++i) obs[draw(r)] += 1.0;
    for (int k = 0; k < support; ++k) exp[k] = n * pmf(k);
    const double p = dips::testing::chi2_pvalue(obs, exp);
    c.expect(p > alpha, name + fmt(": chi2 p = %.4g", p));
    c.note(name + fmt(": chi2 p = %.3f", p));
  };

  ks("uniform(-2,3)", 101, [](RngStream& r) { return dips::sample_uniform(r, -2.0, 3.0); },
     [](double t) { return std::clamp((t + 2.0) / 5.0, 0.0, 1.0); });
  const bm::laplace_distribution<> lap(1.0, 2.0);
  ks("laplace(1,2)", 102, [](RngStream& r) { return dips::sample_laplace(r, 1.0, 2.0); },
     [&](double t) { return bm::cdf(lap, t); });
  const bm::normal_distribution<> nor(-1.0, 0.5);
  ks("normal(-1,0.5)", 103, [](RngStream& r) { return dips::sample_normal(r, -1.0, 0.5); },
     [&](double t) { return bm::cdf(nor, t); });
  for (double shape : {0.05, 0.3, 1.0, 4.5}) {
    const bm::gamma_distribution<> g(shape, 2.0);
    ks(fmt("gamma(%g,2)", shape), 104, [shape](RngStream& r) { return dips::sample_gamma(r, shape, 2.0); },
       [&](double t) { return bm::cdf(g, t); });
  }
  const bm::inverse_gamma_distribution<> ig(3.0, 2.0);
  ks("inv-gamma(3,2)", 105, [](RngStream& r) { return dips::sample_inv_gamma(r, 3.0, 2.0); },
     [&](double t) { return t <= 0.0 ? 0.0 : bm::cdf(ig, t); });
  for (auto [a, b] : {std::pair{0.5, 2.0}, std::pair{2.0, 5.0}}) {
    const bm::beta_distribution<> be(a, b);
    ks(fmt("beta(%g,%g)", a, b), 106, [a, b](RngStream& r) { return dips::sample_beta(r, a, b); },
       [&](double t) { return bm::cdf(be, std::clamp(t, 0.0, 1.0)); });
  }
  {
    // About 1.3% of Beta(0.1, 0.1) lies within an ulp of 1 and rounds to
    // exactly 1.0, which KS reads as a jump. Equiprobable bins do not care.
    const bm::beta_distribution<> be(0.1, 0.1);
    const int bins = 50;
    std::vector<double> edges;
    for (int k = 1; k < bins; ++k) edges.push_back(bm::quantile(be, static_cast<double>(k) / bins));
    chi2("beta(0.1,0.1)", 106, bins,
         [&](RngStream& r) {
           const double v = dips::sample_beta(r, 0.1, 0.1);
           return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
         },
         [&](int) { return 1.0 / bins; });
  }
  const std::vector<double> alpha_d = {0.5, 1.5, 3.0, 0.2};
  const bm::beta_distribution<> marg(0.5, 4.7);
  ks("dirichlet margin", 107, [&](RngStream& r) { return dips::sample_dirichlet(r, alpha_d)[0]; },
     [&](double t) { return bm::cdf(marg, std::clamp(t, 0.0, 1.0)); });

  chi2("bernoulli(0.3)", 108, 2, [](RngStream& r) { return dips::sample_bernoulli(r, 0.3) ? 1 : 0; },
       [](int k) { return k ? 0.3 : 0.7; });
  for (auto [bn, bp] : {std::pair{20, 0.3}, std::pair{1000, 0.4}, std::pair{200, 0.01}}) {
    const bm::binomial_distribution<> bd(bn, bp);
    chi2(fmt("binomial(%g,%g)", bn, bp), 109, bn + 1,
         [bn, bp](RngStream& r) { return static_cast<int>(dips::sample_binomial(r, bn, bp)); },
         [&](int k) { return bm::pdf(bd, k); });
  }
  const std::vector<double> mp = {0.1, 0.2, 0.3, 0.4};
  const bm::binomial_distribution<> mmarg(50, 0.3);
  chi2("multinomial margin", 110, 51,
       [&](RngStream& r) { return static_cast<int>(dips::sample_multinomial(r, 50, mp)[2]); },
       [&](int k) { return bm::pdf(mmarg, k); });

  dips::Matrix s(3, 3);
  s << 4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0;
  const dips::SymmetricMatrix sigma(s);
  dips::Vector w(3);
  w << 0.3, -1.0, 0.7;
  dips::Vector mu(3);
  mu << 1.0, -2.0, 0.5;
  const bm::normal_distribution<> proj(w.dot(mu), std::sqrt(w.dot(s * w)));
  ks("mvnormal projection", 111,
     [&](RngStream& r) { return w.dot(dips::sample_mvnormal(r, mu, sigma)); },
     [&](double t) { return bm::cdf(proj, t); });
  const double dof = 8.0;
  const bm::chi_squared_distribution<> cw(dof);
  ks("wishart projection", 112,
     [&](RngStream& r) {
       return w.dot(dips::sample_wishart(r, dof, sigma).matrix() * w) / w.dot(s * w);
     },
     [&](double t) { return bm::cdf(cw, std::max(t, 0.0)); });
  // A ~ W(n, V) gives w'V^-1 w / w'A^-1 w ~ chi2(n - p + 1); with A = X^-1 and
  // V = S^-1 that is w'S w / w'X w.
  const bm::chi_squared_distribution<> ciw(dof - 2.0);
  ks("inv-wishart projection", 113,
     [&](RngStream& r) {
       return w.dot(s * w) / w.dot(dips::sample_inv_wishart(r, dof, sigma).matrix() * w);
     },
     [&](double t) { return bm::cdf(ciw, std::max(t, 0.0)); });

  // E[X] = S / (dof - p - 1); checked elementwise within 4 Monte-Carlo SE.
  RngStream r(114, 0);
  dips::Matrix sum = dips::Matrix::Zero(3, 3), sq = dips::Matrix::Zero(3, 3);
  for (int i = 0; i < n; ++i) {
    const dips::Matrix x = dips::sample_inv_wishart(r, dof, sigma).matrix();
    sum += x;
    sq += x.cwiseProduct(x);
  }
  const dips::Matrix mean = sum / n;
  const dips::Matrix want = s / (dof - 3.0 - 1.0);
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double se = std::sqrt((sq(i, j) / n - mean(i, j) * mean(i, j)) / n);
      worst = std::max(worst, std::abs(mean(i, j) - want(i, j)) / se);
    }
  }
  c.expect(worst <= 4.0, fmt("inv-wishart mean off by %.2f se", worst));
  c.note(fmt("inv-wishart mean: max deviation %.2f se", worst));
  return c;
}

Check criterion_firth() {
  Check c;
  auto flat = [](const dips::FirthFit& f) {
    dips::Vector b(f.coef.size());
    for (Eigen::Index r = 0; r < f.coef.rows(); ++r) {
      for (Eigen::Index j = 0; j < f.coef.cols(); ++j) b(r * f.coef.cols() + j) = f.coef(r, j);
    }
    return b;
  };
  auto score_ok = [&](const std::string& name, const dips::Matrix& x, const std::vector<int>& y,
                      int levels, const dips::FirthFit& f) {
    const double s = dips::firth_modified_score(x, y, levels, flat(f)).cwiseAbs().maxCoeff();
    c.expect(s < 1e-6, name + fmt(": score max-norm %.3g", s));
    return s;
  };

  {
    const dips::Matrix x = dips::Matrix::Ones(100, 1);
    std::vector<int> y(100, 0);
    for (int i = 0; i < 30; ++i) y[i] = 1;
    const auto f = dips::firth_logistic(x, y);
    const double p = 1.0 / (1.0 + std::exp(-f.coef(0, 0)));
    c.expect(std::abs(p - 30.5 / 101.0) <= 1e-6, fmt("intercept-only p = %.9f", p));
    const double s = score_ok("intercept-only", x, y, 2, f);
    c.note(fmt("intercept-only: p = %.7f, score %.2g", p, s));
  }
  {
    dips::Matrix x(12, 2);
    std::vector<int> y(12);
    for (int i = 0; i < 12; ++i) {
      x(i, 0) = 1.0;
      x(i, 1) = i - 5.5;
      y[i] = i >= 6;
    }
    const auto f = dips::firth_logistic(x, y);
    const bool finite = f.coef.allFinite() && f.cov.allFinite();
    c.expect(finite, "separated data gave non-finite estimates");
    const double s = score_ok("separated", x, y, 2, f);
    c.note(fmt("separated: slope %.4f, se %.4f, score %.2g", f.coef(0, 1), std::sqrt(f.cov(1, 1)), s));
  }
  {
    dips::RngStream r(115, 0);
    dips::Matrix x(300, 3);
    std::vector<int> y(300);
    for (int i = 0; i < 300; ++i) {
      x(i, 0) = 1.0;
      x(i, 1) = dips::sample_normal(r, 0.0, 1.0);
      x(i, 2) = dips::sample_bernoulli(r, 0.4);
      const double e1 = std::exp(0.3 + 0.8 * x(i, 1)), e2 = std::exp(-0.5 + 1.2 * x(i, 2));
      const double u = r.uniform() * (1.0 + e1 + e2);
      y[i] = u < 1.0 ? 0 : (u < 1.0 + e1 ? 1 : 2);
    }
    const auto f = dips::fit_multinomial_logit(x, y, 3);
    const double s = score_ok("three-level", x, y, 3, f);
    c.note(fmt("three-level: %g iterations, score %.2g", f.iterations, s));
  }
  return c;
}

template <typename F>
Check timed(int id, const char* title, bool& all, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  Check c = f();
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.print(id, title, s);
  all = all && c.ok();
  return c;
}

}  // namespace

int main() {
  bool all = true;
  timed(1, "Laplace log-density ratio bounded by eps", all, criterion_dp_ratio);
  timed(2, "smoothing weight value and monotonicity", all, criterion_lambda);
  timed(3, "combining rules hand case and B=0", all, criterion_combine);

  StudyConfig u = StudyConfig::defaults(Study::kSim1);
  u.n = 40;
  u.pi = 0.5;
  u.reps = 500;
  u.eps_grid = {std::exp(-10.0), std::exp(-9.0)};
  u.methods = {"modips", "laplace", "md", "bbmr"};
  timed(4, "usable repeats at tiny eps (sim1, n=40)", all,
        [&] { return criterion_usable(run(u, "usable")); });

  StudyConfig e = StudyConfig::defaults(Study::kSim3);
  e.reps = 200;
  e.eps_grid = {std::exp(-6.0), std::exp(4.0)};
  e.methods = {"modips", "np-dips"};
  StudyResult empty;
  timed(5, "empty cells (sim3)", all, [&] {
    empty = run(e, "empty_cells");
    return criterion_empty_cells(empty);
  });

  StudyConfig c1 = StudyConfig::defaults(Study::kSim1);
  c1.reps = 500;
  StudyConfig c2 = StudyConfig::defaults(Study::kSim2);
  c2.reps = 500;
  StudyConfig c3 = StudyConfig::defaults(Study::kSim3);
  c3.reps = 500;
  StudyResult s1, s2, s3;
  timed(6, "qualitative curves (sims 1-3)", all, [&] {
    s1 = run(c1, "sim1");
    s2 = run(c2, "sim2");
    s3 = run(c3, "sim3");
    return criterion_curves(s1, s2, s3);
  });
  timed(7, "bias at eps=e^8 matches baseline (sims 1-3)", all,
        [&] { return criterion_consistency(s1, s2, s3); });
  timed(8, "sampler goodness of fit", all, criterion_samplers);
  timed(9, "Firth logistic", all, criterion_firth);
  timed(10, "budget audit over the sim3 runs", all, [&] {
    Check c;
    audit(c, empty, "empty-cell run");
    audit(c, s3, "curve run");
    return c;
  });

  std::printf("acceptance: %s\n", all ? "ALL PASS" : "SOME CRITERIA FAILED");
  return all ? 0 : 1;
}
