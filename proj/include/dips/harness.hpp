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

// Monte-Carlo studies over four data designs: a binary variable, a bounded
// normal variable, a Gaussian mixture over a 2x3x4 cross-tabulation, and a
// bivariate normal with three sequential logistic outcomes. Each rep
// simulates data, runs every method at every eps, analyzes the synthetic
// sets, combines them, and the reps reduce into bias / RMSE / coverage / CI
// width rows.

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dips/budget.hpp"
#include "dips/dataset.hpp"
#include "dips/error.hpp"
#include "dips/hist_synth.hpp"
#include "dips/inference.hpp"
#include "dips/mechanisms.hpp"
#include "dips/models/bernoulli.hpp"
#include "dips/models/gaussian_mixture.hpp"
#include "dips/models/normal.hpp"
#include "dips/models/sequential_logistic.hpp"
#include "dips/param_synth.hpp"
#include "dips/randvar.hpp"
#include "json.hpp"

#ifndef DIPS_GIT_DESCRIBE
#define DIPS_GIT_DESCRIBE "unknown"
#endif

namespace dips::harness {

inline constexpr const char* kVersion = "0.1.0";

enum class Study { kSim1, kSim2, kSim3, kSim4 };

inline const char* to_string(Study s) {
  switch (s) {
    case Study::kSim1: return "sim1";
    case Study::kSim2: return "sim2";
    case Study::kSim3: return "sim3";
    case Study::kSim4: return "sim4";
  }
  return "?";
}

inline Study parse_study(const std::string& s) {
  if (s == "sim1") return Study::kSim1;
  if (s == "sim2") return Study::kSim2;
  if (s == "sim3") return Study::kSim3;
  if (s == "sim4") return Study::kSim4;
  throw ConfigError("unknown study '" + s + "'");
}

// Methods each study understands. "ms" is the non-private multiple-synthesis
// baseline and "original" analyzes the simulated data itself; neither
// depends on eps.
inline std::vector<std::string> known_methods(Study s) {
  switch (s) {
    case Study::kSim1: return {"modips", "laplace", "md", "bbmr", "ms", "original"};
    case Study::kSim2:
      return {"modips", "modips-conjoint", "pert-hist", "smooth-hist", "ms", "original"};
    case Study::kSim3:
    case Study::kSim4: return {"modips", "np-dips", "ms", "original"};
  }
  return {};
}

inline bool is_baseline(const std::string& method) {
  return method == "ms" || method == "original";
}

inline std::vector<double> log_spaced(double ln_lo, double ln_hi, int points) {
  std::vector<double> out;
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    out.push_back(std::exp(ln_lo + t * (ln_hi - ln_lo)));
  }
  return out;
}

struct StudyConfig {
  Study study = Study::kSim1;
  std::size_t n = 100;
  double pi = 0.25;               // sim1
  double mu = 0.0;                // sim2
  double sigma2 = 1.0;            // sim2 variance; sims 3-4 per-coordinate variance
  bool symmetric_bounds = false;  // sim2: [mu-4s, mu+4s] instead of [mu-3s, mu+4s]
  double rho = 0.5;               // sims 3-4
  std::vector<double> eps_grid;
  int m = 5;
  int reps = 500;
  std::vector<std::string> methods;
  std::uint64_t seed = 20260101;
  PostProcessKind postprocess = PostProcessKind::kBit;
  int threads = 0;  // 0: hardware concurrency
  models::MhOptions mh;

  static StudyConfig defaults(Study s) {
    StudyConfig c;
    c.study = s;
    switch (s) {
      case Study::kSim1:
        c.n = 100;
        c.eps_grid = log_spaced(-10.0, 8.0, 9);
        c.methods = {"modips", "laplace", "md", "bbmr", "ms", "original"};
        break;
      case Study::kSim2:
        c.n = 100;
        c.eps_grid = log_spaced(-8.0, 8.0, 9);
        c.methods = {"modips", "pert-hist", "smooth-hist", "ms", "original"};
        break;
      case Study::kSim3:
        c.n = 1000;
        c.eps_grid = log_spaced(-6.0, 8.0, 9);
        c.methods = {"modips", "np-dips", "ms", "original"};
        break;
      case Study::kSim4:
        c.n = 1000;
        c.reps = 200;
        c.eps_grid = log_spaced(-4.0, 6.0, 9);
        c.methods = {"modips", "np-dips", "ms", "original"};
        break;
    }
    return c;
  }

  void validate() const {
    if (n < 10) throw ConfigError("n must be >= 10");
    if (reps < 1) throw ConfigError("reps must be >= 1");
    if (m < 1) throw ConfigError("m must be >= 1");
    if (eps_grid.empty()) throw ConfigError("eps_grid must be nonempty");
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
      if (!(eps_grid[i] > 0.0) || !std::isfinite(eps_grid[i])) {
        throw ConfigError("eps_grid values must be finite and > 0");
      }
      if (i > 0 && !(eps_grid[i] > eps_grid[i - 1])) {
        throw ConfigError("eps_grid must be strictly increasing");
      }
    }
    if (methods.empty()) throw ConfigError("methods must be nonempty");
    const auto known = known_methods(study);
    for (const auto& mth : methods) {
      if (std::find(known.begin(), known.end(), mth) == known.end()) {
        throw ConfigError("method '" + mth + "' is not available for " +
                          to_string(study));
      }
    }
    if (!(pi > 0.0 && pi < 1.0)) throw ConfigError("pi must be in (0,1)");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ConfigError("sigma2 must be > 0");
    if (!(rho > -1.0 && rho < 1.0)) throw ConfigError("rho must be in (-1,1)");
    if (!std::isfinite(mu)) throw ConfigError("mu must be finite");
    if (threads < 0) throw ConfigError("threads must be >= 0");
    if (mh.chains < 1 || mh.thin < 1 || mh.burn_in < 0 || mh.iterations <= mh.burn_in) {
      throw ConfigError("mh settings invalid");
    }
    if ((study == Study::kSim3 || study == Study::kSim4) && n < 100) {
      throw ConfigError("sims 3 and 4 need n >= 100");
    }
  }

  // Missing keys keep the study defaults; unknown keys are rejected.
  static StudyConfig from_json(const nlohmann::json& j,
                               std::optional<Study> study_override = std::nullopt) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const char* kKeys[] = {"study", "n",      "pi",      "mu",         "sigma2",
                                  "symmetric_bounds", "rho",    "eps_grid",   "log_eps_grid",
                                  "m",     "reps",    "methods", "seed",       "postprocess",
                                  "threads", "mh"};
    for (const auto& [key, _] : j.items()) {
      if (std::find_if(std::begin(kKeys), std::end(kKeys),
                       [&](const char* k) { return key == k; }) == std::end(kKeys)) {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
    try {
      std::optional<Study> from_file;
      if (j.contains("study")) from_file = parse_study(j.at("study").get<std::string>());
      if (study_override && from_file && *study_override != *from_file) {
        throw ConfigError("config study does not match the requested study");
      }
      const auto s = study_override ? *study_override
                                    : (from_file ? *from_file : throw ConfigError("no study"));
      StudyConfig c = defaults(s);
      if (j.contains("n")) {
        const auto v = j.at("n").get<std::int64_t>();
        if (v < 1) throw ConfigError("n must be positive");
        c.n = static_cast<std::size_t>(v);
      }
      if (j.contains("pi")) c.pi = j.at("pi").get<double>();
      if (j.contains("mu")) c.mu = j.at("mu").get<double>();
      if (j.contains("sigma2")) c.sigma2 = j.at("sigma2").get<double>();
      if (j.contains("symmetric_bounds")) c.symmetric_bounds = j.at("symmetric_bounds").get<bool>();
      if (j.contains("rho")) c.rho = j.at("rho").get<double>();
      if (j.contains("eps_grid") && j.contains("log_eps_grid")) {
        throw ConfigError("give eps_grid or log_eps_grid, not both");
      }
      if (j.contains("eps_grid")) c.eps_grid = j.at("eps_grid").get<std::vector<double>>();
      if (j.contains("log_eps_grid")) {
        c.eps_grid.clear();
        for (double v : j.at("log_eps_grid").get<std::vector<double>>()) {
          c.eps_grid.push_back(std::exp(v));
        }
      }
      if (j.contains("m")) c.m = j.at("m").get<int>();
      if (j.contains("reps")) c.reps = j.at("reps").get<int>();
      if (j.contains("methods")) c.methods = j.at("methods").get<std::vector<std::string>>();
      if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
      if (j.contains("postprocess")) {
        const auto pp = j.at("postprocess").get<std::string>();
        if (pp == "BIT" || pp == "bit") {
          c.postprocess = PostProcessKind::kBit;
        } else if (pp == "truncate") {
          c.postprocess = PostProcessKind::kTruncate;
        } else {
          throw ConfigError("postprocess must be BIT or truncate");
        }
      }
      if (j.contains("threads")) c.threads = j.at("threads").get<int>();
      if (j.contains("mh")) {
        const auto& mh = j.at("mh");
        if (!mh.is_object()) throw ConfigError("mh must be an object");
        for (const auto& [key, val] : mh.items()) {
          if (key == "chains") {
            c.mh.chains = val.get<int>();
          } else if (key == "iterations") {
            c.mh.iterations = val.get<int>();
          } else if (key == "burn_in") {
            c.mh.burn_in = val.get<int>();
          } else if (key == "thin") {
            c.mh.thin = val.get<int>();
          } else if (key == "adapt_every") {
            c.mh.adapt_every = val.get<int>();
          } else {
            throw ConfigError("unknown mh key '" + key + "'");
          }
        }
      }
      c.validate();
      return c;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config type error: ") + e.what());
    }
  }

  nlohmann::json to_json() const {
    return {{"study", to_string(study)},
            {"n", n},
            {"pi", pi},
            {"mu", mu},
            {"sigma2", sigma2},
            {"symmetric_bounds", symmetric_bounds},
            {"rho", rho},
            {"eps_grid", eps_grid},
            {"m", m},
            {"reps", reps},
            {"methods", methods},
            {"seed", seed},
            {"postprocess", postprocess == PostProcessKind::kBit ? "BIT" : "truncate"},
            {"threads", threads},
            {"mh",
             {{"chains", mh.chains},
              {"iterations", mh.iterations},
              {"burn_in", mh.burn_in},
              {"thin", mh.thin},
              {"adapt_every", mh.adapt_every}}}};
  }
};

// ---------------------------------------------------------------------------
// Truth.

// (mu1, mu2, pi) for the 24 cells of the 2x3x4 cross-tabulation, cell order
// w1, w2, w3 with w3 fastest.
inline const std::array<std::array<double, 3>, 24>& mixture_truth_table() {
  static const std::array<std::array<double, 3>, 24> kTable = {{
      {1.371, -0.565, 0.041},  {0.363, 0.633, 0.076},   {0.404, -0.106, 0.024},
      {1.512, -0.095, 0.062},  {2.018, -0.063, 0.045},  {1.305, 2.287, 0.041},
      {-1.389, -0.279, 0.038}, {-0.133, 0.636, 0.007},  {-0.284, -2.656, 0.064},
      {-2.440, 1.320, 0.064},  {-0.307, -1.781, 0.031}, {-0.172, 1.215, 0.048},
      {1.895, -0.430, 0.053},  {-0.257, -1.763, 0.007}, {0.460, -0.640, 0.021},
      {0.455, 0.705, 0.065},   {1.035, -0.609, 0.070},  {0.505, -1.717, 0.012},
      {-0.784, -0.851, 0.024}, {-2.414, 0.036, 0.028},  {0.206, -0.361, 0.048},
      {0.758, -0.727, 0.011},  {-1.368, 0.433, 0.058},  {-0.811, 1.444, 0.062},
  }};
  return kTable;
}

// Cell probabilities, renormalized so rounding in the table cannot leak
// into the simulated margins.
inline std::vector<double> mixture_cell_probs() {
  std::vector<double> p;
  double total = 0.0;
  for (const auto& row : mixture_truth_table()) {
    p.push_back(row[2]);
    total += row[2];
  }
  for (auto& v : p) v /= total;
  return p;
}

struct LogisticTruth {
  std::array<double, 3> beta1 = {-1.0, 0.5, -1.0};
  std::array<double, 4> beta2 = {-2.0, -1.0, 1.5, 0.5};
  std::array<double, 5> beta3 = {0.0, -2.5, 1.0, 0.5, 0.4};
  std::array<double, 5> beta4 = {0.1, -1.0, -0.5, 0.0, 1.5};
};

inline std::pair<double, double> sim2_bounds(const StudyConfig& c) {
  const double s = std::sqrt(c.sigma2);
  return {c.mu - (c.symmetric_bounds ? 4.0 : 3.0) * s, c.mu + 4.0 * s};
}

inline Schema study_schema(const StudyConfig& c) {
  switch (c.study) {
    case Study::kSim1: return Schema({ColumnSpec::categorical("x", 2)});
    case Study::kSim2: {
      const auto [lo, hi] = sim2_bounds(c);
      return Schema({ColumnSpec::continuous("x", lo, hi)});
    }
    case Study::kSim3: {
      const double s = std::sqrt(c.sigma2);
      double lo1 = 1e300, hi1 = -1e300, lo2 = 1e300, hi2 = -1e300;
      for (const auto& row : mixture_truth_table()) {
        lo1 = std::min(lo1, row[0] - 4.0 * s);
        hi1 = std::max(hi1, row[0] + 4.0 * s);
        lo2 = std::min(lo2, row[1] - 4.0 * s);
        hi2 = std::max(hi2, row[1] + 4.0 * s);
      }
      return Schema({ColumnSpec::categorical("w1", 2), ColumnSpec::categorical("w2", 3),
                     ColumnSpec::categorical("w3", 4), ColumnSpec::continuous("z1", lo1, hi1),
                     ColumnSpec::continuous("z2", lo2, hi2)});
    }
    case Study::kSim4: {
      const double s = std::sqrt(c.sigma2);
      return Schema({ColumnSpec::continuous("z1", -4.0 * s, 4.0 * s),
                     ColumnSpec::continuous("z2", -4.0 * s, 4.0 * s),
                     ColumnSpec::categorical("w1", 2), ColumnSpec::categorical("w2", 2),
                     ColumnSpec::categorical("w3", 3)});
    }
  }
  throw InvalidArgument("study_schema: unknown study");
}

// Per-cell z bounds (cells x 2): mu_kj +- 4 sigma for sim3, the global
// [-4 sigma, 4 sigma] for each of sim4's 12 cells.
inline std::pair<Matrix, Matrix> cell_bounds(const StudyConfig& c) {
  const double s = std::sqrt(c.sigma2);
  if (c.study == Study::kSim3) {
    Matrix lo(24, 2), hi(24, 2);
    const auto& t = mixture_truth_table();
    for (int k = 0; k < 24; ++k) {
      for (int j = 0; j < 2; ++j) {
        lo(k, j) = t[k][j] - 4.0 * s;
        hi(k, j) = t[k][j] + 4.0 * s;
      }
    }
    return {lo, hi};
  }
  if (c.study == Study::kSim4) {
    return {Matrix::Constant(12, 2, -4.0 * s), Matrix::Constant(12, 2, 4.0 * s)};
  }
  throw InvalidArgument("cell_bounds: study has no cells");
}

namespace internal {

inline Vector truncated_mvnormal(RngStream& rng, const Vector& mean, const Matrix& chol,
                                 const Vector& lo, const Vector& hi) {
  Vector e(mean.size());
  for (long tries = 0; tries < 1'000'000; ++tries) {
    for (Eigen::Index j = 0; j < e.size(); ++j) e(j) = sample_standard_normal(rng);
    const Vector z = mean + chol * e;
    if ((z.array() >= lo.array()).all() && (z.array() <= hi.array()).all()) return z;
  }
  throw NonConvergence("truncated_mvnormal: rejection limit");
}

inline Matrix correlated_chol(double sigma2, double rho) {
  Matrix sig(2, 2);
  sig << sigma2, rho * sigma2, rho * sigma2, sigma2;
  return Eigen::LLT<Matrix>(sig).matrixL();
}

}  // namespace internal

inline TabularDataset simulate_truth(RngStream& rng, const StudyConfig& c) {
  const Schema schema = study_schema(c);
  const std::size_t n = c.n;
  switch (c.study) {
    case Study::kSim1: {
      std::vector<std::vector<double>> cols(1, std::vector<double>(n));
      for (auto& v : cols[0]) v = sample_bernoulli(rng, c.pi) ? 1.0 : 0.0;
      return TabularDataset(schema, std::move(cols));
    }
    case Study::kSim2: {
      const auto [lo, hi] = sim2_bounds(c);
      const double sd = std::sqrt(c.sigma2);
      std::vector<std::vector<double>> cols(1, std::vector<double>(n));
      for (auto& v : cols[0]) {
        do {
          v = sample_normal(rng, c.mu, sd);
        } while (v < lo || v > hi);
      }
      return TabularDataset(schema, std::move(cols));
    }
    case Study::kSim3: {
      const auto probs = mixture_cell_probs();
      const auto counts = sample_multinomial(rng, static_cast<std::int64_t>(n), probs);
      const auto [lo, hi] = cell_bounds(c);
      const Matrix chol = internal::correlated_chol(c.sigma2, c.rho);
      const auto& t = mixture_truth_table();
      std::vector<std::vector<double>> cols(5);
      for (auto& col : cols) col.reserve(n);
      for (int k = 0; k < 24; ++k) {
        Vector mean(2);
        mean << t[k][0], t[k][1];
        const Vector clo = lo.row(k).transpose();
        const Vector chi = hi.row(k).transpose();
        for (std::int64_t r = 0; r < counts[k]; ++r) {
          const Vector z = internal::truncated_mvnormal(rng, mean, chol, clo, chi);
          cols[0].push_back(k / 12);
          cols[1].push_back((k / 4) % 3);
          cols[2].push_back(k % 4);
          cols[3].push_back(z(0));
          cols[4].push_back(z(1));
        }
      }
      return TabularDataset(schema, std::move(cols));
    }
    case Study::kSim4: {
      const LogisticTruth b;
      const double s = std::sqrt(c.sigma2);
      const Matrix chol = internal::correlated_chol(c.sigma2, c.rho);
      const Vector lo = Vector::Constant(2, -4.0 * s);
      const Vector hi = Vector::Constant(2, 4.0 * s);
      std::vector<std::vector<double>> cols(5, std::vector<double>(n));
      for (std::size_t i = 0; i < n; ++i) {
        const Vector z = internal::truncated_mvnormal(rng, Vector::Zero(2), chol, lo, hi);
        const double w1 = sample_bernoulli(
            rng, models::logistic(b.beta1[0] + b.beta1[1] * z(0) + b.beta1[2] * z(1)));
        const double w2 = sample_bernoulli(
            rng, models::logistic(b.beta2[0] + b.beta2[1] * z(0) + b.beta2[2] * z(1) +
                                  b.beta2[3] * w1));
        const double x[5] = {1.0, z(0), z(1), w1, w2};
        double e3 = 0.0, e4 = 0.0;
        for (int k = 0; k < 5; ++k) {
          e3 += b.beta3[k] * x[k];
          e4 += b.beta4[k] * x[k];
        }
        const double a = std::exp(e3), bb = std::exp(e4);
        const double u = rng.uniform() * (1.0 + a + bb);
        cols[0][i] = z(0);
        cols[1][i] = z(1);
        cols[2][i] = w1;
        cols[3][i] = w2;
        cols[4][i] = u < 1.0 ? 0.0 : (u < 1.0 + a ? 1.0 : 2.0);
      }
      return TabularDataset(schema, std::move(cols));
    }
  }
  throw InvalidArgument("simulate_truth: unknown study");
}

// ---------------------------------------------------------------------------
// Parameters and per-set analysis.

struct Parameter {
  std::string name;
  double truth = 0.0;
  double scale = 1.0;  // metrics are divided by this (sim2's sigma^2)
};

inline std::vector<Parameter> study_parameters(const StudyConfig& c) {
  std::vector<Parameter> out;
  switch (c.study) {
    case Study::kSim1:
      out.push_back({"pi", c.pi});
      break;
    case Study::kSim2:
      out.push_back({"mu", c.mu});
      out.push_back({"sigma2", c.sigma2, c.sigma2});
      break;
    case Study::kSim3: {
      const auto p = mixture_cell_probs();
      auto marginal = [&](int var, int level) {
        double s = 0.0;
        for (int k = 0; k < 24; ++k) {
          const int code = var == 0 ? k / 12 : (var == 1 ? (k / 4) % 3 : k % 4);
          if (code == level) s += p[k];
        }
        return s;
      };
      out.push_back({"p_w1_1", marginal(0, 1)});
      out.push_back({"p_w2_1", marginal(1, 1)});
      out.push_back({"p_w2_2", marginal(1, 2)});
      out.push_back({"p_w3_1", marginal(2, 1)});
      out.push_back({"p_w3_2", marginal(2, 2)});
      out.push_back({"p_w3_3", marginal(2, 3)});
      const auto& t = mixture_truth_table();
      for (int k = 0; k < 24; ++k) out.push_back({"mu1_" + std::to_string(k + 1), t[k][0]});
      for (int k = 0; k < 24; ++k) out.push_back({"mu2_" + std::to_string(k + 1), t[k][1]});
      out.push_back({"sigma2_1", c.sigma2});
      out.push_back({"sigma2_2", c.sigma2});
      out.push_back({"rho", c.rho});
      break;
    }
    case Study::kSim4: {
      out.push_back({"mu1", 0.0});
      out.push_back({"mu2", 0.0});
      out.push_back({"sigma2_1", c.sigma2});
      out.push_back({"sigma2_2", c.sigma2});
      out.push_back({"rho", c.rho});
      const LogisticTruth b;
      for (int k = 0; k < 3; ++k) out.push_back({"beta1_" + std::to_string(k), b.beta1[k]});
      for (int k = 0; k < 4; ++k) out.push_back({"beta2_" + std::to_string(k), b.beta2[k]});
      for (int k = 0; k < 5; ++k) out.push_back({"beta3_" + std::to_string(k), b.beta3[k]});
      for (int k = 0; k < 5; ++k) out.push_back({"beta4_" + std::to_string(k), b.beta4[k]});
      break;
    }
  }
  return out;
}

struct SetAnalysis {
  std::vector<std::optional<PerSetEstimate>> est;  // per study parameter
  double empty_cells = std::numeric_limits<double>::quiet_NaN();
};

namespace internal {

template <typename F>
std::optional<PerSetEstimate> guarded(F&& f) {
  try {
    return f();
  } catch (const Error&) {
    return std::nullopt;
  }
}

// Pooled within-cell covariance analysis for the mixture design.
inline SetAnalysis analyze_mixture(const TabularDataset& d) {
  SetAnalysis out;
  const std::size_t n = d.rows();
  const double nn = static_cast<double>(n);
  constexpr int kCells = 24;
  std::array<double, kCells> cnt{};
  std::array<std::array<double, 2>, kCells> sum{};
  std::vector<int> cell(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int k = d.code(i, 0) * 12 + d.code(i, 1) * 4 + d.code(i, 2);
    cell[i] = k;
    cnt[k] += 1.0;
    sum[k][0] += d.at(i, 3);
    sum[k][1] += d.at(i, 4);
  }
  const int levels[6][2] = {{0, 1}, {1, 1}, {1, 2}, {2, 1}, {2, 2}, {2, 3}};
  for (const auto& lv : levels) {
    out.est.push_back(guarded([&] { return estimate_proportion(d.column(lv[0]), lv[1]); }));
  }
  int nonempty = 0;
  for (int k = 0; k < kCells; ++k) {
    if (cnt[k] > 0) {
      ++nonempty;
      sum[k][0] /= cnt[k];
      sum[k][1] /= cnt[k];
    }
  }
  out.empty_cells = kCells - nonempty;
  const double dof = nn - nonempty;
  double s11 = 0, s22 = 0, s12 = 0, q1 = 0, q2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r1 = d.at(i, 3) - sum[cell[i]][0];
    const double r2 = d.at(i, 4) - sum[cell[i]][1];
    s11 += r1 * r1;
    s22 += r2 * r2;
    s12 += r1 * r2;
    q1 += r1 * r1 * r1 * r1;
    q2 += r2 * r2 * r2 * r2;
  }
  const bool cov_ok = dof > 2.0 && s11 > 0.0 && s22 > 0.0;
  const double m2_1 = s11 / nn, m2_2 = s22 / nn;
  const double k1 = cov_ok ? q1 / nn / (m2_1 * m2_1) - 3.0 : 0.0;
  const double k2 = cov_ok ? q2 / nn / (m2_2 * m2_2) - 3.0 : 0.0;
  if (cov_ok) {
    s11 /= dof;
    s22 /= dof;
    s12 /= dof;
  }
  for (int j = 0; j < 2; ++j) {
    const double sjj = j == 0 ? s11 : s22;
    for (int k = 0; k < kCells; ++k) {
      if (cov_ok && cnt[k] >= 2.0) {
        out.est.push_back(PerSetEstimate{sum[k][j], sjj / cnt[k]});
      } else {
        out.est.push_back(std::nullopt);
      }
    }
  }
  if (cov_ok) {
    out.est.push_back(PerSetEstimate{s11, s11 * s11 * (2.0 / (nn - 1.0) + k1 / nn)});
    out.est.push_back(PerSetEstimate{s22, s22 * s22 * (2.0 / (nn - 1.0) + k2 / nn)});
    const double r = std::clamp(s12 / std::sqrt(s11 * s22), -1.0, 1.0);
    out.est.push_back(PerSetEstimate{r, (1.0 - r * r) / (nn - 2.0)});
  } else {
    out.est.insert(out.est.end(), 3, std::nullopt);
  }
  return out;
}

inline SetAnalysis analyze_logistic(const TabularDataset& d) {
  SetAnalysis out;
  const std::size_t n = d.rows();
  const auto& z1 = d.column(0);
  const auto& z2 = d.column(1);
  out.est.push_back(guarded([&] { return estimate_mean(z1); }));
  out.est.push_back(guarded([&] { return estimate_mean(z2); }));
  out.est.push_back(guarded([&] { return estimate_variance(z1); }));
  out.est.push_back(guarded([&] { return estimate_variance(z2); }));
  out.est.push_back(guarded([&] { return estimate_correlation(z1, z2); }));

  std::array<bool, 12> seen{};
  for (std::size_t i = 0; i < n; ++i) seen[d.code(i, 2) * 6 + d.code(i, 3) * 3 + d.code(i, 4)] = true;
  out.empty_cells = static_cast<double>(std::count(seen.begin(), seen.end(), false));

  auto fit = [&](const Matrix& x, const std::vector<int>& y, int levels, std::size_t count) {
    try {
      const FirthFit f = fit_multinomial_logit(x, y, levels);
      for (const auto& e : f.estimates()) out.est.push_back(e);
    } catch (const Error&) {
      out.est.insert(out.est.end(), count, std::nullopt);
    }
  };
  const auto rows = static_cast<Eigen::Index>(n);
  Matrix x1(rows, 3), x2(rows, 4), x3(rows, 5);
  std::vector<int> y1(n), y2(n), y3(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    x1.row(r) << 1.0, z1[i], z2[i];
    x2.row(r) << 1.0, z1[i], z2[i], d.at(i, 2);
    x3.row(r) << 1.0, z1[i], z2[i], d.at(i, 2), d.at(i, 3);
    y1[i] = d.code(i, 2);
    y2[i] = d.code(i, 3);
    y3[i] = d.code(i, 4);
  }
  fit(x1, y1, 2, 3);
  fit(x2, y2, 2, 4);
  fit(x3, y3, 3, 10);
  return out;
}

}  // namespace internal

inline SetAnalysis analyze_set(const StudyConfig& c, const TabularDataset& d) {
  using internal::guarded;
  switch (c.study) {
    case Study::kSim1: {
      SetAnalysis a;
      a.est.push_back(guarded([&] { return estimate_proportion(d.column(0), 1.0); }));
      return a;
    }
    case Study::kSim2: {
      SetAnalysis a;
      a.est.push_back(guarded([&] { return estimate_mean(d.column(0)); }));
      a.est.push_back(guarded([&] { return estimate_variance(d.column(0)); }));
      return a;
    }
    case Study::kSim3: return internal::analyze_mixture(d);
    case Study::kSim4: return internal::analyze_logistic(d);
  }
  throw InvalidArgument("analyze_set: unknown study");
}

// ---------------------------------------------------------------------------
// Methods.

struct MethodOutput {
  std::vector<TabularDataset> sets;
  std::optional<PrivacyLedger> ledger;  // DP methods only
  double bins = std::numeric_limits<double>::quiet_NaN();
};

namespace internal {

inline TabularDataset binary_set(const Schema& schema, std::int64_t n1, std::int64_t n) {
  std::vector<std::vector<double>> cols(1, std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (std::int64_t i = 0; i < n1; ++i) cols[0][static_cast<std::size_t>(i)] = 1.0;
  return TabularDataset(schema, std::move(cols));
}

template <typename M>
std::vector<TabularDataset> modips_sets(RngStream& rng, const TabularDataset& data,
                                        const M& model, PrivacyLedger* ledger,
                                        const ModipsOptions& opt) {
  auto sets = modips_release(rng, data, model, ledger, opt);
  std::vector<TabularDataset> out;
  out.reserve(sets.size());
  for (auto& s : sets) out.push_back(std::move(s.data));
  return out;
}

}  // namespace internal

// Runs one method on one simulated dataset. DP methods get a fresh ledger
// with total eps; baselines ignore eps.
inline MethodOutput run_method(const StudyConfig& c, const std::string& method,
                               const TabularDataset& data, double eps, RngStream& rng) {
  MethodOutput out;
  const Schema& schema = data.schema();
  const auto n = static_cast<std::int64_t>(data.rows());
  if (method == "original") {
    out.sets.push_back(data);
    return out;
  }
  const bool ms = method == "ms";
  ModipsOptions opt;
  opt.m = c.m;
  opt.postprocess = c.postprocess;
  opt.sanitize = !ms;
  PrivacyLedger* ledger = nullptr;
  if (!ms) {
    out.ledger.emplace(PrivacyBudget(eps));
    ledger = &*out.ledger;
  }

  switch (c.study) {
    case Study::kSim1: {
      std::int64_t n1 = 0;
      for (double v : data.column(0)) n1 += v > 0.5;
      if (method == "modips" || ms) {
        out.sets = internal::modips_sets(rng, data, models::BernoulliModel(schema), ledger, opt);
      } else if (method == "laplace") {
        for (int j = 0; j < c.m; ++j) {
          ledger->charge_share("laplace/set" + std::to_string(j), Fraction(1, c.m));
          RngStream r = rng.split(static_cast<std::uint64_t>(j));
          const auto s = laplace_sanitizer_binary(r, n1, n, eps / c.m, c.postprocess);
          out.sets.push_back(internal::binary_set(schema, s, n));
        }
      } else if (method == "md") {
        const std::vector<std::int64_t> counts = {n - n1, n1};
        for (const auto& s : md_synthesizer(rng, counts, eps, c.m, ledger)) {
          out.sets.push_back(internal::binary_set(schema, s[1], n));
        }
      } else if (method == "bbmr") {
        out.sets.push_back(internal::binary_set(schema, bbmr_synthesizer(rng, n1, n, eps, ledger), n));
      }
      break;
    }
    case Study::kSim2: {
      if (method == "modips" || method == "modips-conjoint" || ms) {
        models::NormalModel::Options o;
        o.conjoint = method == "modips-conjoint";
        out.sets = internal::modips_sets(rng, data, models::NormalModel(schema, o), ledger, opt);
      } else {
        const auto& x = data.column(0);
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : x) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        const double lo = schema[0].lo, hi = schema[0].hi;
        const double h = sd > 0.0 ? bin_width_scott(sd, static_cast<double>(n)) : hi - lo;
        const GridSpec grid({Axis::binned_by_width(0, lo, hi, h)});
        const Histogram hist = build_histogram(data, grid);
        out.bins = static_cast<double>(grid.cell_count());
        if (method == "pert-hist") {
          for (int j = 0; j < c.m; ++j) {
            ledger->charge_share("pert-hist/set" + std::to_string(j), Fraction(1, c.m));
            RngStream r = rng.split(static_cast<std::uint64_t>(j));
            const Histogram noisy = perturb_histogram(r, hist, eps / c.m);
            out.sets.push_back(sample_from_histogram(r, noisy, data.rows(), schema));
          }
        } else {  // smooth-hist: one set with the whole budget
          ledger->charge_share("smooth-hist", Fraction(1, 1));
          const SmoothedHistogram s = smooth_histogram(hist, eps);
          out.sets.push_back(sample_from_histogram(rng, s, data.rows(), schema));
        }
      }
      break;
    }
    case Study::kSim3:
    case Study::kSim4: {
      const auto [lo, hi] = cell_bounds(c);
      if (method == "modips" || ms) {
        if (c.study == Study::kSim3) {
          models::GaussianMixtureModel model(schema, {0, 1, 2}, {3, 4}, lo, hi);
          out.sets = internal::modips_sets(rng, data, model, ledger, opt);
        } else {
          models::SequentialLogisticModel model(schema, models::SequentialLogisticModel::Columns(),
                                                c.mh);
          out.sets = internal::modips_sets(rng, data, model, ledger, opt);
        }
      } else {  // np-dips
        NestedHistogramSpec spec;
        if (c.study == Study::kSim3) {
          spec.cat_columns = {0, 1, 2};
          spec.z_columns = {3, 4};
        } else {
          spec.cat_columns = {2, 3, 4};
          spec.z_columns = {0, 1};
        }
        spec.cell_lo = lo;
        spec.cell_hi = hi;
        const std::size_t k_cells = static_cast<std::size_t>(lo.rows());
        double bins = 0.0;
        const Fraction half = Fraction(1, c.m) * Fraction(1, 2);
        for (int j = 0; j < c.m; ++j) {
          const std::string tag = "set" + std::to_string(j);
          for (std::size_t k = 0; k < k_cells; ++k) {
            ledger->charge_share(tag + "/counts[" + std::to_string(k) + "]", half,
                                 Composition::kParallel, tag + "/counts");
            ledger->charge_share(tag + "/zhist[" + std::to_string(k) + "]", half,
                                 Composition::kParallel, tag + "/zhist");
          }
          RngStream r = rng.split(static_cast<std::uint64_t>(j));
          NestedHistogramStats st;
          const double e_half = eps * half.to_double();
          out.sets.push_back(nested_histogram_synthesize(r, data, spec, e_half, e_half, &st));
          bins += static_cast<double>(st.bins) / static_cast<double>(k_cells);
        }
        out.bins = bins / c.m;
      }
      break;
    }
  }
  if (out.sets.empty()) throw ConfigError("method '" + method + "' produced no sets");
  return out;
}

// ---------------------------------------------------------------------------
// Reps and reduction.

struct ParamOutcome {
  bool usable = false;
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct CellOutcome {  // one (rep, method, eps)
  std::vector<ParamOutcome> params;
  double empty_cells = std::numeric_limits<double>::quiet_NaN();
  double bins = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  bool ledger_checked = false;
  bool ledger_exact = false;
};

// Combines per-set analyses; a parameter is usable when every set produced
// an estimate and the combined variance is finite and positive.
inline CellOutcome evaluate(const StudyConfig& c, const MethodOutput& mo, std::size_t n_params) {
  CellOutcome out;
  out.params.resize(n_params);
  out.bins = mo.bins;
  std::vector<SetAnalysis> analyses;
  analyses.reserve(mo.sets.size());
  double empty = 0.0;
  for (const auto& s : mo.sets) {
    analyses.push_back(analyze_set(c, s));
    empty += analyses.back().empty_cells;
  }
  out.empty_cells = empty / static_cast<double>(mo.sets.size());
  std::vector<PerSetEstimate> per(mo.sets.size());
  for (std::size_t p = 0; p < n_params; ++p) {
    bool ok = true;
    for (std::size_t j = 0; j < analyses.size() && ok; ++j) {
      if (!analyses[j].est[p]) {
        ok = false;
      } else {
        per[j] = *analyses[j].est[p];
      }
    }
    if (!ok) continue;
    const CombinedEstimate ce = combine(per);
    if (!(ce.total_T > 0.0) || !std::isfinite(ce.total_T) || !std::isfinite(ce.point)) continue;
    out.params[p] = {true, ce.point, ce.ci_low, ce.ci_high};
  }
  if (mo.ledger) {
    out.ledger_checked = true;
    const auto share = mo.ledger->exact_spend_share();
    out.ledger_exact = share && *share == Fraction(1, 1) &&
                       mo.ledger->effective_spend() == mo.ledger->total().epsilon();
  }
  return out;
}

struct RepOutcome {
  std::vector<CellOutcome> cells;  // method-major, eps-minor; baselines use eps slot 0
};

inline std::size_t cell_index(std::size_t method, std::size_t eps, std::size_t n_eps) {
  return method * n_eps + eps;
}

inline RepOutcome run_rep(const StudyConfig& c, int rep, std::size_t n_params) {
  const RngStream rep_rng = RngStream(c.seed, 0).split(static_cast<std::uint64_t>(rep));
  RngStream data_rng = rep_rng.split(0);
  const TabularDataset data = simulate_truth(data_rng, c);
  const std::size_t n_eps = c.eps_grid.size();
  RepOutcome out;
  out.cells.resize(c.methods.size() * n_eps);
  for (std::size_t mi = 0; mi < c.methods.size(); ++mi) {
    const std::string& method = c.methods[mi];
    const std::size_t eps_count = is_baseline(method) ? 1 : n_eps;
    for (std::size_t e = 0; e < eps_count; ++e) {
      RngStream rng = rep_rng.split(1 + 1000 * (mi + 1) + e);
      CellOutcome cell;
      try {
        const MethodOutput mo = run_method(c, method, data, c.eps_grid[e], rng);
        cell = evaluate(c, mo, n_params);
      } catch (const ConfigError&) {
        throw;
      } catch (const BudgetExhausted&) {
        cell.params.resize(n_params);
        cell.failed = true;
        cell.ledger_checked = true;
        cell.ledger_exact = false;
      } catch (const Error&) {
        // Per-rep failures (all-zero histograms, degenerate posteriors) make
        // the rep unusable for this method and eps.
        cell.params.resize(n_params);
        cell.failed = true;
      }
      out.cells[cell_index(mi, e, n_eps)] = std::move(cell);
    }
    if (eps_count == 1) {
      for (std::size_t e = 1; e < n_eps; ++e) {
        out.cells[cell_index(mi, e, n_eps)] = out.cells[cell_index(mi, 0, n_eps)];
      }
    }
  }
  return out;
}

struct MetricRow {
  std::string study;
  std::string method;
  std::string parameter;
  double eps = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double coverage = 0.0;
  double ci_width = 0.0;
  double usable_fraction = 0.0;
  int reps_used = 0;
};

struct DiagnosticRow {
  std::string study;
  std::string method;
  double eps = 0.0;
  double mean_empty_cells = std::numeric_limits<double>::quiet_NaN();
  double mean_bins = std::numeric_limits<double>::quiet_NaN();
  int failed_reps = 0;
  int ledger_checks = 0;
  int ledger_violations = 0;
};

struct StudyResult {
  StudyConfig config;
  std::vector<Parameter> parameters;
  std::vector<MetricRow> rows;
  std::vector<DiagnosticRow> diagnostics;
  long ledger_checks = 0;
  long ledger_violations = 0;

  const MetricRow* find(const std::string& method, const std::string& parameter,
                        std::size_t eps_index) const {
    for (const auto& r : rows) {
      if (r.method == method && r.parameter == parameter &&
          r.eps == config.eps_grid.at(eps_index)) {
        return &r;
      }
    }
    return nullptr;
  }
  const DiagnosticRow* find_diagnostic(const std::string& method,
                                       std::size_t eps_index) const {
    for (const auto& r : diagnostics) {
      if (r.method == method && r.eps == config.eps_grid.at(eps_index)) return &r;
    }
    return nullptr;
  }
};

// Runs all reps on a worker pool, then reduces in rep order so the output
// does not depend on the thread count.
inline StudyResult run_study(const StudyConfig& c,
                             const std::function<void(int, int)>& progress = {}) {
  c.validate();
  StudyResult res;
  res.config = c;
  res.parameters = study_parameters(c);
  const std::size_t n_params = res.parameters.size();
  const std::size_t n_eps = c.eps_grid.size();

  std::vector<RepOutcome> reps(static_cast<std::size_t>(c.reps));
  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::exception_ptr fatal;
  std::mutex fatal_mu;
  unsigned workers = c.threads > 0 ? static_cast<unsigned>(c.threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(c.reps));
  auto work = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= c.reps) return;
      try {
        reps[static_cast<std::size_t>(r)] = run_rep(c, r, n_params);
      } catch (...) {
        std::lock_guard lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
        next.store(c.reps);
        return;
      }
      const int d = done.fetch_add(1) + 1;
      if (progress) progress(d, c.reps);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  const std::string study = to_string(c.study);
  for (std::size_t mi = 0; mi < c.methods.size(); ++mi) {
    for (std::size_t e = 0; e < n_eps; ++e) {
      const std::size_t idx = cell_index(mi, e, n_eps);
      DiagnosticRow dr;
      dr.study = study;
      dr.method = c.methods[mi];
      dr.eps = c.eps_grid[e];
      double empty_sum = 0.0, bins_sum = 0.0;
      int empty_n = 0, bins_n = 0;
      for (const auto& rep : reps) {
        const auto& cell = rep.cells[idx];
        if (cell.failed) ++dr.failed_reps;
        if (cell.ledger_checked) {
          ++dr.ledger_checks;
          if (!cell.ledger_exact) ++dr.ledger_violations;
        }
        if (!std::isnan(cell.empty_cells)) {
          empty_sum += cell.empty_cells;
          ++empty_n;
        }
        if (!std::isnan(cell.bins)) {
          bins_sum += cell.bins;
          ++bins_n;
        }
      }
      if (empty_n) dr.mean_empty_cells = empty_sum / empty_n;
      if (bins_n) dr.mean_bins = bins_sum / bins_n;
      // Baselines are computed once per rep; count their audit once.
      if (!is_baseline(dr.method) || e == 0) {
        res.ledger_checks += dr.ledger_checks;
        res.ledger_violations += dr.ledger_violations;
      }
      res.diagnostics.push_back(dr);

      for (std::size_t p = 0; p < n_params; ++p) {
        const Parameter& par = res.parameters[p];
        int used = 0, covered = 0;
        double sum = 0.0, sum_sq = 0.0, width = 0.0;
        for (const auto& rep : reps) {
          const auto& po = rep.cells[idx].params[p];
          if (!po.usable) continue;
          ++used;
          const double d = po.point - par.truth;
          sum += d;
          sum_sq += d * d;
          width += po.ci_high - po.ci_low;
          covered += po.ci_low <= par.truth && par.truth <= po.ci_high;
        }
        MetricRow row;
        row.study = study;
        row.method = c.methods[mi];
        row.parameter = par.name;
        row.eps = c.eps_grid[e];
        row.reps_used = used;
        row.usable_fraction = static_cast<double>(used) / c.reps;
        if (used > 0) {
          row.bias = sum / used / par.scale;
          row.rmse = std::sqrt(sum_sq / used) / par.scale;
          row.coverage = static_cast<double>(covered) / used;
          row.ci_width = width / used / par.scale;
        } else {
          row.bias = row.rmse = row.coverage = row.ci_width =
              std::numeric_limits<double>::quiet_NaN();
        }
        res.rows.push_back(row);
      }
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Reporting.

inline const char* kMetricHeader =
    "study,method,parameter,eps,bias,rmse,coverage,ci_width,usable_fraction,reps_used";

inline void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows) {
  using dips::internal::format_double;
  out << kMetricHeader << '\n';
  for (const auto& r : rows) {
    out << r.study << ',' << r.method << ',' << r.parameter << ',' << format_double(r.eps)
        << ',' << format_double(r.bias) << ',' << format_double(r.rmse) << ','
        << format_double(r.coverage) << ',' << format_double(r.ci_width) << ','
        << format_double(r.usable_fraction) << ',' << r.reps_used << '\n';
  }
}

inline std::vector<MetricRow> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricHeader) {
    throw IoError("read_metrics_csv: unexpected header");
  }
  std::vector<MetricRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = dips::internal::split_csv_line(line);
    if (f.size() != 10) throw IoError("read_metrics_csv: expected 10 fields");
    auto num = [&](std::size_t i) {
      const auto v = dips::internal::parse_double(f[i]);
      if (!v) throw IoError("read_metrics_csv: bad number '" + f[i] + "'");
      return *v;
    };
    MetricRow r;
    r.study = f[0];
    r.method = f[1];
    r.parameter = f[2];
    r.eps = num(3);
    r.bias = num(4);
    r.rmse = num(5);
    r.coverage = num(6);
    r.ci_width = num(7);
    r.usable_fraction = num(8);
    r.reps_used = static_cast<int>(num(9));
    rows.push_back(r);
  }
  return rows;
}

inline void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticRow> rows) {
  using dips::internal::format_double;
  out << "study,method,eps,mean_empty_cells,mean_bins,failed_reps,ledger_checks,"
         "ledger_violations\n";
  for (const auto& r : rows) {
    out << r.study << ',' << r.method << ',' << format_double(r.eps) << ','
        << format_double(r.mean_empty_cells) << ',' << format_double(r.mean_bins) << ','
        << r.failed_reps << ',' << r.ledger_checks << ',' << r.ledger_violations << '\n';
  }
}

// Writes <study>_metrics.csv, <study>_diagnostics.csv and <study>_index.json
// into `dir`, creating it if needed.
inline void write_report(const StudyResult& res, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  const std::string study = to_string(res.config.study);
  auto open = [&](const std::string& name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw IoError("cannot write '" + (dir / name).string() + "'");
    return f;
  };
  {
    auto f = open(study + "_metrics.csv");
    write_metrics_csv(f, res.rows);
  }
  {
    auto f = open(study + "_diagnostics.csv");
    write_diagnostics_csv(f, res.diagnostics);
  }
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : res.parameters) {
    params.push_back({{"name", p.name}, {"truth", p.truth}, {"scale", p.scale}});
  }
  nlohmann::json index = {
      {"version", kVersion},
      {"git_describe", DIPS_GIT_DESCRIBE},
      {"config", res.config.to_json()},
      {"parameters", params},
      {"files", {study + "_metrics.csv", study + "_diagnostics.csv"}},
      {"ledger_audit",
       {{"checks", res.ledger_checks}, {"violations", res.ledger_violations}}}};
  auto f = open(study + "_index.json");
  f << index.dump(2) << '\n';
  if (!f) throw IoError("write failed for index");
}

}  // namespace dips::harness
