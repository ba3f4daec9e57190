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

// Gaussian mixture over the cells of a cross-tabulation: cell membership is
// Multinomial(pi), and the continuous block is N(mu_k, Sigma) in cell k with
// a covariance shared by all cells.
//
// Priors: Dirichlet(1/2) on pi, f(mu, Sigma) ~ |Sigma|^-1.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dips/dataset.hpp"
#include "dips/hist_synth.hpp"
#include "dips/param_synth.hpp"
#include "dips/randvar.hpp"

namespace dips::models {

class GaussianMixtureModel {
 public:
  struct Params {
    std::vector<double> pi;
    Matrix mu;  // cells x p
    SymmetricMatrix sigma;
    bool degenerate = false;  // sanitized S needed an eigenvalue floor
  };

  // cat_columns: categorical columns forming the cells (row-major, last
  // fastest). z_columns: continuous columns. cell_lo / cell_hi: cells x p
  // bounds of z within each cell.
  GaussianMixtureModel(Schema schema, std::vector<std::size_t> cat_columns,
                       std::vector<std::size_t> z_columns, Matrix cell_lo, Matrix cell_hi,
                       double dirichlet_alpha = 0.5, double count_delta = 1.0)
      : schema_(std::move(schema)),
        cat_(std::move(cat_columns)),
        z_(std::move(z_columns)),
        lo_(std::move(cell_lo)),
        hi_(std::move(cell_hi)),
        alpha_(dirichlet_alpha),
        count_delta_(count_delta) {
    std::vector<Axis> axes;
    for (auto c : cat_) {
      if (!schema_[c].is_categorical()) {
        throw InvalidArgument("GaussianMixtureModel: cell column is not categorical");
      }
      axes.push_back(Axis::categorical(c, schema_[c].level_count()));
    }
    for (auto c : z_) {
      if (schema_[c].is_categorical()) {
        throw InvalidArgument("GaussianMixtureModel: z column is categorical");
      }
    }
    if (cat_.size() + z_.size() != schema_.size()) {
      throw InvalidArgument("GaussianMixtureModel: columns must cover the schema");
    }
    cells_ = GridSpec(std::move(axes));
    const auto k = static_cast<Eigen::Index>(cells_.cell_count());
    const auto p = static_cast<Eigen::Index>(z_.size());
    if (lo_.rows() != k || hi_.rows() != k || lo_.cols() != p || hi_.cols() != p) {
      throw InvalidArgument("GaussianMixtureModel: cell bounds have the wrong shape");
    }
    if (((hi_ - lo_).array() <= 0.0).any()) {
      throw InvalidArgument("GaussianMixtureModel: cell bounds need lo < hi");
    }
    range_ = (hi_ - lo_).colwise().maxCoeff().transpose();
  }

  const Schema& schema() const { return schema_; }
  const GridSpec& cells() const { return cells_; }
  std::size_t cell_count() const { return cells_.cell_count(); }
  std::size_t dims() const { return z_.size(); }

  std::vector<StatisticGroup> sufficient_statistics(const TabularDataset& data) const {
    const std::size_t k_cells = cell_count();
    const std::size_t p = dims();
    const double n = static_cast<double>(data.rows());
    std::vector<double> counts(k_cells, 0.0);
    Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(k_cells), static_cast<Eigen::Index>(p));
    std::vector<std::size_t> cell_of(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) {
      const std::size_t c = cells_.cell_of(data, i);
      cell_of[i] = c;
      counts[c] += 1.0;
      for (std::size_t j = 0; j < p; ++j) sums(c, j) += data.at(i, z_[j]);
    }
    Matrix means = sums;
    std::size_t nonempty = 0;
    for (std::size_t c = 0; c < k_cells; ++c) {
      if (counts[c] > 0) {
        means.row(c) /= counts[c];
        ++nonempty;
      }
    }
    const double dof = n - static_cast<double>(nonempty);
    if (!(dof > 0.0)) throw Degenerate("GaussianMixtureModel: n <= number of cells");
    Matrix scatter = Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    Vector d(static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < data.rows(); ++i) {
      for (std::size_t j = 0; j < p; ++j) d(j) = data.at(i, z_[j]) - means(cell_of[i], j);
      scatter.noalias() += d * d.transpose();
    }
    const Matrix s = scatter / dof;

    std::vector<StatisticGroup> out;
    StatisticGroup gn;
    gn.label = "n";
    gn.values = counts;
    gn.deltas.assign(k_cells, count_delta_);
    gn.lo.assign(k_cells, 0.0);
    gn.hi.assign(k_cells, n);
    gn.disjoint = true;
    out.push_back(std::move(gn));

    for (std::size_t j = 0; j < p; ++j) {
      StatisticGroup gz;
      gz.label = "zbar" + std::to_string(j + 1);
      gz.disjoint = true;
      for (std::size_t c = 0; c < k_cells; ++c) {
        const double lo = lo_(c, j);
        const double hi = hi_(c, j);
        if (counts[c] > 0) {
          gz.values.push_back(means(c, j));
          gz.deltas.push_back((hi - lo) / counts[c]);
        } else {
          gz.values.push_back(std::numeric_limits<double>::quiet_NaN());
          gz.deltas.push_back(hi - lo);
        }
        gz.lo.push_back(lo);
        gz.hi.push_back(hi);
      }
      out.push_back(std::move(gz));
    }

    const double kk = static_cast<double>(k_cells);
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = a; b < p; ++b) {
        StatisticGroup gs;
        gs.label = "S" + std::to_string(a + 1) + std::to_string(b + 1);
        gs.values = {s(a, b)};
        gs.deltas = {range_(a) * range_(b) * (n - 1.0) / (n * (n - kk))};
        const double hi_ab = range_(a) * range_(b) / 4.0 * n / (n - kk);
        gs.lo = {a == b ? 0.0 : -hi_ab};
        gs.hi = {hi_ab};
        out.push_back(std::move(gs));
      }
    }
    return out;
  }

  Params posterior_draw(RngStream& rng, std::span<const SanitizedGroup> groups,
                        std::size_t n) const {
    const std::size_t k_cells = cell_count();
    const std::size_t p = dims();
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k_cells);
    Params out;

    const auto& gn = find_group(groups, "n");
    std::vector<double> shape(k_cells);
    for (std::size_t c = 0; c < k_cells; ++c) shape[c] = alpha_ + gn.value(c);
    out.pi = sample_dirichlet(rng, shape);

    Matrix s(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = a; b < p; ++b) {
        const double v =
            find_group(groups, "S" + std::to_string(a + 1) + std::to_string(b + 1)).value(0);
        s(a, b) = v;
        s(b, a) = v;
      }
    }
    SymmetricMatrix s_sym(s);
    if (!s_sym.is_pd() || s_sym.min_eigenvalue() <= 1e-10 * std::max(1.0, s.trace())) {
      s_sym = s_sym.clamp_eigenvalues(1e-6 * std::max(1e-3, s.trace()));
      out.degenerate = true;
    }
    const double dof = nn - kk;
    out.sigma = sample_inv_wishart(rng, dof, SymmetricMatrix(dof * s_sym.matrix()));

    out.mu.resize(static_cast<Eigen::Index>(k_cells), static_cast<Eigen::Index>(p));
    std::vector<const SanitizedGroup*> gz(p);
    for (std::size_t j = 0; j < p; ++j) gz[j] = &find_group(groups, "zbar" + std::to_string(j + 1));
    Vector center(static_cast<Eigen::Index>(p));
    for (std::size_t c = 0; c < k_cells; ++c) {
      bool present = true;
      for (std::size_t j = 0; j < p; ++j) {
        center(j) = gz[j]->value(c);
        if (std::isnan(center(j))) present = false;
      }
      if (!present) {
        // No data in the cell: fall back to a uniform draw over its bounds.
        for (std::size_t j = 0; j < p; ++j) {
          out.mu(c, j) = sample_uniform(rng, lo_(c, j), hi_(c, j));
        }
        continue;
      }
      const double nk = std::max(1.0, gn.value(c));
      const Vector mu = sample_mvnormal(rng, center, SymmetricMatrix(out.sigma.matrix() / nk));
      out.mu.row(c) = mu.transpose();
    }
    return out;
  }

  TabularDataset predictive_draw(RngStream& rng, const Params& params,
                                 std::size_t n) const {
    const auto counts = sample_multinomial(rng, static_cast<std::int64_t>(n), params.pi);
    const std::size_t p = dims();
    const Matrix l = Eigen::LLT<Matrix>(params.sigma.matrix()).matrixL();
    std::vector<std::vector<double>> cols(schema_.size());
    for (auto& c : cols) c.reserve(n);
    Vector z(static_cast<Eigen::Index>(p));
    for (std::size_t c = 0; c < counts.size(); ++c) {
      const auto idx = cells_.unravel(c);
      for (std::int64_t r = 0; r < counts[c]; ++r) {
        for (std::size_t a = 0; a < cat_.size(); ++a) cols[cat_[a]].push_back(idx[a]);
        for (std::size_t j = 0; j < p; ++j) z(j) = sample_standard_normal(rng);
        const Vector x = params.mu.row(c).transpose() + l * z;
        for (std::size_t j = 0; j < p; ++j) {
          cols[z_[j]].push_back(std::clamp(x(j), lo_(c, j), hi_(c, j)));
        }
      }
    }
    shuffle_rows(rng, cols);
    return TabularDataset(schema_, std::move(cols));
  }

 private:
  Schema schema_;
  std::vector<std::size_t> cat_;
  std::vector<std::size_t> z_;
  Matrix lo_;
  Matrix hi_;
  Vector range_;
  double alpha_;
  double count_delta_;
  GridSpec cells_;
};

static_assert(ModipsModel<GaussianMixtureModel>);

}  // namespace dips::models
