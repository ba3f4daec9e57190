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

// Histogram-based synthesis: grids, raw and perturbed histograms, the
// smoothed histogram density, the Laplace sanitizer on cross-tabulations
// and sampling synthetic rows from cell probabilities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dips/dataset.hpp"
#include "dips/error.hpp"
#include "dips/mechanisms.hpp"
#include "dips/randvar.hpp"
#include "json.hpp"

namespace dips {

// One dimension of a grid. A categorical axis has one cell per level; a
// binned axis splits [lo, hi] into bins of equal width anchored at lo, the
// last bin being cut at hi.
struct Axis {
  enum class Kind { kCategorical, kBinned };

  Kind kind = Kind::kBinned;
  std::size_t column = 0;  // column of the dataset this axis reads
  int levels = 0;
  double lo = 0.0;
  double hi = 0.0;
  double width = 0.0;
  int bins = 0;

  static Axis categorical(std::size_t column, int levels) {
    if (levels < 1) throw InvalidArgument("Axis: categorical needs >= 1 level");
    Axis a;
    a.kind = Kind::kCategorical;
    a.column = column;
    a.levels = levels;
    return a;
  }

  // `bins` equal bins over [lo, hi].
  static Axis binned(std::size_t column, double lo, double hi, int bins) {
    if (!(lo < hi)) throw InvalidArgument("Axis: binned needs lo < hi");
    if (bins < 1) throw InvalidArgument("Axis: binned needs >= 1 bin");
    Axis a;
    a.kind = Kind::kBinned;
    a.column = column;
    a.lo = lo;
    a.hi = hi;
    a.bins = bins;
    a.width = (hi - lo) / bins;
    return a;
  }

  // ceil((hi - lo) / h) bins of width h from lo; the last one ends at hi.
  static Axis binned_by_width(std::size_t column, double lo, double hi, double h) {
    if (!(lo < hi)) throw InvalidArgument("Axis: binned needs lo < hi");
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw InvalidArgument("Axis: bin width must be finite and > 0");
    }
    const double k = std::ceil((hi - lo) / h);
    Axis a;
    a.kind = Kind::kBinned;
    a.column = column;
    a.lo = lo;
    a.hi = hi;
    a.bins = static_cast<int>(std::clamp(k, 1.0, 1e7));
    a.width = a.bins == 1 ? hi - lo : h;
    return a;
  }

  int size() const { return kind == Kind::kCategorical ? levels : bins; }

  double bin_lo(int b) const { return lo + width * b; }
  double bin_hi(int b) const {
    return b + 1 >= bins ? hi : std::min(hi, lo + width * (b + 1));
  }
  // Length of bin b, or 1 for a categorical level.
  double extent(int b) const {
    return kind == Kind::kCategorical ? 1.0 : bin_hi(b) - bin_lo(b);
  }
  double total_extent() const {
    return kind == Kind::kCategorical ? static_cast<double>(levels) : hi - lo;
  }

  // Index of the cell holding v; throws OutOfDomain.
  int locate(double v) const {
    if (kind == Kind::kCategorical) {
      if (!(v >= 0.0 && v < levels && v == std::floor(v))) {
        throw OutOfDomain("Axis: level code out of range");
      }
      return static_cast<int>(v);
    }
    if (!(v >= lo && v <= hi)) throw OutOfDomain("Axis: value outside [lo, hi]");
    int b = static_cast<int>(std::floor((v - lo) / width));
    b = std::clamp(b, 0, bins - 1);
    // Guard against rounding at bin edges.
    while (b > 0 && v < bin_lo(b)) --b;
    while (b + 1 < bins && v >= bin_hi(b)) ++b;
    return b;
  }

  nlohmann::json to_json() const {
    if (kind == Kind::kCategorical) {
      return {{"kind", "categorical"}, {"column", column}, {"levels", levels}};
    }
    return {{"kind", "binned"}, {"column", column}, {"lo", lo},
            {"hi", hi},         {"width", width},   {"bins", bins}};
  }
};

// Product grid over several axes. Cells are numbered row-major: the last
// axis varies fastest.
class GridSpec {
 public:
  GridSpec() = default;
  explicit GridSpec(std::vector<Axis> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) throw InvalidArgument("GridSpec: no axes");
    cells_ = 1;
    for (const auto& a : axes_) {
      cells_ *= static_cast<std::size_t>(a.size());
      if (cells_ > (std::size_t{1} << 31)) {
        throw InvalidArgument("GridSpec: too many cells");
      }
    }
  }

  const std::vector<Axis>& axes() const { return axes_; }
  std::size_t cell_count() const { return cells_; }

  std::size_t ravel(std::span<const int> idx) const {
    std::size_t c = 0;
    for (std::size_t d = 0; d < axes_.size(); ++d) {
      c = c * static_cast<std::size_t>(axes_[d].size()) +
          static_cast<std::size_t>(idx[d]);
    }
    return c;
  }
  std::vector<int> unravel(std::size_t cell) const {
    std::vector<int> idx(axes_.size());
    for (std::size_t d = axes_.size(); d-- > 0;) {
      const auto s = static_cast<std::size_t>(axes_[d].size());
      idx[d] = static_cast<int>(cell % s);
      cell /= s;
    }
    return idx;
  }

  std::size_t cell_of(const TabularDataset& data, std::size_t row) const {
    std::size_t c = 0;
    for (const auto& a : axes_) {
      c = c * static_cast<std::size_t>(a.size()) +
          static_cast<std::size_t>(a.locate(data.at(row, a.column)));
    }
    return c;
  }

  double cell_volume(std::size_t cell) const {
    const auto idx = unravel(cell);
    double v = 1.0;
    for (std::size_t d = 0; d < axes_.size(); ++d) v *= axes_[d].extent(idx[d]);
    return v;
  }
  double total_volume() const {
    double v = 1.0;
    for (const auto& a : axes_) v *= a.total_extent();
    return v;
  }

  nlohmann::json to_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& a : axes_) arr.push_back(a.to_json());
    return {{"axes", arr}, {"cells", cells_}};
  }

 private:
  std::vector<Axis> axes_;
  std::size_t cells_ = 0;
};

struct Histogram {
  GridSpec grid;
  std::vector<double> counts;
  double n = 0.0;  // sum of counts

  // Cell proportions p_k = counts_k / n. Throws AllCellsZero if n == 0.
  std::vector<double> proportions() const {
    if (!(n > 0.0)) throw AllCellsZero("histogram has no mass");
    std::vector<double> p(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) p[k] = counts[k] / n;
    return p;
  }

  // Density histogram estimate at cell k: p_k / volume_k.
  double density(std::size_t k) const {
    return counts[k] / n / grid.cell_volume(k);
  }

  nlohmann::json to_json() const {
    return {{"grid", grid.to_json()}, {"counts", counts}, {"n", n}};
  }
};

// Scott's normal-reference width 3.5 S n^(-1/(2+d)); d = 1 gives the
// familiar n^(-1/3).
inline double bin_width_scott(double sample_sd, double n, int dims = 1) {
  if (!(sample_sd > 0.0) || !std::isfinite(sample_sd)) {
    throw InvalidArgument("bin_width_scott: sample sd must be > 0");
  }
  if (!(n >= 2.0)) throw InvalidArgument("bin_width_scott: n must be >= 2");
  if (dims < 1) throw InvalidArgument("bin_width_scott: dims must be >= 1");
  return 3.5 * sample_sd * std::pow(n, -1.0 / (2.0 + dims));
}

// Sturges: range / (ceil(log2 n) + 1).
inline double bin_width_sturges(double range, double n) {
  if (!(range > 0.0)) throw InvalidArgument("bin_width_sturges: range must be > 0");
  if (!(n >= 2.0)) throw InvalidArgument("bin_width_sturges: n must be >= 2");
  return range / (std::ceil(std::log2(n)) + 1.0);
}

// Freedman-Diaconis: 2 IQR n^(-1/3).
inline double bin_width_freedman_diaconis(double iqr, double n) {
  if (!(iqr > 0.0)) throw InvalidArgument("bin_width_freedman_diaconis: iqr must be > 0");
  if (!(n >= 2.0)) throw InvalidArgument("bin_width_freedman_diaconis: n must be >= 2");
  return 2.0 * iqr * std::pow(n, -1.0 / 3.0);
}

inline Histogram build_histogram(const TabularDataset& data, const GridSpec& grid) {
  Histogram h;
  h.grid = grid;
  h.counts.assign(grid.cell_count(), 0.0);
  for (std::size_t i = 0; i < data.rows(); ++i) h.counts[grid.cell_of(data, i)] += 1.0;
  h.n = static_cast<double>(data.rows());
  return h;
}

// Histogram over a subset of rows.
inline Histogram build_histogram(const TabularDataset& data, const GridSpec& grid,
                                 std::span<const std::size_t> rows) {
  Histogram h;
  h.grid = grid;
  h.counts.assign(grid.cell_count(), 0.0);
  for (std::size_t i : rows) h.counts[grid.cell_of(data, i)] += 1.0;
  h.n = static_cast<double>(rows.size());
  return h;
}

// n*_k = n_k + Lap(0, delta / eps) for every cell, then BIT at 0. Each cell
// receives the full eps (cells are disjoint). The returned histogram's n is
// the sum of sanitized counts; throws AllCellsZero when that sum is 0.
inline Histogram perturb_histogram(RngStream& rng, const Histogram& hist, double eps,
                                   double delta = 1.0) {
  const double scale = laplace_scale(delta, eps);
  Histogram out;
  out.grid = hist.grid;
  out.counts.resize(hist.counts.size());
  double total = 0.0;
  for (std::size_t k = 0; k < hist.counts.size(); ++k) {
    const double v = hist.counts[k] + sample_laplace(rng, 0.0, scale);
    out.counts[k] = std::max(0.0, v);
    total += out.counts[k];
  }
  out.n = total;
  if (!(total > 0.0)) throw AllCellsZero("every sanitized cell count is zero");
  return out;
}

// lambda = K / (K + n (e^(eps/n) - 1)), the smallest mixing weight for which
// the smoothed histogram is eps-DP.
inline double smoothing_lambda(double cells, double n, double eps) {
  if (!(cells >= 1.0)) throw InvalidArgument("smoothing_lambda: K must be >= 1");
  if (!(n >= 1.0)) throw InvalidArgument("smoothing_lambda: n must be >= 1");
  if (!(eps > 0.0)) throw InvalidArgument("smoothing_lambda: eps must be > 0");
  const double growth = n * std::expm1(eps / n);
  if (std::isinf(growth)) return 0.0;
  return cells / (cells + growth);
}

// Mixture (1 - lambda) f_K + lambda * Omega, with Omega the uniform density
// over the grid. Stored as per-cell probabilities.
struct SmoothedHistogram {
  GridSpec grid;
  double lambda = 0.0;
  std::vector<double> probs;

  // Density at cell k (probability over volume).
  double density(std::size_t k) const { return probs[k] / grid.cell_volume(k); }
};

inline SmoothedHistogram smooth_histogram(const Histogram& hist, double eps) {
  for (const auto& a : hist.grid.axes()) {
    if (a.kind == Axis::Kind::kBinned &&
        !(std::isfinite(a.lo) && std::isfinite(a.hi))) {
      throw InvalidArgument("smooth_histogram: unbounded axis");
    }
  }
  SmoothedHistogram s;
  s.grid = hist.grid;
  const std::size_t k_cells = hist.grid.cell_count();
  s.lambda = smoothing_lambda(static_cast<double>(k_cells), hist.n, eps);
  const double volume = hist.grid.total_volume();
  const auto p = hist.proportions();
  s.probs.resize(k_cells);
  for (std::size_t k = 0; k < k_cells; ++k) {
    s.probs[k] =
        (1.0 - s.lambda) * p[k] + s.lambda * hist.grid.cell_volume(k) / volume;
  }
  return s;
}

// Writes one synthetic row drawn uniformly inside `cell` into `row`, at the
// positions given by each axis' column.
inline void sample_point_in_cell(RngStream& rng, const GridSpec& grid, std::size_t cell,
                                 std::span<double> row) {
  const auto idx = grid.unravel(cell);
  for (std::size_t d = 0; d < grid.axes().size(); ++d) {
    const auto& a = grid.axes()[d];
    if (a.kind == Axis::Kind::kCategorical) {
      row[a.column] = idx[d];
    } else {
      row[a.column] = sample_uniform(rng, a.bin_lo(idx[d]), a.bin_hi(idx[d]));
    }
  }
}

inline void shuffle_rows(RngStream& rng, std::vector<std::vector<double>>& cols) {
  if (cols.empty()) return;
  const std::size_t n = cols[0].size();
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.uniform_int(i);
    for (auto& c : cols) std::swap(c[i - 1], c[j]);
  }
}

// Draws n_out rows: cell counts ~ Multinomial(n_out, probs), then each row
// uniform within its cell. The grid's axes must cover every column of
// `schema`.
inline TabularDataset sample_from_histogram(RngStream& rng, const GridSpec& grid,
                                            std::span<const double> probs,
                                            std::size_t n_out, const Schema& schema) {
  if (probs.size() != grid.cell_count()) {
    throw InvalidArgument("sample_from_histogram: probs length != cell count");
  }
  std::vector<bool> covered(schema.size(), false);
  for (const auto& a : grid.axes()) {
    if (a.column >= schema.size()) {
      throw InvalidArgument("sample_from_histogram: axis column out of range");
    }
    covered[a.column] = true;
  }
  if (std::find(covered.begin(), covered.end(), false) != covered.end()) {
    throw InvalidArgument("sample_from_histogram: grid does not cover the schema");
  }
  const auto counts =
      sample_multinomial(rng, static_cast<std::int64_t>(n_out), probs);
  std::vector<std::vector<double>> cols(schema.size());
  for (auto& c : cols) c.reserve(n_out);
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

inline TabularDataset sample_from_histogram(RngStream& rng, const SmoothedHistogram& s,
                                            std::size_t n_out, const Schema& schema) {
  return sample_from_histogram(rng, s.grid, s.probs, n_out, schema);
}

inline TabularDataset sample_from_histogram(RngStream& rng, const Histogram& h,
                                            std::size_t n_out, const Schema& schema) {
  const auto p = h.proportions();
  return sample_from_histogram(rng, h.grid, p, n_out, schema);
}

// Grid with one categorical axis per column; every column must be
// categorical.
inline GridSpec crosstab_grid(const Schema& schema) {
  std::vector<Axis> axes;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (!schema[j].is_categorical()) {
      throw InvalidArgument("crosstab: column '" + schema[j].name +
                            "' is not categorical");
    }
    axes.push_back(Axis::categorical(j, schema[j].level_count()));
  }
  return GridSpec(std::move(axes));
}

struct CrosstabRelease {
  Histogram sanitized;
  TabularDataset synthetic;
};

// Laplace sanitizer on the full cross-tabulation of categorical data:
// perturb every cell with the full eps, BIT at 0, then draw n_out rows
// multinomially from the normalized sanitized counts.
inline CrosstabRelease laplace_sanitizer_crosstab(RngStream& rng,
                                                  const TabularDataset& data,
                                                  double eps, std::size_t n_out,
                                                  double delta = 1.0) {
  const GridSpec grid = crosstab_grid(data.schema());
  const Histogram raw = build_histogram(data, grid);
  CrosstabRelease out;
  out.sanitized = perturb_histogram(rng, raw, eps, delta);
  out.synthetic = sample_from_histogram(rng, out.sanitized, n_out, data.schema());
  return out;
}

// Cells of the categorical columns first, then a binned histogram of the
// continuous columns inside each cell. Both layers are perturbed with
// eps_counts and eps_hist respectively; cells (and bins within a cell) are
// disjoint, so each layer costs its own eps once.
struct NestedHistogramSpec {
  std::vector<std::size_t> cat_columns;
  std::vector<std::size_t> z_columns;
  Matrix cell_lo;  // cells x p
  Matrix cell_hi;
};

struct NestedHistogramStats {
  std::size_t cells = 0;
  std::size_t bins = 0;       // total z-bins over all cells
  std::size_t fallbacks = 0;  // cells whose z-histogram was all zero
};

// Per-cell z bins use Scott's width with d = number of z columns, computed
// from the cell's rows; cells with fewer than 2 rows get one bin per axis.
// A cell whose sanitized z-histogram is empty falls back to a uniform draw
// over its bounds.
inline TabularDataset nested_histogram_synthesize(RngStream& rng,
                                                  const TabularDataset& data,
                                                  const NestedHistogramSpec& spec,
                                                  double eps_counts, double eps_hist,
                                                  NestedHistogramStats* stats = nullptr,
                                                  double delta = 1.0) {
  const Schema& schema = data.schema();
  std::vector<Axis> cat_axes;
  for (auto c : spec.cat_columns) {
    cat_axes.push_back(Axis::categorical(c, schema[c].level_count()));
  }
  const GridSpec cells(std::move(cat_axes));
  const std::size_t k_cells = cells.cell_count();
  const std::size_t p = spec.z_columns.size();
  if (static_cast<std::size_t>(spec.cell_lo.rows()) != k_cells ||
      static_cast<std::size_t>(spec.cell_lo.cols()) != p ||
      spec.cell_hi.rows() != spec.cell_lo.rows() ||
      spec.cell_hi.cols() != spec.cell_lo.cols()) {
    throw InvalidArgument("nested_histogram: cell bounds have the wrong shape");
  }
  std::vector<std::vector<std::size_t>> members(k_cells);
  for (std::size_t i = 0; i < data.rows(); ++i) members[cells.cell_of(data, i)].push_back(i);

  Histogram counts;
  counts.grid = cells;
  counts.counts.resize(k_cells);
  for (std::size_t k = 0; k < k_cells; ++k) {
    counts.counts[k] = static_cast<double>(members[k].size());
  }
  counts.n = static_cast<double>(data.rows());
  const Histogram noisy_counts = perturb_histogram(rng, counts, eps_counts, delta);

  NestedHistogramStats local;
  local.cells = k_cells;
  std::vector<GridSpec> zgrids;
  std::vector<std::vector<double>> zprobs;
  zgrids.reserve(k_cells);
  zprobs.reserve(k_cells);
  for (std::size_t k = 0; k < k_cells; ++k) {
    const double nk = static_cast<double>(members[k].size());
    std::vector<Axis> axes;
    for (std::size_t j = 0; j < p; ++j) {
      const double lo = spec.cell_lo(k, j);
      const double hi = spec.cell_hi(k, j);
      double h = hi - lo;
      if (nk >= 2.0) {
        double mean = 0.0;
        for (auto i : members[k]) mean += data.at(i, spec.z_columns[j]);
        mean /= nk;
        double ss = 0.0;
        for (auto i : members[k]) {
          const double d = data.at(i, spec.z_columns[j]) - mean;
          ss += d * d;
        }
        const double sd = std::sqrt(ss / (nk - 1.0));
        if (sd > 0.0) h = bin_width_scott(sd, nk, static_cast<int>(p));
      }
      axes.push_back(Axis::binned_by_width(spec.z_columns[j], lo, hi, h));
    }
    GridSpec g(std::move(axes));
    const Histogram raw = build_histogram(data, g, members[k]);
    std::vector<double> probs;
    try {
      probs = perturb_histogram(rng, raw, eps_hist, delta).proportions();
    } catch (const AllCellsZero&) {
      probs.resize(g.cell_count());
      const double vol = g.total_volume();
      for (std::size_t b = 0; b < probs.size(); ++b) probs[b] = g.cell_volume(b) / vol;
      ++local.fallbacks;
    }
    local.bins += g.cell_count();
    zgrids.push_back(std::move(g));
    zprobs.push_back(std::move(probs));
  }

  const std::size_t n = data.rows();
  const auto n_tilde =
      sample_multinomial(rng, static_cast<std::int64_t>(n), noisy_counts.proportions());
  std::vector<std::vector<double>> cols(schema.size());
  for (auto& c : cols) c.reserve(n);
  std::vector<double> row(schema.size(), 0.0);
  for (std::size_t k = 0; k < k_cells; ++k) {
    if (n_tilde[k] == 0) continue;
    const auto idx = cells.unravel(k);
    for (std::size_t a = 0; a < spec.cat_columns.size(); ++a) {
      row[spec.cat_columns[a]] = idx[a];
    }
    const auto per_bin = sample_multinomial(rng, n_tilde[k], zprobs[k]);
    for (std::size_t b = 0; b < per_bin.size(); ++b) {
      for (std::int64_t r = 0; r < per_bin[b]; ++r) {
        sample_point_in_cell(rng, zgrids[k], b, row);
        for (std::size_t j = 0; j < row.size(); ++j) cols[j].push_back(row[j]);
      }
    }
  }
  shuffle_rows(rng, cols);
  if (stats) *stats = local;
  return TabularDataset(schema, std::move(cols));
}

}  // namespace dips
