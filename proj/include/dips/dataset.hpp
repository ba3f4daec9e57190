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

// Column-major tables over a declared schema, and their CSV form.
//
// Categorical values are stored as level codes 0..L-1 (held in doubles so
// every column shares one storage type). Continuous columns carry closed
// bounds [lo, hi] which every value must respect.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <initializer_list>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dips/error.hpp"
#include "json.hpp"

namespace dips {

enum class ColumnType { kCategorical, kContinuous };

struct ColumnSpec {
  std::string name;
  ColumnType type = ColumnType::kContinuous;
  std::vector<std::string> levels;  // categorical only
  double lo = 0.0;                  // continuous only
  double hi = 0.0;

  static ColumnSpec categorical(std::string name, std::vector<std::string> levels) {
    if (levels.empty()) {
      throw InvalidArgument("categorical column '" + name + "' has no levels");
    }
    ColumnSpec c;
    c.name = std::move(name);
    c.type = ColumnType::kCategorical;
    c.levels = std::move(levels);
    return c;
  }
  // Levels named "0", "1", ..., "count-1".
  static ColumnSpec categorical(std::string name, int count) {
    std::vector<std::string> levels;
    for (int i = 0; i < count; ++i) levels.push_back(std::to_string(i));
    return categorical(std::move(name), std::move(levels));
  }
  static ColumnSpec continuous(std::string name, double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
      throw InvalidArgument("continuous column '" + name +
                            "' needs finite bounds lo < hi");
    }
    ColumnSpec c;
    c.name = std::move(name);
    c.type = ColumnType::kContinuous;
    c.lo = lo;
    c.hi = hi;
    return c;
  }

  bool is_categorical() const { return type == ColumnType::kCategorical; }
  int level_count() const { return static_cast<int>(levels.size()); }

  bool admits(double v) const {
    if (is_categorical()) {
      return v >= 0.0 && v < level_count() && v == std::floor(v);
    }
    return v >= lo && v <= hi;
  }
};

class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<ColumnSpec> columns) : columns_(std::move(columns)) {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (columns_[i].name == columns_[j].name) {
          throw InvalidArgument("duplicate column name '" + columns_[i].name + "'");
        }
      }
    }
  }

  std::size_t size() const { return columns_.size(); }
  const ColumnSpec& operator[](std::size_t j) const { return columns_.at(j); }
  const std::vector<ColumnSpec>& columns() const { return columns_; }

  std::size_t index_of(std::string_view name) const {
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if (columns_[j].name == name) return j;
    }
    throw InvalidArgument("no column named '" + std::string(name) + "'");
  }

  friend bool operator==(const Schema& a, const Schema& b) {
    if (a.columns_.size() != b.columns_.size()) return false;
    for (std::size_t j = 0; j < a.columns_.size(); ++j) {
      const auto& x = a.columns_[j];
      const auto& y = b.columns_[j];
      if (x.name != y.name || x.type != y.type || x.levels != y.levels ||
          x.lo != y.lo || x.hi != y.hi) {
        return false;
      }
    }
    return true;
  }

  nlohmann::json to_json() const {
    auto cols = nlohmann::json::array();
    for (const auto& c : columns_) {
      if (c.is_categorical()) {
        cols.push_back({{"name", c.name}, {"type", "categorical"}, {"levels", c.levels}});
      } else {
        cols.push_back({{"name", c.name}, {"type", "continuous"}, {"lo", c.lo}, {"hi", c.hi}});
      }
    }
    return {{"columns", cols}};
  }

  // Throws ConfigError on malformed input.
  static Schema from_json(const nlohmann::json& j) {
    try {
      std::vector<ColumnSpec> cols;
      for (const auto& c : j.at("columns")) {
        const std::string name = c.at("name").get<std::string>();
        const std::string type = c.at("type").get<std::string>();
        if (type == "categorical") {
          std::vector<std::string> levels;
          for (const auto& l : c.at("levels")) {
            levels.push_back(l.is_string() ? l.get<std::string>() : l.dump());
          }
          cols.push_back(ColumnSpec::categorical(name, std::move(levels)));
        } else if (type == "continuous") {
          cols.push_back(ColumnSpec::continuous(name, c.at("lo").get<double>(),
                                                c.at("hi").get<double>()));
        } else {
          throw ConfigError("unknown column type '" + type + "'");
        }
      }
      return Schema(std::move(cols));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("schema: ") + e.what());
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("schema: ") + e.what());
    }
  }

 private:
  std::vector<ColumnSpec> columns_;
};

class TabularDataset {
 public:
  TabularDataset() = default;

  // Empty table with the given schema.
  explicit TabularDataset(Schema schema)
      : schema_(std::move(schema)), cols_(schema_.size()) {}

  // Validates every value against the schema; throws OutOfDomain.
  TabularDataset(Schema schema, std::vector<std::vector<double>> columns)
      : schema_(std::move(schema)), cols_(std::move(columns)) {
    if (cols_.size() != schema_.size()) {
      throw InvalidArgument("TabularDataset: column count does not match schema");
    }
    n_ = cols_.empty() ? 0 : cols_[0].size();
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      if (cols_[j].size() != n_) {
        throw InvalidArgument("TabularDataset: ragged columns");
      }
      for (double v : cols_[j]) check(j, v);
    }
  }

  const Schema& schema() const { return schema_; }
  std::size_t rows() const { return n_; }
  std::size_t cols() const { return cols_.size(); }
  const std::vector<double>& column(std::size_t j) const { return cols_.at(j); }
  const std::vector<double>& column(std::string_view name) const {
    return cols_[schema_.index_of(name)];
  }
  double at(std::size_t i, std::size_t j) const { return cols_[j][i]; }
  int code(std::size_t i, std::size_t j) const {
    return static_cast<int>(cols_[j][i]);
  }

  void reserve(std::size_t rows) {
    for (auto& c : cols_) c.reserve(rows);
  }

  void append_row(std::span<const double> row) {
    if (row.size() != cols_.size()) {
      throw InvalidArgument("append_row: width does not match schema");
    }
    for (std::size_t j = 0; j < row.size(); ++j) check(j, row[j]);
    for (std::size_t j = 0; j < row.size(); ++j) cols_[j].push_back(row[j]);
    ++n_;
  }
  void append_row(std::initializer_list<double> row) {
    append_row(std::span<const double>(row.begin(), row.size()));
  }

 private:
  void check(std::size_t j, double v) const {
    if (!schema_[j].admits(v)) {
      std::ostringstream os;
      os << "value " << v << " outside the domain of column '" << schema_[j].name
         << "'";
      throw OutOfDomain(os.str());
    }
  }

  Schema schema_;
  std::vector<std::vector<double>> cols_;
  std::size_t n_ = 0;
};

namespace internal {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  out.push_back(cell);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t\"");
    const auto e = s.find_last_not_of(" \t\"");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

inline std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t pos = 0;
  try {
    const double v = std::stod(s, &pos);
    if (pos != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace internal

// Reads a header-first CSV. Columns are matched to `schema` by name; a
// categorical cell may hold either a level label or a level code.
inline TabularDataset read_csv(std::istream& in, const Schema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("read_csv: empty input");
  const auto header = internal::split_csv_line(line);
  std::vector<std::size_t> where(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j) {
    auto it = std::find(header.begin(), header.end(), schema[j].name);
    if (it == header.end()) {
      throw ConfigError("read_csv: column '" + schema[j].name + "' missing");
    }
    where[j] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<std::vector<double>> cols(schema.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = internal::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw IoError("read_csv: line " + std::to_string(lineno) +
                    " has the wrong number of fields");
    }
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const std::string& s = cells[where[j]];
      const auto& spec = schema[j];
      double v;
      if (spec.is_categorical()) {
        auto it = std::find(spec.levels.begin(), spec.levels.end(), s);
        if (it != spec.levels.end()) {
          v = static_cast<double>(it - spec.levels.begin());
        } else {
          throw OutOfDomain("read_csv: line " + std::to_string(lineno) +
                            ": '" + s + "' is not a level of '" + spec.name + "'");
        }
      } else {
        auto p = internal::parse_double(s);
        if (!p) {
          throw IoError("read_csv: line " + std::to_string(lineno) +
                        ": '" + s + "' is not a number");
        }
        v = *p;
      }
      cols[j].push_back(v);
    }
  }
  return TabularDataset(schema, std::move(cols));
}

inline TabularDataset read_csv(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_csv(in, schema);
}

// Schema for a CSV whose cells are all non-negative integers: every column
// becomes categorical with levels "0".."max". Throws ConfigError otherwise.
inline Schema infer_categorical_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("infer schema: empty input");
  const auto header = internal::split_csv_line(line);
  std::vector<long> max_code(header.size(), -1);
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = internal::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw IoError("infer schema: ragged row");
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      auto v = internal::parse_double(cells[j]);
      if (!v || *v < 0 || *v != std::floor(*v) || *v > 1e6) {
        throw ConfigError("column '" + header[j] +
                          "' is not integer-coded; pass --schema to describe it");
      }
      max_code[j] = std::max(max_code[j], static_cast<long>(*v));
    }
  }
  std::vector<ColumnSpec> cols;
  for (std::size_t j = 0; j < header.size(); ++j) {
    cols.push_back(ColumnSpec::categorical(
        header[j], static_cast<int>(std::max<long>(max_code[j], 0) + 1)));
  }
  return Schema(std::move(cols));
}

inline void write_csv(std::ostream& out, const TabularDataset& data) {
  const auto& schema = data.schema();
  for (std::size_t j = 0; j < schema.size(); ++j) {
    out << (j ? "," : "") << schema[j].name;
  }
  out << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < schema.size(); ++j) {
      if (j) out << ',';
      if (schema[j].is_categorical()) {
        out << schema[j].levels[data.code(i, j)];
      } else {
        out << internal::format_double(data.at(i, j));
      }
    }
    out << '\n';
  }
}

inline void write_csv(const std::string& path, const TabularDataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_csv(out, data);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace dips
