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

// Privacy-budget arithmetic under sequential and parallel composition.
//
// A PrivacyLedger owns a total epsilon and an append-only list of charges.
// The effective spend is the sum of sequential charges plus, for every
// parallel group, the largest charge in that group. Charges may be given
// as a plain double epsilon or as an exact rational share of the total;
// when every charge is a share the spend is tracked exactly, so a release
// that splits its budget into 1/5 * 1/6 pieces lands on the total with no
// rounding drift.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dips/error.hpp"
#include "json.hpp"

namespace dips {

// Exact non-negative rational number with 64-bit numerator and denominator.
// Arithmetic is carried out in 128 bits and reduced; overflow after
// reduction throws.
class Fraction {
 public:
  constexpr Fraction() = default;
  Fraction(std::int64_t num, std::int64_t den) {
    if (den == 0) throw InvalidArgument("Fraction: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    num_ = g == 0 ? 0 : num / g;
    den_ = g == 0 ? 1 : den / g;
  }

  static Fraction whole(std::int64_t v) { return Fraction(v, 1); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  friend Fraction operator+(const Fraction& a, const Fraction& b) {
    const __int128 n = static_cast<__int128>(a.num_) * b.den_ +
                       static_cast<__int128>(b.num_) * a.den_;
    const __int128 d = static_cast<__int128>(a.den_) * b.den_;
    return reduce(n, d);
  }
  friend Fraction operator-(const Fraction& a, const Fraction& b) {
    const __int128 n = static_cast<__int128>(a.num_) * b.den_ -
                       static_cast<__int128>(b.num_) * a.den_;
    const __int128 d = static_cast<__int128>(a.den_) * b.den_;
    return reduce(n, d);
  }
  friend Fraction operator*(const Fraction& a, const Fraction& b) {
    return reduce(static_cast<__int128>(a.num_) * b.num_,
                  static_cast<__int128>(a.den_) * b.den_);
  }
  friend Fraction operator/(const Fraction& a, const Fraction& b) {
    if (b.num_ == 0) throw InvalidArgument("Fraction: division by zero");
    return reduce(static_cast<__int128>(a.num_) * b.den_,
                  static_cast<__int128>(a.den_) * b.num_);
  }
  friend bool operator==(const Fraction& a, const Fraction& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Fraction& a,
                                          const Fraction& b) {
    const __int128 l = static_cast<__int128>(a.num_) * b.den_;
    const __int128 r = static_cast<__int128>(b.num_) * a.den_;
    return l < r ? std::strong_ordering::less
                 : (l > r ? std::strong_ordering::greater
                          : std::strong_ordering::equal);
  }

 private:
  static __int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }
  static Fraction reduce(__int128 n, __int128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    const __int128 g = gcd128(n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    constexpr __int128 kMax = INT64_MAX;
    if (n > kMax || n < -kMax || d > kMax) {
      throw InvalidArgument("Fraction: 64-bit overflow");
    }
    Fraction f;
    f.num_ = static_cast<std::int64_t>(n);
    f.den_ = static_cast<std::int64_t>(d);
    return f;
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

// Strictly positive privacy-loss parameter.
class PrivacyBudget {
 public:
  explicit PrivacyBudget(double epsilon) : epsilon_(epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw InvalidArgument("PrivacyBudget: epsilon must be finite and > 0");
    }
  }
  double epsilon() const { return epsilon_; }

 private:
  double epsilon_;
};

enum class Composition { kSequential, kParallel };

// How neighbouring datasets are defined. Removing one record changes a count
// by 1; replacing one record can move two counts by one each.
enum class Neighbor { kRemoveOne, kReplaceOne };

inline const char* to_string(Composition c) {
  return c == Composition::kSequential ? "sequential" : "parallel";
}

struct LedgerEntry {
  std::string label;
  double epsilon = 0.0;
  Composition mode = Composition::kSequential;
  std::string group;               // parallel-group id; empty if sequential
  std::optional<Fraction> share;   // exact share of the total, if known
};

// Sum of doubles with Neumaier compensation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class PrivacyLedger {
 public:
  static constexpr double kRelativeTolerance = 1e-12;

  explicit PrivacyLedger(PrivacyBudget total,
                         Neighbor neighbor = Neighbor::kRemoveOne)
      : total_(total), neighbor_(neighbor) {}

  const PrivacyBudget& total() const { return total_; }
  Neighbor neighbor() const { return neighbor_; }

  // Global sensitivity of a single count under this ledger's neighbouring
  // relation (1 for removal, 2 for replacement).
  double count_sensitivity() const {
    return neighbor_ == Neighbor::kRemoveOne ? 1.0 : 2.0;
  }

  const std::vector<LedgerEntry>& entries() const { return entries_; }

  // Appends a charge of `eps`. Throws BudgetExhausted, leaving the ledger
  // untouched, if the effective spend would exceed the total.
  void charge(std::string label, double eps,
              Composition mode = Composition::kSequential,
              std::string group = {}) {
    append(make_entry(std::move(label), eps, mode, std::move(group),
                      std::nullopt));
  }

  // Appends a charge expressed as an exact share of the total epsilon.
  void charge_share(std::string label, Fraction share,
                    Composition mode = Composition::kSequential,
                    std::string group = {}) {
    if (share <= Fraction()) {
      throw InvalidArgument("charge_share: share must be > 0");
    }
    append(make_entry(std::move(label), total_.epsilon() * share.to_double(),
                      mode, std::move(group), share));
  }

  // Non-throwing variant: returns false when the budget would be exceeded.
  bool try_charge(std::string label, double eps,
                  Composition mode = Composition::kSequential,
                  std::string group = {}) {
    try {
      charge(std::move(label), eps, mode, std::move(group));
      return true;
    } catch (const BudgetExhausted&) {
      return false;
    }
  }

  double effective_spend() const {
    if (all_exact_) return total_.epsilon() * exact_spend().to_double();
    CompensatedSum sum = seq_sum_;
    for (const auto& [_, g] : groups_) sum.add(g.max_eps);
    return sum.value();
  }

  double remaining() const {
    return std::max(0.0, total_.epsilon() - effective_spend());
  }

  // Effective spend as an exact share of the total; empty if any entry was
  // charged as a plain double.
  std::optional<Fraction> exact_spend_share() const {
    if (!all_exact_) return std::nullopt;
    return exact_spend();
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["total"] = total_.epsilon();
    j["neighbor"] =
        neighbor_ == Neighbor::kRemoveOne ? "remove-one" : "replace-one";
    auto arr = nlohmann::json::array();
    for (const auto& e : entries_) {
      nlohmann::json je{{"label", e.label},
                        {"eps", e.epsilon},
                        {"mode", to_string(e.mode)}};
      je["group"] = e.group.empty() ? nlohmann::json(nullptr)
                                    : nlohmann::json(e.group);
      if (e.share) {
        je["share"] = std::to_string(e.share->num()) + "/" +
                      std::to_string(e.share->den());
      }
      arr.push_back(std::move(je));
    }
    j["entries"] = std::move(arr);
    j["effective_spend"] = effective_spend();
    return j;
  }

 private:
  struct GroupMax {
    double max_eps = 0.0;
    Fraction max_share;
  };

  LedgerEntry make_entry(std::string label, double eps, Composition mode,
                         std::string group,
                         std::optional<Fraction> share) const {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
      throw InvalidArgument("ledger charge: eps must be finite and > 0");
    }
    if (mode == Composition::kParallel && group.empty()) {
      throw InvalidArgument("ledger charge: parallel charge needs a group id");
    }
    if (mode == Composition::kSequential) group.clear();
    return LedgerEntry{std::move(label), eps, mode, std::move(group), share};
  }

  Fraction exact_spend() const {
    Fraction sum = seq_share_;
    for (const auto& [_, g] : groups_) sum = sum + g.max_share;
    return sum;
  }

  // Validates against a tentative copy of the aggregates, then commits.
  void append(LedgerEntry entry) {
    PrivacyLedger next_state = aggregates_only();
    next_state.accumulate(entry);
    const bool over =
        next_state.all_exact_
            ? next_state.exact_spend() > Fraction(1, 1)
            : next_state.effective_spend() >
                  total_.epsilon() * (1.0 + kRelativeTolerance);
    if (over) {
      throw BudgetExhausted("privacy budget exhausted by charge '" +
                            entry.label + "'");
    }
    accumulate(entry);
    entries_.push_back(std::move(entry));
  }

  PrivacyLedger aggregates_only() const {
    PrivacyLedger copy(total_, neighbor_);
    copy.seq_sum_ = seq_sum_;
    copy.seq_share_ = seq_share_;
    copy.all_exact_ = all_exact_;
    copy.groups_ = groups_;
    return copy;
  }

  void accumulate(const LedgerEntry& e) {
    if (!e.share) all_exact_ = false;
    if (e.mode == Composition::kSequential) {
      seq_sum_.add(e.epsilon);
      if (e.share) seq_share_ = seq_share_ + *e.share;
    } else {
      auto& g = groups_[e.group];
      g.max_eps = std::max(g.max_eps, e.epsilon);
      if (e.share) g.max_share = std::max(g.max_share, *e.share);
    }
  }

  PrivacyBudget total_;
  Neighbor neighbor_;
  std::vector<LedgerEntry> entries_;
  CompensatedSum seq_sum_;
  Fraction seq_share_;
  bool all_exact_ = true;
  std::map<std::string, GroupMax> groups_;
};

// Single-writer / many-reader wrapper. try_charge is the compare-and-charge
// primitive: the budget check and the append happen under one exclusive lock.
class SharedLedger {
 public:
  explicit SharedLedger(PrivacyLedger ledger) : ledger_(std::move(ledger)) {}

  bool try_charge(std::string label, double eps,
                  Composition mode = Composition::kSequential,
                  std::string group = {}) {
    std::unique_lock lock(mu_);
    return ledger_.try_charge(std::move(label), eps, mode, std::move(group));
  }

  bool try_charge_share(std::string label, Fraction share,
                        Composition mode = Composition::kSequential,
                        std::string group = {}) {
    std::unique_lock lock(mu_);
    try {
      ledger_.charge_share(std::move(label), share, mode, std::move(group));
      return true;
    } catch (const BudgetExhausted&) {
      return false;
    }
  }

  double effective_spend() const {
    std::shared_lock lock(mu_);
    return ledger_.effective_spend();
  }

  PrivacyLedger snapshot() const {
    std::shared_lock lock(mu_);
    return ledger_;
  }

 private:
  mutable std::shared_mutex mu_;
  PrivacyLedger ledger_;
};

// Splits eps in proportion to `weights`. Shares are positive and sum to eps:
// all but the last are eps * w_i / sum(w); the last takes the residual of a
// compensated sum of the others.
inline std::vector<double> split_budget(double eps,
                                        std::span<const double> weights) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw InvalidArgument("split_budget: eps must be finite and > 0");
  }
  if (weights.empty()) throw InvalidArgument("split_budget: no weights");
  CompensatedSum wsum;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("split_budget: weights must be finite and > 0");
    }
    wsum.add(w);
  }
  const double total_w = wsum.value();
  std::vector<double> out(weights.size());
  CompensatedSum acc;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    out[i] = eps * (weights[i] / total_w);
    acc.add(out[i]);
  }
  out.back() = eps - acc.value();
  if (!(out.back() > 0.0)) {
    // Residual underflowed against the others; fall back to the direct share.
    out.back() = eps * (weights.back() / total_w);
  }
  return out;
}

inline std::vector<double> split_budget(double eps,
                                        std::initializer_list<double> w) {
  return split_budget(eps, std::span<const double>(w.begin(), w.size()));
}

// Exact split of a share by positive integer weights.
inline std::vector<Fraction> split_share(Fraction share,
                                         std::span<const std::int64_t> weights) {
  if (weights.empty()) throw InvalidArgument("split_share: no weights");
  std::int64_t total = 0;
  for (auto w : weights) {
    if (w <= 0) throw InvalidArgument("split_share: weights must be > 0");
    total += w;
  }
  std::vector<Fraction> out;
  out.reserve(weights.size());
  for (auto w : weights) out.push_back(share * Fraction(w, total));
  return out;
}

}  // namespace dips
