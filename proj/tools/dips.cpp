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

// Command-line front end: `dips synth` releases synthetic sets from a CSV,
// `dips bench` runs a simulation study and writes metric tables.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error, 3 budget
// violation.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dips/dips.hpp"
#include "json.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

struct SynthArgs {
  std::string input;
  std::string schema;
  std::string method;
  double eps = 0.0;
  int m = 5;
  std::uint64_t seed = 0;
  std::string postprocess = "BIT";
  std::string out;
};

struct BenchArgs {
  std::string study;
  std::string config;
  std::optional<int> reps;
  std::optional<int> threads;
  std::string out;
  bool quiet = false;
};

dips::PostProcessKind parse_postprocess(const std::string& s) {
  if (s == "BIT" || s == "bit") return dips::PostProcessKind::kBit;
  if (s == "truncate") return dips::PostProcessKind::kTruncate;
  throw dips::ConfigError("postprocess must be BIT or truncate");
}

int run_synth(const SynthArgs& a) {
  dips::Schema schema = [&] {
    if (a.schema.empty()) return dips::infer_categorical_schema(a.input);
    std::ifstream f(a.schema);
    if (!f) throw dips::ConfigError("cannot open schema '" + a.schema + "'");
    nlohmann::json j;
    try {
      f >> j;
    } catch (const nlohmann::json::exception& e) {
      throw dips::ConfigError(std::string("schema parse error: ") + e.what());
    }
    return dips::Schema::from_json(j);
  }();
  const dips::TabularDataset data = dips::read_csv(a.input, schema);
  dips::PrivacyLedger ledger{dips::PrivacyBudget(a.eps)};
  const dips::SyntheticRelease rel =
      dips::synthesize(data, a.method, a.eps, a.m, a.seed, parse_postprocess(a.postprocess), ledger);
  const auto share = ledger.exact_spend_share();
  if (!share || *share != dips::Fraction(1, 1)) {
    std::cerr << "dips: ledger does not account for exactly eps\n";
    return kExitBudget;
  }
  dips::write_release(a.out, rel);
  std::cout << "wrote " << rel.sets.size() << " sets to " << a.out << '\n';
  return 0;
}

int run_bench(const BenchArgs& a) {
  const auto study = dips::harness::parse_study(a.study);
  dips::harness::StudyConfig cfg = dips::harness::StudyConfig::defaults(study);
  if (!a.config.empty()) {
    std::ifstream f(a.config);
    if (!f) throw dips::ConfigError("cannot open config '" + a.config + "'");
    nlohmann::json j;
    try {
      f >> j;
    } catch (const nlohmann::json::exception& e) {
      throw dips::ConfigError(std::string("config parse error: ") + e.what());
    }
    cfg = dips::harness::StudyConfig::from_json(j, study);
  }
  if (a.reps) cfg.reps = *a.reps;
  if (a.threads) cfg.threads = *a.threads;
  cfg.validate();
  auto progress = [&](int done, int total) {
    if (!a.quiet && (done == total || done % 10 == 0)) {
      std::cerr << "\r" << a.study << ": " << done << "/" << total << " reps" << std::flush;
      if (done == total) std::cerr << '\n';
    }
  };
  const auto res = dips::harness::run_study(cfg, progress);
  dips::harness::write_report(res, a.out);
  std::cout << "wrote " << res.rows.size() << " metric rows to " << a.out << '\n';
  if (res.ledger_violations > 0) {
    std::cerr << "dips: " << res.ledger_violations << " of " << res.ledger_checks
              << " ledgers did not spend exactly eps\n";
    return kExitBudget;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private data synthesis"};
  app.require_subcommand(1);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Release synthetic sets from a CSV file");
  synth->add_option("--input", sa.input, "Input CSV with a header row")->required();
  synth->add_option("--schema", sa.schema,
                    "Schema JSON; default treats every column as integer-coded categorical");
  synth->add_option("--method", sa.method, "Synthesizer")
      ->required()
      ->check(CLI::IsMember(dips::release_methods()));
  synth->add_option("--eps", sa.eps, "Total privacy budget")->required();
  synth->add_option("--m", sa.m, "Number of synthetic sets")->capture_default_str();
  synth->add_option("--seed", sa.seed, "Random seed")->capture_default_str();
  synth->add_option("--postprocess", sa.postprocess, "BIT or truncate")->capture_default_str();
  synth->add_option("--out", sa.out, "Output directory")->required();

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Run a simulation study");
  bench->add_option("--study", ba.study, "Study")
      ->required()
      ->check(CLI::IsMember({"sim1", "sim2", "sim3", "sim4"}));
  bench->add_option("--config", ba.config, "Study config JSON");
  bench->add_option("--reps", ba.reps, "Replications (overrides the config)");
  bench->add_option("--threads", ba.threads, "Worker threads; 0 uses all cores");
  bench->add_option("--out", ba.out, "Output directory")->required();
  bench->add_flag("--quiet", ba.quiet, "No progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*synth) return run_synth(sa);
    return run_bench(ba);
  } catch (const dips::ConfigError& e) {
    std::cerr << "dips: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const dips::InvalidArgument& e) {
    std::cerr << "dips: invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const dips::BudgetExhausted& e) {
    std::cerr << "dips: budget violation: " << e.what() << '\n';
    return kExitBudget;
  } catch (const dips::IoError& e) {
    std::cerr << "dips: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "dips: " << e.what() << '\n';
    return kExitRuntime;
  }
}
