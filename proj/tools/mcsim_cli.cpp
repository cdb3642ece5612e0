/*
 * Copyright 2026 The mcsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcsim/report.hpp"
#include "mcsim/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kTimeout = 2;

// Accepts a path, or the name of a shipped scenario ("fig7a").
std::string resolve_file(const std::string& arg) {
  namespace fs = std::filesystem;
  if (fs::exists(arg)) return arg;
  const fs::path shipped = fs::path(MCSIM_SCENARIO_DIR) / (arg + ".json");
  if (fs::exists(shipped)) return shipped.string();
  return arg;
}

void print_errors(const std::string& file, const mcsim::ScenarioError& e) {
  for (const auto& msg : e.errors()) std::cerr << file << ": " << msg << '\n';
}

int cmd_run(const std::string& file, const std::string& out, std::optional<std::uint64_t> seed,
            const std::vector<std::string>& variants, bool serial) {
  mcsim::Scenario sc;
  try {
    sc = mcsim::load_scenario(file);
  } catch (const mcsim::ScenarioError& e) {
    print_errors(file, e);
    return kInvalid;
  }
  for (const auto& v : variants) {
    bool known = v == "isolated" && sc.isolated;
    for (const auto& spec : sc.variants) known = known || spec.name == v;
    if (!known) {
      std::cerr << file << ": unknown variant '" << v << "'\n";
      return kInvalid;
    }
  }

  mcsim::ExperimentOptions opts;
  opts.seed = seed;
  opts.only = variants;
  opts.parallel = !serial;
  mcsim::Experiment ex;
  try {
    ex = mcsim::run_experiment(sc, opts);
  } catch (const mcsim::ScenarioError& e) {
    print_errors(file, e);
    return kInvalid;
  }
  const auto dir = mcsim::emit_report(ex, out);
  std::cout << mcsim::format_summary(ex);
  std::cout << "wrote " << (dir / "metrics.csv").string() << '\n';
  if (ex.any_timeout()) {
    for (const auto& v : ex.variants) {
      if (v.run.timeout) std::cerr << "variant '" << v.name << "' hit run_limit\n";
    }
    return kTimeout;
  }
  return kOk;
}

int cmd_validate(const std::string& file) {
  try {
    const auto sc = mcsim::load_scenario(file);
    for (const auto& v : sc.variants) (void)mcsim::resolve_variant(sc, v);
    std::cout << file << ": ok (" << sc.tasks.size() << " tasks, " << sc.variants.size() << " variants)\n";
    return kOk;
  } catch (const mcsim::ScenarioError& e) {
    print_errors(file, e);
    return kInvalid;
  }
}

int cmd_list_metrics() {
  for (const auto& m : mcsim::metric_catalog()) {
    std::printf("%-18s %-22s %-7s %s\n", m.subject, m.metric, m.unit, m.description);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transaction-level mixed-criticality SoC simulator"};
  app.require_subcommand(1);

  std::string run_file;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> variants;
  bool serial = false;
  auto* run = app.add_subcommand("run", "Run a scenario and write metrics.csv, events.jsonl and summary.txt");
  run->add_option("scenario", run_file, "Scenario file or shipped name")->required()->transform(resolve_file)->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--variant", variants, "Run only the named variant (repeatable)");
  run->add_flag("--serial", serial, "Run variants one after another");

  std::string validate_file;
  auto* validate = app.add_subcommand("validate", "Check a scenario file and report every problem");
  validate->add_option("scenario", validate_file, "Scenario file or shipped name")->required()->transform(resolve_file)->check(CLI::ExistingFile);

  auto* list = app.add_subcommand("list-metrics", "List the metrics written to metrics.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (*run) return cmd_run(run_file, out_dir, seed, variants, serial);
    if (*validate) return cmd_validate(validate_file);
    if (*list) return cmd_list_metrics();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kOk;
}
