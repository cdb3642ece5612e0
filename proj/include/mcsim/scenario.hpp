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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcsim/amr.hpp"
#include "mcsim/system.hpp"

namespace mcsim {

/// Carries every problem found in a scenario, not just the first.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> errors);
  [[nodiscard]] const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct VariantSpec {
  std::string name;
  nlohmann::json set;  ///< key path -> replacement value
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 1;
  Cycle run_limit = 1'000'000;
  bool isolated = true;

  SocConfig soc;
  std::vector<TaskSpec> tasks;
  std::vector<TsuConfig> tsu;  ///< one per task, same order
  std::vector<TimedAction> actions;
  std::vector<amr::Phase> amr_phases;  ///< standalone cluster run, if any
  std::vector<VariantSpec> variants;

  nlohmann::json document;  ///< the source, for applying variant overrides

  [[nodiscard]] std::optional<std::size_t> task_index(const std::string& name) const;
};

[[nodiscard]] Scenario parse_scenario(const nlohmann::json& doc);
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);

/// Applies dotted key-path overrides ("tsu.dma.budget_beats"). Array
/// elements are addressed by their "name" field or by index.
[[nodiscard]] nlohmann::json apply_overrides(nlohmann::json doc, const nlohmann::json& set);

/// The scenario with `variant` applied, re-validated.
[[nodiscard]] Scenario resolve_variant(const Scenario& base, const VariantSpec& variant);

/// Tasks that share `base` but run on their own, for the isolated reference.
[[nodiscard]] Scenario solo(const Scenario& base, std::size_t task);

struct VariantReport {
  std::string name;
  RunResult run;
  std::optional<amr::AmrRunResult> amr_phases;
  std::uint64_t amr_phase_mismatches = 0;  ///< phase-run units that differ from a fault-free run
  amr::AmrConfig amr_config;
};

struct Experiment {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<VariantReport> variants;  ///< ordered by name

  [[nodiscard]] const VariantReport* find(const std::string& name) const;
  [[nodiscard]] bool any_timeout() const;
};

struct ExperimentOptions {
  std::optional<std::uint64_t> seed;
  std::vector<std::string> only;  ///< empty = every variant
  bool parallel = true;
};

/// Runs the isolated reference (every task alone) and each variant.
[[nodiscard]] Experiment run_experiment(const Scenario& scenario, const ExperimentOptions& opts = {});

/// Runs one fully resolved scenario configuration.
[[nodiscard]] VariantReport run_variant(const Scenario& resolved, const std::string& name);

/// Isolated reference: one simulation per task, merged into one report.
[[nodiscard]] VariantReport run_isolated(const Scenario& scenario);

}  // namespace mcsim
