#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "experiments.hpp"

namespace pinntk::cli {

/// One fully validated sweep run: value index, trial and its config.
struct SweepRun {
  std::size_t value_index = 0;
  std::size_t trial = 0;
  ExperimentConfig config;
};

struct SweepPlan {
  std::string param;
  std::vector<nlohmann::json> values;
  std::vector<std::string> value_labels;
  std::filesystem::path root;
  std::vector<SweepRun> runs;
};

/// Parses a CLI value: JSON when it parses, otherwise a plain string.
nlohmann::json parse_value(const std::string& text);

/// Builds and validates every run before anything executes. Trial t of
/// each value uses seed trial_seed(seed, t) and writes to
/// <root>/<param>=<value>/trial_<t>.
SweepPlan plan_sweep(const nlohmann::json& doc, const std::string& param, const std::vector<std::string>& values,
                     std::size_t trials);

struct SweepOutcome {
  std::vector<double> metrics;  // one per run, plan order
  bool any_diverged = false;
};

/// Runs the plan, writing per-run artifacts and the aggregate files
/// sweep.csv (value,metric,mean,std,trials), sweep_trials.csv and
/// sweep.svg under the root.
SweepOutcome execute_sweep(const SweepPlan& plan, const Progress& progress = {});

}  // namespace pinntk::cli
