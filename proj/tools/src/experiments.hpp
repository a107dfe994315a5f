#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace pinntk::cli {

/// Everything a run produces, held in memory until written.
struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;  // name, contents
  nlohmann::json summary = nlohmann::json::object();
  std::string metric_name;
  double metric = std::numeric_limits<double>::quiet_NaN();
  bool diverged = false;
  std::string diagnostic;

  void add(std::string name, std::string contents);
};

using Progress = std::function<void(const std::string&)>;

/// Runs one experiment. Training divergence is reported through
/// Artifacts::diverged with whatever outputs exist; other failures throw.
Artifacts run_experiment(const ExperimentConfig& config, const Progress& progress = {});

/// results.json contents: experiment, status, metric, seeds, config echo,
/// summary and the list of written files.
nlohmann::json results_json(const ExperimentConfig& config, const Artifacts& artifacts);

/// Creates dir and writes every artifact plus results.json. SVG files are
/// skipped when config.emit_svg is false.
void write_artifacts(const std::filesystem::path& dir, const ExperimentConfig& config, const Artifacts& artifacts);

/// Seed used by trial t of a sweep: config seed + 1000 t.
std::uint64_t trial_seed(std::uint64_t base, std::size_t trial);

}  // namespace pinntk::cli
