#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinntk/network.hpp"
#include "pinntk/trainer.hpp"

namespace pinntk::cli {

/// Invalid configuration. problems() lists one entry per offending key.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

enum class ExperimentKind { poisson, wave, kernel_convergence, spectrum, limit_check, linearized_check };

std::string to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& text);

/// Settings read only by some experiment kinds.
struct StudySettings {
  std::vector<double> a_values = {1.0, 2.0, 4.0};          // spectrum
  std::vector<std::size_t> widths = {10, 100, 500};       // kernel_convergence, limit_check
  std::size_t num_inits = 200;                            // limit_check
  std::size_t field_inits = 0;                            // limit_check, u_xx covariance (0: off)
  std::size_t grid_points = 11;                           // limit_check
  std::size_t quadrature_order = 200;                     // limit_check
  std::size_t record_every = 100;                         // linearized_check
  std::size_t modes = 5;                                  // linearized_check
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::poisson;
  std::string output_dir = "out";
  bool emit_svg = true;
  /// init_seed = seed, sampling_seed = seed + 1, Monte Carlo seed = seed.
  std::uint64_t seed = 0;

  double a = 4.0;  // poisson family only
  std::vector<std::size_t> hidden = {100};
  Parameterization parameterization = Parameterization::ntk;

  TrainConfig train;
  StudySettings study;

  std::size_t num_groups() const;
  ArchSpec arch(std::size_t width_override = 0) const;
};

/// Validates a parsed document. Unknown keys, wrong types and out-of-range
/// values are all collected into one ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
/// Reads JSON (comments allowed) and parses it. Unreadable or malformed
/// files raise ConfigError.
nlohmann::json read_config_document(const std::string& path);
ExperimentConfig load_config(const std::string& path);

/// Every field with its effective value; parse_config(to_json(c)) == c.
nlohmann::json to_json(const ExperimentConfig& config);

/// Sets a dotted path such as "train.fixed_weights[0]" or "a". The path
/// must name an existing schema key; arrays are grown from the effective
/// config when indexed.
void set_path(nlohmann::json& doc, const std::string& path, const nlohmann::json& value);

}  // namespace pinntk::cli
