#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pinntk/network.hpp"
#include "pinntk/ntk.hpp"
#include "pinntk/problems.hpp"

namespace pinntk {

enum class OptimizerKind { gd, adam };

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// fixed: weights never change. adaptive: trace ratios recomputed every
/// update_every iterations. init_trace_ratio: residual weight 1 and every
/// other weight Tr(K_rr)/Tr(K_gg), computed once at iteration 0.
enum class WeightScheme { fixed, adaptive, init_trace_ratio };

std::string to_string(OptimizerKind k);
std::string to_string(WeightScheme s);
OptimizerKind parse_optimizer(const std::string& text);
WeightScheme parse_weight_scheme(const std::string& text);

inline constexpr double kWeightFloor = 1e-3;
inline constexpr double kWeightCeiling = 1e6;
inline constexpr double kDivergenceThreshold = 1e12;

struct TrainConfig {
  double learning_rate = 1e-5;
  std::size_t iterations = 1000;
  OptimizerKind optimizer = OptimizerKind::gd;
  AdamSettings adam;

  WeightScheme weight_scheme = WeightScheme::fixed;
  std::vector<double> fixed_weights;  // empty means all ones
  std::size_t update_every = 1;
  /// lambda_g / (2 N_g) per group when true, lambda_g / 2 otherwise.
  bool normalized_loss = true;

  SamplingStrategy sampling = SamplingStrategy::fixed_uniform_grid;
  std::vector<std::size_t> batch_sizes;      // one per group, residual last
  bool resample_every_step = false;
  std::vector<std::size_t> reference_sizes;  // empty: batch_sizes

  /// Kernel snapshots. Empty uses {0, 10, 100, 1000, ...} plus the final
  /// iteration. snapshot_sizes shrinks the snapshot batch (empty: reference).
  std::vector<std::size_t> snapshot_iterations;
  std::vector<std::size_t> snapshot_sizes;
  bool record_snapshots = true;
  bool record_weighted_spectra = false;

  std::size_t log_every = 100;
  std::size_t eval_grid_per_axis = 0;  // 0: evaluation-grid default

  std::uint64_t init_seed = 0;
  std::uint64_t sampling_seed = 1;

  double weight_floor = kWeightFloor;
  double weight_ceiling = kWeightCeiling;
  double divergence_threshold = kDivergenceThreshold;

  void validate(std::size_t num_groups) const;
};

/// One lambda per group, in problem group order (residual last).
struct WeightState {
  std::vector<double> lambdas;

  void validate() const;
};

struct LossBreakdown {
  std::vector<double> groups;
  double total = 0.0;
};

LossBreakdown loss(const MlpParams& params, const PdeProblem& problem, const Batch& batch,
                   const WeightState& weights, bool normalized = true);

struct LossGradient {
  LossBreakdown loss;
  GradVector gradient;
};

/// Loss and its exact parameter gradient.
LossGradient loss_and_gradient(const MlpParams& params, const Batch& batch, const WeightState& weights,
                               bool normalized = true);

/// lambda_g = sum of traces / trace_g, clamped to [floor, ceiling] with a
/// warning. Traces below 1e-12 of the total count as degenerate and clamp.
WeightState adaptive_weights_from_traces(const std::vector<double>& traces, double floor = kWeightFloor,
                                         double ceiling = kWeightCeiling);
WeightState adaptive_weights(const NtkMatrix& k, double floor = kWeightFloor,
                             double ceiling = kWeightCeiling);
/// Residual weight 1, constraint weights Tr(K_rr)/Tr(K_gg); residual last.
WeightState init_trace_ratio_weights(const std::vector<double>& traces, double floor = kWeightFloor,
                                     double ceiling = kWeightCeiling);

/// theta - eta * g. Throws DivergenceError on a non-finite gradient.
void step_gd(MlpParams& params, const GradVector& gradient, double learning_rate);

struct AdamState {
  GradVector m;
  GradVector v;
  std::size_t step = 0;

  static AdamState zeros(std::size_t n);
};

/// Bias-corrected Adam update. Throws DivergenceError on a non-finite gradient.
void step_adam(MlpParams& params, const GradVector& gradient, AdamState& state, double learning_rate,
               const AdamSettings& settings = {});

/// Loss terms at the parameters entering step `iteration`.
struct HistoryRow {
  std::size_t iteration = 0;
  std::vector<double> group_losses;
  double total_loss = 0.0;
  std::vector<double> lambdas;
  double relative_l2 = std::numeric_limits<double>::quiet_NaN();
  double param_drift = 0.0;
};

struct Snapshot {
  std::size_t iteration = 0;
  BlockSpectra spectra;
  std::vector<double> block_traces;
  std::vector<double> lambdas;
  double kernel_drift = 0.0;
  double param_drift = 0.0;
  double asymmetry = 0.0;  // relative asymmetry of the assembled kernel
  std::optional<WeightedSpectrum> weighted;
};

struct TrainHistory {
  std::vector<std::string> group_names;
  std::vector<std::string> weight_symbols;
  std::vector<HistoryRow> rows;
  std::vector<Snapshot> snapshots;
  /// (iteration, lambdas) at every weight update, iteration 0 included.
  std::vector<std::pair<std::size_t, std::vector<double>>> weight_updates;
  bool diverged = false;
  std::string diagnostic;
  /// Measured at the parameters left after the last step.
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  double final_relative_l2 = std::numeric_limits<double>::quiet_NaN();

  /// Columns: iteration, loss_<group>..., total_loss, <lambda symbol>...,
  /// relative_l2, param_drift
  void write_csv(std::ostream& out) const;
  void write_spectra_csv(std::ostream& out) const;
  void write_drift_csv(std::ostream& out) const;
};

struct TrainResult {
  TrainHistory history;
  MlpParams params;
  MlpParams initial_params;
  WeightState final_weights;
};

/// Called after every optimizer step with the completed iteration count.
using TrainObserver = std::function<void(std::size_t iteration, const MlpParams& params)>;

/// Runs config.iterations steps from init(spec, config.init_seed).
TrainResult train(const PdeProblem& problem, const ArchSpec& spec, const TrainConfig& config,
                  const TrainObserver& observer = {});
/// Same, from given starting parameters.
TrainResult train(const PdeProblem& problem, MlpParams initial, const TrainConfig& config,
                  const TrainObserver& observer = {});

/// {0, 10, 100, ...} below iterations, then iterations itself.
std::vector<std::size_t> default_snapshot_iterations(std::size_t iterations);

}  // namespace pinntk
