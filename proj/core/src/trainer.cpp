#include "pinntk/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "pinntk/csv.hpp"
#include "pinntk/error.hpp"

namespace pinntk {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::gd ? "gd" : "adam"; }

std::string to_string(WeightScheme s) {
  switch (s) {
    case WeightScheme::fixed:
      return "fixed";
    case WeightScheme::adaptive:
      return "adaptive";
    case WeightScheme::init_trace_ratio:
      return "init_trace_ratio";
  }
  return "fixed";
}

OptimizerKind parse_optimizer(const std::string& text) {
  if (text == "gd") {
    return OptimizerKind::gd;
  }
  if (text == "adam") {
    return OptimizerKind::adam;
  }
  throw ParameterError("unknown optimizer '" + text + "' (expected gd or adam)");
}

WeightScheme parse_weight_scheme(const std::string& text) {
  if (text == "fixed") {
    return WeightScheme::fixed;
  }
  if (text == "adaptive") {
    return WeightScheme::adaptive;
  }
  if (text == "init_trace_ratio") {
    return WeightScheme::init_trace_ratio;
  }
  throw ParameterError("unknown weight scheme '" + text +
                       "' (expected fixed, adaptive or init_trace_ratio)");
}

void TrainConfig::validate(std::size_t num_groups) const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ParameterError("learning_rate must be finite and non-negative");
  }
  if (iterations == 0) {
    throw ParameterError("iterations must be >= 1");
  }
  if (update_every == 0) {
    throw ParameterError("update_every must be >= 1");
  }
  if (log_every == 0) {
    throw ParameterError("log_every must be >= 1");
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 &&
        adam.epsilon > 0.0)) {
    throw ParameterError("adam settings need beta1, beta2 in [0, 1) and epsilon > 0");
  }
  auto check_sizes = [&](const std::vector<std::size_t>& sizes, const char* what, bool optional) {
    if (optional && sizes.empty()) {
      return;
    }
    if (sizes.size() != num_groups) {
      throw ParameterError(std::string(what) + " needs " + std::to_string(num_groups) + " entries");
    }
    for (std::size_t s : sizes) {
      if (s == 0) {
        throw ParameterError(std::string(what) + " entries must be >= 1");
      }
    }
  };
  check_sizes(batch_sizes, "batch_sizes", false);
  check_sizes(reference_sizes, "reference_sizes", true);
  check_sizes(snapshot_sizes, "snapshot_sizes", true);
  if (!fixed_weights.empty()) {
    if (fixed_weights.size() != num_groups) {
      throw ParameterError("fixed_weights needs " + std::to_string(num_groups) + " entries");
    }
    WeightState{fixed_weights}.validate();
  }
  if (!(weight_floor > 0.0 && weight_ceiling >= weight_floor)) {
    throw ParameterError("weight clamps need 0 < floor <= ceiling");
  }
  if (!(divergence_threshold > 0.0)) {
    throw ParameterError("divergence_threshold must be positive");
  }
}

void WeightState::validate() const {
  for (double l : lambdas) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw ParameterError("loss weights must be positive and finite");
    }
  }
}

namespace {

void check_weights(const Batch& batch, const WeightState& weights) {
  if (weights.lambdas.size() != batch.groups.size()) {
    throw DimensionError("loss: expected " + std::to_string(batch.groups.size()) + " weights, got " +
                         std::to_string(weights.lambdas.size()));
  }
  weights.validate();
}

double group_factor(const GroupBatch& g, double lambda, bool normalized) {
  return normalized ? lambda / static_cast<double>(g.size()) : lambda;
}

}  // namespace

LossBreakdown loss(const MlpParams& params, const PdeProblem& problem, const Batch& batch,
                   const WeightState& weights, bool normalized) {
  if (batch.groups.size() != problem.num_groups()) {
    throw DimensionError("loss: batch groups do not match problem '" + problem.name() + "'");
  }
  check_weights(batch, weights);
  LossBreakdown out;
  for (std::size_t g = 0; g < batch.groups.size(); ++g) {
    const GroupBatch& gb = batch.groups[g];
    const OperatorTape tape(params, gb.points, gb.op);
    const double sq = (tape.outputs() - gb.targets).squaredNorm();
    const double term = 0.5 * group_factor(gb, weights.lambdas[g], normalized) * sq;
    out.groups.push_back(term);
    out.total += term;
  }
  return out;
}

LossGradient loss_and_gradient(const MlpParams& params, const Batch& batch, const WeightState& weights,
                               bool normalized) {
  check_weights(batch, weights);
  LossGradient out;
  out.gradient = GradVector::Zero(static_cast<Eigen::Index>(params.size()));
  for (std::size_t g = 0; g < batch.groups.size(); ++g) {
    const GroupBatch& gb = batch.groups[g];
    const OperatorTape tape(params, gb.points, gb.op);
    const Eigen::VectorXd r = tape.outputs() - gb.targets;
    const double factor = group_factor(gb, weights.lambdas[g], normalized);
    const double term = 0.5 * factor * r.squaredNorm();
    out.loss.groups.push_back(term);
    out.loss.total += term;
    out.gradient += tape.vjp(factor * r);
  }
  return out;
}

namespace {

double clamp_weight(double value, std::size_t g, double floor, double ceiling) {
  if (!std::isfinite(value) || value > ceiling) {
    std::ostringstream os;
    os << "loss weight " << g << " = " << value << " clamped to " << ceiling;
    warn(os.str());
    return ceiling;
  }
  if (value < floor) {
    std::ostringstream os;
    os << "loss weight " << g << " = " << value << " clamped to " << floor;
    warn(os.str());
    return floor;
  }
  return value;
}

}  // namespace

WeightState adaptive_weights_from_traces(const std::vector<double>& traces, double floor, double ceiling) {
  if (traces.empty()) {
    throw DimensionError("adaptive_weights: no block traces");
  }
  double total = 0.0;
  for (double t : traces) {
    total += t;
  }
  WeightState out;
  for (std::size_t g = 0; g < traces.size(); ++g) {
    if (!(traces[g] > 1e-12 * total)) {
      warn("adaptive_weights: degenerate trace for block " + std::to_string(g));
      out.lambdas.push_back(ceiling);
      continue;
    }
    out.lambdas.push_back(clamp_weight(total / traces[g], g, floor, ceiling));
  }
  return out;
}

WeightState adaptive_weights(const NtkMatrix& k, double floor, double ceiling) {
  return adaptive_weights_from_traces(k.block_traces(), floor, ceiling);
}

WeightState init_trace_ratio_weights(const std::vector<double>& traces, double floor, double ceiling) {
  if (traces.empty()) {
    throw DimensionError("init_trace_ratio_weights: no block traces");
  }
  const double residual = traces.back();
  WeightState out;
  for (std::size_t g = 0; g + 1 < traces.size(); ++g) {
    if (!(traces[g] > 1e-12 * residual)) {
      warn("init_trace_ratio_weights: degenerate trace for block " + std::to_string(g));
      out.lambdas.push_back(ceiling);
      continue;
    }
    out.lambdas.push_back(clamp_weight(residual / traces[g], g, floor, ceiling));
  }
  out.lambdas.push_back(1.0);
  return out;
}

void step_gd(MlpParams& params, const GradVector& gradient, double learning_rate) {
  if (gradient.size() != params.flat().size()) {
    throw DimensionError("step_gd: gradient length does not match the parameters");
  }
  if (!gradient.allFinite()) {
    throw DivergenceError("step_gd: non-finite gradient");
  }
  params.flat() -= learning_rate * gradient;
}

AdamState AdamState::zeros(std::size_t n) {
  const auto size = static_cast<Eigen::Index>(n);
  return {GradVector::Zero(size), GradVector::Zero(size), 0};
}

void step_adam(MlpParams& params, const GradVector& gradient, AdamState& state, double learning_rate,
               const AdamSettings& settings) {
  if (gradient.size() != params.flat().size() || state.m.size() != gradient.size() ||
      state.v.size() != gradient.size()) {
    throw DimensionError("step_adam: gradient, moments and parameters disagree in size");
  }
  if (!gradient.allFinite()) {
    throw DivergenceError("step_adam: non-finite gradient");
  }
  ++state.step;
  state.m = settings.beta1 * state.m + (1.0 - settings.beta1) * gradient;
  state.v = settings.beta2 * state.v + (1.0 - settings.beta2) * gradient.cwiseAbs2();
  const double c1 = 1.0 - std::pow(settings.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(settings.beta2, static_cast<double>(state.step));
  params.flat().array() -=
      learning_rate * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + settings.epsilon);
}

std::vector<std::size_t> default_snapshot_iterations(std::size_t iterations) {
  std::vector<std::size_t> out{0};
  for (std::size_t n = 10; n < iterations; n *= 10) {
    out.push_back(n);
  }
  if (iterations > 0) {
    out.push_back(iterations);
  }
  return out;
}

void TrainHistory::write_csv(std::ostream& out) const {
  std::vector<std::string> header{"iteration"};
  for (const auto& g : group_names) {
    header.push_back("loss_" + g);
  }
  header.emplace_back("total_loss");
  for (const auto& s : weight_symbols) {
    header.push_back(s);
  }
  header.emplace_back("relative_l2");
  header.emplace_back("param_drift");
  CsvWriter csv(out, header);
  for (const auto& r : rows) {
    std::vector<CsvCell> cells{CsvCell(r.iteration)};
    for (double l : r.group_losses) {
      cells.emplace_back(l);
    }
    cells.emplace_back(r.total_loss);
    for (double l : r.lambdas) {
      cells.emplace_back(l);
    }
    cells.emplace_back(r.relative_l2);
    cells.emplace_back(r.param_drift);
    csv.row(cells);
  }
}

void TrainHistory::write_spectra_csv(std::ostream& out) const {
  write_spectra_csv_header(out);
  for (const auto& s : snapshots) {
    append_spectra_csv(out, s.iteration, s.spectra);
  }
}

void TrainHistory::write_drift_csv(std::ostream& out) const {
  std::vector<DriftRecord> records;
  for (const auto& s : snapshots) {
    records.push_back({s.iteration, s.param_drift, s.kernel_drift});
  }
  pinntk::write_drift_csv(out, records);
}

TrainResult train(const PdeProblem& problem, const ArchSpec& spec, const TrainConfig& config,
                  const TrainObserver& observer) {
  return train(problem, init(spec, config.init_seed), config, observer);
}

TrainResult train(const PdeProblem& problem, MlpParams initial, const TrainConfig& config,
                  const TrainObserver& observer) {
  const std::size_t num_groups = problem.num_groups();
  config.validate(num_groups);
  if (initial.spec().input_dim != problem.dim()) {
    throw DimensionError("train: network input dimension does not match problem '" + problem.name() + "'");
  }

  const auto& ref_sizes = config.reference_sizes.empty() ? config.batch_sizes : config.reference_sizes;
  const Batch reference = sample_batch(problem, ref_sizes, config.sampling, derive_seed(config.sampling_seed, 0));
  const bool separate_train = config.resample_every_step || ref_sizes != config.batch_sizes;
  Batch train_batch = separate_train
                          ? sample_batch(problem, config.batch_sizes, config.sampling,
                                         derive_seed(config.sampling_seed, 1))
                          : reference;
  const Batch snapshot_batch =
      config.snapshot_sizes.empty()
          ? reference
          : sample_batch(problem, config.snapshot_sizes, config.sampling,
                         derive_seed(config.sampling_seed, ~std::uint64_t{0}));

  std::vector<std::size_t> snapshot_at = config.snapshot_iterations.empty()
                                             ? default_snapshot_iterations(config.iterations)
                                             : config.snapshot_iterations;
  std::sort(snapshot_at.begin(), snapshot_at.end());
  snapshot_at.erase(std::unique(snapshot_at.begin(), snapshot_at.end()), snapshot_at.end());

  TrainResult result{TrainHistory{}, initial, initial, WeightState{}};
  TrainHistory& history = result.history;
  history.group_names = problem.group_names();
  history.weight_symbols = problem.weight_symbols();
  MlpParams& params = result.params;
  const MlpParams& theta0 = result.initial_params;

  WeightState weights{config.fixed_weights.empty() ? std::vector<double>(num_groups, 1.0)
                                                    : config.fixed_weights};
  if (config.weight_scheme == WeightScheme::init_trace_ratio) {
    weights = init_trace_ratio_weights(block_traces(params, reference), config.weight_floor,
                                       config.weight_ceiling);
  }
  if (config.weight_scheme != WeightScheme::adaptive) {
    history.weight_updates.emplace_back(0, weights.lambdas);
  }

  std::optional<NtkMatrix> k0;
  auto take_snapshot = [&](std::size_t n) {
    NtkMatrix k = assemble(params, problem, snapshot_batch);
    Snapshot s;
    s.iteration = n;
    s.spectra = block_spectra(k);
    s.block_traces = k.block_traces();
    s.lambdas = weights.lambdas;
    s.param_drift = param_relative_change(params, theta0);
    s.asymmetry = relative_asymmetry(k.assembled());
    if (config.record_weighted_spectra) {
      s.weighted = weighted_spectrum(k, kernel_column_scales(k, weights.lambdas, config.normalized_loss));
    }
    if (!k0) {
      k0 = std::move(k);
    } else {
      s.kernel_drift = relative_change(k, *k0);
    }
    history.snapshots.push_back(std::move(s));
  };
  auto wants_snapshot = [&](std::size_t n) {
    return config.record_snapshots && std::binary_search(snapshot_at.begin(), snapshot_at.end(), n);
  };
  auto l2_error = [&]() {
    return problem.exact() ? relative_l2_error(params, problem, config.eval_grid_per_axis)
                           : std::numeric_limits<double>::quiet_NaN();
  };

  // K(0) anchors kernel drift even when iteration 0 is not listed.
  if (config.record_snapshots && !wants_snapshot(0) && !snapshot_at.empty()) {
    k0 = assemble(params, problem, snapshot_batch);
  }

  AdamState adam = AdamState::zeros(params.size());
  for (std::size_t n = 0; n < config.iterations; ++n) {
    if (config.weight_scheme == WeightScheme::adaptive && n % config.update_every == 0) {
      weights = adaptive_weights_from_traces(block_traces(params, reference), config.weight_floor,
                                             config.weight_ceiling);
      history.weight_updates.emplace_back(n, weights.lambdas);
    }
    if (wants_snapshot(n)) {
      take_snapshot(n);
    }
    if (config.resample_every_step) {
      train_batch = sample_batch(problem, config.batch_sizes, config.sampling,
                                 derive_seed(config.sampling_seed, n + 2));
    }

    const LossGradient lg = loss_and_gradient(params, train_batch, weights, config.normalized_loss);
    const bool bad = !std::isfinite(lg.loss.total) || lg.loss.total > config.divergence_threshold ||
                     !lg.gradient.allFinite();
    if (n % config.log_every == 0 || n + 1 == config.iterations || bad) {
      HistoryRow row;
      row.iteration = n;
      row.group_losses = lg.loss.groups;
      row.total_loss = lg.loss.total;
      row.lambdas = weights.lambdas;
      row.relative_l2 = l2_error();
      row.param_drift = param_relative_change(params, theta0);
      history.rows.push_back(std::move(row));
    }
    if (bad) {
      std::ostringstream os;
      os << "training diverged at iteration " << n << ": total loss " << lg.loss.total;
      history.diverged = true;
      history.diagnostic = os.str();
      break;
    }

    if (config.optimizer == OptimizerKind::gd) {
      step_gd(params, lg.gradient, config.learning_rate);
    } else {
      step_adam(params, lg.gradient, adam, config.learning_rate, config.adam);
    }
    if (observer) {
      observer(n + 1, params);
    }
  }

  if (!history.diverged) {
    if (wants_snapshot(config.iterations)) {
      take_snapshot(config.iterations);
    }
    history.final_loss = loss(params, problem, train_batch, weights, config.normalized_loss).total;
    history.final_relative_l2 = l2_error();
  }
  result.final_weights = weights;
  return result;
}

}  // namespace pinntk
