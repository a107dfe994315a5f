#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "pinntk/csv.hpp"
#include "pinntk/dynamics.hpp"
#include "pinntk/error.hpp"
#include "pinntk/limiting_kernel.hpp"
#include "svg.hpp"

namespace pinntk::cli {

using nlohmann::json;

namespace {

std::string svg_text(const Plot& plot) {
  std::ostringstream out;
  write_svg(out, plot);
  return out.str();
}

std::string label_of(double a) { return format_number(a); }

TrainObserver progress_observer(const Progress& progress, std::size_t iterations, const std::string& tag) {
  if (!progress) {
    return {};
  }
  const std::size_t every = std::max<std::size_t>(1, iterations / 10);
  return [=](std::size_t n, const MlpParams&) {
    if (n % every == 0 || n == iterations) {
      progress(tag + "iteration " + std::to_string(n) + "/" + std::to_string(iterations));
    }
  };
}

// Network outputs (op u)(x) for every group, stacked in batch order.
Vector stacked_outputs(const MlpParams& params, const Batch& batch) {
  Vector y(static_cast<Eigen::Index>(batch.total_points()));
  Eigen::Index row = 0;
  for (const auto& g : batch.groups) {
    const OperatorTape tape(params, g.points, g.op);
    y.segment(row, tape.outputs().size()) = tape.outputs();
    row += tape.outputs().size();
  }
  return y;
}

json weights_json(const std::vector<std::string>& symbols, const std::vector<double>& lambdas) {
  json out = json::object();
  for (std::size_t g = 0; g < symbols.size() && g < lambdas.size(); ++g) {
    out[symbols[g]] = lambdas[g];
  }
  return out;
}

// --- training experiments ------------------------------------------------------

void add_training_outputs(Artifacts& art, const PdeProblem& prob, const TrainResult& r, const TrainConfig& tc) {
  const TrainHistory& h = r.history;
  {
    std::ostringstream out;
    h.write_csv(out);
    art.add("history.csv", out.str());
  }
  if (!h.snapshots.empty()) {
    std::ostringstream spectra, drift;
    h.write_spectra_csv(spectra);
    h.write_drift_csv(drift);
    art.add("spectra.csv", spectra.str());
    art.add("drift.csv", drift.str());

    std::ostringstream traces;
    std::vector<std::string> header = {"iteration"};
    for (const auto& g : h.group_names) {
      header.push_back("trace_" + g);
    }
    CsvWriter w(traces, header);
    for (const auto& s : h.snapshots) {
      std::vector<CsvCell> row = {s.iteration};
      for (double t : s.block_traces) {
        row.emplace_back(t);
      }
      w.row(row);
    }
    art.add("traces.csv", traces.str());
  }
  bool any_weighted = false;
  std::ostringstream weighted;
  {
    CsvWriter w(weighted, {"iteration", "rank", "eigenvalue"});
    for (const auto& s : h.snapshots) {
      if (s.weighted) {
        any_weighted = true;
        for (std::size_t i = 0; i < s.weighted->spectrum.eigenvalues.size(); ++i) {
          w.row({s.iteration, i, s.weighted->spectrum.eigenvalues[i]});
        }
      }
    }
  }
  if (any_weighted) {
    art.add("weighted_spectra.csv", weighted.str());
  }
  {
    std::ostringstream out;
    std::vector<std::string> header = {"iteration"};
    header.insert(header.end(), h.weight_symbols.begin(), h.weight_symbols.end());
    CsvWriter w(out, header);
    for (const auto& [n, lambdas] : h.weight_updates) {
      std::vector<CsvCell> row = {n};
      for (double l : lambdas) {
        row.emplace_back(l);
      }
      w.row(row);
    }
    art.add("weights.csv", out.str());
  }
  {
    const Points grid = evaluation_grid(prob, tc.eval_grid_per_axis);
    std::ostringstream out;
    std::vector<std::string> header = prob.dim() == 1 ? std::vector<std::string>{"x"}
                                                       : std::vector<std::string>{"x", "t"};
    header.insert(header.end(), {"predicted", "exact"});
    CsvWriter w(out, header);
    for (Eigen::Index i = 0; i < grid.cols(); ++i) {
      const Vector x = grid.col(i);
      std::vector<CsvCell> row;
      for (Eigen::Index d = 0; d < x.size(); ++d) {
        row.emplace_back(x[d]);
      }
      row.emplace_back(forward(r.params, x));
      row.emplace_back(prob.exact()->value(x));
      w.row(row);
    }
    art.add("solution.csv", out.str());
  }
  {
    std::ostringstream out;
    write_checkpoint(out, r.params);
    art.add("checkpoint.txt", out.str());
  }

  // Plots.
  Plot loss{"training loss", "iteration", "loss", false, true, {}};
  Plot err{"relative L2 error", "iteration", "relative L2", false, true, {}};
  Series total{"total", {}, {}}, l2{"relative L2", {}, {}};
  std::vector<Series> groups;
  for (const auto& g : h.group_names) {
    groups.push_back({g, {}, {}});
  }
  for (const auto& row : h.rows) {
    const double n = static_cast<double>(row.iteration);
    total.x.push_back(n);
    total.y.push_back(row.total_loss);
    l2.x.push_back(n);
    l2.y.push_back(row.relative_l2);
    for (std::size_t g = 0; g < groups.size() && g < row.group_losses.size(); ++g) {
      groups[g].x.push_back(n);
      groups[g].y.push_back(row.group_losses[g]);
    }
  }
  loss.series.push_back(total);
  loss.series.insert(loss.series.end(), groups.begin(), groups.end());
  err.series.push_back(l2);
  art.add("loss.svg", svg_text(loss));
  art.add("error.svg", svg_text(err));

  if (!h.weight_updates.empty()) {
    Plot wp{"loss weights", "iteration", "lambda", false, true, {}};
    for (std::size_t g = 0; g < h.weight_symbols.size(); ++g) {
      Series s{h.weight_symbols[g], {}, {}};
      for (const auto& [n, lambdas] : h.weight_updates) {
        s.x.push_back(static_cast<double>(n));
        s.y.push_back(lambdas[g]);
      }
      wp.series.push_back(s);
    }
    art.add("weights.svg", svg_text(wp));
  }
  if (!h.snapshots.empty()) {
    const Snapshot& s0 = h.snapshots.front();
    Plot sp{"NTK eigenvalues at iteration " + std::to_string(s0.iteration), "rank", "eigenvalue", false, true, {}};
    auto add_spectrum = [&](const std::string& label, const Spectrum& spec) {
      Series s{label, {}, {}};
      for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i) {
        s.x.push_back(static_cast<double>(i));
        s.y.push_back(spec.eigenvalues[i]);
      }
      sp.series.push_back(s);
    };
    add_spectrum("K", s0.spectra.full);
    for (std::size_t g = 0; g < s0.spectra.blocks.size(); ++g) {
      add_spectrum("K_" + h.group_names[g], s0.spectra.blocks[g]);
    }
    art.add("spectrum.svg", svg_text(sp));
  }
  if (prob.dim() == 1) {
    const Points grid = evaluation_grid(prob, tc.eval_grid_per_axis);
    Plot sol{"solution", "x", "u", false, false, {}};
    Series pred{"predicted", {}, {}}, exact{"exact", {}, {}};
    for (Eigen::Index i = 0; i < grid.cols(); ++i) {
      const Vector x = grid.col(i);
      pred.x.push_back(x[0]);
      pred.y.push_back(forward(r.params, x));
      exact.x.push_back(x[0]);
      exact.y.push_back(prob.exact()->value(x));
    }
    sol.series = {pred, exact};
    art.add("solution.svg", svg_text(sol));
  }

  art.summary["final_loss"] = h.final_loss;
  art.summary["final_relative_l2"] = h.final_relative_l2;
  art.summary["final_weights"] = weights_json(h.weight_symbols, r.final_weights.lambdas);
  art.summary["iterations"] = h.rows.empty() ? 0 : h.rows.back().iteration;
  if (!h.snapshots.empty()) {
    art.summary["initial_block_traces"] = weights_json(h.group_names, h.snapshots.front().block_traces);
    art.summary["final_kernel_drift"] = h.snapshots.back().kernel_drift;
    art.summary["final_param_drift"] = h.snapshots.back().param_drift;
  }
  art.metric_name = "final_relative_l2";
  art.metric = h.final_relative_l2;
  art.diverged = h.diverged;
  art.diagnostic = h.diagnostic;
}

Artifacts run_training(const ExperimentConfig& c, const Progress& progress) {
  const PdeProblem prob = c.kind == ExperimentKind::wave ? wave1d() : poisson1d(c.a);
  const TrainResult r = train(prob, c.arch(), c.train, progress_observer(progress, c.train.iterations, ""));
  Artifacts art;
  add_training_outputs(art, prob, r, c.train);
  return art;
}

// --- kernel_convergence ----------------------------------------------------------

Artifacts run_kernel_convergence(const ExperimentConfig& c, const Progress& progress) {
  const PdeProblem prob = poisson1d(c.a);
  Artifacts art;
  std::ostringstream drift, losses;
  CsvWriter dw(drift, {"width", "iteration", "param_drift", "kernel_drift"});
  CsvWriter lw(losses, {"width", "iteration", "total_loss", "relative_l2"});
  Plot kp{"kernel drift", "iteration", "||K(n) - K(0)|| / ||K(0)||", false, false, {}};
  Plot pp{"parameter drift", "iteration", "||theta(n) - theta(0)|| / ||theta(0)||", false, false, {}};
  json per_width = json::array();
  TrainConfig tc = c.train;
  tc.record_snapshots = true;
  for (std::size_t w : c.study.widths) {
    const std::string tag = "width " + std::to_string(w) + ": ";
    const TrainResult r = train(prob, c.arch(w), tc, progress_observer(progress, tc.iterations, tag));
    const TrainHistory& h = r.history;
    Series ks{"width " + std::to_string(w), {}, {}}, ps = ks;
    for (const auto& s : h.snapshots) {
      dw.row({w, s.iteration, s.param_drift, s.kernel_drift});
      ks.x.push_back(static_cast<double>(s.iteration));
      ks.y.push_back(s.kernel_drift);
      ps.x.push_back(static_cast<double>(s.iteration));
      ps.y.push_back(s.param_drift);
    }
    for (const auto& row : h.rows) {
      lw.row({w, row.iteration, row.total_loss, row.relative_l2});
    }
    kp.series.push_back(ks);
    pp.series.push_back(ps);
    const double kd = h.snapshots.empty() ? std::nan("") : h.snapshots.back().kernel_drift;
    const double pd = h.snapshots.empty() ? std::nan("") : h.snapshots.back().param_drift;
    per_width.push_back({{"width", w},
                         {"final_kernel_drift", kd},
                         {"final_param_drift", pd},
                         {"final_relative_l2", h.final_relative_l2}});
    art.metric = kd;
    if (h.diverged) {
      art.diverged = true;
      art.diagnostic = tag + h.diagnostic;
      break;
    }
  }
  art.add("drift.csv", drift.str());
  art.add("losses.csv", losses.str());
  art.add("kernel_drift.svg", svg_text(kp));
  art.add("param_drift.svg", svg_text(pp));
  art.summary["widths"] = per_width;
  art.metric_name = "final_kernel_drift_at_last_width";
  return art;
}

// --- spectrum ------------------------------------------------------------------

Artifacts run_spectrum(const ExperimentConfig& c, const Progress& progress) {
  const MlpParams params = init(c.arch(), c.train.init_seed);
  Artifacts art;
  std::ostringstream spectra, traces;
  CsvWriter sw(spectra, {"a", "block", "rank", "eigenvalue"});
  CsvWriter tw(traces, {"a", "block", "trace", "average_rate"});
  Plot sp{"NTK eigenvalues at initialization", "rank", "eigenvalue", false, true, {}};
  json per_a = json::array();
  for (double a : c.study.a_values) {
    if (progress) {
      progress("a = " + label_of(a));
    }
    const PdeProblem prob = poisson1d(a);
    const Batch b = sample_batch(prob, c.train.batch_sizes, c.train.sampling, derive_seed(c.train.sampling_seed, 0));
    const NtkMatrix k = assemble(params, prob, b);
    const BlockSpectra s = block_spectra(k);
    auto emit = [&](const std::string& block, const Spectrum& spec) {
      Series series{"a=" + label_of(a) + " " + block, {}, {}};
      for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i) {
        sw.row({a, block, i, spec.eigenvalues[i]});
        series.x.push_back(static_cast<double>(i));
        series.y.push_back(spec.eigenvalues[i]);
      }
      tw.row({a, block, spec.trace, average_rate(spec)});
      sp.series.push_back(series);
    };
    emit("K", s.full);
    for (std::size_t g = 0; g < s.blocks.size(); ++g) {
      emit("K_" + k.groups()[g], s.blocks[g]);
    }
    const double ratio = k.block_trace(1) / k.block_trace(0);
    json entry = {{"a", a},
                  {"block_traces", weights_json(k.groups(), k.block_traces())},
                  {"trace_ratio_residual_over_boundary", ratio},
                  {"lambda_max", s.full.eigenvalues.front()}};
    if (s.full.eigenvalues.size() >= 50) {
      entry["lambda50_over_lambda1"] = s.full.eigenvalues[49] / s.full.eigenvalues[0];
    }
    per_a.push_back(entry);
    art.metric = ratio;
  }
  art.add("spectra.csv", spectra.str());
  art.add("traces.csv", traces.str());
  art.add("spectrum.svg", svg_text(sp));
  art.summary["a_values"] = per_a;
  art.metric_name = "trace_ratio_at_last_a";
  return art;
}

// --- limit_check ---------------------------------------------------------------

std::string entry_name(const char* block, std::size_t i, std::size_t j) {
  return std::string(block) + "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

Artifacts run_limit_check(const ExperimentConfig& c, const Progress& progress) {
  const std::size_t n = c.study.grid_points;
  std::vector<double> grid(n);
  Points pts(1, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    pts(0, static_cast<Eigen::Index>(i)) = grid[i];
  }
  Batch batch;
  batch.groups.push_back({"u", LinearOperator::identity(), pts, Vector::Zero(pts.cols())});
  batch.groups.push_back({"r", LinearOperator::derivative(0, 2), pts, Vector::Zero(pts.cols())});
  const DenseMatrix theta = LimitingKernel{c.study.quadrature_order}.block_matrix(grid, grid);

  Artifacts art;
  std::vector<LimitComparisonRow> rows;
  Plot dp{"max |E K(0) - Theta| over the grid", "width", "max deviation", true, true, {}};
  Series dev{"max deviation", {}, {}};
  json per_width = json::array();
  for (std::size_t k = 0; k < c.study.widths.size(); ++k) {
    const std::size_t w = c.study.widths[k];
    if (progress) {
      progress("width " + std::to_string(w) + ": " + std::to_string(c.study.num_inits) + " inits");
    }
    const McKernelEstimate e = mc_kernel_oracle(c.arch(w), batch, c.study.num_inits, derive_seed(c.seed, k));
    double worst = 0.0, worst_z = 0.0;
    std::size_t beyond = 0;
    for (Eigen::Index i = 0; i < theta.rows(); ++i) {
      for (Eigen::Index j = 0; j < theta.cols(); ++j) {
        const std::size_t ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(j);
        const char* block = ii < n ? (jj < n ? "uu" : "ur") : (jj < n ? "ru" : "rr");
        rows.push_back({w, entry_name(block, ii % n, jj % n), e.mean(i, j), e.standard_error(i, j), theta(i, j)});
        const double d = std::abs(e.mean(i, j) - theta(i, j));
        const double z = d / e.standard_error(i, j);
        worst = std::max(worst, d);
        worst_z = std::max(worst_z, z);
        beyond += z > 3.0 ? 1 : 0;
      }
    }
    dev.x.push_back(static_cast<double>(w));
    dev.y.push_back(worst);
    per_width.push_back({{"width", w}, {"max_deviation", worst}, {"max_z", worst_z}, {"entries_beyond_3se", beyond}});
    art.metric = worst;
  }
  {
    std::ostringstream out;
    write_limit_comparison_csv(out, rows);
    art.add("limit_comparison.csv", out.str());
  }
  dp.series.push_back(dev);
  art.add("deviation.svg", svg_text(dp));
  art.summary["widths"] = per_width;
  art.summary["entries"] = theta.size();

  if (c.study.field_inits > 0) {
    const std::size_t w = c.study.widths.back();
    if (progress) {
      progress("u_xx covariance at width " + std::to_string(w));
    }
    const McFieldEstimate f =
        mc_operator_field(c.arch(w), pts, LinearOperator::derivative(0, 2), c.study.field_inits, ~c.seed);
    std::ostringstream out;
    CsvWriter cw(out, {"x", "x_prime", "empirical", "stderr", "limit", "z"});
    double worst_z = 0.0, mean_z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ei = static_cast<Eigen::Index>(i);
      mean_z = std::max(mean_z, std::abs(f.mean[ei]) / f.mean_stderr[ei]);
      for (std::size_t j = 0; j < n; ++j) {
        const auto ej = static_cast<Eigen::Index>(j);
        const double limit = sigma1_xx(grid[i], grid[j], c.study.quadrature_order);
        const double z = std::abs(f.covariance(ei, ej) - limit) / f.covariance_stderr(ei, ej);
        worst_z = std::max(worst_z, z);
        cw.row({grid[i], grid[j], f.covariance(ei, ej), f.covariance_stderr(ei, ej), limit, z});
      }
    }
    art.add("uxx_covariance.csv", out.str());
    art.summary["uxx_covariance"] = {{"width", w}, {"inits", c.study.field_inits}, {"max_z", worst_z},
                                     {"mean_max_z", mean_z}};
  }
  art.metric_name = "max_deviation_at_last_width";
  return art;
}

// --- linearized_check ----------------------------------------------------------

Artifacts run_linearized_check(const ExperimentConfig& c, const Progress& progress) {
  const PdeProblem prob = poisson1d(c.a);
  const TrainConfig& tc = c.train;
  const MlpParams theta0 = init(c.arch(), tc.init_seed);
  const Batch batch = sample_batch(prob, tc.batch_sizes, tc.sampling, derive_seed(tc.sampling_seed, 0));
  const NtkMatrix k0 = assemble(theta0, prob, batch);
  const std::vector<double> lambdas =
      tc.fixed_weights.empty() ? std::vector<double>(prob.num_groups(), 1.0) : tc.fixed_weights;
  const LinearizedState state(k0, batch.stacked_targets(), stacked_outputs(theta0, batch),
                              kernel_column_scales(k0, lambdas, tc.normalized_loss));

  std::map<std::size_t, Vector> actual;
  actual[0] = state.initial_outputs();
  const TrainObserver report = progress_observer(progress, tc.iterations, "");
  TrainConfig run = tc;
  run.record_snapshots = false;
  const TrainResult r = train(prob, theta0, run, [&](std::size_t n, const MlpParams& p) {
    if (n % c.study.record_every == 0 || n == tc.iterations) {
      actual[n] = stacked_outputs(p, batch);
    }
    if (report) {
      report(n, p);
    }
  });

  Artifacts art;
  std::vector<TrajectoryRecord> records;
  std::ostringstream mismatch_csv, modes_csv;
  CsvWriter mw(mismatch_csv, {"iteration", "time", "relative_mismatch", "mismatch_over_change"});
  CsvWriter dw(modes_csv, {"iteration", "mode", "eigenvalue", "predicted_factor", "measured_factor"});
  const Vector e0 = state.project_error(state.initial_outputs());
  const auto& ev = state.eigensystem().spectrum.eigenvalues;
  const std::size_t modes = std::min(c.study.modes, ev.size());
  Plot mp{"linearized prediction mismatch", "iteration", "||y_lin - y|| / ||y||", false, true, {}};
  Series ms{"relative mismatch", {}, {}};
  Plot fp{"per-mode decay", "iteration", "measured / predicted factor", false, false, {}};
  std::vector<Series> mode_series(modes);
  for (std::size_t i = 0; i < modes; ++i) {
    mode_series[i].label = "mode " + std::to_string(i);
  }
  double worst = 0.0;
  for (const auto& [n, y] : actual) {
    const double t = tc.learning_rate * static_cast<double>(n);
    const Vector pred = evolve(state, t);
    records.push_back({n, pred, y});
    const double rel = (pred - y).norm() / y.norm();
    const double moved = (y - state.initial_outputs()).norm();
    mw.row({n, t, rel, moved > 0.0 ? (pred - y).norm() / moved : 0.0});
    if (n > 0) {
      worst = std::max(worst, rel);
      ms.x.push_back(static_cast<double>(n));
      ms.y.push_back(rel);
    }
    const Vector en = state.project_error(y);
    for (std::size_t i = 0; i < modes; ++i) {
      const auto ei = static_cast<Eigen::Index>(i);
      const double predicted = std::exp(-ev[i] * t);
      const double measured = e0[ei] != 0.0 ? en[ei] / e0[ei] : std::nan("");
      dw.row({n, i, ev[i], predicted, measured});
      mode_series[i].x.push_back(static_cast<double>(n));
      mode_series[i].y.push_back(measured / predicted);
    }
  }
  {
    std::ostringstream out;
    write_trajectory_csv(out, records);
    art.add("trajectory.csv", out.str());
  }
  art.add("mismatch.csv", mismatch_csv.str());
  art.add("modes.csv", modes_csv.str());
  mp.series.push_back(ms);
  fp.series = mode_series;
  art.add("mismatch.svg", svg_text(mp));
  art.add("modes.svg", svg_text(fp));

  json top = json::array();
  for (std::size_t i = 0; i < modes; ++i) {
    top.push_back(ev[i]);
  }
  art.summary["max_relative_mismatch"] = worst;
  art.summary["top_eigenvalues"] = top;
  art.summary["final_relative_l2"] = r.history.final_relative_l2;
  art.metric_name = "max_relative_mismatch";
  art.metric = worst;
  art.diverged = r.history.diverged;
  art.diagnostic = r.history.diagnostic;
  return art;
}

}  // namespace

void Artifacts::add(std::string name, std::string contents) {
  files.emplace_back(std::move(name), std::move(contents));
}

Artifacts run_experiment(const ExperimentConfig& config, const Progress& progress) {
  switch (config.kind) {
    case ExperimentKind::poisson:
    case ExperimentKind::wave:
      return run_training(config, progress);
    case ExperimentKind::kernel_convergence:
      return run_kernel_convergence(config, progress);
    case ExperimentKind::spectrum:
      return run_spectrum(config, progress);
    case ExperimentKind::limit_check:
      return run_limit_check(config, progress);
    case ExperimentKind::linearized_check:
      return run_linearized_check(config, progress);
  }
  throw ParameterError("unhandled experiment kind");
}

namespace {

bool is_svg(const std::string& name) { return name.size() > 4 && name.substr(name.size() - 4) == ".svg"; }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json results_json(const ExperimentConfig& config, const Artifacts& artifacts) {
  json files = json::array();
  for (const auto& [name, contents] : artifacts.files) {
    if (config.emit_svg || !is_svg(name)) {
      files.push_back(name);
    }
  }
  return {
      {"experiment", to_string(config.kind)},
      {"status", artifacts.diverged ? "diverged" : "ok"},
      {"diagnostic", artifacts.diagnostic},
      {"metric", {{"name", artifacts.metric_name}, {"value", finite_or_null(artifacts.metric)}}},
      {"seeds",
       {{"seed", config.seed},
        {"init_seed", config.train.init_seed},
        {"sampling_seed", config.train.sampling_seed}}},
      {"config", to_json(config)},
      {"summary", artifacts.summary},
      {"files", files},
  };
}

void write_artifacts(const std::filesystem::path& dir, const ExperimentConfig& config, const Artifacts& artifacts) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& contents) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    out << contents;
    if (!out) {
      throw DataError("cannot write " + (dir / name).string());
    }
  };
  for (const auto& [name, contents] : artifacts.files) {
    if (config.emit_svg || !is_svg(name)) {
      write(name, contents);
    }
  }
  write("results.json", results_json(config, artifacts).dump(2) + "\n");
}

std::uint64_t trial_seed(std::uint64_t base, std::size_t trial) { return base + 1000 * static_cast<std::uint64_t>(trial); }

}  // namespace pinntk::cli
