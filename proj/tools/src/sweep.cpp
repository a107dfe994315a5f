#include "sweep.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pinntk/csv.hpp"
#include "pinntk/error.hpp"
#include "svg.hpp"

namespace pinntk::cli {

using nlohmann::json;

namespace {

std::string sanitize(const std::string& text) {
  std::string out;
  for (char c : text) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
    out += keep ? c : '_';
  }
  return out;
}

std::string value_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

SweepPlan plan_sweep(const json& doc, const std::string& param, const std::vector<std::string>& values,
                     std::size_t trials) {
  if (values.empty()) {
    throw ConfigError({"--values: at least one value is required"});
  }
  if (trials == 0) {
    throw ConfigError({"--trials: must be >= 1"});
  }
  if (param == "seed" || param == "output_dir") {
    throw ConfigError({param + ": managed by the sweep and cannot be swept"});
  }
  const ExperimentConfig base = parse_config(doc);

  SweepPlan plan;
  plan.param = param;
  plan.root = base.output_dir;
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const json v = parse_value(values[i]);
    plan.values.push_back(v);
    plan.value_labels.push_back(value_text(v));
    const std::filesystem::path value_dir = plan.root / (sanitize(param) + "=" + sanitize(value_text(v)));
    for (std::size_t t = 0; t < trials; ++t) {
      json d = doc;
      try {
        set_path(d, param, v);
        d["seed"] = trial_seed(base.seed, t);
        d["output_dir"] = (value_dir / ("trial_" + std::to_string(t))).string();
        plan.runs.push_back({i, t, parse_config(d)});
      } catch (const ConfigError& e) {
        for (const auto& p : e.problems()) {
          problems.push_back("value " + value_text(v) + ": " + p);
        }
        break;
      }
    }
  }
  if (!problems.empty()) {
    throw ConfigError(problems);
  }
  return plan;
}

SweepOutcome execute_sweep(const SweepPlan& plan, const Progress& progress) {
  SweepOutcome outcome;
  std::ostringstream trials_csv;
  CsvWriter tw(trials_csv, {"value", "trial", "seed", "metric", "status", "directory"});
  std::string metric_name;
  for (const SweepRun& run : plan.runs) {
    const std::string tag = plan.param + "=" + plan.value_labels[run.value_index] + " trial " +
                            std::to_string(run.trial);
    if (progress) {
      progress(tag);
    }
    const Progress inner = progress ? Progress([&](const std::string& m) { progress("  " + m); }) : Progress();
    const Artifacts art = run_experiment(run.config, inner);
    write_artifacts(run.config.output_dir, run.config, art);
    metric_name = art.metric_name;
    outcome.metrics.push_back(art.metric);
    outcome.any_diverged = outcome.any_diverged || art.diverged;
    const std::string dir = std::filesystem::path(run.config.output_dir).lexically_relative(plan.root).string();
    tw.row({plan.value_labels[run.value_index], run.trial, run.config.seed, art.metric,
            art.diverged ? "diverged" : "ok", dir});
  }

  std::ostringstream agg;
  CsvWriter aw(agg, {"value", "metric", "mean", "std", "trials"});
  Series mean_series{metric_name, {}, {}};
  bool numeric = true, positive = true;
  for (std::size_t i = 0; i < plan.values.size(); ++i) {
    std::vector<double> m;
    for (std::size_t r = 0; r < plan.runs.size(); ++r) {
      if (plan.runs[r].value_index == i) {
        m.push_back(outcome.metrics[r]);
      }
    }
    const double n = static_cast<double>(m.size());
    double mean = 0.0;
    for (double v : m) {
      mean += v / n;
    }
    double var = 0.0;
    for (double v : m) {
      var += (v - mean) * (v - mean);
    }
    const double sd = m.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    aw.row({plan.value_labels[i], metric_name, mean, sd, m.size()});
    if (plan.values[i].is_number()) {
      const double x = plan.values[i].get<double>();
      positive = positive && x > 0.0;
      mean_series.x.push_back(x);
      mean_series.y.push_back(mean);
    } else {
      numeric = false;
    }
  }

  std::filesystem::create_directories(plan.root);
  auto write = [&](const std::string& name, const std::string& contents) {
    std::ofstream out(plan.root / name, std::ios::binary | std::ios::trunc);
    out << contents;
    if (!out) {
      throw DataError("cannot write " + (plan.root / name).string());
    }
  };
  write("sweep.csv", agg.str());
  write("sweep_trials.csv", trials_csv.str());
  if (numeric && plan.runs.front().config.emit_svg) {
    Plot p{"sweep over " + plan.param, plan.param, metric_name + " (mean)", positive, true, {mean_series}};
    std::ostringstream svg;
    write_svg(svg, p);
    write("sweep.svg", svg.str());
  }
  return outcome;
}

}  // namespace pinntk::cli
