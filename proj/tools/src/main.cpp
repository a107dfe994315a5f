// pinntk: experiment runner.
//
//   pinntk run <config.json> [--out DIR] [--seed N] [--quiet]
//   pinntk sweep <config.json> --param NAME --values V1,V2,... [--trials T]
//                [--out DIR] [--seed N] [--quiet]
//
// Exit status: 0 success, 1 runtime failure, 2 invalid config or usage,
// 3 training diverged (outputs written).

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "experiments.hpp"
#include "pinntk/error.hpp"
#include "sweep.hpp"

using namespace pinntk::cli;

namespace {

struct Common {
  std::string config_path;
  std::string out;
  long long seed = -1;
  bool quiet = false;
};

nlohmann::json load_document(const Common& c) {
  nlohmann::json doc = read_config_document(c.config_path);
  if (!doc.is_object()) {
    throw ConfigError({c.config_path + ": top level must be an object"});
  }
  if (!c.out.empty()) {
    doc["output_dir"] = c.out;
  }
  if (c.seed >= 0) {
    doc["seed"] = static_cast<std::uint64_t>(c.seed);
  }
  return doc;
}

Progress make_progress(bool quiet) {
  if (quiet) {
    return {};
  }
  return [](const std::string& line) { std::cerr << line << '\n'; };
}

int report_config_error(const ConfigError& e) {
  std::cerr << "error: invalid config\n";
  for (const auto& p : e.problems()) {
    std::cerr << "  " << p << '\n';
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PINN neural tangent kernel experiments"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", common.config_path, "JSON config file")->required();
    sub->add_option("--out", common.out, "output directory (overrides output_dir)");
    sub->add_option("--seed", common.seed, "base seed (overrides seed)")->check(CLI::NonNegativeNumber);
    sub->add_flag("--quiet", common.quiet, "suppress progress output");
  };

  CLI::App* run = app.add_subcommand("run", "run one experiment");
  add_common(run);

  CLI::App* sweep = app.add_subcommand("sweep", "repeat an experiment over values of one config key");
  add_common(sweep);
  std::string param;
  std::vector<std::string> values;
  std::size_t trials = 1;
  sweep->add_option("--param", param, "dotted config key, e.g. train.fixed_weights[0]")->required();
  sweep->add_option("--values", values, "comma-separated values")->required()->delimiter(',');
  sweep->add_option("--trials", trials, "trials per value; trial t uses seed + 1000 t")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (common.quiet) {
    pinntk::set_warning_sink([](const std::string&) {});
  }
  const Progress progress = make_progress(common.quiet);

  try {
    const nlohmann::json doc = load_document(common);
    if (run->parsed()) {
      const ExperimentConfig config = parse_config(doc);
      const Artifacts art = run_experiment(config, progress);
      write_artifacts(config.output_dir, config, art);
      if (!common.quiet) {
        std::cout << to_string(config.kind) << ": " << art.metric_name << " = " << art.metric << " -> "
                  << config.output_dir << '\n';
      }
      if (art.diverged) {
        std::cerr << "error: " << art.diagnostic << '\n';
        return 3;
      }
      return 0;
    }
    const SweepPlan plan = plan_sweep(doc, param, values, trials);
    const SweepOutcome outcome = execute_sweep(plan, progress);
    if (!common.quiet) {
      std::cout << "sweep over " << param << ": " << plan.runs.size() << " runs -> " << plan.root.string()
                << "/sweep.csv\n";
    }
    return outcome.any_diverged ? 3 : 0;
  } catch (const ConfigError& e) {
    return report_config_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
