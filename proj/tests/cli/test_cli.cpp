#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "config.hpp"
#include "experiments.hpp"
#include "pinntk/error.hpp"
#include "svg.hpp"
#include "sweep.hpp"

using namespace pinntk;
using namespace pinntk::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pinntk_cli_tests_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

bool contains(const std::vector<std::string>& items, const std::string& needle) {
  for (const auto& s : items) {
    if (s.find(needle) != std::string::npos) {
      return true;
    }
  }
  return false;
}

std::vector<std::string> config_problems(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

// Header row present and every row with the header's column count. Fields
// are split with RFC 4180 quoting.
bool csv_well_formed(const std::string& text) {
  std::size_t columns = 0, rows = 0, fields = 1;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        ++i;
      } else if (c == '"') {
        quoted = false;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      ++fields;
    } else if (c == '\n') {
      if (rows == 0) {
        columns = fields;
      } else if (fields != columns) {
        return false;
      }
      ++rows;
      fields = 1;
    }
  }
  return rows >= 1 && !quoted && !text.empty() && text.back() == '\n';
}

// Validator for the schema subset used by docs/results.schema.json.
void validate(const json& schema, const json& v, const std::string& path, std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    std::vector<std::string> types;
    if (schema["type"].is_array()) {
      types = schema["type"].get<std::vector<std::string>>();
    } else {
      types.push_back(schema["type"].get<std::string>());
    }
    bool ok = false;
    for (const auto& t : types) {
      ok = ok || (t == "object" && v.is_object()) || (t == "array" && v.is_array()) ||
           (t == "string" && v.is_string()) || (t == "number" && v.is_number()) ||
           (t == "integer" && v.is_number_integer()) || (t == "boolean" && v.is_boolean()) ||
           (t == "null" && v.is_null());
    }
    if (!ok) {
      errors.push_back(path + ": wrong type");
      return;
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) {
      found = found || e == v;
    }
    if (!found) {
      errors.push_back(path + ": not in enum");
    }
  }
  if (v.is_object()) {
    for (const auto& r : schema.value("required", json::array())) {
      if (!v.contains(r.get<std::string>())) {
        errors.push_back(path + "." + r.get<std::string>() + ": missing");
      }
    }
    const json props = schema.value("properties", json::object());
    for (const auto& item : v.items()) {
      if (props.contains(item.key())) {
        validate(props[item.key()], item.value(), path + "." + item.key(), errors);
      } else if (schema.contains("additionalProperties") && schema["additionalProperties"] == false) {
        errors.push_back(path + "." + item.key() + ": not allowed");
      }
    }
  }
  if (v.is_array() && schema.contains("items")) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      validate(schema["items"], v[i], path + "[" + std::to_string(i) + "]", errors);
    }
  }
}

json results_schema() {
  std::ifstream in(fs::path(PINNTK_SOURCE_DIR) / "docs" / "results.schema.json");
  return json::parse(in);
}

json small_poisson(const fs::path& out) {
  return {{"experiment", "poisson"},
          {"output_dir", out.string()},
          {"a", 2.0},
          {"network", {{"hidden", {20}}}},
          {"train",
           {{"learning_rate", 1e-4},
            {"iterations", 60},
            {"weight_scheme", "adaptive"},
            {"update_every", 20},
            {"log_every", 20},
            {"batch_sizes", {10, 20}}}}};
}

}  // namespace

TEST_CASE("config defaults and seed mapping") {
  const ExperimentConfig c = parse_config({{"experiment", "poisson"}, {"seed", 7}});
  CHECK(c.kind == ExperimentKind::poisson);
  CHECK(c.a == 4.0);
  CHECK(c.hidden == std::vector<std::size_t>{100});
  CHECK(c.train.batch_sizes == std::vector<std::size_t>{100, 100});
  CHECK(c.train.init_seed == 7);
  CHECK(c.train.sampling_seed == 8);
  CHECK(c.emit_svg);
  const ExperimentConfig w = parse_config({{"experiment", "wave"}});
  CHECK(w.train.batch_sizes.size() == 3);
  CHECK(w.arch().input_dim == 2);
}

TEST_CASE("unknown keys and type errors are all reported") {
  const auto p = config_problems({{"experiment", "poisson"},
                                  {"bogus", 1},
                                  {"train", {{"iterations", "many"}, {"extra", true}, {"adam", {{"beta3", 0.5}}}}},
                                  {"study", {{"widths", {10, -1}}}}});
  CHECK(contains(p, "bogus: unknown key"));
  CHECK(contains(p, "train.extra: unknown key"));
  CHECK(contains(p, "train.adam.beta3: unknown key"));
  CHECK(contains(p, "train.iterations: expected a non-negative integer"));
  CHECK(contains(p, "study.widths[1]"));
  CHECK(p.size() == 5);
}

TEST_CASE("range and consistency errors") {
  CHECK(contains(config_problems(json::object()), "experiment: required"));
  CHECK(contains(config_problems({{"experiment", "heat"}}), "unknown experiment"));
  CHECK(contains(config_problems({{"experiment", "poisson"}, {"train", {{"batch_sizes", {10}}}}}), "batch_sizes"));
  CHECK(contains(config_problems({{"experiment", "poisson"}, {"train", {{"optimizer", "sgd"}}}}), "train.optimizer"));
  CHECK(contains(config_problems({{"experiment", "poisson"}, {"a", -1.0}}), "a: must be"));
  CHECK(contains(config_problems({{"experiment", "linearized_check"}, {"train", {{"weight_scheme", "adaptive"}}}}),
                 "linearized_check needs fixed"));
  CHECK(contains(config_problems({{"experiment", "limit_check"}, {"network", {{"hidden", {8, 8}}}}}),
                 "exactly one hidden layer"));
  CHECK(contains(config_problems(json::array()), "expected an object"));
}

TEST_CASE("to_json round trip") {
  json doc = small_poisson("x");
  doc["train"]["fixed_weights"] = {3.0, 1.0};
  const ExperimentConfig c = parse_config(doc);
  const json echo = to_json(c);
  CHECK(to_json(parse_config(echo)) == echo);
  CHECK(echo["train"]["fixed_weights"] == json({3.0, 1.0}));
  CHECK(echo["train"]["weight_scheme"] == "adaptive");
}

TEST_CASE("set_path") {
  json doc = {{"experiment", "poisson"}};
  set_path(doc, "a", 2.5);
  CHECK(doc["a"] == 2.5);
  CHECK_THROWS_AS(set_path(doc, "train.fixed_weights[0]", 5.0), ConfigError);  // empty default list
  json doc2 = {{"experiment", "poisson"}, {"train", {{"fixed_weights", {1.0, 1.0}}}}};
  set_path(doc2, "train.fixed_weights[0]", 100.0);
  CHECK(parse_config(doc2).train.fixed_weights == std::vector<double>{100.0, 1.0});
  set_path(doc2, "train.learning_rate", 1e-3);
  CHECK(parse_config(doc2).train.learning_rate == 1e-3);
  CHECK_THROWS_AS(set_path(doc2, "train.nope", 1), ConfigError);
  CHECK_THROWS_AS(set_path(doc2, "train.fixed_weights[5]", 1.0), ConfigError);
  CHECK_THROWS_AS(set_path(doc2, "train.fixed_weights[x]", 1.0), ConfigError);
  CHECK_THROWS_AS(set_path(doc2, "a.b", 1.0), ConfigError);
}

TEST_CASE("parse_value") {
  CHECK(parse_value("10") == json(10));
  CHECK(parse_value("1e-5") == json(1e-5));
  CHECK(parse_value("true") == json(true));
  CHECK(parse_value("adam") == json("adam"));
}

TEST_CASE("svg output is deterministic and well formed") {
  Plot p{"t <1>", "x", "y", false, true, {{"a", {0, 1, 2, 3}, {1, 10, 0, 100}}, {"b", {0, 1}, {5, 5}}}};
  std::ostringstream s1, s2;
  write_svg(s1, p);
  write_svg(s2, p);
  CHECK(s1.str() == s2.str());
  CHECK(s1.str().rfind("<svg", 0) == 0);
  CHECK(s1.str().find("</svg>") != std::string::npos);
  CHECK(s1.str().find("t &lt;1&gt;") != std::string::npos);
  CHECK(s1.str().find("nan") == std::string::npos);
  std::ostringstream empty;
  write_svg(empty, Plot{});
  CHECK(empty.str().find("</svg>") != std::string::npos);
}

TEST_CASE("spectrum experiment: eigenvalues descend per block") {
  const ExperimentConfig c = parse_config({{"experiment", "spectrum"},
                                           {"network", {{"hidden", {40}}}},
                                           {"train", {{"batch_sizes", {20, 60}}}},
                                           {"study", {{"a_values", {1.0, 2.0, 4.0}}}}});
  const Artifacts art = run_experiment(c);
  std::string spectra;
  for (const auto& [name, text] : art.files) {
    if (name.size() > 4 && name.substr(name.size() - 4) == ".csv") {
      INFO(name);
      CHECK(csv_well_formed(text));
    }
    if (name == "spectra.csv") {
      spectra = text;
    }
  }
  REQUIRE(!spectra.empty());
  std::istringstream in(spectra);
  std::string line, prev_key;
  std::getline(in, line);
  CHECK(line == "a,block,rank,eigenvalue");
  double prev = 0.0;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto c3 = line.rfind(',');
    const auto c2 = line.rfind(',', c3 - 1);
    const std::string key = line.substr(0, c2);
    const double ev = std::stod(line.substr(c3 + 1));
    if (key == prev_key) {
      CHECK(ev <= prev);
    }
    prev_key = key;
    prev = ev;
    ++rows;
  }
  CHECK(rows == 3 * (80 + 20 + 60));
  CHECK(art.summary["a_values"].size() == 3);
  CHECK(art.metric_name == "trace_ratio_at_last_a");
}

TEST_CASE("kernel_convergence: drift decreases with width") {
  const ExperimentConfig c = parse_config({{"experiment", "kernel_convergence"},
                                           {"a", 1.0},
                                           {"train",
                                            {{"iterations", 2000},
                                             {"normalized_loss", false},
                                             {"log_every", 500},
                                             {"snapshot_iterations", {0, 2000}}}},
                                           {"study", {{"widths", {10, 100, 500}}}}});
  const Artifacts art = run_experiment(c);
  const json& w = art.summary["widths"];
  REQUIRE(w.size() == 3);
  for (std::size_t i = 1; i < 3; ++i) {
    CHECK(w[i]["final_kernel_drift"].get<double>() < w[i - 1]["final_kernel_drift"].get<double>());
    CHECK(w[i]["final_param_drift"].get<double>() < w[i - 1]["final_param_drift"].get<double>());
  }
}

TEST_CASE("training run writes schema-valid, byte-identical outputs") {
  const fs::path out = scratch("run");
  const ExperimentConfig c = parse_config(small_poisson(out));
  const Artifacts a1 = run_experiment(c);
  write_artifacts(out, c, a1);
  std::map<std::string, std::string> first;
  for (const auto& e : fs::directory_iterator(out)) {
    first[e.path().filename().string()] = slurp(e.path());
  }
  const Artifacts a2 = run_experiment(c);
  write_artifacts(out, c, a2);
  for (const auto& [name, text] : first) {
    INFO(name);
    CHECK(slurp(out / name) == text);
    if (name.size() > 4 && name.substr(name.size() - 4) == ".csv") {
      CHECK(csv_well_formed(text));
    }
  }
  CHECK(first.count("history.csv"));
  CHECK(first.count("checkpoint.txt"));
  CHECK(first.count("loss.svg"));

  const json results = json::parse(first.at("results.json"));
  std::vector<std::string> errors;
  validate(results_schema(), results, "results", errors);
  CHECK(errors.empty());
  for (const auto& e : errors) {
    MESSAGE(e);
  }
  CHECK(results["files"].size() + 1 == first.size());

  ExperimentConfig no_svg = c;
  no_svg.emit_svg = false;
  const fs::path out2 = scratch("run_nosvg");
  write_artifacts(out2, no_svg, a1);
  for (const auto& e : fs::directory_iterator(out2)) {
    CHECK(e.path().extension() != ".svg");
  }
}

TEST_CASE("results.json from every experiment kind validates") {
  const json schema = results_schema();
  std::vector<json> docs = {
      {{"experiment", "wave"},
       {"network", {{"hidden", {8}}}},
       {"train", {{"iterations", 3}, {"optimizer", "adam"}, {"learning_rate", 1e-3}, {"batch_sizes", {4, 4, 4}}}}},
      {{"experiment", "limit_check"},
       {"network", {{"hidden", {8}}}},
       {"study", {{"widths", {8, 16}}, {"num_inits", 4}, {"grid_points", 3}, {"field_inits", 4}, {"quadrature_order", 20}}}},
      {{"experiment", "linearized_check"},
       {"network", {{"hidden", {16}}}},
       {"train", {{"iterations", 20}, {"batch_sizes", {4, 8}}}},
       {"study", {{"record_every", 10}}}},
  };
  for (const auto& d : docs) {
    const ExperimentConfig c = parse_config(d);
    const Artifacts art = run_experiment(c);
    std::vector<std::string> errors;
    validate(schema, results_json(c, art), "results", errors);
    INFO(to_string(c.kind));
    CHECK(errors.empty());
    for (const auto& [name, text] : art.files) {
      if (name.size() > 4 && name.substr(name.size() - 4) == ".csv") {
        INFO(name);
        CHECK(csv_well_formed(text));
      }
    }
  }
}

TEST_CASE("sweep: validation, seeds, aggregate, single value equals run") {
  const fs::path root = scratch("sweep");
  json doc = small_poisson(root);

  CHECK_THROWS_AS(plan_sweep(doc, "train.nope", {"1"}, 1), ConfigError);
  CHECK_THROWS_AS(plan_sweep(doc, "train.learning_rate", {"1e-4", "-1"}, 1), ConfigError);
  CHECK_THROWS_AS(plan_sweep(doc, "seed", {"1"}, 1), ConfigError);
  CHECK(!fs::exists(root));

  const SweepPlan plan = plan_sweep(doc, "train.learning_rate", {"1e-5", "1e-4"}, 2);
  REQUIRE(plan.runs.size() == 4);
  CHECK(plan.runs[0].config.seed == 0);
  CHECK(plan.runs[1].config.seed == 1000);
  CHECK(plan.runs[1].config.train.init_seed == 1000);
  CHECK(plan.runs[2].config.train.learning_rate == 1e-4);
  const SweepOutcome outcome = execute_sweep(plan);
  const std::string agg = slurp(root / "sweep.csv");
  CHECK(csv_well_formed(agg));
  CHECK(csv_well_formed(slurp(root / "sweep_trials.csv")));
  std::istringstream in(agg);
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "value,metric,mean,std,trials");
  std::getline(in, row);
  const double m0 = outcome.metrics[0], m1 = outcome.metrics[1];
  const double mean = 0.5 * (m0 + m1);
  const double sd = std::abs(m0 - m1) / std::sqrt(2.0);
  std::istringstream fields(row);
  std::string value, metric, mean_text, sd_text;
  std::getline(fields, value, ',');
  std::getline(fields, metric, ',');
  std::getline(fields, mean_text, ',');
  std::getline(fields, sd_text, ',');
  CHECK(value == "1e-05");
  CHECK(std::stod(mean_text) == doctest::Approx(mean).epsilon(1e-12));
  CHECK(std::stod(sd_text) == doctest::Approx(sd).epsilon(1e-12));

  // A single-value sweep reproduces a plain run of the same config.
  const fs::path single = scratch("sweep_single");
  const SweepPlan one = plan_sweep(small_poisson(single), "a", {"2.0"}, 1);
  execute_sweep(one);
  const ExperimentConfig direct = parse_config(small_poisson(single));
  const Artifacts art = run_experiment(direct);
  for (const auto& [name, text] : art.files) {
    INFO(name);
    CHECK(slurp(fs::path(one.runs[0].config.output_dir) / name) == text);
  }
}

TEST_CASE("tool: malformed config exits nonzero without writing files") {
  const fs::path dir = scratch("malformed");
  fs::create_directories(dir);
  const fs::path out = dir / "out";
  {
    std::ofstream cfg(dir / "bad.json");
    cfg << R"({"experiment": "poisson", "output_dir": ")" << out.string() << R"(", "train": {"iterations": 0}})";
  }
  const std::string cmd = std::string("\"") + PINNTK_TOOL + "\" run \"" + (dir / "bad.json").string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  CHECK(status != 0);
  CHECK(!fs::exists(out));

  {
    std::ofstream cfg(dir / "truncated.json");
    cfg << R"({"experiment": "poisson", "output_dir": )";
  }
  const std::string cmd2 =
      std::string("\"") + PINNTK_TOOL + "\" run \"" + (dir / "truncated.json").string() + "\" 2>/dev/null";
  CHECK(std::system(cmd2.c_str()) != 0);

  const std::string cmd3 = std::string("\"") + PINNTK_TOOL + "\" sweep \"" + (dir / "bad.json").string() +
                           "\" --param a --values 1,2 2>/dev/null";
  CHECK(std::system(cmd3.c_str()) != 0);
  CHECK(!fs::exists(out));
}

TEST_CASE("shipped configs parse") {
  for (const auto& e : fs::directory_iterator(fs::path(PINNTK_SOURCE_DIR) / "configs")) {
    INFO(e.path().string());
    CHECK_NOTHROW(load_config(e.path().string()));
  }
}
