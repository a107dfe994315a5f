#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pinntk/error.hpp"
#include "pinntk/problems.hpp"

namespace pinntk::cli {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    out += "\n  " + s;
  }
  return out;
}

// Reads known keys of one JSON object and reports the rest as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string prefix, std::vector<std::string>& errors)
      : obj_(obj), prefix_(std::move(prefix)), errors_(errors) {
    if (!obj_.is_object()) {
      fail(prefix_.empty() ? "<root>" : prefix_.substr(0, prefix_.size() - 1), "expected an object");
      ok_ = false;
    }
  }

  bool ok() const { return ok_; }

  template <class T>
  void get(const std::string& key, T& out) {
    const json* v = find(key);
    if (v != nullptr) {
      convert(key, *v, out);
    }
  }

  // Child object; nullptr when absent.
  const json* child(const std::string& key) { return find(key); }

  std::string path(const std::string& key) const { return prefix_ + key; }

  void finish() {
    if (!ok_) {
      return;
    }
    for (const auto& item : obj_.items()) {
      if (!seen_.count(item.key())) {
        fail(path(item.key()), "unknown key");
      }
    }
  }

  void fail(const std::string& key_path, const std::string& what) { errors_.push_back(key_path + ": " + what); }

 private:
  const json* find(const std::string& key) {
    seen_.insert(key);
    if (!ok_) {
      return nullptr;
    }
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void convert(const std::string& key, const json& v, double& out) {
    if (v.is_number()) {
      out = v.get<double>();
    } else {
      fail(path(key), "expected a number");
    }
  }
  void convert(const std::string& key, const json& v, bool& out) {
    if (v.is_boolean()) {
      out = v.get<bool>();
    } else {
      fail(path(key), "expected true or false");
    }
  }
  void convert(const std::string& key, const json& v, std::string& out) {
    if (v.is_string()) {
      out = v.get<std::string>();
    } else {
      fail(path(key), "expected a string");
    }
  }
  void convert(const std::string& key, const json& v, std::uint64_t& out) {
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      out = v.get<std::uint64_t>();
    } else {
      fail(path(key), "expected a non-negative integer");
    }
  }
  template <class E>
  void convert(const std::string& key, const json& v, std::vector<E>& out) {
    if (!v.is_array()) {
      fail(path(key), "expected an array");
      return;
    }
    std::vector<E> tmp(v.size());
    const std::size_t before = errors_.size();
    for (std::size_t i = 0; i < v.size(); ++i) {
      convert(key + "[" + std::to_string(i) + "]", v[i], tmp[i]);
    }
    if (errors_.size() == before) {
      out = std::move(tmp);
    }
  }

  const json& obj_;
  std::string prefix_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
  bool ok_ = true;
};

template <class E, class Parse>
void get_enum(ObjectReader& r, const std::string& key, E& out, Parse parse) {
  const json* v = r.child(key);
  if (v == nullptr) {
    return;
  }
  if (!v->is_string()) {
    r.fail(r.path(key), "expected a string");
    return;
  }
  try {
    out = parse(v->get<std::string>());
  } catch (const std::exception& e) {
    r.fail(r.path(key), e.what());
  }
}

void read_train(const json& obj, TrainConfig& t, std::vector<std::string>& errors) {
  ObjectReader r(obj, "train.", errors);
  r.get("learning_rate", t.learning_rate);
  r.get("iterations", t.iterations);
  get_enum(r, "optimizer", t.optimizer, parse_optimizer);
  if (const json* adam = r.child("adam")) {
    ObjectReader ar(*adam, "train.adam.", errors);
    ar.get("beta1", t.adam.beta1);
    ar.get("beta2", t.adam.beta2);
    ar.get("epsilon", t.adam.epsilon);
    ar.finish();
  }
  get_enum(r, "weight_scheme", t.weight_scheme, parse_weight_scheme);
  r.get("fixed_weights", t.fixed_weights);
  r.get("update_every", t.update_every);
  r.get("normalized_loss", t.normalized_loss);
  get_enum(r, "sampling", t.sampling, parse_sampling_strategy);
  r.get("batch_sizes", t.batch_sizes);
  r.get("resample_every_step", t.resample_every_step);
  r.get("reference_sizes", t.reference_sizes);
  r.get("snapshot_iterations", t.snapshot_iterations);
  r.get("snapshot_sizes", t.snapshot_sizes);
  r.get("record_snapshots", t.record_snapshots);
  r.get("record_weighted_spectra", t.record_weighted_spectra);
  r.get("log_every", t.log_every);
  r.get("eval_grid_per_axis", t.eval_grid_per_axis);
  r.get("weight_floor", t.weight_floor);
  r.get("weight_ceiling", t.weight_ceiling);
  r.get("divergence_threshold", t.divergence_threshold);
  r.finish();
}

void read_study(const json& obj, StudySettings& s, std::vector<std::string>& errors) {
  ObjectReader r(obj, "study.", errors);
  r.get("a_values", s.a_values);
  r.get("widths", s.widths);
  r.get("num_inits", s.num_inits);
  r.get("field_inits", s.field_inits);
  r.get("grid_points", s.grid_points);
  r.get("quadrature_order", s.quadrature_order);
  r.get("record_every", s.record_every);
  r.get("modes", s.modes);
  r.finish();
}

void check_ranges(const ExperimentConfig& c, std::vector<std::string>& errors) {
  if (c.output_dir.empty()) {
    errors.push_back("output_dir: must not be empty");
  }
  if (!(c.a > 0.0) || !std::isfinite(c.a)) {
    errors.push_back("a: must be a positive finite number");
  }
  try {
    c.arch().validate();
  } catch (const std::exception& e) {
    errors.push_back(std::string("network: ") + e.what());
  }
  try {
    c.train.validate(c.num_groups());
  } catch (const std::exception& e) {
    errors.push_back(std::string("train: ") + e.what());
  }
  const StudySettings& s = c.study;
  if (s.a_values.empty()) {
    errors.push_back("study.a_values: must not be empty");
  }
  for (double a : s.a_values) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      errors.push_back("study.a_values: entries must be positive");
      break;
    }
  }
  if (s.widths.empty()) {
    errors.push_back("study.widths: must not be empty");
  }
  for (std::size_t w : s.widths) {
    if (w == 0) {
      errors.push_back("study.widths: entries must be >= 1");
      break;
    }
  }
  if (s.num_inits < 2) {
    errors.push_back("study.num_inits: must be >= 2");
  }
  if (s.field_inits == 1) {
    errors.push_back("study.field_inits: must be 0 or >= 2");
  }
  if (s.grid_points < 2) {
    errors.push_back("study.grid_points: must be >= 2");
  }
  if (s.quadrature_order == 0) {
    errors.push_back("study.quadrature_order: must be >= 1");
  }
  if (s.record_every == 0) {
    errors.push_back("study.record_every: must be >= 1");
  }
  if (s.modes == 0) {
    errors.push_back("study.modes: must be >= 1");
  }
  if (c.kind == ExperimentKind::linearized_check) {
    if (c.train.weight_scheme != WeightScheme::fixed) {
      errors.push_back("train.weight_scheme: linearized_check needs fixed weights");
    }
    if (c.train.optimizer != OptimizerKind::gd) {
      errors.push_back("train.optimizer: linearized_check needs gd");
    }
    if (c.train.resample_every_step) {
      errors.push_back("train.resample_every_step: linearized_check needs a fixed batch");
    }
  }
  if (c.kind == ExperimentKind::limit_check) {
    if (c.parameterization != Parameterization::ntk) {
      errors.push_back("network.parameterization: limit_check needs ntk");
    }
    if (c.hidden.size() != 1) {
      errors.push_back("network.hidden: limit_check needs exactly one hidden layer");
    }
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid config:" + join(problems)), problems_(std::move(problems)) {}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::poisson:
      return "poisson";
    case ExperimentKind::wave:
      return "wave";
    case ExperimentKind::kernel_convergence:
      return "kernel_convergence";
    case ExperimentKind::spectrum:
      return "spectrum";
    case ExperimentKind::limit_check:
      return "limit_check";
    case ExperimentKind::linearized_check:
      return "linearized_check";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(const std::string& text) {
  for (auto k : {ExperimentKind::poisson, ExperimentKind::wave, ExperimentKind::kernel_convergence,
                 ExperimentKind::spectrum, ExperimentKind::limit_check, ExperimentKind::linearized_check}) {
    if (to_string(k) == text) {
      return k;
    }
  }
  throw ParameterError("unknown experiment '" + text +
                       "' (expected poisson, wave, kernel_convergence, spectrum, limit_check or linearized_check)");
}

std::size_t ExperimentConfig::num_groups() const { return kind == ExperimentKind::wave ? 3 : 2; }

ArchSpec ExperimentConfig::arch(std::size_t width_override) const {
  ArchSpec spec;
  spec.input_dim = kind == ExperimentKind::wave ? 2 : 1;
  spec.hidden = hidden;
  if (width_override != 0) {
    for (auto& w : spec.hidden) {
      w = width_override;
    }
  }
  spec.parameterization = parameterization;
  return spec;
}

ExperimentConfig parse_config(const json& doc) {
  std::vector<std::string> errors;
  ExperimentConfig c;
  ObjectReader r(doc, "", errors);
  if (!r.ok()) {
    throw ConfigError(errors);
  }

  std::string kind;
  r.get("experiment", kind);
  if (kind.empty()) {
    errors.push_back("experiment: required");
  } else {
    try {
      c.kind = parse_experiment_kind(kind);
    } catch (const std::exception& e) {
      errors.push_back(std::string("experiment: ") + e.what());
    }
  }
  r.get("output_dir", c.output_dir);
  r.get("emit_svg", c.emit_svg);
  r.get("seed", c.seed);
  r.get("a", c.a);
  if (const json* net = r.child("network")) {
    ObjectReader nr(*net, "network.", errors);
    nr.get("hidden", c.hidden);
    get_enum(nr, "parameterization", c.parameterization, parse_parameterization);
    nr.finish();
  }
  if (const json* train = r.child("train")) {
    read_train(*train, c.train, errors);
  }
  if (const json* study = r.child("study")) {
    read_study(*study, c.study, errors);
  }
  r.finish();

  c.train.init_seed = c.seed;
  c.train.sampling_seed = c.seed + 1;
  if (c.train.batch_sizes.empty()) {
    c.train.batch_sizes.assign(c.num_groups(), 100);
  }
  if (errors.empty()) {
    check_ranges(c, errors);
  }
  if (!errors.empty()) {
    throw ConfigError(errors);
  }
  return c;
}

json read_config_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError({path + ": cannot read file"});
  }
  std::stringstream text;
  text << in.rdbuf();
  try {
    return json::parse(text.str(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError({path + ": " + e.what()});
  }
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_config_document(path)); }

json to_json(const ExperimentConfig& c) {
  const TrainConfig& t = c.train;
  json train = {
      {"learning_rate", t.learning_rate},
      {"iterations", t.iterations},
      {"optimizer", to_string(t.optimizer)},
      {"adam", {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"epsilon", t.adam.epsilon}}},
      {"weight_scheme", to_string(t.weight_scheme)},
      {"fixed_weights", t.fixed_weights},
      {"update_every", t.update_every},
      {"normalized_loss", t.normalized_loss},
      {"sampling", to_string(t.sampling)},
      {"batch_sizes", t.batch_sizes},
      {"resample_every_step", t.resample_every_step},
      {"reference_sizes", t.reference_sizes},
      {"snapshot_iterations", t.snapshot_iterations},
      {"snapshot_sizes", t.snapshot_sizes},
      {"record_snapshots", t.record_snapshots},
      {"record_weighted_spectra", t.record_weighted_spectra},
      {"log_every", t.log_every},
      {"eval_grid_per_axis", t.eval_grid_per_axis},
      {"weight_floor", t.weight_floor},
      {"weight_ceiling", t.weight_ceiling},
      {"divergence_threshold", t.divergence_threshold},
  };
  const StudySettings& s = c.study;
  json study = {
      {"a_values", s.a_values},       {"widths", s.widths},
      {"num_inits", s.num_inits},     {"field_inits", s.field_inits},
      {"grid_points", s.grid_points}, {"quadrature_order", s.quadrature_order},
      {"record_every", s.record_every}, {"modes", s.modes},
  };
  return {
      {"experiment", to_string(c.kind)},
      {"output_dir", c.output_dir},
      {"emit_svg", c.emit_svg},
      {"seed", c.seed},
      {"a", c.a},
      {"network", {{"hidden", c.hidden}, {"parameterization", to_string(c.parameterization)}}},
      {"train", train},
      {"study", study},
  };
}

namespace {

struct PathStep {
  std::string key;
  bool indexed = false;
  std::size_t index = 0;
};

std::vector<PathStep> split_path(const std::string& path) {
  std::vector<PathStep> steps;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    PathStep step;
    const auto open = part.find('[');
    if (open != std::string::npos) {
      const auto close = part.find(']', open);
      if (close != part.size() - 1 || close == open + 1) {
        throw ConfigError({path + ": malformed index"});
      }
      const std::string digits = part.substr(open + 1, close - open - 1);
      if (digits.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError({path + ": malformed index"});
      }
      step.indexed = true;
      step.index = std::stoul(digits);
      part = part.substr(0, open);
    }
    if (part.empty()) {
      throw ConfigError({path + ": empty path segment"});
    }
    step.key = part;
    steps.push_back(step);
  }
  if (steps.empty()) {
    throw ConfigError({"empty parameter path"});
  }
  return steps;
}

}  // namespace

void set_path(json& doc, const std::string& path, const json& value) {
  const json effective = to_json(parse_config(doc));
  const std::vector<PathStep> steps = split_path(path);

  const json* e = &effective;
  json* d = &doc;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const PathStep& step = steps[i];
    if (!e->is_object() || !e->contains(step.key)) {
      throw ConfigError({path + ": not a config key"});
    }
    e = &(*e)[step.key];
    const bool last = i + 1 == steps.size();
    if (!d->contains(step.key)) {
      (*d)[step.key] = (last || step.indexed) ? *e : json::object();
    }
    d = &(*d)[step.key];
    if (step.indexed) {
      if (!e->is_array()) {
        throw ConfigError({path + ": not an array"});
      }
      if (step.index >= d->size()) {
        throw ConfigError({path + ": index out of range (size " + std::to_string(d->size()) + ")"});
      }
      if (!last) {
        throw ConfigError({path + ": indexing is only allowed on the last segment"});
      }
      d = &(*d)[step.index];
    } else if (!last && !e->is_object()) {
      throw ConfigError({path + ": not an object"});
    }
  }
  *d = value;
}

}  // namespace pinntk::cli
