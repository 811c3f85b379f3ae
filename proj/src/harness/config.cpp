#include "frmom/harness/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "frmom/errors.hpp"

namespace frmom::harness {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

void require_object(const json& j, const std::string& key) {
  if (!j.is_object()) fail(key, "expected an object");
}

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<std::string_view> allowed) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) fail(join(where, key), "unknown key");
  }
}

// Number, or a "p/q" string such as "8/255".
double read_real(const json& j, const std::string& key) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return std::stod(s);
      return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
    } catch (const std::exception&) {
      fail(key, "malformed number '" + s + "'");
    }
  }
  fail(key, "expected a number");
}

std::size_t read_count(const json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(key, "expected a non-negative integer");
  return j.get<std::size_t>();
}

std::string read_string(const json& j, const std::string& key) {
  if (!j.is_string()) fail(key, "expected a string");
  return j.get<std::string>();
}

bool read_bool(const json& j, const std::string& key) {
  if (!j.is_boolean()) fail(key, "expected true or false");
  return j.get<bool>();
}

std::vector<std::size_t> read_counts(const json& j, const std::string& key) {
  if (!j.is_array()) fail(key, "expected an array of integers");
  std::vector<std::size_t> out;
  for (const auto& v : j) out.push_back(read_count(v, key));
  return out;
}

ExperimentKind parse_kind(const std::string& s) {
  if (s == "quadratic") return ExperimentKind::quadratic;
  if (s == "finite_sum") return ExperimentKind::finite_sum;
  if (s == "adversarial") return ExperimentKind::adversarial;
  if (s == "theorem_check") return ExperimentKind::theorem_check;
  fail("kind", "unknown experiment kind '" + s + "'");
}

optim::StepDecaySchedule parse_schedule(const json& j, const std::string& key) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "frsgd_step_decay") return optim::StepDecaySchedule::frsgd_step_decay();
    if (s == "sgd_step_decay") return optim::StepDecaySchedule::sgd_step_decay();
    fail(key, "unknown schedule preset '" + s + "'");
  }
  check_keys(j, key, {"initial_rate", "milestones", "decay_factor"});
  optim::StepDecaySchedule s;
  if (!j.contains("initial_rate")) fail(key + ".initial_rate", "required");
  s.initial_rate = read_real(j["initial_rate"], key + ".initial_rate");
  if (j.contains("milestones")) s.milestones = read_counts(j["milestones"], key + ".milestones");
  if (j.contains("decay_factor")) s.decay_factor = read_real(j["decay_factor"], key + ".decay_factor");
  try {
    s.validate();
  } catch (const DomainError& e) {
    fail(key, e.what());
  }
  return s;
}

OptimizerSpec parse_optimizer(const json& j, const std::string& key) {
  check_keys(j, key, {"method", "label", "alpha", "schedule", "beta", "restart_period"});
  OptimizerSpec o;
  if (!j.contains("method")) fail(key + ".method", "required");
  const std::string method = read_string(j["method"], key + ".method");
  try {
    o.method = optim::parse_method(method);
  } catch (const ConfigError&) {
    fail(key + ".method", "unknown optimizer '" + method + "'");
  }
  o.label = j.contains("label") ? read_string(j["label"], key + ".label") : method;
  if (o.label.empty() || o.label.find_first_of("/\\ ,") != std::string::npos) {
    fail(key + ".label", "must be non-empty without spaces, commas or slashes");
  }
  const bool has_alpha = j.contains("alpha");
  const bool has_schedule = j.contains("schedule");
  if (has_alpha == has_schedule) fail(key, "give exactly one of 'alpha' or 'schedule'");
  if (has_alpha) {
    const double alpha = read_real(j["alpha"], key + ".alpha");
    if (!(alpha > 0.0)) fail(key + ".alpha", "must be positive");
    o.schedule = optim::StepDecaySchedule::constant(alpha);
  } else {
    o.schedule = parse_schedule(j["schedule"], key + ".schedule");
  }
  if (j.contains("beta")) {
    o.beta = read_real(j["beta"], key + ".beta");
    if (!(o.beta >= 0.0)) fail(key + ".beta", "must be >= 0");
  }
  if (j.contains("restart_period")) o.restart_period = read_count(j["restart_period"], key + ".restart_period");
  return o;
}

ProblemSpec parse_problem(const json& j) {
  check_keys(j, "problem",
             {"preset", "dimension", "kappa", "dataset", "samples", "test_samples", "noise",
              "classes", "spread", "data_seed", "hidden", "activation"});
  ProblemSpec p;
  if (j.contains("preset")) p.preset = read_string(j["preset"], "problem.preset");
  if (j.contains("dimension")) p.dimension = read_count(j["dimension"], "problem.dimension");
  if (j.contains("kappa")) p.kappa = read_real(j["kappa"], "problem.kappa");
  if (j.contains("dataset")) p.dataset = read_string(j["dataset"], "problem.dataset");
  if (j.contains("samples")) p.samples = read_count(j["samples"], "problem.samples");
  if (j.contains("test_samples")) p.test_samples = read_count(j["test_samples"], "problem.test_samples");
  if (j.contains("noise")) p.noise = read_real(j["noise"], "problem.noise");
  if (j.contains("classes")) p.classes = read_count(j["classes"], "problem.classes");
  if (j.contains("spread")) p.spread = read_real(j["spread"], "problem.spread");
  if (j.contains("data_seed")) p.data_seed = read_count(j["data_seed"], "problem.data_seed");
  if (j.contains("hidden")) p.hidden = read_counts(j["hidden"], "problem.hidden");
  if (j.contains("activation")) {
    const std::string a = read_string(j["activation"], "problem.activation");
    if (a == "tanh") {
      p.activation = objectives::Activation::tanh;
    } else if (a == "relu") {
      p.activation = objectives::Activation::relu;
    } else {
      fail("problem.activation", "unknown activation '" + a + "'");
    }
  }
  return p;
}

adversarial::AttackConfig parse_attack_config(const json& j, const std::string& key) {
  if (j.is_string()) {
    if (j.get<std::string>() == "train_ifgsm10") return adversarial::AttackConfig::train_ifgsm10();
    fail(key, "unknown attack preset '" + j.get<std::string>() + "'");
  }
  check_keys(j, key, {"epsilon", "step_size", "iterations", "clip_low", "clip_high"});
  adversarial::AttackConfig a = adversarial::AttackConfig::train_ifgsm10();
  if (j.contains("epsilon")) a.epsilon = read_real(j["epsilon"], key + ".epsilon");
  if (j.contains("step_size")) a.step_size = read_real(j["step_size"], key + ".step_size");
  if (j.contains("iterations")) a.iterations = read_count(j["iterations"], key + ".iterations");
  if (j.contains("clip_low")) a.clip_low = read_real(j["clip_low"], key + ".clip_low");
  if (j.contains("clip_high")) a.clip_high = read_real(j["clip_high"], key + ".clip_high");
  try {
    a.validate();
  } catch (const DomainError& e) {
    fail(key, e.what());
  }
  return a;
}

AttackSpec parse_attack(const json& j) {
  check_keys(j, "attack", {"train", "eval_iterations", "include_fgsm"});
  AttackSpec a;
  if (j.contains("train")) a.train = parse_attack_config(j["train"], "attack.train");
  if (j.contains("eval_iterations")) a.eval_iterations = read_counts(j["eval_iterations"], "attack.eval_iterations");
  if (j.contains("include_fgsm")) a.include_fgsm = read_bool(j["include_fgsm"], "attack.include_fgsm");
  return a;
}

TheoremSpec parse_theorem(const json& j, const std::string& key, TheoremSpec t) {
  check_keys(j, key,
             {"instances", "dimension_min", "dimension_max", "kappa_min", "kappa_max", "horizon",
              "seed"});
  if (j.contains("instances")) t.instances = read_count(j["instances"], key + ".instances");
  if (j.contains("dimension_min")) t.dimension_min = read_count(j["dimension_min"], key + ".dimension_min");
  if (j.contains("dimension_max")) t.dimension_max = read_count(j["dimension_max"], key + ".dimension_max");
  if (j.contains("kappa_min")) t.kappa_min = read_real(j["kappa_min"], key + ".kappa_min");
  if (j.contains("kappa_max")) t.kappa_max = read_real(j["kappa_max"], key + ".kappa_max");
  if (j.contains("horizon")) t.horizon = read_count(j["horizon"], key + ".horizon");
  if (j.contains("seed")) t.seed = read_count(j["seed"], key + ".seed");
  return t;
}

void validate_theorem(const TheoremSpec& t, const std::string& key) {
  if (t.instances == 0) fail(key + ".instances", "must be >= 1");
  if (t.dimension_min < 2 || t.dimension_max < t.dimension_min) {
    fail(key, "need 2 <= dimension_min <= dimension_max");
  }
  if (!(t.kappa_min >= 1.0) || !(t.kappa_max >= t.kappa_min)) {
    fail(key, "need 1 <= kappa_min <= kappa_max");
  }
  if (t.horizon == 0) fail(key + ".horizon", "must be >= 1");
}

}  // namespace

std::string_view kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::quadratic: return "quadratic";
    case ExperimentKind::finite_sum: return "finite_sum";
    case ExperimentKind::adversarial: return "adversarial";
    case ExperimentKind::theorem_check: return "theorem_check";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) fail("seeds", "seed list must be nonempty");
  if (budget == 0) fail("budget", "must be >= 1");
  if (output.empty()) fail("output", "must be nonempty");
  switch (kind) {
    case ExperimentKind::quadratic:
      if (problem.preset != "cycle_laplacian" && problem.preset != "random_spd") {
        fail("problem.preset", "unknown quadratic preset '" + problem.preset + "'");
      }
      if (problem.preset == "random_spd" && (problem.dimension == 0 || !(problem.kappa >= 1.0))) {
        fail("problem", "random_spd needs dimension >= 1 and kappa >= 1");
      }
      break;
    case ExperimentKind::finite_sum:
    case ExperimentKind::adversarial:
      if (problem.dataset != "two_moons" && problem.dataset != "blobs") {
        fail("problem.dataset", "unknown dataset '" + problem.dataset + "'");
      }
      if (problem.samples == 0) fail("problem.samples", "must be >= 1");
      if (batch_size == 0) fail("batch_size", "must be >= 1");
      if (kind == ExperimentKind::adversarial && problem.dataset != "two_moons") {
        fail("problem.dataset", "adversarial runs need unit-box data (two_moons)");
      }
      break;
    case ExperimentKind::theorem_check:
      validate_theorem(theorem1, "theorem1");
      validate_theorem(theorem2, "theorem2");
      return;
  }
  if (optimizers.empty()) fail("optimizers", "at least one optimizer is required");
  for (std::size_t i = 0; i < optimizers.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (optimizers[i].label == optimizers[j].label) {
        fail("optimizers", "duplicate label '" + optimizers[i].label + "'");
      }
    }
  }
}

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, "",
             {"name", "kind", "problem", "optimizers", "budget", "batch_size", "seeds", "output",
              "attack", "theorem1", "theorem2"});
  ExperimentConfig cfg;
  if (root.contains("name")) cfg.name = read_string(root["name"], "name");
  if (!root.contains("kind")) fail("kind", "required");
  cfg.kind = parse_kind(read_string(root["kind"], "kind"));
  if (root.contains("problem")) cfg.problem = parse_problem(root["problem"]);
  if (root.contains("optimizers")) {
    if (!root["optimizers"].is_array()) fail("optimizers", "expected an array");
    std::size_t i = 0;
    for (const auto& o : root["optimizers"]) {
      cfg.optimizers.push_back(parse_optimizer(o, "optimizers[" + std::to_string(i++) + "]"));
    }
  }
  if (root.contains("budget")) cfg.budget = read_count(root["budget"], "budget");
  if (root.contains("batch_size")) cfg.batch_size = read_count(root["batch_size"], "batch_size");
  if (root.contains("seeds")) {
    if (!root["seeds"].is_array()) fail("seeds", "expected an array of integers");
    cfg.seeds.clear();
    for (const auto& s : root["seeds"]) cfg.seeds.push_back(read_count(s, "seeds"));
  }
  if (root.contains("output")) cfg.output = read_string(root["output"], "output");
  if (root.contains("attack")) cfg.attack = parse_attack(root["attack"]);
  if (root.contains("theorem1")) cfg.theorem1 = parse_theorem(root["theorem1"], "theorem1", cfg.theorem1);
  if (root.contains("theorem2")) cfg.theorem2 = parse_theorem(root["theorem2"], "theorem2", cfg.theorem2);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    item = first == std::string::npos ? std::string() : item.substr(first, last - first + 1);
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("--seeds: malformed seed '" + item + "'");
    }
    seeds.push_back(std::stoull(item));
  }
  if (seeds.empty()) throw ConfigError("--seeds: seed list must be nonempty");
  return seeds;
}

}  // namespace frmom::harness
