#include <algorithm>

#include "anderson/cli.hpp"
#include "anderson/error.hpp"
#include "experiment.hpp"

namespace anderson::cli {

using nlohmann::json;

Section::Section(const json& j) : j_(j) {
  if (!j_.is_object()) throw SchemaError("expected a JSON object");
}

const json& Section::raw(const std::string& key) {
  used_.insert(key);
  if (!j_.contains(key)) throw SchemaError("missing key '" + key + "'");
  return j_.at(key);
}

double Section::number(const std::string& key, std::optional<double> def) {
  used_.insert(key);
  if (!j_.contains(key)) {
    if (!def) throw SchemaError("missing key '" + key + "'");
    return *def;
  }
  if (!j_.at(key).is_number()) throw SchemaError("'" + key + "' must be a number");
  return j_.at(key).get<double>();
}

int Section::integer(const std::string& key, std::optional<int> def) {
  used_.insert(key);
  if (!j_.contains(key)) {
    if (!def) throw SchemaError("missing key '" + key + "'");
    return *def;
  }
  if (!j_.at(key).is_number_integer()) throw SchemaError("'" + key + "' must be an integer");
  return j_.at(key).get<int>();
}

bool Section::boolean(const std::string& key, bool def) {
  used_.insert(key);
  if (!j_.contains(key)) return def;
  if (!j_.at(key).is_boolean()) throw SchemaError("'" + key + "' must be true or false");
  return j_.at(key).get<bool>();
}

std::string Section::string(const std::string& key, std::optional<std::string> def) {
  used_.insert(key);
  if (!j_.contains(key)) {
    if (!def) throw SchemaError("missing key '" + key + "'");
    return *def;
  }
  if (!j_.at(key).is_string()) throw SchemaError("'" + key + "' must be a string");
  return j_.at(key).get<std::string>();
}

std::vector<double> Section::numbers(const std::string& key, std::optional<std::vector<double>> def) {
  used_.insert(key);
  if (!j_.contains(key)) {
    if (!def) throw SchemaError("missing key '" + key + "'");
    return *def;
  }
  const json& v = j_.at(key);
  if (!v.is_array()) throw SchemaError("'" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) throw SchemaError("'" + key + "' must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

void Section::finish() const {
  for (const auto& [key, value] : j_.items())
    if (!used_.count(key)) throw SchemaError("unknown key '" + key + "'");
}

ExperimentConfig parse_config(const json& j, const std::string& kind, const Overrides& o) {
  if (std::find(experiment_kinds().begin(), experiment_kinds().end(), kind) == experiment_kinds().end())
    throw SchemaError("unknown experiment '" + kind + "'");
  Section s(j);
  const std::string declared = s.string("experiment", kind);
  if (declared != kind) throw SchemaError("config declares experiment '" + declared + "' but '" + kind + "' was run");

  const auto exp = make_experiment(kind);
  ExperimentConfig cfg;
  cfg.kind = kind;

  if (s.has("seeds")) {
    if (o.seed_base) throw SchemaError("--seed-base conflicts with an explicit seed list");
    for (const json& e : s.raw("seeds")) {
      if (!e.is_number_unsigned()) throw SchemaError("'seeds' must hold nonnegative integers");
      cfg.seeds.push_back(e.get<std::uint64_t>());
    }
    if (s.has("n_seeds") || s.has("seed_base")) throw SchemaError("give either 'seeds' or 'n_seeds'/'seed_base'");
  } else {
    const int count = s.integer("n_seeds", exp->default_seeds());
    if (count < 1) throw SchemaError("'n_seeds' must be positive");
    std::uint64_t base = 1;
    if (s.has("seed_base")) {
      const json& b = s.raw("seed_base");
      if (!b.is_number_unsigned()) throw SchemaError("'seed_base' must be a nonnegative integer");
      base = b.get<std::uint64_t>();
    }
    if (o.seed_base) base = *o.seed_base;
    for (int i = 0; i < count; ++i) cfg.seeds.push_back(base + static_cast<std::uint64_t>(i));
  }
  if (cfg.seeds.empty()) throw SchemaError("empty seed list");

  cfg.output = o.out ? *o.out : std::filesystem::path(s.string("output", "anderson_out"));
  cfg.jobs = o.jobs ? *o.jobs : s.integer("jobs", 1);
  if (cfg.jobs < 1) throw SchemaError("'jobs' must be positive");
  cfg.cache = s.boolean("cache", kind == "sample");

  nlohmann::ordered_json params;
  exp->parse(s, params);
  s.finish();

  cfg.document = json::object();
  cfg.document["experiment"] = kind;
  cfg.document["params"] = json(params);
  cfg.document["seeds"] = cfg.seeds;
  return cfg;
}

}  // namespace anderson::cli
