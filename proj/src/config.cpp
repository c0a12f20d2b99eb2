#include "mvem/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mvem/numerics.hpp"

namespace mvem {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

// Walks one JSON object; every key must be consumed exactly once.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void read(const std::string& key, bool& v) {
    if (const json* j = find(key)) {
      if (!j->is_boolean()) fail(field(key), "expected true or false");
      v = j->get<bool>();
    }
  }

  void read(const std::string& key, double& v) {
    if (const json* j = find(key)) v = number(*j, field(key));
  }

  void read(const std::string& key, std::optional<double>& v) {
    if (const json* j = find(key)) {
      if (j->is_null()) {
        v.reset();
      } else {
        v = number(*j, field(key));
      }
    }
  }

  void read(const std::string& key, std::size_t& v) {
    if (const json* j = find(key)) v = count(*j, field(key));
  }

  void read(const std::string& key, std::optional<std::size_t>& v) {
    if (const json* j = find(key)) {
      if (j->is_null()) {
        v.reset();
      } else {
        v = count(*j, field(key));
      }
    }
  }

  void read(const std::string& key, std::uint64_t& v, bool) {
    if (const json* j = find(key)) {
      if (!j->is_number_unsigned()) fail(field(key), "expected an unsigned integer");
      v = j->get<std::uint64_t>();
    }
  }

  void read(const std::string& key, std::string& v) {
    if (const json* j = find(key)) {
      if (!j->is_string()) fail(field(key), "expected a string");
      v = j->get<std::string>();
    }
  }

  void read(const std::string& key, std::vector<std::size_t>& v) {
    if (const json* j = find(key)) {
      if (!j->is_array()) fail(field(key), "expected an array of positive integers");
      std::vector<std::size_t> out;
      for (std::size_t i = 0; i < j->size(); ++i) {
        out.push_back(count((*j)[i], field(key) + "[" + std::to_string(i) + "]"));
      }
      v = std::move(out);
    }
  }

  void read(const std::string& key, std::set<int>& v) {
    if (const json* j = find(key)) {
      if (!j->is_array()) fail(field(key), "expected an array of integers");
      std::set<int> out;
      for (std::size_t i = 0; i < j->size(); ++i) {
        const json& e = (*j)[i];
        if (!e.is_number_integer()) {
          fail(field(key) + "[" + std::to_string(i) + "]", "expected an integer");
        }
        out.insert(e.get<int>());
      }
      v = std::move(out);
    }
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key)) fail(field(key), "unknown key");
    }
  }

  static double number(const json& j, const std::string& field) {
    if (!j.is_number()) fail(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(field, "must be finite");
    return v;
  }

  static std::size_t count(const json& j, const std::string& field) {
    if (!j.is_number_unsigned()) fail(field, "expected a non-negative integer");
    return j.get<std::size_t>();
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename F>
void block(ObjectReader& parent, const std::string& key, F&& body) {
  if (const json* j = parent.find(key)) {
    ObjectReader r(*j, parent.field(key));
    body(r);
    r.finish();
  }
}

void read_initial(ObjectReader& r, InitialLaw& law) {
  std::string kind(to_string(law.kind));
  r.read("law", kind);
  try {
    law.kind = initial_kind_from_string(kind);
  } catch (const std::exception&) {
    fail(r.field("law"), "expected point, uniform or gaussian");
  }
  switch (law.kind) {
    case InitialKind::kPoint:
      r.read("value", law.a);
      break;
    case InitialKind::kUniform:
      r.read("low", law.a);
      r.read("high", law.b);
      break;
    case InitialKind::kGaussian:
      r.read("mean", law.a);
      r.read("variance", law.b);
      break;
  }
}

json initial_to_json(const InitialLaw& law) {
  switch (law.kind) {
    case InitialKind::kPoint:
      return {{"law", "point"}, {"value", law.a}};
    case InitialKind::kUniform:
      return {{"law", "uniform"}, {"low", law.a}, {"high", law.b}};
    case InitialKind::kGaussian:
      break;
  }
  return {{"law", "gaussian"}, {"mean", law.a}, {"variance", law.b}};
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) fail(field, what);
}

void require_list(const std::vector<std::size_t>& v, const std::string& field) {
  require(!v.empty(), field, "must not be empty");
  for (std::size_t x : v) require(x >= 1, field, "entries must be >= 1");
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{
      "simulate", "sweep-dt",       "sweep-n",      "glivenko",
      "picard",   "validate-model", "yamada-check", "accept"};
  return names;
}

ParamMap RunConfig::effective_params() const {
  ParamMap merged = builtin_defaults(family);
  for (const auto& [k, v] : params) merged[k] = v;
  return merged;
}

void RunConfig::validate() const {
  if (!subcommand.empty()) {
    const auto& names = subcommands();
    require(std::find(names.begin(), names.end(), subcommand) != names.end(),
            "subcommand", "unknown subcommand '" + subcommand + "'");
  }
  try {
    (void)make_builtin_model(family, effective_params());
  } catch (const std::exception& e) {
    fail("model", e.what());
  }
  if (initial.kind == InitialKind::kUniform) {
    require(initial.a < initial.b, "initial", "uniform law needs low < high");
  }
  if (initial.kind == InitialKind::kGaussian) {
    require(initial.b >= 0.0, "initial.variance", "must be >= 0");
  }
  require(out.size() > 0, "out", "must not be empty");

  require(sweep.T > 0.0, "sweep.T", "must be > 0");
  require(is_power_of_two(sweep.M), "sweep.M", "must be a power of two");
  require(sweep.R >= 1, "sweep.R", "must be >= 1");
  require(sweep.N >= 1, "sweep.N", "must be >= 1");
  require_list(sweep.N_list, "sweep.N_list");
  require_list(sweep.factor_list, "sweep.factor_list");
  require(sweep.q == 1.0 || sweep.q == 2.0, "sweep.q", "must be 1 or 2");
  require(sweep.factor_ref >= 1 && sweep.M % sweep.factor_ref == 0,
          "sweep.factor_ref", "must divide M");
  for (std::size_t f : sweep.factor_list) {
    require(sweep.M % f == 0, "sweep.factor_list", "entries must divide M");
    require(is_power_of_two(f), "sweep.factor_list", "entries must be powers of two");
    require(f % sweep.factor_ref == 0, "sweep.factor_list",
            "entries must be multiples of factor_ref");
  }
  require(is_power_of_two(sweep.factor) && sweep.M % sweep.factor == 0,
          "sweep.factor", "must be a power of two dividing M");
  require(sweep.factor % sweep.factor_ref == 0, "sweep.factor",
          "must be a multiple of factor_ref");

  require(simulate.N >= 1, "simulate.N", "must be >= 1");
  require(is_power_of_two(simulate.factor) && sweep.M % simulate.factor == 0,
          "simulate.factor", "must be a power of two dividing M");
  require(simulate.record_stride >= 1 &&
              (sweep.M / simulate.factor) % simulate.record_stride == 0,
          "simulate.record_stride", "must divide the step count M / factor");

  require(picard.N >= 1, "picard.N", "must be >= 1");
  require(is_power_of_two(picard.factor) && sweep.M % picard.factor == 0,
          "picard.factor", "must be a power of two dividing M");
  require(picard.k_max >= 1, "picard.k_max", "must be >= 1");

  require(glivenko.dim >= 1, "glivenko.dim", "must be >= 1");
  require(glivenko.p >= 1.0, "glivenko.p", "must be >= 1");
  require_list(glivenko.N_list, "glivenko.N_list");
  require(glivenko.R >= 1, "glivenko.R", "must be >= 1");
  require(glivenko.truth_multiple >= 1, "glivenko.truth_multiple", "must be >= 1");
  require(glivenko.n_proj >= 1, "glivenko.n_proj", "must be >= 1");

  require(yamada.eps > 0.0, "yamada.eps", "must be > 0");
  if (yamada.gamma) require(*yamada.gamma > 1.0, "yamada.gamma", "must be > 1");
  require(yamada.n_probe >= 4, "yamada.n_probe", "must be >= 4");
  require(yamada.tol > 0.0, "yamada.tol", "must be > 0");
  require(yamada.fd_tol > 0.0, "yamada.fd_tol", "must be > 0");

  require(probe.box_radius > 0.0, "probe.box_radius", "must be > 0");
  require(probe.n_pairs >= 1, "probe.n_pairs", "must be >= 1");
  require(probe.measure_atoms >= 1, "probe.measure_atoms", "must be >= 1");

  for (int id : accept.only) {
    require(id >= 1 && id <= kCriterionCount, "accept.only",
            "criterion ids run from 1 to " + std::to_string(kCriterionCount));
  }
  for (int id : accept.zero_tolerance) {
    require(id >= 1 && id <= kCriterionCount, "accept.zero_tolerance",
            "criterion ids run from 1 to " + std::to_string(kCriterionCount));
  }
}

RunConfig config_from_json(const json& doc) {
  RunConfig c;
  ObjectReader root(doc, "");
  if (const json* v = root.find("schema_version")) {
    if (!v->is_number_integer() || v->get<int>() != kSchemaVersion) {
      fail("schema_version", "expected " + std::to_string(kSchemaVersion));
    }
  }
  root.read("subcommand", c.subcommand);
  root.read("seed", c.seed, true);
  root.read("workers", c.workers);
  root.read("out", c.out);
  block(root, "outputs", [&](ObjectReader& r) {
    r.read("csv", c.outputs.csv);
    r.read("json", c.outputs.json);
    r.read("svg", c.outputs.svg);
    r.read("binary", c.outputs.binary);
  });
  block(root, "model", [&](ObjectReader& r) {
    r.read("family", c.family);
    if (const json* p = r.find("params")) {
      if (!p->is_object()) fail(r.field("params"), "expected an object");
      for (const auto& [k, v] : p->items()) {
        c.params[k] = ObjectReader::number(v, r.field("params") + "." + k);
      }
    }
  });
  block(root, "initial", [&](ObjectReader& r) { read_initial(r, c.initial); });
  block(root, "sweep", [&](ObjectReader& r) {
    r.read("N_list", c.sweep.N_list);
    r.read("factor_list", c.sweep.factor_list);
    r.read("T", c.sweep.T);
    r.read("M", c.sweep.M);
    r.read("R", c.sweep.R);
    r.read("N", c.sweep.N);
    r.read("factor", c.sweep.factor);
    r.read("factor_ref", c.sweep.factor_ref);
    r.read("n_extra", c.sweep.n_extra);
    r.read("q", c.sweep.q);
    r.read("independent_grids", c.sweep.independent_grids);
  });
  block(root, "simulate", [&](ObjectReader& r) {
    r.read("N", c.simulate.N);
    r.read("factor", c.simulate.factor);
    r.read("record_stride", c.simulate.record_stride);
  });
  block(root, "picard", [&](ObjectReader& r) {
    r.read("N", c.picard.N);
    r.read("factor", c.picard.factor);
    r.read("k_max", c.picard.k_max);
  });
  block(root, "glivenko", [&](ObjectReader& r) {
    r.read("dim", c.glivenko.dim);
    r.read("p", c.glivenko.p);
    r.read("N_list", c.glivenko.N_list);
    r.read("R", c.glivenko.R);
    r.read("truth_multiple", c.glivenko.truth_multiple);
    r.read("n_proj", c.glivenko.n_proj);
  });
  block(root, "yamada", [&](ObjectReader& r) {
    r.read("gamma", c.yamada.gamma);
    r.read("eps", c.yamada.eps);
    r.read("n_probe", c.yamada.n_probe);
    r.read("tol", c.yamada.tol);
    r.read("fd_tol", c.yamada.fd_tol);
  });
  block(root, "probe", [&](ObjectReader& r) {
    r.read("box_radius", c.probe.box_radius);
    r.read("n_pairs", c.probe.n_pairs);
    r.read("seed", c.probe.seed, true);
    r.read("tol", c.probe.tol);
    r.read("measure_atoms", c.probe.measure_atoms);
    r.read("singular_floor", c.probe.singular_floor);
  });
  block(root, "accept", [&](ObjectReader& r) {
    std::string budget = to_string(c.accept.budget);
    r.read("budget", budget);
    try {
      c.accept.budget = budget_from_string(budget);
    } catch (const std::exception&) {
      fail(r.field("budget"), "expected full or quick");
    }
    r.read("only", c.accept.only);
    r.read("zero_tolerance", c.accept.zero_tolerance);
  });
  root.finish();
  c.validate();
  return c;
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < pos; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (const auto colon = what.rfind(": "); colon != std::string::npos) {
      what = what.substr(colon + 2);
    }
    throw ConfigError("config line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + what);
  }
  return config_from_json(doc);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json config_to_json(const RunConfig& c) {
  json params = json::object();
  for (const auto& [k, v] : c.effective_params()) params[k] = v;
  return {
      {"schema_version", kSchemaVersion},
      {"subcommand", c.subcommand},
      {"seed", c.seed},
      {"workers", c.workers},
      {"out", c.out},
      {"outputs",
       {{"csv", c.outputs.csv},
        {"json", c.outputs.json},
        {"svg", c.outputs.svg},
        {"binary", c.outputs.binary}}},
      {"model", {{"family", c.family}, {"params", params}}},
      {"initial", initial_to_json(c.initial)},
      {"sweep",
       {{"N_list", c.sweep.N_list},
        {"factor_list", c.sweep.factor_list},
        {"T", c.sweep.T},
        {"M", c.sweep.M},
        {"R", c.sweep.R},
        {"N", c.sweep.N},
        {"factor", c.sweep.factor},
        {"factor_ref", c.sweep.factor_ref},
        {"n_extra", c.sweep.n_extra ? json(*c.sweep.n_extra) : json(nullptr)},
        {"q", c.sweep.q},
        {"independent_grids", c.sweep.independent_grids}}},
      {"simulate",
       {{"N", c.simulate.N},
        {"factor", c.simulate.factor},
        {"record_stride", c.simulate.record_stride}}},
      {"picard",
       {{"N", c.picard.N}, {"factor", c.picard.factor}, {"k_max", c.picard.k_max}}},
      {"glivenko",
       {{"dim", c.glivenko.dim},
        {"p", c.glivenko.p},
        {"N_list", c.glivenko.N_list},
        {"R", c.glivenko.R},
        {"truth_multiple", c.glivenko.truth_multiple},
        {"n_proj", c.glivenko.n_proj}}},
      {"yamada",
       {{"gamma", c.yamada.gamma ? json(*c.yamada.gamma) : json(nullptr)},
        {"eps", c.yamada.eps},
        {"n_probe", c.yamada.n_probe},
        {"tol", c.yamada.tol},
        {"fd_tol", c.yamada.fd_tol}}},
      {"probe",
       {{"box_radius", c.probe.box_radius},
        {"n_pairs", c.probe.n_pairs},
        {"seed", c.probe.seed},
        {"tol", c.probe.tol},
        {"measure_atoms", c.probe.measure_atoms},
        {"singular_floor", c.probe.singular_floor}}},
      {"accept",
       {{"budget", to_string(c.accept.budget)},
        {"only", c.accept.only},
        {"zero_tolerance", c.accept.zero_tolerance}}},
  };
}

}  // namespace mvem
