#include "rnc_cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "rnc/errors.hpp"

namespace rnc::cli {

using nlohmann::json;

namespace {

json from_toml(const toml::node& node) {
  if (auto t = node.as_table()) {
    json out = json::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = from_toml(v);
    return out;
  }
  if (auto a = node.as_array()) {
    json out = json::array();
    for (const auto& v : *a) out.push_back(from_toml(v));
    return out;
  }
  if (auto v = node.as_integer()) return v->get();
  if (auto v = node.as_floating_point()) return v->get();
  if (auto v = node.as_boolean()) return v->get();
  if (auto v = node.as_string()) return v->get();
  throw UnreadableConfig("unsupported TOML value type (dates are not accepted)");
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"stack", {"n_core", "length", "thickness", "density", "youngs", "shear", "shear_damping", "mass",
                 "rotary", "bending"}},
      {"mesh", {"n_elements", "layer_order"}},
      {"time", {"T", "T_over_tau", "dt", "steps"}},
      {"initial", {"kind", "modes", "displacement", "velocity", "width", "band"}},
      {"ensemble", {"samples", "band"}},
      {"sweep", {"T", "T_over_tau"}},
      {"eigen", {"count", "damping"}},
      {"control", {"filter_band", "tol", "krylov_tol", "max_iter", "method", "enforce_min_time"}},
  };
  return s;
}

const std::set<std::string> kTopLevelScalars = {"boundary", "seed", "output_dir"};

class Reader {
 public:
  Reader(const json& doc, std::vector<std::string>& diags) : doc_(doc), diags_(diags) {}

  const json* section(const std::string& name) const {
    auto it = doc_.find(name);
    return it == doc_.end() ? nullptr : &*it;
  }

  bool has(const std::string& sec, const std::string& key) const {
    const json* s = section(sec);
    return s && s->contains(key);
  }

  double number(const std::string& sec, const std::string& key, double fallback) {
    const json* v = find(sec, key);
    if (!v) return fallback;
    if (!v->is_number()) return fail(sec, key, "expected a number"), fallback;
    return v->get<double>();
  }

  long long integer(const std::string& sec, const std::string& key, long long fallback) {
    const json* v = find(sec, key);
    if (!v) return fallback;
    if (!v->is_number_integer() && !v->is_number_unsigned()) return fail(sec, key, "expected an integer"), fallback;
    return v->get<long long>();
  }

  bool boolean(const std::string& sec, const std::string& key, bool fallback) {
    const json* v = find(sec, key);
    if (!v) return fallback;
    if (!v->is_boolean()) return fail(sec, key, "expected true or false"), fallback;
    return v->get<bool>();
  }

  std::string string(const std::string& sec, const std::string& key, const std::string& fallback) {
    const json* v = find(sec, key);
    if (!v) return fallback;
    if (!v->is_string()) return fail(sec, key, "expected a string"), fallback;
    return v->get<std::string>();
  }

  // Scalar broadcasts to `n` entries; arrays must have length n.
  std::vector<double> per_layer(const std::string& sec, const std::string& key, int n, double fallback) {
    const json* v = find(sec, key);
    if (!v) return std::vector<double>(std::max(n, 0), fallback);
    if (v->is_number()) return std::vector<double>(std::max(n, 0), v->get<double>());
    std::vector<double> out = numbers(sec, key, *v);
    if (static_cast<int>(out.size()) != n)
      fail(sec, key, "expected " + std::to_string(n) + " entries, got " + std::to_string(out.size()));
    return out;
  }

  std::vector<double> list(const std::string& sec, const std::string& key) {
    const json* v = find(sec, key);
    if (!v) return {};
    return numbers(sec, key, *v);
  }

  void fail(const std::string& sec, const std::string& key, const std::string& msg) {
    diags_.push_back((sec.empty() ? key : sec + "." + key) + ": " + msg);
  }
  void fail(const std::string& msg) { diags_.push_back(msg); }

 private:
  const json* find(const std::string& sec, const std::string& key) const {
    if (sec.empty()) {
      auto it = doc_.find(key);
      return it == doc_.end() ? nullptr : &*it;
    }
    const json* s = section(sec);
    if (!s || !s->is_object()) return nullptr;
    auto it = s->find(key);
    return it == s->end() ? nullptr : &*it;
  }

  std::vector<double> numbers(const std::string& sec, const std::string& key, const json& v) {
    std::vector<double> out;
    if (!v.is_array()) return fail(sec, key, "expected a number or an array of numbers"), out;
    for (const auto& e : v) {
      if (!e.is_number()) return fail(sec, key, "array entries must be numbers"), std::vector<double>{};
      out.push_back(e.get<double>());
    }
    return out;
  }

  const json& doc_;
  std::vector<std::string>& diags_;
};

void check_keys(const json& doc, std::vector<std::string>& diags) {
  if (!doc.is_object()) {
    diags.push_back("config root must be a table");
    return;
  }
  for (const auto& [k, v] : doc.items()) {
    if (kTopLevelScalars.count(k)) continue;
    auto it = schema().find(k);
    if (it == schema().end()) {
      diags.push_back(k + ": unknown key");
      continue;
    }
    if (!v.is_object()) {
      diags.push_back(k + ": expected a table");
      continue;
    }
    for (const auto& [kk, vv] : v.items())
      if (!it->second.count(kk)) diags.push_back(k + "." + kk + ": unknown key");
  }
}

ExperimentConfig build(const json& doc, std::vector<std::string>& diags) {
  ExperimentConfig c;
  check_keys(doc, diags);
  if (!doc.is_object()) return c;
  Reader r(doc, diags);

  c.raw = doc;
  c.raw.erase("output_dir");
  c.output_dir = r.string("", "output_dir", c.output_dir);
  const long long seed = r.integer("", "seed", 1);
  if (seed < 0) r.fail("", "seed", "must be non-negative");
  c.seed = static_cast<std::uint64_t>(std::max(0LL, seed));
  c.raw["seed"] = c.seed;

  const std::string bc = r.string("", "boundary", "h-N");
  try {
    c.bc = parse_boundary(bc);
  } catch (const ValidationError& e) {
    r.fail("", "boundary", e.what());
  }

  // stack: every unspecified parameter is 1
  const long long n_core = r.integer("stack", "n_core", 1);
  if (n_core < 1 || n_core > 64) r.fail("stack", "n_core", "must be between 1 and 64");
  LayerStack& s = c.stack;
  s.n_core = static_cast<int>(std::clamp(n_core, 1LL, 64LL));
  s.length = r.number("stack", "length", 1.0);
  s.thicknesses = r.per_layer("stack", "thickness", 2 * s.n_core + 1, 1.0);
  s.densities_odd = r.per_layer("stack", "density", s.n_core + 1, 1.0);
  s.youngs_odd = r.per_layer("stack", "youngs", s.n_core + 1, 1.0);
  s.shear_even = r.per_layer("stack", "shear", s.n_core, 1.0);
  s.damping_even = r.per_layer("stack", "shear_damping", s.n_core, 0.0);
  s.mass_coeff = r.number("stack", "mass", 1.0);
  s.rotary_coeff = r.number("stack", "rotary", 1.0);
  s.bending_stiffness = r.number("stack", "bending", 1.0);
  if (static_cast<int>(s.thicknesses.size()) == 2 * s.n_core + 1 &&
      static_cast<int>(s.densities_odd.size()) == s.n_core + 1 &&
      static_cast<int>(s.youngs_odd.size()) == s.n_core + 1 &&
      static_cast<int>(s.shear_even.size()) == s.n_core &&
      static_cast<int>(s.damping_even.size()) == s.n_core)
    for (const auto& d : validate(s)) r.fail("stack." + d.field + ": " + d.message);
  const bool stack_ok = diags.empty();

  const long long ne = r.integer("mesh", "n_elements", 64);
  const long long order = r.integer("mesh", "layer_order", 2);
  if (ne < 1 || ne > 100000) r.fail("mesh", "n_elements", "must be between 1 and 100000");
  if (order != 1 && order != 2) r.fail("mesh", "layer_order", "must be 1 or 2");
  c.mesh = Mesh::uniform(s.length > 0 ? s.length : 1.0, static_cast<int>(std::clamp(ne, 1LL, 100000LL)),
                         order == 1 ? LagrangeOrder::linear : LagrangeOrder::quadratic);

  const double tau = stack_ok ? min_control_time(s, TauInterpretation::physical) : 1.0;
  if (r.has("time", "T") && r.has("time", "T_over_tau")) r.fail("time: give T or T_over_tau, not both");
  if (r.has("time", "dt") && r.has("time", "steps")) r.fail("time: give dt or steps, not both");
  if (r.has("time", "T")) c.T = r.number("time", "T", 0.0);
  if (r.has("time", "T_over_tau")) c.T = r.number("time", "T_over_tau", 0.0) * tau;
  const long long steps = r.integer("time", "steps", 2000);
  if (steps < 1) r.fail("time", "steps", "must be positive");
  if (r.has("time", "T") || r.has("time", "T_over_tau")) {
    if (!(c.T > 0.0) || !std::isfinite(c.T)) r.fail("time", "T", "must be positive");
  }
  if (r.has("time", "dt")) {
    c.dt = r.number("time", "dt", 0.0);
    if (!(c.dt > 0.0)) r.fail("time", "dt", "must be positive");
  }
  if (c.T > 0.0) {
    if (c.dt > 0.0) {
      try {
        c.steps = steps_for(c.T, c.dt);
      } catch (const ValidationError& e) {
        r.fail("time", "dt", e.what());
      }
    } else if (steps >= 1) {
      c.steps = static_cast<int>(steps);
      c.dt = c.T / c.steps;
    }
  }
  if (c.steps == 0 && steps >= 1) c.steps = static_cast<int>(steps);

  InitialSpec& in = c.initial;
  in.kind = r.string("initial", "kind", in.kind);
  if (in.kind != "modes" && in.kind != "localized" && in.kind != "random")
    r.fail("initial", "kind", "must be modes, localized or random");
  if (r.has("initial", "modes")) {
    in.modes.clear();
    for (double m : r.list("initial", "modes")) {
      if (m < 1 || m != std::floor(m)) r.fail("initial", "modes", "indices are positive integers");
      in.modes.push_back(static_cast<int>(m));
    }
    in.displacement.assign(in.modes.size(), 1.0);
  }
  if (r.has("initial", "displacement")) in.displacement = r.list("initial", "displacement");
  if (r.has("initial", "velocity")) in.velocity = r.list("initial", "velocity");
  if (in.displacement.size() != in.modes.size())
    r.fail("initial", "displacement", "needs one amplitude per mode");
  if (!in.velocity.empty() && in.velocity.size() != in.modes.size())
    r.fail("initial", "velocity", "needs one amplitude per mode");
  in.width = r.number("initial", "width", in.width);
  if (!(in.width > 0.0)) r.fail("initial", "width", "must be positive");
  in.band = static_cast<int>(r.integer("initial", "band", in.band));
  if (in.band < 1) r.fail("initial", "band", "must be positive");

  c.ensemble.seed = c.seed;
  c.ensemble.n_samples = static_cast<int>(r.integer("ensemble", "samples", 16));
  c.ensemble.mode_band = static_cast<int>(r.integer("ensemble", "band", 20));
  if (c.ensemble.n_samples < 1) r.fail("ensemble", "samples", "must be positive");
  if (c.ensemble.mode_band < 1) r.fail("ensemble", "band", "must be positive");

  if (r.has("sweep", "T") && r.has("sweep", "T_over_tau")) r.fail("sweep: give T or T_over_tau, not both");
  c.T_grid = r.list("sweep", "T");
  for (double f : r.list("sweep", "T_over_tau")) c.T_grid.push_back(f * tau);
  for (std::size_t i = 0; i < c.T_grid.size(); ++i) {
    if (!(c.T_grid[i] > 0.0)) r.fail("sweep: horizons must be positive");
    if (i > 0 && !(c.T_grid[i] > c.T_grid[i - 1])) r.fail("sweep: horizons must be increasing");
  }

  c.eigen_count = static_cast<int>(r.integer("eigen", "count", 20));
  if (c.eigen_count < 1) r.fail("eigen", "count", "must be positive");
  c.eigen_damping = r.boolean("eigen", "damping", true);

  HumOptions& h = c.hum;
  h.filter_band = static_cast<int>(r.integer("control", "filter_band", h.filter_band));
  h.tol = r.number("control", "tol", h.tol);
  h.krylov_tol = r.number("control", "krylov_tol", h.krylov_tol);
  h.max_iter = static_cast<int>(r.integer("control", "max_iter", h.max_iter));
  h.enforce_min_time = r.boolean("control", "enforce_min_time", h.enforce_min_time);
  const std::string method = r.string("control", "method", "automatic");
  if (method == "automatic")
    h.method = KrylovMethod::automatic;
  else if (method == "cg")
    h.method = KrylovMethod::cg;
  else if (method == "cgls")
    h.method = KrylovMethod::cgls;
  else
    r.fail("control", "method", "must be automatic, cg or cgls");
  if (h.filter_band < 1) r.fail("control", "filter_band", "must be positive");
  if (!(h.tol > 0.0)) r.fail("control", "tol", "must be positive");
  if (!(h.krylov_tol > 0.0)) r.fail("control", "krylov_tol", "must be positive");
  if (h.max_iter < 0) r.fail("control", "max_iter", "must be non-negative");
  return c;
}

}  // namespace

json read_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableConfig("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (ends_with(path, ".json")) {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw UnreadableConfig("'" + path + "': " + e.what());
    }
  }
  try {
    const toml::table t = toml::parse(text, path);
    return from_toml(t);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "'" << path << "': " << e.description() << " at line " << e.source().begin.line;
    throw UnreadableConfig(os.str());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ValidationError("override '" + assignment + "' has an empty key");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    json& next = (*node)[key];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ValidationError("override '" + assignment + "': " + key + " is not a table");
    node = &next;
    start = dot + 1;
  }
}

std::vector<std::string> diagnose(const json& doc) {
  std::vector<std::string> diags;
  build(doc, diags);
  return diags;
}

ExperimentConfig interpret(const json& doc) {
  std::vector<std::string> diags;
  ExperimentConfig c = build(doc, diags);
  if (!diags.empty()) {
    std::string msg = "invalid config:";
    for (const auto& d : diags) msg += "\n  " + d;
    throw ValidationError(msg);
  }
  return c;
}

}  // namespace rnc::cli
