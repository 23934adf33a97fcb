#include "openhall/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "openhall/errors.hpp"

namespace openhall {

namespace {

const std::map<std::string, std::vector<std::string>>& builtin_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"rashba_dresselhaus", {"lambda", "beta", "h0"}},
      {"bi2se3_valley", {"vF", "delta0", "B"}},
      {"magnetic_lattice", {"ta", "delta", "p", "q", "l", "m"}},
      {"qwz_lattice", {"mass"}},
  };
  return keys;
}

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  throw ConfigError("key '" + key + "': " + what);
}

double required(const Config& doc, const std::string& model, const std::string& key) {
  if (!doc.has(key)) config_error(key, "missing parameter for model '" + model + "'");
  return doc.number(key);
}

int required_int(const Config& doc, const std::string& model, const std::string& key) {
  if (!doc.has(key)) config_error(key, "missing parameter for model '" + model + "'");
  return doc.integer(key);
}

double as_number(const ConfigValue& v, const std::string& key) {
  if (!v.is_number()) config_error(key, "expected a number, got '" + v.text + "'");
  return std::get<double>(v.data);
}

std::vector<Term> parse_terms(const Config& doc, const std::string& key) {
  std::vector<Term> out;
  if (!doc.has(key)) return out;
  const ConfigValue& v = doc.at(key);
  if (!v.is_array()) config_error(key, "expected a list of [coef, kind, a, b] terms");
  for (const ConfigValue& e : std::get<ConfigValue::Array>(v.data)) {
    if (!e.is_array()) config_error(key, "each term must be a list [coef, kind, a, b], got '" + e.text + "'");
    const auto& items = std::get<ConfigValue::Array>(e.data);
    if (items.size() < 2 || items.size() > 4 || !items[1].is_string())
      config_error(key, "each term must be [coef, kind, a, b] with kind a string, got '" + e.text + "'");
    Term t;
    t.coef = as_number(items[0], key);
    t.kind = std::get<std::string>(items[1].data);
    if (items.size() > 2) t.a = as_number(items[2], key);
    if (items.size() > 3) t.b = as_number(items[3], key);
    out.push_back(t);
  }
  return out;
}

Domain parse_domain(const Config& doc, const Domain& fallback) {
  Domain d = fallback;
  const std::string kind = doc.string_or("domain.kind", d.is_torus() ? "torus" : "plane");
  if (kind == "torus") {
    if (!d.is_torus()) d = Domain::torus(2 * std::numbers::pi, 2 * std::numbers::pi);
    d.period_x = doc.number_or("domain.period_x", d.period_x);
    d.period_y = doc.number_or("domain.period_y", d.period_y);
    d.origin_x = doc.number_or("domain.origin_x", d.origin_x);
    d.origin_y = doc.number_or("domain.origin_y", d.origin_y);
    if (!(d.period_x > 0) || !(d.period_y > 0)) config_error("domain.period_x", "torus periods must be positive");
  } else if (kind == "plane") {
    if (d.is_torus()) d = Domain::plane(1e-3, 1e3);
    d.k_min = doc.number_or("domain.kmin", d.k_min);
    d.k_max = doc.number_or("domain.kmax", d.k_max);
    if (!(d.k_min > 0) || !(d.k_max > d.k_min)) config_error("domain.kmax", "need 0 < kmin < kmax");
  } else {
    config_error("domain.kind", "expected \"torus\" or \"plane\", got '" + kind + "'");
  }
  return d;
}

std::vector<double> rates_for(const Config& doc, const std::string& key, int bands, const std::vector<int>& dark) {
  std::vector<double> r(static_cast<std::size_t>(bands), 0.0);
  if (!doc.has(key)) config_error(key, "missing rate");
  const ConfigValue& v = doc.at(key);
  if (v.is_number()) {
    for (int j = 0; j < bands; ++j)
      if (std::find(dark.begin(), dark.end(), j) == dark.end()) r[static_cast<std::size_t>(j)] = doc.number(key);
    return r;
  }
  r = doc.numbers(key);
  if (static_cast<int>(r.size()) != bands)
    config_error(key, "expected one rate per band (" + std::to_string(bands) + "), got " + std::to_string(r.size()));
  return r;
}

}  // namespace

std::vector<std::string> model_parameter_keys(const std::string& model) {
  const auto it = builtin_keys().find(model);
  return it == builtin_keys().end() ? std::vector<std::string>{} : it->second;
}

Model parse_model_config(const Config& doc) {
  if (!doc.has("model")) config_error("model", "missing model name");
  const std::string name = doc.string("model");
  TwoBandModel m;
  if (name == "rashba_dresselhaus") {
    m = rashba_dresselhaus(required(doc, name, "lambda"), required(doc, name, "beta"), required(doc, name, "h0"));
  } else if (name == "bi2se3_valley") {
    m = bi2se3_valley(required(doc, name, "vF"), required(doc, name, "delta0"), required(doc, name, "B"));
  } else if (name == "magnetic_lattice") {
    const int q = required_int(doc, name, "q");
    if (q == 0) config_error("q", "must be nonzero");
    m = magnetic_lattice(required(doc, name, "ta"), required(doc, name, "delta"), required_int(doc, name, "p"), q,
                         required_int(doc, name, "l"), required_int(doc, name, "m"));
  } else if (name == "qwz_lattice") {
    m = qwz_lattice(required(doc, name, "mass"));
  } else if (name == "custom") {
    if (!doc.has("domain.kind")) config_error("domain.kind", "custom models need a domain kind (torus or plane)");
    std::array<std::vector<Term>, 3> d{parse_terms(doc, "dx"), parse_terms(doc, "dy"), parse_terms(doc, "dz")};
    try {
      m = custom_two_band(doc.string_or("name", "custom"), d, parse_terms(doc, "offset"),
                          parse_domain(doc, Domain::plane(1e-3, 1e3)));
    } catch (const ValidationError& e) {
      config_error("dx", e.what());
    }
  } else {
    std::string known;
    for (const auto& [k, v] : builtin_keys()) known += " " + k;
    config_error("model", "unknown model '" + name + "' (known:" + known + " custom)");
  }
  if (name != "custom" && (doc.has("domain.kind") || !doc.keys_under("domain").empty())) {
    m.domain = parse_domain(doc, m.domain);
    if (m.hall_zone && !doc.has("domain.hall_zone")) m.hall_zone.reset();
  }
  const std::string lift = doc.string_or("lift", "none");
  if (lift == "spin_one") return spin_one_lift(m);
  if (lift != "none") config_error("lift", "expected \"spin_one\" or \"none\", got '" + lift + "'");
  return m;
}

DissipatorSpec parse_dissipator_config(const Config& doc, int bands) {
  if (!doc.has("dissipator")) config_error("dissipator", "missing (single_band, two_band or spin_lowering)");
  const std::string kind = doc.string("dissipator");
  DissipatorSpec spec;
  try {
    if (kind == "spin_lowering") {
      if (!doc.has("gamma")) config_error("gamma", "missing rate");
      spec = spin_lowering(doc.number("gamma"));
    } else if (kind == "single_band") {
      const int s = doc.integer_or("target", 0);
      spec = single_steady_band(s, rates_for(doc, "gamma", bands, {s}));
    } else if (kind == "two_band") {
      std::vector<double> t{0, 1};
      if (doc.has("targets")) t = doc.numbers("targets");
      if (t.size() != 2 || t[0] != std::floor(t[0]) || t[1] != std::floor(t[1]))
        config_error("targets", "expected two band indices");
      const int s1 = static_cast<int>(t[0]), s2 = static_cast<int>(t[1]);
      std::vector<double> w{0.5, 0.5};
      if (doc.has("weights")) w = doc.numbers("weights");
      if (w.size() != 2) config_error("weights", "expected two weights");
      const auto r1 = rates_for(doc, "gamma", bands, {s1, s2});
      const auto r2 = doc.has("gamma2") ? rates_for(doc, "gamma2", bands, {s1, s2}) : r1;
      spec = two_steady_bands(s1, s2, r1, r2, w[0], w[1]);
    } else {
      config_error("dissipator", "expected single_band, two_band or spin_lowering, got '" + kind + "'");
    }
    validate_spec(spec, bands);
  } catch (const ValidationError& e) {
    config_error("dissipator", e.what());
  }
  return spec;
}

GridSettings parse_grid_config(const Config& doc) {
  GridSettings g;
  g.resolution = doc.integer_or("grid.resolution", g.resolution);
  if (g.resolution < 8) config_error("grid.resolution", "must be at least 8");
  if (doc.has("grid.kmin")) g.k_min = doc.number("grid.kmin");
  if (doc.has("grid.kmax")) g.k_max = doc.number("grid.kmax");
  auto& io = g.integration;
  io.tol = doc.number_or("grid.tolerance", io.tol);
  io.abs_tol = doc.number_or("grid.abs_tolerance", io.abs_tol);
  io.max_levels = doc.integer_or("grid.max_levels", io.max_levels);
  io.tail_tol = doc.number_or("grid.tail_tolerance", io.tail_tol);
  io.use_pairs = doc.boolean_or("grid.pairs", io.use_pairs);
  if (!(io.tol > 0)) config_error("grid.tolerance", "must be positive");
  if (io.max_levels < 1) config_error("grid.max_levels", "must be at least 1");
  return g;
}

BZGrid grid_for(const Model& model, const GridSettings& g, bool full_domain) {
  const Domain& d = full_domain ? model_domain(model) : hall_domain(model);
  if (d.is_torus()) return BZGrid::torus(d, g.resolution, g.resolution);
  const double lo = g.k_min.value_or(d.k_min), hi = g.k_max.value_or(d.k_max);
  if (!(lo > 0) || !(hi > lo)) config_error("grid.kmax", "need 0 < kmin < kmax");
  return BZGrid::plane(lo, hi, g.resolution, g.resolution);
}

FieldConfig parse_field_config(const Config& doc) {
  FieldConfig f;
  f.Ex = doc.number_or("field.Ex", f.Ex);
  if (!std::isfinite(f.Ex)) config_error("field.Ex", "must be finite");
  return f;
}

Momentum parse_point_config(const Config& doc) {
  return {doc.number_or("point.kx", 0.0), doc.number_or("point.ky", 0.0)};
}

std::vector<double> SweepAxis::values() const {
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    v[static_cast<std::size_t>(i)] = i + 1 == count ? stop : start + (stop - start) * i / (count - 1);
  return v;
}

std::vector<SweepAxis> parse_sweep_config(const Config& doc) {
  std::vector<SweepAxis> axes;
  const std::string model = doc.string_or("model", "");
  const auto params = model_parameter_keys(model);
  for (const auto& key : doc.keys_under("sweep")) {
    const std::string full = "sweep." + key;
    const auto v = doc.numbers(full);
    if (v.size() != 3) config_error(full, "expected [start, stop, count]");
    if (v[2] != std::floor(v[2]) || v[2] < 2) config_error(full, "count must be an integer >= 2");
    const bool known = key == "gamma" || std::find(params.begin(), params.end(), key) != params.end();
    if (!known) config_error(full, "not a parameter of model '" + model + "' or the dissipator");
    axes.push_back({key, v[0], v[1], static_cast<int>(v[2])});
  }
  if (axes.empty()) config_error("sweep", "no swept parameters");
  if (axes.size() > 2) config_error("sweep", "at most two swept parameters");
  return axes;
}

}  // namespace openhall
