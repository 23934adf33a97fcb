#include "openhall/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "openhall/errors.hpp"
#include "openhall/oracle.hpp"
#include "openhall/run_config.hpp"
#include "openhall/suite.hpp"

namespace openhall::cli {

using json = nlohmann::ordered_json;

namespace {

const char* kUnits = "units: sigma, dsigma and chern_rate in e^2/h; energies in meV; momenta in 1/nm";

std::string fmt(double v) { return format_number(v); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json complex_matrix(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(row);
  }
  return rows;
}

ConfigValue string_value(const std::string& s) {
  ConfigValue v;
  v.data = s;
  v.text = "\"" + s + "\"";
  return v;
}

std::string header(const std::string& command, const Config& resolved) {
  std::string h = "# openhall " + command + "\n# " + kUnits + "\n# config:\n";
  h += resolved.render("#   ");
  return h;
}

// Config with the defaults that shaped the run written out, for the output header.
Config resolved_config(const Config& doc, const Model& model, const GridSettings& g) {
  Config r = doc;
  const Domain& d = hall_domain(model);
  if (!r.has("grid.resolution")) r.set("grid.resolution", number_value(g.resolution));
  if (!r.has("grid.tolerance")) r.set("grid.tolerance", number_value(g.integration.tol));
  if (!r.has("grid.max_levels")) r.set("grid.max_levels", number_value(g.integration.max_levels));
  if (!d.is_torus()) {
    if (!r.has("grid.kmin")) r.set("grid.kmin", number_value(g.k_min.value_or(d.k_min)));
    if (!r.has("grid.kmax")) r.set("grid.kmax", number_value(g.k_max.value_or(d.k_max)));
  }
  if (!r.has("field.Ex")) r.set("field.Ex", number_value(1.0));
  if (!r.has("hall.method")) r.set("hall.method", string_value("auto"));
  return r;
}

int steady_band(const DissipatorSpec& spec) {
  if (const auto* s = std::get_if<SingleSteadyBand>(&spec.kind)) return s->target;
  if (const auto* s = std::get_if<TwoSteadyBands>(&spec.kind)) return s->target1;
  return 0;
}

ConductivityBreakdown compute_hall(const Model& model, const DissipatorSpec& spec, const Config& doc,
                                   const GridSettings& g, int threads) {
  const std::string method = doc.string_or("hall.method", "auto");
  IntegrationOptions io = g.integration;
  io.threads = threads;
  const BZGrid grid = grid_for(model, g);
  const auto* spin = std::get_if<SpinLowering>(&spec.kind);
  const auto* two = std::get_if<TwoBandModel>(&model);
  if (method == "closed_form" || (method == "auto" && spin && two)) {
    if (!spin || !two || !spin->constant())
      throw ConfigError("key 'hall.method': closed_form needs a two-band model with a constant spin_lowering rate");
    return hall_two_band_spin(*two, spin->gamma, grid, io);
  }
  if (method != "general" && method != "auto")
    throw ConfigError("key 'hall.method': expected auto, closed_form or general, got '" + method + "'");
  return hall_conductivity_general(model, spec, parse_field_config(doc), grid, io);
}

json breakdown_json(const ConductivityBreakdown& b) {
  return json{{"sigma0", number(b.sigma0)},     {"dsigma1", number(b.dsigma1)},
              {"dsigma2", number(b.dsigma2)},   {"total", number(b.total)},
              {"chern_rate", number(b.chern_rate)}, {"error_estimate", number(b.error_estimate)},
              {"levels", b.levels},             {"excluded", b.excluded},
              {"converged", b.converged},       {"grid", b.grid},
              {"method", b.method}};
}

}  // namespace

std::string cmd_eig(const Config& doc, const RunOptions& opt) {
  const Model model = parse_model_config(doc);
  const Momentum k = parse_point_config(doc);
  const Eigensystem es = hermitian_eigensystem(hamiltonian_at(model, k));
  std::optional<AngleField> a;
  if (const auto* t = std::get_if<TwoBandModel>(&model)) {
    try {
      a = angles(*t, k);
    } catch (const DegeneratePoint&) {
    }
  }
  if (opt.format == Format::Json) {
    json j{{"model", model_name(model)}, {"k", {k.kx, k.ky}}, {"energies", json::array()}};
    for (double e : es.values) j["energies"].push_back(e);
    j["eigenvectors"] = complex_matrix(es.vectors);
    if (a) j["angles"] = {{"theta", a->theta}, {"phi", a->phi}, {"E1", a->E1}};
    return j.dump(2) + "\n";
  }
  std::string out = "# openhall eig\n# " + std::string(kUnits) + "\n# k = (" + fmt(k.kx) + ", " + fmt(k.ky) + ")\n";
  if (a) out += "# theta = " + fmt(a->theta) + ", phi = " + fmt(a->phi) + ", E1 = " + fmt(a->E1) + "\n";
  out += "band,energy\n";
  for (Eigen::Index i = 0; i < es.values.size(); ++i) out += std::to_string(i) + "," + fmt(es.values(i)) + "\n";
  return out;
}

std::string cmd_steady(const Config& doc, const RunOptions& opt) {
  const Model model = parse_model_config(doc);
  const DissipatorSpec spec = parse_dissipator_config(doc, band_count(model));
  const Momentum k = parse_point_config(doc);
  const FieldConfig field = parse_field_config(doc);
  const BandFrame frame = band_frame(model, k);
  const SteadyStateK closed = steady_state_at(model, spec, frame, field, FirstOrderMethod::ClosedForm);
  const SteadyStateK general = steady_state_at(model, spec, frame, field, FirstOrderMethod::General);
  const ResponseProbe probe = probe_response(model, spec, frame);
  const CMatrix oracle = probe.rho1 * field.Ex;
  const Velocity v = velocity_y_expectation(closed, frame);
  if (opt.format == Format::Json) {
    json j{{"model", model_name(model)},
           {"dissipator", spec.name()},
           {"k", {k.kx, k.ky}},
           {"Ex", field.Ex},
           {"energies", json::array()},
           {"order0", complex_matrix(closed.order0)},
           {"order1_closed_form", complex_matrix(closed.order1)},
           {"order1_general", complex_matrix(general.order1)},
           {"order1_oracle", complex_matrix(oracle)},
           {"oracle_exponent", number(probe.exponent)},
           {"velocity_y_first_order", v.first_order}};
    for (double e : frame.energies) j["energies"].push_back(e);
    return j.dump(2) + "\n";
  }
  std::string out = "# openhall steady\n# " + std::string(kUnits) + "\n# k = (" + fmt(k.kx) + ", " + fmt(k.ky) +
                    "), Ex = " + fmt(field.Ex) + ", oracle remainder exponent = " + fmt(probe.exponent) + "\n";
  out += "i,j,order0_re,order0_im,order1_re,order1_im,general_re,general_im,oracle_re,oracle_im\n";
  for (Eigen::Index i = 0; i < closed.order0.rows(); ++i)
    for (Eigen::Index j = 0; j < closed.order0.cols(); ++j) {
      out += std::to_string(i) + "," + std::to_string(j);
      for (const CMatrix* m : {&closed.order0, &closed.order1, &general.order1, &oracle})
        out += "," + fmt((*m)(i, j).real()) + "," + fmt((*m)(i, j).imag());
      out += "\n";
    }
  return out;
}

std::string cmd_chern(const Config& doc, const RunOptions& opt) {
  const Model model = parse_model_config(doc);
  const int resolution = doc.integer_or("chern.resolution", 64);
  const int doublings = doc.integer_or("chern.max_doublings", 4);
  std::vector<int> bands;
  if (doc.has("chern.band")) {
    bands.push_back(doc.integer("chern.band"));
  } else {
    for (int b = 0; b < band_count(model); ++b) bands.push_back(b);
  }
  std::vector<ChernResult> results;
  for (int b : bands) results.push_back(chern_number(model, b, resolution, doublings));
  if (opt.format == Format::Json) {
    json j{{"model", model_name(model)}, {"bands", json::array()}};
    for (std::size_t i = 0; i < bands.size(); ++i)
      j["bands"].push_back({{"band", bands[i]},
                            {"chern", results[i].chern},
                            {"raw", results[i].raw},
                            {"residual", results[i].residual},
                            {"max_plaquette", results[i].max_plaquette},
                            {"grid", results[i].grid}});
    return j.dump(2) + "\n";
  }
  std::string out = header("chern", doc) + "band,chern,raw,residual,max_plaquette,grid\n";
  for (std::size_t i = 0; i < bands.size(); ++i)
    out += std::to_string(bands[i]) + "," + std::to_string(results[i].chern) + "," + fmt(results[i].raw) + "," +
           fmt(results[i].residual) + "," + fmt(results[i].max_plaquette) + "," + csv_field(results[i].grid) + "\n";
  return out;
}

std::string cmd_hall(const Config& doc, const RunOptions& opt) {
  const Model model = parse_model_config(doc);
  const DissipatorSpec spec = parse_dissipator_config(doc, band_count(model));
  const GridSettings g = parse_grid_config(doc);
  const ConductivityBreakdown b = compute_hall(model, spec, doc, g, opt.threads);
  if (opt.format == Format::Json) {
    json j{{"model", model_name(model)}, {"dissipator", spec.name()}};
    j.update(breakdown_json(b));
    return j.dump(2) + "\n";
  }
  std::string out = header("hall", resolved_config(doc, model, g));
  out += "sigma0,dsigma1,dsigma2,total,chern_rate,excluded,error_estimate,levels,converged,method\n";
  out += fmt(b.sigma0) + "," + fmt(b.dsigma1) + "," + fmt(b.dsigma2) + "," + fmt(b.total) + "," + fmt(b.chern_rate) +
         "," + std::to_string(b.excluded) + "," + fmt(b.error_estimate) + "," + std::to_string(b.levels) + "," +
         (b.converged ? "true" : "false") + "," + b.method + "\n";
  return out;
}

std::string cmd_sweep(const Config& doc, const RunOptions& opt) {
  const std::vector<SweepAxis> axes = parse_sweep_config(doc);
  // validate the base document once so config errors abort instead of filling rows
  const Model base = parse_model_config(doc);
  parse_dissipator_config(doc, band_count(base));
  const GridSettings g = parse_grid_config(doc);

  std::vector<std::vector<double>> points;
  const auto v0 = axes[0].values();
  const auto v1 = axes.size() > 1 ? axes[1].values() : std::vector<double>{0.0};
  for (double a : v0)
    for (double b : v1) points.push_back(axes.size() > 1 ? std::vector<double>{a, b} : std::vector<double>{a});

  struct Row {
    ConductivityBreakdown b;
    std::optional<int> chern;
    std::string error;
  };
  std::vector<Row> rows(points.size());
  const bool chern_wanted = doc.boolean_or("sweep_options.chern", true);
  parallel_for(points.size(), opt.threads, [&](std::size_t i) {
    Row& row = rows[i];
    Config d = doc;
    for (std::size_t a = 0; a < axes.size(); ++a) d.set(axes[a].key, number_value(points[i][a]));
    try {
      const Model m = parse_model_config(d);
      const DissipatorSpec spec = parse_dissipator_config(d, band_count(m));
      row.b = compute_hall(m, spec, d, g, 1);
      if (chern_wanted) {
        try {
          row.chern = chern_number(m, steady_band(spec), doc.integer_or("chern.resolution", 64),
                                   doc.integer_or("chern.max_doublings", 4))
                          .chern;
        } catch (const Error& e) {
          row.error = std::string("chern: ") + e.what();
        }
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      row.b = make_breakdown(NAN, NAN, NAN);
      row.error = e.what();
    }
  });

  if (opt.format == Format::Json) {
    json j{{"units", kUnits}, {"config", resolved_config(doc, base, g).render()}, {"rows", json::array()}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      json r;
      for (std::size_t a = 0; a < axes.size(); ++a) r[axes[a].key] = points[i][a];
      r.update(breakdown_json(rows[i].b));
      r["chern_number"] = rows[i].chern ? json(*rows[i].chern) : json(nullptr);
      r["error"] = rows[i].error;
      j["rows"].push_back(r);
    }
    return j.dump(2) + "\n";
  }
  std::string out = header("sweep", resolved_config(doc, base, g));
  for (const auto& a : axes) out += a.key + ",";
  out += "sigma0,dsigma1,dsigma2,total,chern_rate,chern_number,excluded,error_estimate,error\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    for (double v : points[i]) out += fmt(v) + ",";
    out += fmt(r.b.sigma0) + "," + fmt(r.b.dsigma1) + "," + fmt(r.b.dsigma2) + "," + fmt(r.b.total) + "," +
           fmt(r.b.chern_rate) + "," + (r.chern ? std::to_string(*r.chern) : "") + "," + std::to_string(r.b.excluded) +
           "," + fmt(r.b.error_estimate) + "," + csv_field(r.error) + "\n";
  }
  return out;
}

ValidateOutcome cmd_validate(const Config& doc, const RunOptions& opt) {
  SuiteOptions so;
  so.seed = opt.seed;
  so.points = doc.integer_or("validate.points", so.points);
  so.flip_s3 = doc.boolean_or("validate.flip_s3", false);
  if (doc.has("validate.gamma")) {
    so.gamma = doc.number("validate.gamma");
  } else if (doc.has("gamma")) {
    so.gamma = doc.number("gamma");
  }
  if (!(so.gamma >= 0.0)) throw ConfigError("key 'gamma': must be >= 0");

  SuiteReport rep = run_oracle_ladder(so);
  for (auto& c : run_invariants(so).checks) rep.checks.push_back(std::move(c));
  for (const auto& p : builtin_pairs(so.gamma)) {
    const MomentumReport m = validate_momentum_conservation(p.spec, p.model);
    rep.checks.push_back({p.label + ": momentum conservation", m.pass, m.pass ? 0.0 : 1.0, 0.0, m.lines.front()});
  }

  ValidateOutcome v;
  v.pass = rep.pass();
  if (opt.format == Format::Json) {
    json j{{"pass", v.pass},
           {"failures", rep.failures()},
           {"seed", so.seed},
           {"gamma", so.gamma},
           {"points", so.points},
           {"flip_s3", so.flip_s3},
           {"checks", json::array()}};
    for (const auto& c : rep.checks)
      j["checks"].push_back({{"name", c.name},
                             {"pass", c.pass},
                             {"worst", number(c.worst)},
                             {"threshold", c.threshold},
                             {"detail", c.detail}});
    v.text = j.dump(2) + "\n";
    return v;
  }
  std::string out = "# openhall validate\n# seed = " + std::to_string(so.seed) + ", gamma = " + fmt(so.gamma) +
                    ", points = " + std::to_string(so.points) + (so.flip_s3 ? ", s3 sign flipped" : "") + "\n";
  out += "check,pass,worst,threshold,detail\n";
  for (const auto& c : rep.checks)
    out += csv_field(c.name) + "," + (c.pass ? "true" : "false") + "," + fmt(c.worst) + "," + fmt(c.threshold) + "," +
           csv_field(c.detail) + "\n";
  out += "# " + std::to_string(rep.checks.size() - rep.failures()) + "/" + std::to_string(rep.checks.size()) +
         " checks passed\n";
  v.text = out;
  return v;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kConfigFailure;
  if (dynamic_cast<const ConvergenceError*>(&e) || dynamic_cast<const ResolutionError*>(&e))
    return kConvergenceFailure;
  return kValidationFailure;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Open-system Hall conductivity, Chern numbers and Lindblad steady states"};
  app.require_subcommand(1);
  std::string config_path, out_path, format, seed_text;
  int threads = 1;
  std::uint64_t seed = 42;
  std::vector<std::string> sets;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"eig", "band energies and states at [point] kx, ky"},
      {"steady", "zeroth- and first-order steady state at [point], closed form vs general vs oracle"},
      {"chern", "plaquette Chern number per band"},
      {"hall", "Hall conductivity breakdown"},
      {"sweep", "Hall breakdown over the [sweep] parameter grid"},
      {"validate", "oracle ladder and invariant suite"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "run config (TOML subset)");
    sub->add_option("--out", out_path, "output file (default stdout)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "seed for randomized probe points");
    sub->add_option("--set", sets, "override a config key, key=value");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigFailure;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    Config doc = config_path.empty() ? Config::parse("", "<defaults>") : Config::load(config_path);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set '" + s + "': expected key=value");
      const Config one = Config::parse(s, "--set");
      for (const auto& [k, v] : one.entries()) doc.set(k, v);
    }
    if (config_path.empty() && command != "validate" && sets.empty())
      throw ConfigError("--config is required for '" + command + "'");
    RunOptions opt;
    opt.threads = threads;
    opt.seed = seed;
    const std::string fmt_name = !format.empty() ? format : doc.string_or("output.format", command == "hall" ? "json" : "csv");
    if (fmt_name != "csv" && fmt_name != "json") throw ConfigError("key 'output.format': expected csv or json");
    opt.format = fmt_name == "json" ? Format::Json : Format::Csv;
    if (out_path.empty()) out_path = doc.string_or("output.path", "");

    std::string text;
    int code = kSuccess;
    if (command == "eig") text = cmd_eig(doc, opt);
    if (command == "steady") text = cmd_steady(doc, opt);
    if (command == "chern") text = cmd_chern(doc, opt);
    if (command == "hall") text = cmd_hall(doc, opt);
    if (command == "sweep") text = cmd_sweep(doc, opt);
    if (command == "validate") {
      const ValidateOutcome v = cmd_validate(doc, opt);
      text = v.text;
      code = v.pass ? kSuccess : kValidationFailure;
    }
    if (out_path.empty()) {
      out << text;
    } else {
      std::ofstream f(out_path, std::ios::binary);
      if (!f) throw ConfigError("cannot write '" + out_path + "'");
      f << text;
    }
    return code;
  } catch (const std::exception& e) {
    err << "openhall " << command << ": " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace openhall::cli
