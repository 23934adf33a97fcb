// One PASS/FAIL line per acceptance criterion.
//   openhall_acceptance [--expect-fail 4,...]
// Exit status is 0 when the failing set equals the expected one.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "openhall/errors.hpp"
#include "openhall/oracle.hpp"
#include "openhall/response.hpp"
#include "openhall/suite.hpp"

using namespace openhall;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double limit_s;
  std::function<Outcome()> run;
};

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

IntegrationOptions single_level() {
  IntegrationOptions o;
  o.max_levels = 1;
  o.threads = 4;
  return o;
}

IntegrationOptions threaded() {
  IntegrationOptions o;
  o.threads = 4;
  return o;
}

Outcome closed_quantization() {
  const TwoBandModel m = magnetic_lattice(1, 0.5, 1, 4, 1, 1);
  const BZGrid g = BZGrid::for_domain(m.domain, 64);
  const ChernResult c = chern_number_fhs(m, 0, g);
  const double sigma =
      hall_conductivity_general(m, single_steady_band(0, {0.0, 0.0}), {1.0}, g, threaded()).sigma0;
  const bool integer = c.residual < 1e-3;
  const bool agree = std::abs(sigma - c.chern) < 1e-4;
  // the effective d-vector over the full torus; the magnetic zone is not closed
  const double zone = hall_conductivity_general(m, single_steady_band(0, {0.0, 0.0}), {1.0},
                                                BZGrid::for_domain(m.zone(), 64), threaded())
                          .sigma0;
  return {integer && agree, "FHS C=" + std::to_string(c.chern) + " residual " + num(c.residual) +
                                " max plaquette " + num(c.max_plaquette) + "; sigma=" + num(sigma) +
                                " |sigma-C|=" + num(std::abs(sigma - c.chern)) + " (tol 1e-4); zone sigma=" +
                                num(zone)};
}

Outcome rashba_transition() {
  const double lambda = 23, h0 = 5, gamma = 1e-4;
  std::ostringstream d;
  bool pass = true;
  // bracketing pair on a fixed 256^2 log-polar grid
  double s[2];
  int chern[2];
  const double betas[2] = {22.9, 23.1};
  for (int i = 0; i < 2; ++i) {
    const TwoBandModel m = rashba_dresselhaus(lambda, betas[i], h0);
    const Domain& w = m.domain;
    const ConductivityBreakdown b =
        hall_two_band_spin(m, gamma, BZGrid::plane(w.k_min, w.k_max, 256, 256), single_level());
    s[i] = b.sigma0;
    chern[i] = chern_number(m, 0).chern;
    // magnitude at 256^2 is reported, not asserted: the gap closes along kx = ky at beta = lambda
    ConductivityBreakdown conv;
    std::string status = "converged";
    try {
      conv = hall_two_band_spin(m, gamma, BZGrid::for_domain(w, 64), threaded());
    } catch (const ConvergenceError& e) {
      status = "not converged (finest " + num(e.history.empty() ? NAN : e.history.back()) + ")";
    }
    d << "beta=" << betas[i] << ": sigma0(256^2)=" << num(s[i]) << " C=" << chern[i] << " refinement " << status
      << "; ";
  }
  const bool flip = s[0] * s[1] < 0;
  const bool chern_ok = chern[0] == 1 && chern[1] == -1;
  pass = flip && chern_ok;
  double worst_ratio = 0;
  int unsettled = 0;
  for (double beta : {10.0, 15.0, 20.0, 22.4, 23.6, 26.0, 30.0, 40.0}) {
    const TwoBandModel m = rashba_dresselhaus(lambda, beta, h0);
    const BZGrid g = BZGrid::for_domain(m.domain, 64);
    // finest level when refinement does not settle close to the transition
    const auto finest = [&](const std::function<double()>& f) {
      try {
        return f();
      } catch (const ConvergenceError& e) {
        ++unsettled;
        return e.history.back();
      }
    };
    const double open = finest([&] { return hall_two_band_spin(m, gamma, g, threaded()).sigma0; });
    const double closed = finest([&] {
      return hall_conductivity_general(m, single_steady_band(0, {0.0, 0.0}), {1.0}, g, threaded()).sigma0;
    });
    d << "beta=" << beta << " open " << num(open) << " closed " << num(closed) << "; ";
    worst_ratio = std::max(worst_ratio, std::abs(open) / std::abs(closed));
    if (!(std::abs(open) < std::abs(closed))) pass = false;
  }
  d << "max |sigma0 open|/|sigma closed| over 8 betas = " << num(worst_ratio) << " (" << unsettled
    << " values from the finest level without convergence)";
  return {pass, d.str()};
}

Outcome first_order_sign() {
  const double lambda = 23, gamma = 0.1;
  const double betas[5] = {10, 16, 20, 26, 32};
  const double h0s[5] = {1, 2, 3, 4, 5};
  double max_ds1 = -INFINITY, max_spread = 0;
  for (double beta : betas) {
    double lo = INFINITY, hi = -INFINITY;
    for (double h0 : h0s) {
      const TwoBandModel m = rashba_dresselhaus(lambda, beta, h0);
      const ConductivityBreakdown b = hall_two_band_spin(m, gamma, BZGrid::for_domain(m.domain, 64), threaded());
      max_ds1 = std::max(max_ds1, b.dsigma1);
      lo = std::min(lo, b.sigma0);
      hi = std::max(hi, b.sigma0);
    }
    max_spread = std::max(max_spread, hi - lo);
  }
  return {max_ds1 < 0 && max_spread < 1e-6,
          "max dsigma1 over 5x5 = " + num(max_ds1) + " (need < 0); max sigma0 spread over h0 = " + num(max_spread) +
              " (tol 1e-6)"};
}

Outcome bi2se3_values() {
  std::ostringstream d;
  bool pass = true;
  for (auto [B, D] : {std::pair{1.0, 1.0}, std::pair{0.0, 1.0}, std::pair{1.0, 0.0}}) {
    const TwoBandModel m = bi2se3_valley(1, D, B);
    const ConductivityBreakdown b = hall_two_band_spin(m, 0.1, BZGrid::for_domain(m.domain, 64), threaded());
    const double want = bi2se3_analytic(B, D);
    const bool ok = std::abs(b.total - want) < 2e-3 && std::abs(b.dsigma1) < 1e-6;
    pass = pass && ok;
    d << "(B=" << B << ",D0=" << D << ") sigma=" << num(b.total) << " analytic=" << num(want)
      << " dsigma1=" << num(b.dsigma1) << (ok ? " ok" : " MISMATCH") << "; ";
  }
  return {pass, d.str()};
}

Outcome lattice_parity() {
  std::vector<double> vals;
  for (int i = 1; i <= 5; ++i) {
    vals.push_back(-0.2 * i);
    vals.push_back(0.2 * i);
  }
  int flips = 0, same = 0, points = 0;
  double worst_ds1 = 0, worst_pointwise = 0;
  for (double delta : vals)
    for (double ta : vals) {
      ++points;
      double s[2];
      for (int mm = 1; mm <= 2; ++mm) {
        const TwoBandModel m = magnetic_lattice(ta, delta, 1, 4, 1, mm);
        const ConductivityBreakdown b = hall_two_band_spin(m, 0.1, BZGrid::for_domain(m.zone(), 32), threaded());
        s[mm - 1] = b.sigma0;
        worst_ds1 = std::max(worst_ds1, std::abs(b.dsigma1));
        for (const Sample& p : samples(BZGrid::for_domain(m.zone(), 16)))
          worst_pointwise = std::max(worst_pointwise, std::abs(hall_two_band_spin_integrand(m, 0.1, p.k)[1]));
      }
      if (s[0] * s[1] < 0) ++flips;
      const TwoBandModel mirror = magnetic_lattice(-ta, delta, 1, 4, 1, 1);
      const double sm = hall_two_band_spin(mirror, 0.1, BZGrid::for_domain(mirror.zone(), 32), threaded()).sigma0;
      if (sm * s[0] > 0) ++same;
    }
  const bool pass = flips == points && same == points && worst_pointwise < 1e-10 && worst_ds1 < 1e-10;
  return {pass, "m=1/m=2 sign flips " + std::to_string(flips) + "/" + std::to_string(points) +
                    "; same sign under ta -> -ta " + std::to_string(same) + "/" + std::to_string(points) +
                    "; max |dsigma1 integrand| " + num(worst_pointwise) + ", max |dsigma1| " + num(worst_ds1)};
}

Outcome suite_outcome(const SuiteReport& r) {
  std::ostringstream d;
  d << r.checks.size() - r.failures() << "/" << r.checks.size() << " checks pass";
  for (const auto& c : r.checks)
    if (!c.pass) d << "; FAILED " << c.name << " worst " << num(c.worst) << " bound " << num(c.threshold);
  return {r.pass(), d.str()};
}

Outcome oracle_ladder() {
  SuiteOptions o;
  o.points = 20;
  return suite_outcome(run_oracle_ladder(o));
}

Outcome invariants() {
  SuiteOptions o;
  o.points = 20;
  return suite_outcome(run_invariants(o));
}

std::set<int> parse_ids(const std::string& s) {
  std::set<int> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ','))
    if (!tok.empty()) out.insert(std::stoi(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected;
  std::set<int> only;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--expect-fail") expected = parse_ids(argv[i + 1]);
    if (flag == "--only") only = parse_ids(argv[i + 1]);
  }
  const std::vector<Criterion> criteria{
      {1, "closed-system quantization", 10, closed_quantization},
      {2, "Rashba-Dresselhaus phase transition", 120, rashba_transition},
      {3, "first-order sign", 600, first_order_sign},
      {4, "Bi2Se3 analytic values", 180, bi2se3_values},
      {5, "lattice parity and vanishing correction", 300, lattice_parity},
      {6, "oracle ladder", 120, oracle_ladder},
      {7, "invariant suite", 60, invariants},
  };
  std::set<int> failed;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && dt < c.limit_s;
    if (!pass) failed.insert(c.id);
    std::printf("criterion %d %s: %s (%.2f s, limit %.0f s) %s\n", c.id, c.title.c_str(), pass ? "PASS" : "FAIL", dt,
                c.limit_s, o.detail.c_str());
    std::fflush(stdout);
  }
  std::set<int> want;
  for (int id : expected)
    if (only.empty() || only.count(id)) want.insert(id);
  if (failed != want) {
    std::printf("failing set differs from the expected one\n");
    return 1;
  }
  return 0;
}
