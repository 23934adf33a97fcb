#include "openhall/suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "openhall/errors.hpp"
#include "openhall/oracle.hpp"

namespace openhall {

bool SuiteReport::pass() const { return failures() == 0; }

std::size_t SuiteReport::failures() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.pass; }));
}

namespace {

using std::numbers::pi;

CMatrix swap_order(const CMatrix& m) {
  CMatrix out(2, 2);
  out << m(1, 1), m(1, 0), m(0, 1), m(0, 0);
  return out;
}

// Worst-case accumulator for one named check over many k-points.
class Tally {
 public:
  Tally(std::string name, double threshold, bool lower_bound = false)
      : name_(std::move(name)), threshold_(threshold), lower_(lower_bound),
        worst_(lower_bound ? std::numeric_limits<double>::infinity() : 0.0) {}

  void observe(double v, Momentum k) {
    const bool worse = lower_ ? v < worst_ : v > worst_;
    if (worse || std::isnan(v)) {
      worst_ = v;
      at_ = k;
    }
    ++count_;
  }
  void fail(const std::string& why) {
    failed_ = true;
    if (note_.empty()) note_ = why;
  }
  CheckResult result() const {
    CheckResult r;
    r.name = name_;
    r.worst = worst_;
    r.threshold = threshold_;
    const bool ok = lower_ ? worst_ >= threshold_ : worst_ <= threshold_;
    r.pass = !failed_ && count_ > 0 && ok && !std::isnan(worst_);
    std::ostringstream os;
    os << count_ << " points";
    if (count_ > 0) os << ", worst at k = (" << at_.kx << ", " << at_.ky << ")";
    if (!note_.empty()) os << "; " << note_;
    r.detail = os.str();
    return r;
  }

 private:
  std::string name_;
  double threshold_;
  bool lower_;
  double worst_;
  Momentum at_{};
  int count_ = 0;
  bool failed_ = false;
  std::string note_;
};

// Random gapped k-points inside a model's domain.
std::vector<Momentum> random_points(const Model& model, int count, std::mt19937_64& rng) {
  const Domain& d = model_domain(model);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Momentum> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > 100 * count) throw ValidationError("random_points: could not find gapped k-points");
    Momentum k;
    if (d.is_torus()) {
      k = {d.origin_x + u(rng) * d.period_x, d.origin_y + u(rng) * d.period_y};
    } else {
      const double centre = std::sqrt(d.k_min * d.k_max);
      const double r = centre * std::exp(std::log(100.0) * (2 * u(rng) - 1));
      const double t = 2 * pi * u(rng);
      k = {r * std::cos(t), r * std::sin(t)};
    }
    try {
      const BandFrame f = band_frame(model, k);
      const double span = std::max(1.0, f.energies.cwiseAbs().maxCoeff());
      double gap = span;
      for (Eigen::Index i = 0; i + 1 < f.energies.size(); ++i) gap = std::min(gap, f.energies(i + 1) - f.energies(i));
      if (gap > 1e-2 * span) out.push_back(k);
    } catch (const DegeneratePoint&) {
    }
  }
  return out;
}

// Same dissipator with every rate multiplied by `s`.
DissipatorSpec scaled(const DissipatorSpec& spec, double s) {
  DissipatorSpec out = spec;
  std::visit([&](auto& x) {
    using T = std::decay_t<decltype(x)>;
    if constexpr (std::is_same_v<T, SingleSteadyBand>) {
      for (double& r : x.rates) r *= s;
    } else if constexpr (std::is_same_v<T, TwoSteadyBands>) {
      for (double& r : x.rates1) r *= s;
      for (double& r : x.rates2) r *= s;
    } else {
      x.gamma *= s;
    }
  }, out.kind);
  return out;
}

double max_rate(const DissipatorSpec& spec) {
  return std::visit([](const auto& x) {
    using T = std::decay_t<decltype(x)>;
    if constexpr (std::is_same_v<T, SingleSteadyBand>) {
      return *std::max_element(x.rates.begin(), x.rates.end());
    } else if constexpr (std::is_same_v<T, TwoSteadyBands>) {
      return std::max(*std::max_element(x.rates1.begin(), x.rates1.end()),
                      *std::max_element(x.rates2.begin(), x.rates2.end()));
    } else {
      return x.gamma;
    }
  }, spec.kind);
}

double min_gap(const RVector& e) {
  double g = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i + 1 < e.size(); ++i) g = std::min(g, e(i + 1) - e(i));
  return g;
}

// Closed-form first order for a spec, with the spin term optionally mutated.
CMatrix closed_first_order(const DissipatorSpec& spec, const BandFrame& f, const CMatrix& hp, bool flip_s3) {
  if (const auto* s = std::get_if<SpinLowering>(&spec.kind)) {
    const AngleField& a = *f.angles;
    return swap_order(tau1_spin_matrix(a.theta, a.E1, s->at(f.k), swap_order(hp), flip_s3));
  }
  if (const auto* s = std::get_if<SingleSteadyBand>(&spec.kind)) return alpha1_single_matrix(*s, f.energies, hp);
  return alpha1_two_steady_bands(std::get<TwoSteadyBands>(spec.kind), f.energies, hp, true);
}

// Large-gap / weak-dissipation expansion and its stated error order in the rates.
std::pair<CMatrix, double> expansion_first_order(const DissipatorSpec& spec, const BandFrame& f, const CMatrix& hp) {
  if (const auto* s = std::get_if<SpinLowering>(&spec.kind)) {
    const AngleField& a = *f.angles;
    const cplx t = tau1_weak_expansion(a.theta, a.E1, s->at(f.k), swap_order(hp), 1);
    CMatrix m = CMatrix::Zero(2, 2);
    m(1, 0) = t;  // (upper, lower) entry in ascending order
    m(0, 1) = std::conj(t);
    return {m, 2.0};
  }
  if (const auto* s = std::get_if<SingleSteadyBand>(&spec.kind)) {
    const int n = static_cast<int>(f.energies.size());
    CMatrix m = CMatrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
      if (j == s->target) continue;
      const cplx v = alpha1_single_expansion(hp(s->target, j), f.energies(j) - f.energies(s->target),
                                             s->rates[static_cast<std::size_t>(j)]);
      m(s->target, j) = v;
      m(j, s->target) = std::conj(v);
    }
    return {m, 3.0};
  }
  return {alpha1_two_steady_bands(std::get<TwoSteadyBands>(spec.kind), f.energies, hp, false), 3.0};
}

CMatrix spin_only_offdiag(const CMatrix& m) {
  CMatrix out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out(i, i) = 0.0;
  return out;
}

void ladder_for_pair(const ModelPair& p, const SuiteOptions& opt, std::mt19937_64& rng, SuiteReport& rep) {
  const bool spin = std::holds_alternative<SpinLowering>(p.spec.kind);
  const bool closed = p.spec.is_closed();
  Tally t0(p.label + ": zeroth order vs null space", 1e-9);
  Tally t1(p.label + ": closed-form first order vs general solver (relative)", 1e-9);
  Tally tx(p.label + ": expansion error order in the rates", 0.0, true);
  Tally to(p.label + ": general solver vs finite-field oracle (relative)", 1e-6);
  Tally te(p.label + ": oracle remainder exponent", 1.8, true);

  for (const Momentum k : random_points(p.model, opt.points, rng)) {
    const BandFrame f = band_frame(p.model, k);
    const int n = static_cast<int>(f.energies.size());
    const std::vector<Jump> jumps = jump_operators(p.spec, f.basis, k);
    const CMatrix rho0 = zeroth_order_state(p.spec, n, k, f.angles ? &*f.angles : nullptr);

    // (a) zeroth order: entrywise against a unique null vector, otherwise stationarity
    try {
      const Superoperator l0 = build_liouvillian(HermitianMatrix(CMatrix(f.energies.cast<cplx>().asDiagonal())), jumps);
      const NullSpaceResult ns = null_space_steady_state(l0);
      DensityMatrix check(rho0);
      const double dev = ns.multiplicity == 1 ? (ns.state.matrix() - rho0).cwiseAbs().maxCoeff()
                                              : (l0.matrix() * vec(rho0)).norm();
      t0.observe(dev, k);
    } catch (const Error& e) {
      t0.fail(e.what());
    }

    // (b) closed forms vs general solver, with the diagonal connection included so every
    // term of the spin coherence is exercised
    const HprimeDiagonal diag = spin ? HprimeDiagonal::Connection : HprimeDiagonal::Exclude;
    try {
      const CMatrix hp = perturbation_hprime(p.model, f, FieldConfig{1.0}, diag).matrix();
      const CMatrix general = spin_only_offdiag(solve_first_order_general(f.energies, hp, jumps, rho0));
      const CMatrix closed_form = closed_first_order(p.spec, f, hp, opt.flip_s3);
      t1.observe((closed_form - general).norm() / std::max(general.norm(), 1e-300), k);
    } catch (const Error& e) {
      t1.fail(e.what());
    }

    // (b') expansion error shrinks as (rate)^order: halve every rate and compare
    if (!closed) {
      try {
        const double unit = 0.02 * min_gap(f.energies) / max_rate(p.spec);
        double err[2];
        double order = 0.0;
        for (int h = 0; h < 2; ++h) {
          const DissipatorSpec sp = scaled(p.spec, unit / (1 << h));
          const CMatrix hp = perturbation_hprime(p.model, f, FieldConfig{1.0}).matrix();
          const CMatrix exact = closed_first_order(sp, f, hp, false);
          const auto [approx, ord] = expansion_first_order(sp, f, hp);
          err[h] = (spin_only_offdiag(exact) - spin_only_offdiag(approx)).norm() / std::max(exact.norm(), 1e-300);
          order = ord;
        }
        // both errors at round-off: nothing left to measure
        const double slope = err[0] < 1e-13 ? order : std::log2(err[0] / err[1]);
        tx.observe(slope - (order - 0.2), k);
      } catch (const Error& e) {
        tx.fail(e.what());
      }
    }

    // (c) general solver vs the oracle's finite-field response
    try {
      const ResponseProbe probe = probe_response(p.model, p.spec, f);
      const CMatrix hp = perturbation_hprime(p.model, f, FieldConfig{1.0}).matrix();
      const CMatrix general = solve_first_order_general(f.energies, hp, jumps, rho0);
      const double scale = probe.rho1.norm();
      to.observe((general - probe.rho1).norm() / std::max(scale, 1e-3), k);
      te.observe(probe.exponent, k);
    } catch (const NonlinearResponse& e) {
      te.observe(e.exponent, k);
      te.fail(e.what());
    } catch (const Error& e) {
      to.fail(e.what());
    }
  }
  rep.checks.push_back(t0.result());
  rep.checks.push_back(t1.result());
  if (!closed) {
    CheckResult r = tx.result();
    r.name = p.label + ": expansion error order in the rates (slope minus required order)";
    rep.checks.push_back(r);
  }
  rep.checks.push_back(to.result());
  rep.checks.push_back(te.result());
}

CMatrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  return hermitian_part(m);
}

std::vector<double> random_phases(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-pi, pi);
  std::vector<double> p(static_cast<std::size_t>(n));
  for (double& x : p) x = u(rng);
  return p;
}

}  // namespace

TwoBandModel trs_lattice() {
  std::array<std::vector<Term>, 3> d{
      std::vector<Term>{{1.0, "const", 0, 0}, {1.0, "cos", 1, 0}, {1.0, "cos", 0, 1}},
      std::vector<Term>{{1.0, "sin", 1, 0}},
      std::vector<Term>{{0.7, "const", 0, 0}, {0.3, "cos", 0, 1}}};
  return custom_two_band("trs_lattice", d, {}, Domain::torus(2 * pi, 2 * pi, -pi, -pi));
}

std::vector<ModelPair> builtin_pairs(double gamma) {
  const std::vector<TwoBandModel> two{rashba_dresselhaus(23, 10, 5), bi2se3_valley(50, 10, 20),
                                      magnetic_lattice(1, 0.5, 1, 4, 1, 1)};
  std::vector<ModelPair> out;
  for (const auto& m : two) {
    if (gamma > 0) out.push_back({m.name + " + spin_lowering", m, spin_lowering(gamma)});
    out.push_back({m.name + " + single_band", m, single_steady_band(0, {0.0, gamma})});
  }
  for (const auto& m : two) {
    const BandModel lift = spin_one_lift(m);
    out.push_back({lift.name + " + single_band", lift, single_steady_band(0, {0.0, gamma, 1.7 * gamma})});
    out.push_back({lift.name + " + two_band", lift,
                   two_steady_bands(0, 1, {0.0, 0.0, gamma}, {0.0, 0.0, 0.6 * gamma}, 0.3, 0.7)});
  }
  return out;
}

SuiteReport run_oracle_ladder(const SuiteOptions& opt) {
  if (opt.points < 1) throw ValidationError("run_oracle_ladder: need at least one point");
  if (!(opt.gamma >= 0.0)) throw ValidationError("run_oracle_ladder: gamma must be >= 0");
  SuiteReport rep;
  std::mt19937_64 rng(opt.seed);
  for (const auto& p : builtin_pairs(opt.gamma)) ladder_for_pair(p, opt, rng, rep);
  return rep;
}

SuiteReport run_invariants(const SuiteOptions& opt) {
  SuiteReport rep;
  std::mt19937_64 rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // generator: trace and Hermiticity preservation
  {
    Tally tr("generator preserves trace", 1e-12), he("generator preserves Hermiticity", 1e-12);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 2 + trial % 4;
      const HermitianMatrix h(random_hermitian(n, rng));
      std::vector<Jump> jumps;
      for (int j = 0; j < 3; ++j) {
        CMatrix f = random_hermitian(n, rng) + I * random_hermitian(n, rng);
        jumps.push_back({f / f.norm(), u(rng)});
      }
      const Superoperator l = build_liouvillian(h, jumps);
      const CMatrix rho = random_hermitian(n, rng);
      const CMatrix out = l.apply(rho / rho.norm());
      tr.observe(std::abs(out.trace()), {});
      he.observe((out - out.adjoint()).cwiseAbs().maxCoeff(), {});
    }
    rep.checks.push_back(tr.result());
    rep.checks.push_back(he.result());
  }

  // density matrices from the null space and from the zeroth-order closed forms
  {
    Tally dm("steady states are density matrices (trace, PSD)", 1e-10);
    for (const auto& p : builtin_pairs(opt.gamma > 0 ? opt.gamma : 0.1)) {
      for (const Momentum k : random_points(p.model, 5, rng)) {
        const BandFrame f = band_frame(p.model, k);
        const int n = static_cast<int>(f.energies.size());
        try {
          const CMatrix rho0 = zeroth_order_state(p.spec, n, k, f.angles ? &*f.angles : nullptr);
          const auto jumps = jump_operators(p.spec, f.basis, k);
          const NullSpaceResult ns =
              null_space_steady_state(build_liouvillian(HermitianMatrix(CMatrix(f.energies.cast<cplx>().asDiagonal())), jumps));
          for (const CMatrix& r : {rho0, ns.state.matrix()}) {
            const Eigen::SelfAdjointEigenSolver<CMatrix> es(r);
            const double neg = std::max(0.0, -es.eigenvalues().minCoeff());
            dm.observe(std::max(neg, std::abs(r.trace() - 1.0)), k);
          }
        } catch (const Error& e) {
          dm.fail(p.label + ": " + e.what());
        }
      }
    }
    rep.checks.push_back(dm.result());
  }

  // gauge stability: random per-band phases leave every reported quantity unchanged
  {
    Tally gs("hall integrand under band rephasing (relative)", 1e-10);
    Tally gv("spin velocity route: general solver in a rephased frame vs closed form (relative)", 1e-10);
    for (const auto& p : builtin_pairs(opt.gamma > 0 ? opt.gamma : 0.1)) {
      const bool spin = std::holds_alternative<SpinLowering>(p.spec.kind);
      for (const Momentum k : random_points(p.model, 5, rng)) {
        const BandFrame f = band_frame(p.model, k);
        const BandFrame g = rephased(f, random_phases(static_cast<int>(f.energies.size()), rng));
        try {
          if (spin) {
            const auto ref = hall_integrand(p.model, p.spec, f);
            // everything rebuilt in the rephased frame, zeroth order from the null space
            const auto jumps = jump_operators(p.spec, g.basis, k);
            const CMatrix h0 = g.energies.cast<cplx>().asDiagonal();
            SteadyStateK s{k, g.energies, g.basis, {}, {}, 1.0};
            s.order0 = null_space_steady_state(build_liouvillian(HermitianMatrix(h0), jumps)).state.matrix();
            const CMatrix hp = perturbation_hprime(p.model, g, FieldConfig{1.0}).matrix();
            s.order1 = solve_first_order_general(g.energies, hp, jumps, s.order0);
            const double v = -velocity_y_expectation(s, g).response();
            const double total = ref[0] + ref[1] + ref[2];
            gv.observe(std::abs(v - total) / std::max(std::abs(total), 1e-12), k);
          } else {
            const auto a = hall_integrand(p.model, p.spec, f);
            const auto b = hall_integrand(p.model, p.spec, g);
            const double size = std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2]), 1e-12});
            double worst = 0.0;
            for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(a[c] - b[c]) / size);
            gs.observe(worst, k);
          }
        } catch (const Error& e) {
          (spin ? gv : gs).fail(p.label + ": " + e.what());
        }
      }
    }
    rep.checks.push_back(gs.result());
    rep.checks.push_back(gv.result());

    // plaquette Chern number with every vertex state rephased
    Tally gc("plaquette Chern number under vertex rephasing", 1e-10);
    for (const Model& m : {Model{magnetic_lattice(1, 0.5, 1, 4, 1, 1)}, Model{qwz_lattice(-1.0)},
                          Model{spin_one_lift(qwz_lattice(1.0))}}) {
      const BZGrid grid = BZGrid::torus(model_domain(m), 64, 64);
      try {
        auto states = torus_band_states(m, 0, grid);
        const ChernResult a = chern_from_link_states(states, 64, 64, grid.describe());
        std::uniform_real_distribution<double> ph(-pi, pi);
        for (auto& s : states) s *= std::polar(1.0, ph(rng));
        const ChernResult b = chern_from_link_states(states, 64, 64, grid.describe());
        gc.observe(a.chern == b.chern ? std::abs(a.raw - b.raw) : 1.0, {});
      } catch (const Error& e) {
        gc.fail(model_name(m) + ": " + e.what());
      }
    }
    rep.checks.push_back(gc.result());
  }

  // time reversal: Chern number 0 and vanishing sigma0
  {
    const Model m = trs_lattice();
    Tally tc("time-reversal model: plaquette Chern number is 0", 0.0);
    Tally ts("time-reversal model: |sigma0|", 1e-8);
    try {
      const ChernResult c = chern_number_fhs(m, 0, BZGrid::torus(model_domain(m), 64, 64));
      tc.observe(std::abs(c.chern), {});
      IntegrationOptions io;
      io.max_levels = 1;
      const auto b = hall_conductivity_general(m, single_steady_band(0, {0.0, opt.gamma}), {},
                                               BZGrid::torus(model_domain(m), 64, 64), io);
      ts.observe(std::abs(b.sigma0), {});
    } catch (const Error& e) {
      tc.fail(e.what());
      ts.fail(e.what());
    }
    rep.checks.push_back(tc.result());
    rep.checks.push_back(ts.result());
  }

  // linearity of the first-order coefficients in the field
  {
    Tally lc("closed-form first order: doubling Ex doubles every entry (max deviation)", 0.0);
    Tally lg("general solver: doubling Ex doubles every entry (relative)", 1e-12);
    for (const auto& p : builtin_pairs(opt.gamma > 0 ? opt.gamma : 0.1)) {
      for (const Momentum k : random_points(p.model, 3, rng)) {
        const BandFrame f = band_frame(p.model, k);
        try {
          const auto a = steady_state_at(p.model, p.spec, f, FieldConfig{1.0});
          const auto b = steady_state_at(p.model, p.spec, f, FieldConfig{2.0});
          lc.observe((b.order1 - 2.0 * a.order1).cwiseAbs().maxCoeff(), k);
          const auto c = steady_state_at(p.model, p.spec, f, FieldConfig{1.0}, FirstOrderMethod::General);
          const auto d = steady_state_at(p.model, p.spec, f, FieldConfig{2.0}, FirstOrderMethod::General);
          lg.observe((d.order1 - 2.0 * c.order1).norm() / std::max(d.order1.norm(), 1e-300), k);
        } catch (const Error& e) {
          lc.fail(p.label + ": " + e.what());
        }
      }
    }
    rep.checks.push_back(lc.result());
    rep.checks.push_back(lg.result());
  }
  return rep;
}

}  // namespace openhall
