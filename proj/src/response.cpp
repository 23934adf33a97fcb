#include "openhall/response.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "openhall/errors.hpp"

namespace openhall {

using std::numbers::pi;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

CMatrix swap_order(const CMatrix& m) {
  CMatrix out(2, 2);
  out << m(1, 1), m(1, 0), m(0, 1), m(0, 0);
  return out;
}

void require_gap(const RVector& e, double tol, Momentum k) {
  for (Eigen::Index i = 0; i + 1 < e.size(); ++i) {
    if (e(i + 1) - e(i) < tol) {
      std::ostringstream os;
      os << "bands " << i << " and " << i + 1 << " touch at k = (" << k.kx << ", " << k.ky
         << "), gap " << e(i + 1) - e(i);
      throw DegeneratePoint(os.str());
    }
  }
}

}  // namespace

BandFrame band_frame(const Model& model, Momentum k, double gap_tol) {
  BandFrame f;
  f.k = k;
  const HamiltonianGrad g = hamiltonian_grad(model, k);
  if (const auto* t = std::get_if<TwoBandModel>(&model)) {
    const AngleField a = angles(*t, k);
    const double e0 = t->offset_at(k);
    f.energies = RVector(2);
    f.energies << e0 - a.E1, e0 + a.E1;
    require_gap(f.energies, gap_tol, k);
    const CMatrix u = angle_spinors(a);
    f.basis = CMatrix(2, 2);
    f.basis.col(0) = u.col(1);
    f.basis.col(1) = u.col(0);
    f.angles = a;
  } else {
    const Eigensystem es = hermitian_eigensystem(hamiltonian_at(model, k));
    f.energies = es.values;
    require_gap(f.energies, gap_tol, k);
    f.basis = es.vectors;
  }
  f.vx = f.basis.adjoint() * g.dx * f.basis;
  f.vy = f.basis.adjoint() * g.dy * f.basis;
  return f;
}

BandFrame rephased(const BandFrame& f, const std::vector<double>& phases) {
  if (static_cast<Eigen::Index>(phases.size()) != f.basis.cols()) throw ValidationError("rephased: phase count");
  BandFrame out = f;
  for (Eigen::Index c = 0; c < f.basis.cols(); ++c) out.basis.col(c) *= std::polar(1.0, phases[static_cast<std::size_t>(c)]);
  out.vx = out.basis.adjoint() * (f.basis * f.vx * f.basis.adjoint()) * out.basis;
  out.vy = out.basis.adjoint() * (f.basis * f.vy * f.basis.adjoint()) * out.basis;
  out.angles.reset();  // the (theta, phi) spinor gauge no longer applies
  return out;
}

namespace {

// i <m|d_kx m> in the frame gauge
RVector connection_x(const Model& model, const BandFrame& frame) {
  const auto n = frame.energies.size();
  RVector a(n);
  if (frame.angles && std::holds_alternative<TwoBandModel>(model)) {
    const auto& t = std::get<TwoBandModel>(model);
    const AngleGradient g = angle_gradient(t, frame.k);
    const double th = frame.angles->theta;
    // <lower|d lower> = -i sin^2(t/2) dphi, <upper|d upper> = -i cos^2(t/2) dphi
    a(0) = std::pow(std::sin(0.5 * th), 2) * g.phi_x;
    a(1) = std::pow(std::cos(0.5 * th), 2) * g.phi_x;
    return a;
  }
  const double h = 1e-5;
  const auto plus = band_frame(model, {frame.k.kx + h, frame.k.ky});
  const auto minus = band_frame(model, {frame.k.kx - h, frame.k.ky});
  for (Eigen::Index m = 0; m < n; ++m) {
    const cplx d = (frame.basis.col(m).dot(plus.basis.col(m)) - frame.basis.col(m).dot(minus.basis.col(m))) / (2 * h);
    a(m) = -d.imag();  // i * (i Im d)
  }
  return a;
}

}  // namespace

HermitianMatrix perturbation_hprime(const Model& model, const BandFrame& frame, FieldConfig field,
                                    HprimeDiagonal diag) {
  const auto n = frame.energies.size();
  CMatrix h = CMatrix::Zero(n, n);
  if (field.Ex == 0.0) return HermitianMatrix(h);
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (m == j) continue;
      const double gap = frame.energies(j) - frame.energies(m);
      if (gap == 0.0) throw DegeneratePoint("perturbation_hprime: degenerate pair");
      h(m, j) = I * field.Ex * frame.vx(m, j) / gap;
    }
  if (diag == HprimeDiagonal::Connection) {
    const RVector a = connection_x(model, frame);
    for (Eigen::Index m = 0; m < n; ++m) h(m, m) = field.Ex * a(m);
  }
  return HermitianMatrix(h);
}

HermitianMatrix perturbation_hprime(const Model& model, Momentum k, FieldConfig field, HprimeDiagonal diag) {
  return perturbation_hprime(model, band_frame(model, k), field, diag);
}

SteadyStateK steady_state_at(const Model& model, const DissipatorSpec& spec, Momentum k, FieldConfig field,
                             FirstOrderMethod method, HprimeDiagonal diag) {
  return steady_state_at(model, spec, band_frame(model, k), field, method, diag);
}

SteadyStateK steady_state_at(const Model& model, const DissipatorSpec& spec, const BandFrame& frame,
                             FieldConfig field, FirstOrderMethod method, HprimeDiagonal diag) {
  const int n = static_cast<int>(frame.energies.size());
  validate_spec(spec, n);
  SteadyStateK s;
  s.k = frame.k;
  s.energies = frame.energies;
  s.basis = frame.basis;
  s.Ex = field.Ex;
  const AngleField* a = frame.angles ? &*frame.angles : nullptr;
  if (std::holds_alternative<SpinLowering>(spec.kind) && !a)
    throw ValidationError("spin dissipator needs a two-band model in the angle frame");
  s.order0 = zeroth_order_state(spec, n, frame.k, a);
  const CMatrix hp = perturbation_hprime(model, frame, field, diag).matrix();
  if (method == FirstOrderMethod::General) {
    s.order1 = solve_first_order_general(frame.energies, frame.basis, hp, spec, s.order0, frame.k);
    return s;
  }
  s.order1 = std::visit(
      overloaded{[&](const SingleSteadyBand& x) { return alpha1_single_matrix(x, frame.energies, hp); },
                 [&](const TwoSteadyBands& x) { return alpha1_two_steady_bands(x, frame.energies, hp, true); },
                 [&](const SpinLowering& x) {
                   return swap_order(tau1_spin_matrix(a->theta, a->E1, x.at(frame.k), swap_order(hp)));
                 }},
      spec.kind);
  return s;
}

Velocity velocity_y_expectation(const SteadyStateK& state, const BandFrame& frame) {
  const auto n = frame.energies.size();
  if (state.order0.rows() != n) throw ValidationError("velocity_y_expectation: state and frame differ in size");
  Velocity v;
  cplx zero = 0.0, first = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      zero += state.order0(i, j) * frame.vy(j, i);
      if (i != j) first += state.order1(i, j) * frame.vy(j, i);
    }
  v.zero_field = zero.real();
  v.first_order = first.real();
  return v;
}

ConductivityBreakdown make_breakdown(double sigma0, double dsigma1, double dsigma2) {
  ConductivityBreakdown b;
  b.sigma0 = sigma0;
  b.dsigma1 = dsigma1;
  b.dsigma2 = dsigma2;
  b.total = sigma0 + dsigma1 + dsigma2;
  b.chern_rate = b.total;
  return b;
}

double chern_rate(const ConductivityBreakdown& b) { return b.total; }

double berry_curvature(const BandFrame& frame, int band) {
  const auto n = frame.energies.size();
  double f = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == band) continue;
    const double g = frame.energies(band) - frame.energies(j);
    const cplx x = frame.vx(j, band) / g, y = frame.vy(j, band) / g;
    f += -2.0 * (std::conj(x) * y).imag();
  }
  return f;
}

namespace {

// sum over steady bands s with weight w of the three parts, via P_j = <d_x s|j><j|d_y s>
std::array<double, 3> dark_band_parts(const BandFrame& frame, const Eigen::MatrixXd& shift,
                                      const std::vector<std::pair<int, double>>& steady) {
  std::array<double, 3> out{0.0, 0.0, 0.0};
  const auto n = frame.energies.size();
  for (auto [s, w] : steady) {
    if (w == 0.0) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == s) continue;
      const double g = frame.energies(j) - frame.energies(s);
      const cplx x = frame.vx(j, s) / (-g), y = frame.vy(j, s) / (-g);
      const cplx p = std::conj(x) * y;
      const double r = shift(s, j) / g;
      out[0] += w * (-2.0 * p.imag());
      out[1] += w * r * 2.0 * p.real();
      out[2] += w * r * r * 2.0 * p.imag();
    }
  }
  return out;
}

std::array<double, 3> spin_parts(const BandFrame& frame, const SpinLowering& spin) {
  if (!frame.angles) throw ValidationError("spin dissipator needs the angle frame of a two-band model");
  const AngleField& a = *frame.angles;
  const double gamma = spin.at(frame.k);
  // per unit field, off-diagonal only, ordering (upper, lower)
  CMatrix hp = CMatrix::Zero(2, 2);
  const double gap = frame.energies(1) - frame.energies(0);
  hp(0, 1) = I * frame.vx(0, 1) / gap;
  hp(1, 0) = std::conj(hp(0, 1));
  const CMatrix h = swap_order(hp);
  // vy(lower, upper) in (upper, lower) order is ascending vy(0, 1)
  const cplx vy_lu = frame.vy(0, 1);
  auto velocity = [&](cplx t12) { return 2.0 * (t12 * vy_lu).real(); };
  const cplx t0 = tau1_weak_expansion(a.theta, a.E1, gamma, h, 0);
  const cplx t1 = tau1_weak_expansion(a.theta, a.E1, gamma, h, 1) - t0;
  const cplx exact = tau1_spin_dissipator(a.theta, a.E1, gamma, h);
  const double s0 = -velocity(t0), s1 = -velocity(t1), st = -velocity(exact);
  return {s0, s1, st - s0 - s1};
}

}  // namespace

std::array<double, 3> hall_integrand(const Model& model, const DissipatorSpec& spec, const BandFrame& frame) {
  const int n = static_cast<int>(frame.energies.size());
  return std::visit(
      overloaded{[&](const SingleSteadyBand& s) {
                   return dark_band_parts(frame, gap_shifts(spec, n), {{s.target, 1.0}});
                 },
                 [&](const TwoSteadyBands& s) {
                   return dark_band_parts(frame, gap_shifts(spec, n),
                                          {{s.target1, s.weight1}, {s.target2, s.weight2}});
                 },
                 [&](const SpinLowering& s) {
                   if (!std::holds_alternative<TwoBandModel>(model))
                     throw ValidationError("spin dissipator requires a two-band model");
                   return spin_parts(frame, s);
                 }},
      spec.kind);
}

namespace {

void attach(ConductivityBreakdown& b, const ConvergenceReport& r, std::string method) {
  double err = 0.0;
  for (double e : r.error) err = std::max(err, e);
  b.error_estimate = err;
  b.levels = r.levels;
  b.excluded = r.excluded;
  b.converged = r.converged;
  b.grid = r.grid.describe();
  b.method = std::move(method);
}

}  // namespace

ConductivityBreakdown hall_conductivity_general(const Model& model, const DissipatorSpec& spec, FieldConfig field,
                                                const BZGrid& grid, const IntegrationOptions& opt) {
  if (!std::isfinite(field.Ex)) throw ValidationError("hall_conductivity_general: non-finite field");
  validate_spec(spec, band_count(model));
  const auto f = [&](Momentum k, std::span<double> out) {
    const auto v = hall_integrand(model, spec, band_frame(model, k));
    out[0] = v[0];
    out[1] = v[1];
    out[2] = v[2];
  };
  const ConvergenceReport r = integrate(f, 3, grid, opt);
  ConductivityBreakdown b = make_breakdown(r.value[0], r.value[1], r.value[2]);
  attach(b, r, "general");
  return b;
}

std::array<double, 2> hall_two_band_spin_integrand(const TwoBandModel& model, double gamma, Momentum k) {
  const AngleField a = angles(model, k);
  const AngleGradient g = angle_gradient(model, k);
  const double c = std::cos(a.theta), s = std::sin(a.theta);
  const double s0 = std::sin(2 * a.theta) / (3 + std::cos(2 * a.theta)) * (g.theta_x * g.phi_y - g.theta_y * g.phi_x);
  const double q = 1 + c * c;
  const double s1 = gamma * (c / (2 * a.E1 * q) * g.theta_x * g.theta_y +
                             c * s * s * (1 + 0.5 * s * s) / (a.E1 * q * q) * g.phi_x * g.phi_y);
  return {s0, s1};
}

ConductivityBreakdown hall_two_band_spin(const TwoBandModel& model, double gamma, const BZGrid& grid,
                                         const IntegrationOptions& opt) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("hall_two_band_spin: gamma must be >= 0");
  const auto f = [&](Momentum k, std::span<double> out) {
    const auto v = hall_two_band_spin_integrand(model, gamma, k);
    out[0] = v[0];
    out[1] = v[1];
  };
  const ConvergenceReport r = integrate(f, 2, grid, opt);
  ConductivityBreakdown b = make_breakdown(r.value[0], r.value[1], 0.0);
  attach(b, r, "two_band_spin");
  return b;
}

namespace {

CVector band_state(const Model& model, Momentum k, int band) {
  const Eigensystem es = hermitian_eigensystem(hamiltonian_at(model, k));
  if (band < 0 || band >= es.values.size()) throw ValidationError("band index out of range");
  require_gap(es.values, 1e-9, k);
  return es.vectors.col(band);
}

CVector band_state_of(const CMatrix& h, int band) {
  const Eigensystem es = hermitian_eigensystem(HermitianMatrix(h));
  if (band < 0 || band >= es.values.size()) throw ValidationError("band index out of range");
  require_gap(es.values, 1e-9, {});
  return es.vectors.col(band);
}

// arg of the product of link overlaps around a closed loop
double loop_phase(std::initializer_list<const CVector*> loop) {
  cplx prod = 1.0;
  const auto* first = *loop.begin();
  const CVector* prev = nullptr;
  for (const auto* v : loop) {
    if (prev) prod *= prev->dot(*v);
    prev = v;
  }
  prod *= prev->dot(*first);
  if (std::abs(prod) < 1e-12) throw ResolutionError("plaquette with vanishing overlap", 1.0);
  return std::arg(prod);
}

ChernResult finish(double flux_sum, double max_phase, std::string grid) {
  ChernResult r;
  r.raw = flux_sum / (2 * pi);
  r.chern = static_cast<int>(std::lround(r.raw));
  r.residual = std::abs(r.raw - r.chern);
  r.max_plaquette = max_phase;
  r.grid = std::move(grid);
  if (r.residual >= 1e-3) {
    std::ostringstream os;
    os << "plaquette sum " << r.raw << " is not within 1e-3 of an integer on " << r.grid << "; refine the grid";
    throw ResolutionError(os.str(), r.residual);
  }
  return r;
}

}  // namespace

ChernResult chern_from_link_states(const std::vector<CVector>& states, int nx, int ny, std::string grid) {
  if (static_cast<std::size_t>(nx) * ny != states.size()) throw ValidationError("chern_from_link_states: size mismatch");
  auto at = [&](int i, int j) -> const CVector& { return states[static_cast<std::size_t>((i % nx) * ny + (j % ny))]; };
  std::vector<double> flux;
  flux.reserve(states.size());
  double max_phase = 0.0;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const double ph = loop_phase({&at(i, j), &at(i + 1, j), &at(i + 1, j + 1), &at(i, j + 1)});
      flux.push_back(-ph);
      max_phase = std::max(max_phase, std::abs(ph));
    }
  return finish(pairwise_sum(flux), max_phase, std::move(grid));
}

std::vector<CVector> torus_band_states(const Model& model, int band, const BZGrid& grid) {
  if (!grid.is_torus()) throw ValidationError("chern_number_fhs: needs a torus grid");
  const auto& t = grid.torus();
  if (!t.domain.periodic) throw ValidationError("chern_number_fhs: grid must cover a full period");
  const double hx = t.domain.period_x / t.nx, hy = t.domain.period_y / t.ny;
  std::vector<CVector> u(static_cast<std::size_t>(t.nx) * t.ny);
  parallel_for(u.size(), 1, [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / t.ny, j = static_cast<int>(idx) % t.ny;
    u[idx] = band_state(model, {t.domain.origin_x + i * hx, t.domain.origin_y + j * hy}, band);
  });
  return u;
}

ChernResult chern_number_fhs(const Model& model, int band, const BZGrid& grid) {
  const auto u = torus_band_states(model, band, grid);
  return chern_from_link_states(u, grid.torus().nx, grid.torus().ny, grid.describe());
}

ChernResult chern_number_compactified(const Model& model, int band, int n_radial, int n_angular, double k_min,
                                      double k_max) {
  const Domain& d = model_domain(model);
  if (d.is_torus()) throw ValidationError("chern_number_compactified: model lives on a torus");
  if (n_radial < 8 || n_angular < 8) throw ValidationError("chern_number_compactified: resolution below 8");
  if (k_min <= 0.0) k_min = d.k_min;
  if (k_max <= 0.0) k_max = d.k_max;
  const double u0 = std::log(k_min), du = (std::log(k_max) - u0) / (n_radial - 1);
  const double dt = 2 * pi / n_angular;
  const CVector center = band_state(model, {0.0, 0.0}, band);
  const CVector inf = band_state_of(infinity_hamiltonian(model), band);
  std::vector<CVector> ring(static_cast<std::size_t>(n_radial) * n_angular);
  for (int i = 0; i < n_radial; ++i) {
    const double r = std::exp(u0 + i * du);
    for (int j = 0; j < n_angular; ++j)
      ring[static_cast<std::size_t>(i * n_angular + j)] =
          band_state(model, {r * std::cos(j * dt), r * std::sin(j * dt)}, band);
  }
  auto at = [&](int i, int j) -> const CVector& {
    return ring[static_cast<std::size_t>(i * n_angular + ((j % n_angular) + n_angular) % n_angular)];
  };
  std::vector<double> flux;
  double max_phase = 0.0;
  auto add = [&](double ph) {
    flux.push_back(-ph);
    max_phase = std::max(max_phase, std::abs(ph));
  };
  for (int j = 0; j < n_angular; ++j) add(loop_phase({&center, &at(0, j), &at(0, j + 1)}));
  for (int i = 0; i + 1 < n_radial; ++i)
    for (int j = 0; j < n_angular; ++j) add(loop_phase({&at(i, j), &at(i + 1, j), &at(i + 1, j + 1), &at(i, j + 1)}));
  for (int j = 0; j < n_angular; ++j) add(loop_phase({&at(n_radial - 1, j), &inf, &at(n_radial - 1, j + 1)}));
  std::ostringstream os;
  os << "compactified plane " << n_radial << "x" << n_angular << " k in [" << k_min << ", " << k_max << "]";
  return finish(pairwise_sum(flux), max_phase, os.str());
}

ChernResult chern_number(const Model& model, int band, int resolution, int max_doublings) {
  const Domain& d = model_domain(model);
  int n = resolution;
  for (int level = 0;; ++level, n *= 2) {
    try {
      ChernResult r = d.is_torus() ? chern_number_fhs(model, band, BZGrid::torus(d, n, n))
                                   : chern_number_compactified(model, band, n, n);
      if (r.max_plaquette < 0.5 * pi || level == max_doublings) return r;
    } catch (const ResolutionError&) {
      if (level == max_doublings) throw;
    }
  }
}

CurvatureField curvature_field(const Model& model, int band, const BZGrid& grid) {
  CurvatureField f{grid, band, samples(grid), {}, {}};
  f.curvature.resize(f.points.size());
  parallel_for(f.points.size(), 1, [&](std::size_t i) {
    f.curvature[i] = berry_curvature(band_frame(model, f.points[i].k), band);
  });
  if (grid.is_torus() && grid.torus().domain.periodic) {
    const auto& t = grid.torus();
    const auto u = torus_band_states(model, band, grid);
    auto at = [&](int i, int j) -> const CVector& { return u[static_cast<std::size_t>((i % t.nx) * t.ny + (j % t.ny))]; };
    for (int i = 0; i < t.nx; ++i)
      for (int j = 0; j < t.ny; ++j)
        f.plaquette_flux.push_back(-loop_phase({&at(i, j), &at(i + 1, j), &at(i + 1, j + 1), &at(i, j + 1)}));
  }
  return f;
}

double chern_value(const std::vector<double>& weights, const CurvatureField& field) {
  if (weights.size() != field.points.size())
    throw ValidationError("chern_value: weights are not sampled on the curvature grid");
  std::vector<double> terms(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) terms[i] = weights[i] * field.curvature[i] * field.points[i].weight;
  return pairwise_sum(terms);
}

double bi2se3_analytic(double B, double delta0) {
  auto sgn2 = [](double x) { return x == 0.0 ? 0.0 : 1.0; };
  return 0.5 * std::log((1 + sgn2(B)) / (1 + sgn2(delta0)));
}

ConvergenceReport lattice_hall(const TwoBandModel& model, const BZGrid& grid, const IntegrationOptions& opt) {
  if (model.name != "magnetic_lattice") throw ValidationError("lattice_hall: needs a magnetic_lattice model");
  if (model.param("delta") == 0.0)
    throw DegeneratePoint("lattice_hall: delta = 0, bands touch along whole lines and the integrand is undefined there");
  const double l = model.param("l");
  const auto f = [&](Momentum k) {
    const AngleField a = angles(model, k);
    const AngleGradient g = angle_gradient(model, k);
    const double c = std::cos(a.theta), s = std::sin(a.theta);
    return s * c / (1 + c * c) * g.theta_x * l;
  };
  return integrate(f, grid, opt);
}

}  // namespace openhall
