#include "openhall/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "openhall/errors.hpp"

namespace openhall {

using std::numbers::pi;

double DVector::norm() const { return std::sqrt(x * x + y * y + z * z); }
double DVector::inplane() const { return std::hypot(x, y); }

Domain Domain::torus(double lx, double ly, double ox, double oy) {
  if (!(lx > 0.0) || !(ly > 0.0)) throw ValidationError("torus domain: periods must be positive");
  Domain d;
  d.kind = Kind::Torus;
  d.period_x = lx;
  d.period_y = ly;
  d.origin_x = ox;
  d.origin_y = oy;
  return d;
}

Domain Domain::plane(double k_min, double k_max) {
  if (!(k_min > 0.0) || !(k_max > k_min)) throw ValidationError("plane domain: need 0 < kmin < kmax");
  Domain d;
  d.kind = Kind::Plane;
  d.k_min = k_min;
  d.k_max = k_max;
  return d;
}

DPartials finite_difference_partials(const std::function<DVector(Momentum)>& d, Momentum k,
                                     double h) {
  auto diff = [&](Momentum e) {
    auto at = [&](double s) { return d({k.kx + s * e.kx, k.ky + s * e.ky}); };
    const DVector p2 = at(2 * h), p1 = at(h), m1 = at(-h), m2 = at(-2 * h);
    auto f = [&](double a2, double a1, double b1, double b2) {
      return (-a2 + 8 * a1 - 8 * b1 + b2) / (12 * h);
    };
    return DVector{f(p2.x, p1.x, m1.x, m2.x), f(p2.y, p1.y, m1.y, m2.y), f(p2.z, p1.z, m1.z, m2.z)};
  };
  return {diff({1, 0}), diff({0, 1})};
}

HamiltonianGrad finite_difference_grad(const std::function<CMatrix(Momentum)>& h, Momentum k,
                                       double step) {
  auto diff = [&](Momentum e) {
    auto at = [&](double s) { return h({k.kx + s * e.kx, k.ky + s * e.ky}); };
    return CMatrix((-at(2 * step) + 8.0 * at(step) - 8.0 * at(-step) + at(-2 * step)) / (12 * step));
  };
  return {diff({1, 0}), diff({0, 1})};
}

DPartials TwoBandModel::partials_at(Momentum k) const {
  return d_partials ? d_partials(k) : finite_difference_partials(d, k);
}

std::array<double, 2> TwoBandModel::offset_grad_at(Momentum k) const {
  if (offset_grad) return offset_grad(k);
  if (!offset) return {0.0, 0.0};
  const auto g = finite_difference_partials(
      [this](Momentum q) { return DVector{offset(q), 0.0, 0.0}; }, k);
  return {g.dkx.x, g.dky.x};
}

double TwoBandModel::param(const std::string& key) const {
  for (const auto& [k, v] : params)
    if (k == key) return v;
  throw ValidationError("model " + name + " has no parameter '" + key + "'");
}

HermitianMatrix BandModel::hamiltonian_at(Momentum k) const { return HermitianMatrix(h(k)); }

HamiltonianGrad BandModel::grad_at(Momentum k) const {
  return grad ? grad(k) : finite_difference_grad(h, k);
}

CMatrix pauli_dot(const DVector& d) {
  CMatrix m(2, 2);
  m << d.z, cplx(d.x, -d.y), cplx(d.x, d.y), -d.z;
  return m;
}

namespace {

double sgn(double x) { return (x > 0) - (x < 0); }

// window spanning three decades either side of the model's length scales
Domain plane_window(std::vector<double> scales) {
  std::erase_if(scales, [](double s) { return !(s > 0.0) || !std::isfinite(s); });
  if (scales.empty()) scales.push_back(1.0);
  const auto [lo, hi] = std::minmax_element(scales.begin(), scales.end());
  return Domain::plane(1e-3 * *lo, 1e3 * *hi);
}

}  // namespace

TwoBandModel rashba_dresselhaus(double lambda, double beta, double h0) {
  TwoBandModel m;
  m.name = "rashba_dresselhaus";
  m.params = {{"lambda", lambda}, {"beta", beta}, {"h0", h0}};
  m.d = [=](Momentum k) {
    return DVector{lambda * k.ky - beta * k.kx, -lambda * k.kx + beta * k.ky, h0};
  };
  m.d_partials = [=](Momentum) {
    return DPartials{{-beta, -lambda, 0.0}, {lambda, beta, 0.0}};
  };
  const double c = std::max(std::abs(lambda), std::abs(beta));
  m.domain = plane_window({c > 0 ? std::abs(h0) / c : 1.0});
  return m;
}

TwoBandModel bi2se3_valley(double vF, double delta0, double B) {
  TwoBandModel m;
  m.name = "bi2se3_valley";
  m.params = {{"vF", vF}, {"delta0", delta0}, {"B", B}};
  m.d = [=](Momentum k) {
    return DVector{vF * k.ky, -vF * k.kx, 0.5 * delta0 - B * (k.kx * k.kx + k.ky * k.ky)};
  };
  m.d_partials = [=](Momentum k) {
    return DPartials{{0.0, -vF, -2 * B * k.kx}, {vF, 0.0, -2 * B * k.ky}};
  };
  const double half = 0.5 * std::abs(delta0);
  std::vector<double> scales;
  if (vF != 0) scales.push_back(half / std::abs(vF));
  if (B != 0) {
    scales.push_back(std::abs(vF / B));
    scales.push_back(std::sqrt(half / std::abs(B)));
  }
  m.domain = plane_window(scales);
  return m;
}

TwoBandModel magnetic_lattice(double ta, double delta, int p, int q, int l, int mm) {
  if (q == 0) throw ValidationError("magnetic_lattice: q must be nonzero");
  TwoBandModel m;
  m.name = "magnetic_lattice";
  m.params = {{"ta", ta}, {"delta", delta}, {"p", double(p)}, {"q", double(q)},
              {"l", double(l)}, {"m", double(mm)}};
  const double shift = 2 * pi * double(p) / double(q) * double(mm);
  m.d = [=](Momentum k) {
    return DVector{delta * std::cos(k.ky * l), delta * std::sin(k.ky * l),
                   2 * ta * std::cos(k.kx + shift)};
  };
  m.d_partials = [=](Momentum k) {
    return DPartials{{0.0, 0.0, -2 * ta * std::sin(k.kx + shift)},
                     {-delta * l * std::sin(k.ky * l), delta * l * std::cos(k.ky * l), 0.0}};
  };
  m.domain = Domain::torus(2 * pi, 2 * pi);
  Domain zone = Domain::torus(2 * pi / std::abs(q), 2 * pi);
  zone.periodic = std::abs(q) == 1;
  m.hall_zone = zone;
  return m;
}

TwoBandModel qwz_lattice(double mass) {
  TwoBandModel m;
  m.name = "qwz_lattice";
  m.params = {{"mass", mass}};
  m.d = [=](Momentum k) {
    return DVector{std::sin(k.kx), std::sin(k.ky), mass + std::cos(k.kx) + std::cos(k.ky)};
  };
  m.d_partials = [](Momentum k) {
    return DPartials{{std::cos(k.kx), 0.0, -std::sin(k.kx)}, {0.0, std::cos(k.ky), -std::sin(k.ky)}};
  };
  m.domain = Domain::torus(2 * pi, 2 * pi);
  return m;
}

namespace {

double term_value(const Term& t, Momentum k) {
  if (t.kind == "const") return t.coef;
  if (t.kind == "cos") return t.coef * std::cos(t.a * k.kx + t.b * k.ky);
  if (t.kind == "sin") return t.coef * std::sin(t.a * k.kx + t.b * k.ky);
  return t.coef * std::pow(k.kx, t.a) * std::pow(k.ky, t.b);  // poly
}

std::array<double, 2> term_grad(const Term& t, Momentum k) {
  if (t.kind == "const") return {0.0, 0.0};
  if (t.kind == "cos" || t.kind == "sin") {
    const double arg = t.a * k.kx + t.b * k.ky;
    const double dv = t.kind == "cos" ? -t.coef * std::sin(arg) : t.coef * std::cos(arg);
    return {t.a * dv, t.b * dv};
  }
  const double gx = t.a == 0 ? 0.0 : t.coef * t.a * std::pow(k.kx, t.a - 1) * std::pow(k.ky, t.b);
  const double gy = t.b == 0 ? 0.0 : t.coef * t.b * std::pow(k.kx, t.a) * std::pow(k.ky, t.b - 1);
  return {gx, gy};
}

void check_term(const Term& t) {
  if (t.kind != "const" && t.kind != "cos" && t.kind != "sin" && t.kind != "poly")
    throw ValidationError("custom model: unknown term kind '" + t.kind + "'");
  if (t.kind == "poly" && (t.a < 0 || t.b < 0 || t.a != std::floor(t.a) || t.b != std::floor(t.b)))
    throw ValidationError("custom model: poly exponents must be nonnegative integers");
}

}  // namespace

TwoBandModel custom_two_band(std::string name, std::array<std::vector<Term>, 3> d_terms,
                             std::vector<Term> offset_terms, Domain domain) {
  for (const auto& list : d_terms)
    for (const auto& t : list) check_term(t);
  for (const auto& t : offset_terms) check_term(t);
  TwoBandModel m;
  m.name = std::move(name);
  auto sum = [](const std::vector<Term>& ts, Momentum k) {
    double s = 0.0;
    for (const auto& t : ts) s += term_value(t, k);
    return s;
  };
  auto grad = [](const std::vector<Term>& ts, Momentum k) {
    std::array<double, 2> g{0.0, 0.0};
    for (const auto& t : ts) {
      const auto tg = term_grad(t, k);
      g[0] += tg[0];
      g[1] += tg[1];
    }
    return g;
  };
  m.d = [=](Momentum k) { return DVector{sum(d_terms[0], k), sum(d_terms[1], k), sum(d_terms[2], k)}; };
  m.d_partials = [=](Momentum k) {
    const auto gx = grad(d_terms[0], k), gy = grad(d_terms[1], k), gz = grad(d_terms[2], k);
    return DPartials{{gx[0], gy[0], gz[0]}, {gx[1], gy[1], gz[1]}};
  };
  if (!offset_terms.empty()) {
    m.offset = [=](Momentum k) { return sum(offset_terms, k); };
    m.offset_grad = [=](Momentum k) { return grad(offset_terms, k); };
  }
  m.domain = domain;
  return m;
}

namespace {

std::array<CMatrix, 3> spin_one_matrices() {
  const double r = 1.0 / std::sqrt(2.0);
  CMatrix sx = CMatrix::Zero(3, 3), sy = CMatrix::Zero(3, 3), sz = CMatrix::Zero(3, 3);
  sx(0, 1) = sx(1, 0) = sx(1, 2) = sx(2, 1) = r;
  sy(0, 1) = sy(1, 2) = cplx(0, -r);
  sy(1, 0) = sy(2, 1) = cplx(0, r);
  sz(0, 0) = 1;
  sz(2, 2) = -1;
  return {sx, sy, sz};
}

CMatrix dot(const std::array<CMatrix, 3>& s, const DVector& d) { return d.x * s[0] + d.y * s[1] + d.z * s[2]; }

}  // namespace

BandModel spin_one_lift(const TwoBandModel& m) {
  const auto s = spin_one_matrices();
  BandModel b;
  b.name = m.name + "_spin_one";
  b.params = m.params;
  b.dim = 3;
  b.h = [m, s](Momentum k) {
    return CMatrix(dot(s, m.d_at(k)) + m.offset_at(k) * CMatrix::Identity(3, 3));
  };
  b.grad = [m, s](Momentum k) {
    const auto p = m.partials_at(k);
    const auto g = m.offset_grad_at(k);
    const CMatrix id = CMatrix::Identity(3, 3);
    return HamiltonianGrad{dot(s, p.dkx) + g[0] * id, dot(s, p.dky) + g[1] * id};
  };
  b.domain = m.domain;
  b.hall_zone = m.hall_zone;
  if (!m.domain.is_torus()) b.at_infinity = dot(s, infinity_direction(m));
  return b;
}

BandModel as_band_model(const TwoBandModel& m) {
  BandModel b;
  b.name = m.name;
  b.params = m.params;
  b.dim = 2;
  b.h = [m](Momentum k) { return CMatrix(pauli_dot(m.d_at(k)) + m.offset_at(k) * CMatrix::Identity(2, 2)); };
  b.grad = [m](Momentum k) {
    const auto p = m.partials_at(k);
    const auto g = m.offset_grad_at(k);
    const CMatrix id = CMatrix::Identity(2, 2);
    return HamiltonianGrad{pauli_dot(p.dkx) + g[0] * id, pauli_dot(p.dky) + g[1] * id};
  };
  b.domain = m.domain;
  b.hall_zone = m.hall_zone;
  if (!m.domain.is_torus()) b.at_infinity = pauli_dot(infinity_direction(m));
  return b;
}

AngleField angles_of(const DVector& d) {
  const double e1 = d.norm();
  if (!(e1 >= 1e-12)) {
    std::ostringstream os;
    os << "band touching: |d| = " << e1;
    throw DegeneratePoint(os.str());
  }
  const double delta = d.inplane();
  AngleField a;
  a.E1 = e1;
  a.theta = std::atan2(delta, d.z);
  a.phi = delta < 1e-12 * std::max(1.0, e1) ? 0.0 : std::atan2(d.y, d.x);
  return a;
}

AngleField angles(const TwoBandModel& model, Momentum k) { return angles_of(model.d_at(k)); }

AngleGradient angle_gradient(const TwoBandModel& model, Momentum k) {
  const DVector d = model.d_at(k);
  const DPartials p = model.partials_at(k);
  const double e2 = d.x * d.x + d.y * d.y + d.z * d.z;
  if (!(e2 >= 1e-24)) throw DegeneratePoint("band touching in angle gradient");
  const double delta2 = d.x * d.x + d.y * d.y;
  AngleGradient g;
  if (delta2 < 1e-300) return g;  // pole: both angle fields are stationary by convention
  const double delta = std::sqrt(delta2);
  auto dtheta = [&](const DVector& dd) {
    return (d.z * (d.x * dd.x + d.y * dd.y) / delta - delta * dd.z) / e2;
  };
  auto dphi = [&](const DVector& dd) { return (d.x * dd.y - d.y * dd.x) / delta2; };
  g.theta_x = dtheta(p.dkx);
  g.theta_y = dtheta(p.dky);
  g.phi_x = dphi(p.dkx);
  g.phi_y = dphi(p.dky);
  return g;
}

CMatrix angle_spinors(const AngleField& a) {
  const double c = std::cos(0.5 * a.theta), s = std::sin(0.5 * a.theta);
  const cplx ph = std::polar(1.0, -a.phi);
  CMatrix u(2, 2);
  u << c * ph, -s * ph, s, c;
  return u;
}

HermitianMatrix hamiltonian_at(const TwoBandModel& model, Momentum k) {
  return HermitianMatrix(pauli_dot(model.d_at(k)) + model.offset_at(k) * CMatrix::Identity(2, 2));
}

HermitianMatrix hamiltonian_at(const BandModel& model, Momentum k) { return model.hamiltonian_at(k); }

HermitianMatrix hamiltonian_at(const Model& model, Momentum k) {
  return std::visit([&](const auto& m) { return hamiltonian_at(m, k); }, model);
}

HamiltonianGrad hamiltonian_grad(const TwoBandModel& model, Momentum k) {
  const auto p = model.partials_at(k);
  const auto g = model.offset_grad_at(k);
  const CMatrix id = CMatrix::Identity(2, 2);
  return {pauli_dot(p.dkx) + g[0] * id, pauli_dot(p.dky) + g[1] * id};
}

HamiltonianGrad hamiltonian_grad(const Model& model, Momentum k) {
  return std::visit(
      [&](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, TwoBandModel>)
          return hamiltonian_grad(m, k);
        else
          return m.grad_at(k);
      },
      model);
}

int band_count(const Model& model) {
  return std::visit(
      [](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, TwoBandModel>)
          return 2;
        else
          return m.dim;
      },
      model);
}

const Domain& model_domain(const Model& model) {
  return std::visit([](const auto& m) -> const Domain& { return m.domain; }, model);
}

const Domain& hall_domain(const Model& model) {
  return std::visit([](const auto& m) -> const Domain& { return m.zone(); }, model);
}

const std::string& model_name(const Model& model) {
  return std::visit([](const auto& m) -> const std::string& { return m.name; }, model);
}

const Params& model_params(const Model& model) {
  return std::visit([](const auto& m) -> const Params& { return m.params; }, model);
}

DVector infinity_direction(const TwoBandModel& model) {
  if (model.domain.is_torus()) throw ValidationError("infinity_direction: model is not on the plane");
  // d_z dominating far out on every ray
  bool dominated = true;
  double pole = 0.0;
  for (double radius : {1e4 * model.domain.k_max, 1e5 * model.domain.k_max}) {
    for (int j = 0; j < 16; ++j) {
      const double t = 2 * pi * j / 16.0;
      const DVector d = model.d_at({radius * std::cos(t), radius * std::sin(t)});
      const double n = d.norm();
      if (!(n > 0) || std::abs(d.z) < 0.999 * n || (pole != 0 && sgn(d.z) != pole)) {
        dominated = false;
        break;
      }
      pole = sgn(d.z);
    }
    if (!dominated) break;
  }
  if (dominated) return {0.0, 0.0, pole};
  const double z0 = model.d_at({0.0, 0.0}).z;
  if (z0 == 0.0)
    throw ValidationError("infinity_direction: no limiting direction and d_z(0) = 0");
  return {0.0, 0.0, -sgn(z0)};
}

CMatrix infinity_hamiltonian(const Model& model) {
  if (const auto* t = std::get_if<TwoBandModel>(&model)) return pauli_dot(infinity_direction(*t));
  const auto& b = std::get<BandModel>(model);
  if (!b.at_infinity) throw ValidationError("model " + b.name + " declares no point at infinity");
  return *b.at_infinity;
}

}  // namespace openhall
