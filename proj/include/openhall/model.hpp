#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "openhall/algebra.hpp"

namespace openhall {

struct Momentum {
  double kx = 0.0;
  double ky = 0.0;
};

inline Momentum operator-(Momentum k) { return {-k.kx, -k.ky}; }

struct DVector {
  double x = 0.0, y = 0.0, z = 0.0;
  double norm() const;
  double inplane() const;
};

/// d/dkx and d/dky of each component.
struct DPartials {
  DVector dkx, dky;
};

struct Domain {
  enum class Kind { Torus, Plane };
  Kind kind = Kind::Plane;
  // torus
  double period_x = 0.0, period_y = 0.0;
  double origin_x = 0.0, origin_y = 0.0;
  bool periodic = true;  // false for a sub-window of a larger period
  // plane (log-radial window)
  double k_min = 1e-3, k_max = 1e3;

  static Domain torus(double lx, double ly, double ox = 0.0, double oy = 0.0);
  static Domain plane(double k_min, double k_max);
  bool is_torus() const { return kind == Kind::Torus; }
};

using Params = std::vector<std::pair<std::string, double>>;

/// eps0(k) I + d(k).sigma
struct TwoBandModel {
  std::string name;
  Params params;
  std::function<DVector(Momentum)> d;
  std::function<double(Momentum)> offset;                     // may be empty (zero)
  std::function<DPartials(Momentum)> d_partials;              // may be empty (finite differences)
  std::function<std::array<double, 2>(Momentum)> offset_grad;  // may be empty
  Domain domain;
  std::optional<Domain> hall_zone;  // integration zone for Hall quantities if not the domain

  DVector d_at(Momentum k) const { return d(k); }
  double offset_at(Momentum k) const { return offset ? offset(k) : 0.0; }
  DPartials partials_at(Momentum k) const;
  std::array<double, 2> offset_grad_at(Momentum k) const;
  const Domain& zone() const { return hall_zone ? *hall_zone : domain; }
  double param(const std::string& key) const;
};

struct HamiltonianGrad {
  CMatrix dx, dy;
};

/// N x N matrix function of k.
struct BandModel {
  std::string name;
  Params params;
  int dim = 0;
  std::function<CMatrix(Momentum)> h;
  std::function<HamiltonianGrad(Momentum)> grad;  // may be empty (finite differences)
  Domain domain;
  std::optional<Domain> hall_zone;
  std::optional<CMatrix> at_infinity;  // compactification point for plane models

  HermitianMatrix hamiltonian_at(Momentum k) const;
  HamiltonianGrad grad_at(Momentum k) const;
  const Domain& zone() const { return hall_zone ? *hall_zone : domain; }
};

using Model = std::variant<TwoBandModel, BandModel>;

struct AngleField {
  double theta = 0.0;  // [0, pi]
  double phi = 0.0;    // (-pi, pi]
  double E1 = 0.0;
};

struct AngleGradient {
  double theta_x = 0.0, theta_y = 0.0;
  double phi_x = 0.0, phi_y = 0.0;
};

// builtin models
TwoBandModel rashba_dresselhaus(double lambda, double beta, double h0);
TwoBandModel bi2se3_valley(double vF, double delta0, double B);
TwoBandModel magnetic_lattice(double ta, double delta, int p, int q, int l, int m);
/// Qi-Wu-Zhang lattice model, d = (sin kx, sin ky, mass + cos kx + cos ky).
TwoBandModel qwz_lattice(double mass);
/// Two-band model from term tables; each term is coef * f(a kx + b ky) with f in
/// {cos, sin}, or coef * kx^a ky^b for poly.
struct Term {
  double coef = 0.0;
  std::string kind;  // cos | sin | poly | const
  double a = 0.0, b = 0.0;
};
TwoBandModel custom_two_band(std::string name, std::array<std::vector<Term>, 3> d_terms,
                             std::vector<Term> offset_terms, Domain domain);
/// Spin-one representation d.S of a two-band model (three bands).
BandModel spin_one_lift(const TwoBandModel& m);
BandModel as_band_model(const TwoBandModel& m);

AngleField angles(const TwoBandModel& model, Momentum k);
AngleField angles_of(const DVector& d);
AngleGradient angle_gradient(const TwoBandModel& model, Momentum k);

HermitianMatrix hamiltonian_at(const TwoBandModel& model, Momentum k);
HermitianMatrix hamiltonian_at(const BandModel& model, Momentum k);
HermitianMatrix hamiltonian_at(const Model& model, Momentum k);
HamiltonianGrad hamiltonian_grad(const TwoBandModel& model, Momentum k);
HamiltonianGrad hamiltonian_grad(const Model& model, Momentum k);

int band_count(const Model& model);
const Domain& model_domain(const Model& model);
const Domain& hall_domain(const Model& model);
const std::string& model_name(const Model& model);
const Params& model_params(const Model& model);

/// Pauli combination d.sigma (no offset).
CMatrix pauli_dot(const DVector& d);

/// Spinors in the (theta, phi) frame: columns (upper, lower),
/// upper = (cos(t/2) e^{-i phi}, sin(t/2)), lower = (-sin(t/2) e^{-i phi}, cos(t/2)).
CMatrix angle_spinors(const AngleField& a);

/// Direction of d at |k| -> infinity for plane models: the limiting pole when
/// d_z dominates, otherwise the pole opposite to d_z(0).
DVector infinity_direction(const TwoBandModel& model);
CMatrix infinity_hamiltonian(const Model& model);

/// Five-point central differences, step h.
DPartials finite_difference_partials(const std::function<DVector(Momentum)>& d, Momentum k,
                                     double h = 1e-4);
HamiltonianGrad finite_difference_grad(const std::function<CMatrix(Momentum)>& h, Momentum k,
                                       double step = 1e-4);

}  // namespace openhall
