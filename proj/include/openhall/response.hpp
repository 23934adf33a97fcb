#pragma once

#include <optional>
#include <string>
#include <vector>

#include "openhall/algebra.hpp"
#include "openhall/lindblad.hpp"
#include "openhall/model.hpp"
#include "openhall/quadrature.hpp"

namespace openhall {

struct FieldConfig {
  double Ex = 1.0;
};

/// Band structure at one k: ascending energies, band states (columns, lab frame) and
/// the Hamiltonian gradient in that basis. Two-band models use the (theta, phi) spinors
/// ordered (lower, upper); N-band models use the eigensolver gauge.
struct BandFrame {
  Momentum k;
  RVector energies;
  CMatrix basis;
  CMatrix vx, vy;  // basis^+ dH/dk basis
  std::optional<AngleField> angles;  // two-band models only
};

BandFrame band_frame(const Model& model, Momentum k, double gap_tol = 1e-9);
/// Same frame with every band state multiplied by the given phases (gauge tests).
BandFrame rephased(const BandFrame& f, const std::vector<double>& phases);

enum class HprimeDiagonal { Exclude, Connection };

/// H'_{mn} = i Ex <m|dH/dkx|n> / (eps_n - eps_m) off the diagonal, in the frame basis.
/// With `Connection` the diagonal holds i Ex <m|d_kx m> of the frame gauge.
HermitianMatrix perturbation_hprime(const Model& model, const BandFrame& frame, FieldConfig field,
                                    HprimeDiagonal diag = HprimeDiagonal::Exclude);
HermitianMatrix perturbation_hprime(const Model& model, Momentum k, FieldConfig field,
                                    HprimeDiagonal diag = HprimeDiagonal::Exclude);

enum class FirstOrderMethod { ClosedForm, General };

struct SteadyStateK {
  Momentum k;
  RVector energies;
  CMatrix basis;
  CMatrix order0;  // band basis
  CMatrix order1;  // band basis, proportional to Ex
  double Ex = 0.0;
};

SteadyStateK steady_state_at(const Model& model, const DissipatorSpec& spec, Momentum k, FieldConfig field,
                             FirstOrderMethod method = FirstOrderMethod::ClosedForm,
                             HprimeDiagonal diag = HprimeDiagonal::Exclude);
SteadyStateK steady_state_at(const Model& model, const DissipatorSpec& spec, const BandFrame& frame,
                             FieldConfig field, FirstOrderMethod method = FirstOrderMethod::ClosedForm,
                             HprimeDiagonal diag = HprimeDiagonal::Exclude);

struct Velocity {
  double zero_field = 0.0;   // from order0, subtracted
  double first_order = 0.0;  // from the off-diagonal part of order1
  double response() const { return first_order; }
};

Velocity velocity_y_expectation(const SteadyStateK& state, const BandFrame& frame);

struct ConductivityBreakdown {
  double sigma0 = 0.0;
  double dsigma1 = 0.0;
  double dsigma2 = 0.0;
  double total = 0.0;
  double chern_rate = 0.0;
  // convergence metadata
  double error_estimate = 0.0;
  int levels = 0;
  std::size_t excluded = 0;
  bool converged = false;
  std::string grid;
  std::string method;
};

ConductivityBreakdown make_breakdown(double sigma0, double dsigma1, double dsigma2);
double chern_rate(const ConductivityBreakdown& b);

/// Per-k integrand of the three-part decomposition (sigma0, dsigma1, dsigma2), measure dk/2pi.
std::array<double, 3> hall_integrand(const Model& model, const DissipatorSpec& spec, const BandFrame& frame);
/// Berry curvature of band n via the gradient identity.
double berry_curvature(const BandFrame& frame, int band);

ConductivityBreakdown hall_conductivity_general(const Model& model, const DissipatorSpec& spec, FieldConfig field,
                                                const BZGrid& grid, const IntegrationOptions& opt = {});

/// Closed (theta, phi) forms for the spin dissipator with constant rate.
std::array<double, 2> hall_two_band_spin_integrand(const TwoBandModel& model, double gamma, Momentum k);
ConductivityBreakdown hall_two_band_spin(const TwoBandModel& model, double gamma, const BZGrid& grid,
                                         const IntegrationOptions& opt = {});

struct ChernResult {
  int chern = 0;
  double raw = 0.0;       // plaquette sum / 2pi
  double residual = 0.0;  // |raw - chern|
  double max_plaquette = 0.0;
  std::string grid;
};

/// Plaquette (link-overlap) Chern number of one band on a torus grid.
ChernResult chern_number_fhs(const Model& model, int band, const BZGrid& torus_grid);
/// Band states at the torus grid vertices (origin + (i hx, j hy)), row-major in i.
std::vector<CVector> torus_band_states(const Model& model, int band, const BZGrid& torus_grid);
/// Plaquette sum over vertex states laid out as by torus_band_states.
ChernResult chern_from_link_states(const std::vector<CVector>& states, int nx, int ny, std::string grid);
/// Plane models: log-polar mesh around k = 0 closed by the point at infinity.
ChernResult chern_number_compactified(const Model& model, int band, int n_radial, int n_angular,
                                      double k_min = 0.0, double k_max = 0.0);
/// Torus or compactified plane according to the model domain, doubling resolution
/// until the residual is below 1e-3 and every plaquette phase is below pi/2.
ChernResult chern_number(const Model& model, int band, int resolution = 64, int max_doublings = 4);

struct CurvatureField {
  BZGrid grid;
  int band = 0;
  std::vector<Sample> points;
  std::vector<double> curvature;  // at each sample
  std::vector<double> plaquette_flux;  // torus grids only, -arg of each plaquette product
};

CurvatureField curvature_field(const Model& model, int band, const BZGrid& grid);
double chern_value(const std::vector<double>& weights, const CurvatureField& field);

double bi2se3_analytic(double B, double delta0);

/// Magnetic-lattice closed form: integrand sin t cos t/(1+cos^2 t) dtheta/dkx dphi/dky.
ConvergenceReport lattice_hall(const TwoBandModel& model, const BZGrid& grid, const IntegrationOptions& opt = {});

}  // namespace openhall
