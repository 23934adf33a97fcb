#pragma once

#include <span>
#include <vector>

#include "openhall/response.hpp"

namespace openhall {

/// Exact steady state of L0 + field term at one k, in the frame's band basis.
struct OracleState {
  CMatrix rho;
  int null_multiplicity = 1;   // of the zero-field generator
  std::vector<int> anchored;   // bands whose populations were pinned to the zeroth-order weights
  double residual = 0.0;       // ||L vec rho||
};

/// Null-space steady state of the full Liouvillian with H = diag(eps) + H'(Ex).
/// When the zero-field generator has more than one stationary state, the populations of
/// its stationary band projectors are pinned to the weights of the dissipator family and
/// the state minimizing ||L vec rho|| is returned.
OracleState exact_steady_state_at_field(const Model& model, const DissipatorSpec& spec, const BandFrame& frame,
                                        double Ex, HprimeDiagonal diag = HprimeDiagonal::Exclude);
OracleState exact_steady_state_at_field(const Model& model, const DissipatorSpec& spec, Momentum k, double Ex,
                                        HprimeDiagonal diag = HprimeDiagonal::Exclude);

inline const std::vector<double> default_probe_fields{1e-3, 1e-4, 1e-5};

struct ResponseProbe {
  std::vector<double> fields;
  std::vector<double> remainders;  // ||rho(E) - rho0 - E rho1|| per field
  CMatrix rho0;
  CMatrix rho1;                    // per unit field
  double exponent = 0.0;           // log-log slope of the remainder, +inf when all are at the noise floor
};

/// rho1 from the central difference at the smallest field; remainder exponent from a
/// log-log fit. Needs >= 3 distinct positive fields spanning >= 2 decades.
/// Throws NonlinearResponse when the exponent is below `min_exponent`.
ResponseProbe extract_linear_response(std::span<const double> fields, std::span<const CMatrix> plus,
                                      std::span<const CMatrix> minus, const CMatrix& rho0,
                                      double min_exponent = 1.8);

ResponseProbe probe_response(const Model& model, const DissipatorSpec& spec, const BandFrame& frame,
                             std::span<const double> fields = default_probe_fields,
                             HprimeDiagonal diag = HprimeDiagonal::Exclude);

struct CurrentHall {
  double sigma = 0.0;              // from the full current Tr(rho v_y)
  double sigma_coherent = 0.0;     // interband (i != j) part only
  ConvergenceReport report;
};

/// sigma = -(1/Ex) int dk/2pi [vbar_y(Ex) - vbar_y(0)] from exact steady states at finite field.
CurrentHall hall_from_current(const Model& model, const DissipatorSpec& spec, FieldConfig field, const BZGrid& grid,
                              const IntegrationOptions& opt = {});

}  // namespace openhall
