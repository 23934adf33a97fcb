#include "openhall/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "openhall/errors.hpp"

namespace openhall {

namespace {

Superoperator generator(const BandFrame& frame, const CMatrix& hprime, const std::vector<Jump>& jumps) {
  CMatrix h = frame.energies.cast<cplx>().asDiagonal();
  h += hprime;
  return build_liouvillian(HermitianMatrix(h), jumps);
}

}  // namespace

OracleState exact_steady_state_at_field(const Model& model, const DissipatorSpec& spec, Momentum k, double Ex,
                                        HprimeDiagonal diag) {
  return exact_steady_state_at_field(model, spec, band_frame(model, k), Ex, diag);
}

OracleState exact_steady_state_at_field(const Model& model, const DissipatorSpec& spec, const BandFrame& frame,
                                        double Ex, HprimeDiagonal diag) {
  if (!std::isfinite(Ex)) throw ValidationError("exact_steady_state_at_field: non-finite field");
  const int n = static_cast<int>(frame.energies.size());
  validate_spec(spec, n);
  const std::vector<Jump> jumps = jump_operators(spec, frame.basis, frame.k);
  const Superoperator l0 = generator(frame, CMatrix::Zero(n, n), jumps);
  const CMatrix hp = perturbation_hprime(model, frame, FieldConfig{Ex}, diag).matrix();
  const Superoperator l = generator(frame, hp, jumps);

  OracleState out;
  out.null_multiplicity = static_cast<int>(null_space(l0.matrix()).cols());
  if (out.null_multiplicity <= 1) {
    const NullSpaceResult r = null_space_steady_state(l);
    out.rho = r.state.matrix();
    out.residual = r.residual;
    return out;
  }

  const AngleField* a = frame.angles ? &*frame.angles : nullptr;
  const CMatrix weights = zeroth_order_state(spec, n, frame.k, a);
  const double scale = std::max(1.0, l0.matrix().norm());
  for (int b = 0; b < n; ++b) {
    CMatrix proj = CMatrix::Zero(n, n);
    proj(b, b) = 1.0;
    if ((l0.matrix() * vec(proj)).norm() < 1e-9 * scale) out.anchored.push_back(b);
  }
  const auto rows = static_cast<Eigen::Index>(out.anchored.size()) + 1;
  CMatrix c = CMatrix::Zero(rows, n * n);
  CVector d = CVector::Zero(rows);
  for (int i = 0; i < n; ++i) c(0, i * n + i) = 1.0;
  d(0) = 1.0;
  for (std::size_t r = 0; r < out.anchored.size(); ++r) {
    const int b = out.anchored[r];
    c(static_cast<Eigen::Index>(r) + 1, b * n + b) = 1.0;
    d(static_cast<Eigen::Index>(r) + 1) = weights(b, b);
  }
  const CMatrix rho = hermitian_part(unvec(constrained_least_squares(l.matrix(), c, d), n));
  out.rho = rho;
  out.residual = (l.matrix() * vec(rho)).norm();
  return out;
}

ResponseProbe extract_linear_response(std::span<const double> fields, std::span<const CMatrix> plus,
                                      std::span<const CMatrix> minus, const CMatrix& rho0, double min_exponent) {
  if (fields.size() < 3) throw ValidationError("extract_linear_response: need at least 3 probe fields");
  if (plus.size() != fields.size() || minus.size() != fields.size())
    throw ValidationError("extract_linear_response: one state per field and sign expected");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::size_t smallest = 0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (!(fields[i] > 0.0) || !std::isfinite(fields[i]))
      throw ValidationError("extract_linear_response: probe fields must be positive and finite");
    if (fields[i] < lo) {
      lo = fields[i];
      smallest = i;
    }
    hi = std::max(hi, fields[i]);
  }
  if (hi < 100.0 * lo) throw ValidationError("extract_linear_response: probe fields must span two decades");

  ResponseProbe p;
  p.fields.assign(fields.begin(), fields.end());
  p.rho0 = rho0;
  p.rho1 = (plus[smallest] - minus[smallest]) / (2 * lo);
  const double floor = 1e-13 * std::max(1.0, rho0.norm());
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const double r = (plus[i] - rho0 - fields[i] * p.rho1).norm();
    p.remainders.push_back(r);
    if (r > floor * 100) {
      lx.push_back(std::log(fields[i]));
      ly.push_back(std::log(r));
    }
  }
  if (lx.size() < 2) {
    p.exponent = std::numeric_limits<double>::infinity();
    return p;
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= lx.size();
  my /= ly.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  p.exponent = sxx > 0 ? sxy / sxx : std::numeric_limits<double>::infinity();
  if (p.exponent < min_exponent) {
    std::ostringstream os;
    os << "remainder scales as E^" << p.exponent << " (need >= " << min_exponent << ")";
    throw NonlinearResponse(os.str(), p.exponent);
  }
  return p;
}

ResponseProbe probe_response(const Model& model, const DissipatorSpec& spec, const BandFrame& frame,
                             std::span<const double> fields, HprimeDiagonal diag) {
  std::vector<CMatrix> plus, minus;
  for (double e : fields) {
    plus.push_back(exact_steady_state_at_field(model, spec, frame, e, diag).rho);
    minus.push_back(exact_steady_state_at_field(model, spec, frame, -e, diag).rho);
  }
  const CMatrix rho0 = exact_steady_state_at_field(model, spec, frame, 0.0, diag).rho;
  return extract_linear_response(fields, plus, minus, rho0);
}

CurrentHall hall_from_current(const Model& model, const DissipatorSpec& spec, FieldConfig field, const BZGrid& grid,
                              const IntegrationOptions& opt) {
  if (field.Ex == 0.0 || !std::isfinite(field.Ex))
    throw ValidationError("hall_from_current: sigma needs a nonzero probe field Ex");
  validate_spec(spec, band_count(model));
  const auto f = [&](Momentum k, std::span<double> out) {
    const BandFrame frame = band_frame(model, k);
    const CMatrix on = exact_steady_state_at_field(model, spec, frame, field.Ex).rho;
    const CMatrix off = exact_steady_state_at_field(model, spec, frame, 0.0).rho;
    const CMatrix drho = on - off;
    cplx full = 0.0, coherent = 0.0;
    for (Eigen::Index i = 0; i < drho.rows(); ++i)
      for (Eigen::Index j = 0; j < drho.cols(); ++j) {
        const cplx t = drho(i, j) * frame.vy(j, i);
        full += t;
        if (i != j) coherent += t;
      }
    out[0] = -full.real() / field.Ex;
    out[1] = -coherent.real() / field.Ex;
  };
  CurrentHall h;
  h.report = integrate(f, 2, grid, opt);
  h.sigma = h.report.value[0];
  h.sigma_coherent = h.report.value[1];
  return h;
}

}  // namespace openhall
