#include "openhall/lindblad.hpp"

#include <cmath>
#include <sstream>

#include "openhall/errors.hpp"

namespace openhall {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_index(int idx, int bands, const char* what) {
  if (idx < 0 || idx >= bands) {
    std::ostringstream os;
    os << what << ": band index " << idx << " out of range [0, " << bands << ")";
    throw ValidationError(os.str());
  }
}

void check_rates(const std::vector<double>& rates, int bands, const char* what) {
  if (static_cast<int>(rates.size()) != bands) {
    std::ostringstream os;
    os << what << ": expected " << bands << " rates, got " << rates.size();
    throw ValidationError(os.str());
  }
  for (double r : rates)
    if (!(r >= 0.0) || !std::isfinite(r)) throw ValidationError(std::string(what) + ": negative or non-finite rate");
}

// |a><b| in an n-dimensional band basis
CMatrix unit(int n, int a, int b) {
  CMatrix m = CMatrix::Zero(n, n);
  m(a, b) = 1.0;
  return m;
}

CMatrix swap_order(const CMatrix& m) {
  CMatrix out(2, 2);
  out << m(1, 1), m(1, 0), m(0, 1), m(0, 0);
  return out;
}

}  // namespace

std::string DissipatorSpec::name() const {
  return std::visit(overloaded{[](const SingleSteadyBand&) { return std::string("single_band"); },
                               [](const TwoSteadyBands&) { return std::string("two_band"); },
                               [](const SpinLowering&) { return std::string("spin_lowering"); }},
                    kind);
}

bool DissipatorSpec::is_closed() const {
  auto zero = [](const std::vector<double>& r) {
    for (double x : r)
      if (x != 0.0) return false;
    return true;
  };
  return std::visit(overloaded{[&](const SingleSteadyBand& s) { return zero(s.rates); },
                               [&](const TwoSteadyBands& s) { return zero(s.rates1) && zero(s.rates2); },
                               [](const SpinLowering& s) { return s.constant() && s.gamma == 0.0; }},
                    kind);
}

DissipatorSpec single_steady_band(int target, std::vector<double> rates) {
  return DissipatorSpec{SingleSteadyBand{target, std::move(rates)}, {}};
}

DissipatorSpec single_steady_band_uniform(int target, int bands, double rate) {
  std::vector<double> r(static_cast<std::size_t>(bands), rate);
  if (target >= 0 && target < bands) r[static_cast<std::size_t>(target)] = 0.0;
  return single_steady_band(target, std::move(r));
}

DissipatorSpec two_steady_bands(int s1, int s2, std::vector<double> rates1, std::vector<double> rates2,
                                double w1, double w2) {
  return DissipatorSpec{TwoSteadyBands{s1, s2, std::move(rates1), std::move(rates2), w1, w2}, {}};
}

DissipatorSpec two_steady_bands_uniform(int s1, int s2, int bands, double rate, double w1, double w2) {
  std::vector<double> r(static_cast<std::size_t>(bands), rate);
  for (int s : {s1, s2})
    if (s >= 0 && s < bands) r[static_cast<std::size_t>(s)] = 0.0;
  return two_steady_bands(s1, s2, r, r, w1, w2);
}

DissipatorSpec spin_lowering(double gamma) { return DissipatorSpec{SpinLowering{gamma, {}}, {}}; }

void validate_spec(const DissipatorSpec& spec, int bands) {
  std::visit(
      overloaded{
          [&](const SingleSteadyBand& s) {
            check_index(s.target, bands, "single_band target");
            check_rates(s.rates, bands, "single_band");
            if (s.rates[static_cast<std::size_t>(s.target)] != 0.0)
              throw ValidationError("single_band: rate into the target band itself must be zero");
          },
          [&](const TwoSteadyBands& s) {
            check_index(s.target1, bands, "two_band target");
            check_index(s.target2, bands, "two_band target");
            if (s.target1 == s.target2) throw ValidationError("two_band: targets must differ");
            check_rates(s.rates1, bands, "two_band");
            check_rates(s.rates2, bands, "two_band");
            for (int t : {s.target1, s.target2})
              if (s.rates1[static_cast<std::size_t>(t)] != 0.0 || s.rates2[static_cast<std::size_t>(t)] != 0.0)
                throw ValidationError("two_band: jumps out of a steady band must have zero rate");
            if (!(s.weight1 >= 0.0) || !(s.weight2 >= 0.0) || std::abs(s.weight1 + s.weight2 - 1.0) > 1e-12)
              throw ValidationError("two_band: weights must be nonnegative and sum to 1");
          },
          [&](const SpinLowering& s) {
            if (bands != 2) throw ValidationError("spin_lowering: requires a two-band model");
            if (!(s.gamma >= 0.0) || !std::isfinite(s.gamma))
              throw ValidationError("spin_lowering: negative or non-finite rate");
          }},
      spec.kind);
}

Eigen::MatrixXd gap_shifts(const DissipatorSpec& spec, int bands) {
  validate_spec(spec, bands);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(bands, bands);
  std::visit(overloaded{[&](const SingleSteadyBand& s) {
                          for (int n = 0; n < bands; ++n)
                            if (n != s.target) d(s.target, n) = s.rates[static_cast<std::size_t>(n)];
                        },
                        [&](const TwoSteadyBands& s) {
                          for (int n = 0; n < bands; ++n) {
                            if (n == s.target1 || n == s.target2) continue;
                            const double v = s.rates1[static_cast<std::size_t>(n)] + s.rates2[static_cast<std::size_t>(n)];
                            d(s.target1, n) = v;
                            d(s.target2, n) = v;
                          }
                        },
                        [&](const SpinLowering&) {
                          throw ValidationError("gap_shifts: not defined for the spin dissipator");
                        }},
             spec.kind);
  return d;
}

std::vector<Jump> jump_operators(const DissipatorSpec& spec, const CMatrix& basis, Momentum k) {
  const int n = static_cast<int>(basis.cols());
  if (basis.rows() != n) throw ValidationError("jump_operators: basis must be square");
  validate_spec(spec, n);
  std::vector<Jump> out;
  std::visit(overloaded{[&](const SingleSteadyBand& s) {
                          for (int j = 0; j < n; ++j)
                            if (j != s.target) out.push_back({unit(n, s.target, j), s.rates[static_cast<std::size_t>(j)]});
                        },
                        [&](const TwoSteadyBands& s) {
                          for (int j = 0; j < n; ++j) {
                            if (j == s.target1 || j == s.target2) continue;
                            out.push_back({unit(n, s.target1, j), s.rates1[static_cast<std::size_t>(j)]});
                            out.push_back({unit(n, s.target2, j), s.rates2[static_cast<std::size_t>(j)]});
                          }
                        },
                        [&](const SpinLowering& s) {
                          CMatrix lower = CMatrix::Zero(2, 2);
                          lower(1, 0) = 1.0;
                          const double g = s.at(k);
                          if (!(g >= 0.0)) throw ValidationError("spin_lowering: negative rate at k");
                          out.push_back({basis.adjoint() * lower * basis, g});
                        }},
             spec.kind);
  return out;
}

DensityMatrix steady0_two_band(double theta, double E1, double gamma) {
  if (E1 == 0.0 && gamma == 0.0) throw DegeneratePoint("steady0_two_band: E1 = gamma = 0");
  const double e2 = E1 * E1;
  const double den = gamma * gamma + 3 * e2 + e2 * std::cos(2 * theta);
  const double s2 = std::sin(0.5 * theta);
  const double t11 = s2 * s2 * (gamma * gamma + 2 * e2 - 2 * e2 * std::cos(theta)) / den;
  const cplx t12 = gamma * cplx(gamma, -2 * E1) * std::sin(theta) / (2 * den);
  CMatrix t(2, 2);
  t << t11, t12, std::conj(t12), 1.0 - t11;
  return DensityMatrix(t);
}

CMatrix zeroth_order_state(const DissipatorSpec& spec, int bands, Momentum k, const AngleField* frame) {
  validate_spec(spec, bands);
  CMatrix rho = CMatrix::Zero(bands, bands);
  std::visit(overloaded{[&](const SingleSteadyBand& s) { rho(s.target, s.target) = 1.0; },
                        [&](const TwoSteadyBands& s) {
                          rho(s.target1, s.target1) = s.weight1;
                          rho(s.target2, s.target2) = s.weight2;
                        },
                        [&](const SpinLowering& s) {
                          if (!frame) throw ValidationError("zeroth_order_state: spin dissipator needs the angle frame");
                          rho = swap_order(steady0_two_band(frame->theta, frame->E1, s.at(k)).matrix());
                        }},
             spec.kind);
  return rho;
}

Tau1Terms tau1_spin_terms(double theta, double E1, double gamma, const CMatrix& h, bool flip_s3) {
  if (E1 == 0.0 && gamma == 0.0) throw DegeneratePoint("tau1_spin_dissipator: E1 = gamma = 0");
  if (h.rows() != 2 || h.cols() != 2) throw ValidationError("tau1_spin_dissipator: h' must be 2x2");
  const double c = std::cos(theta);
  const double g = gamma, e = E1;
  const cplx h12 = h(0, 1), h21 = h(1, 0);
  const cplx a(g, -2 * e);  // gamma - 2i E1
  Tau1Terms t;
  t.s1 = c * a * (-4.0 * I * g * g * h12 + g * e * (h12 + h21) - 14.0 * I * e * e * h12);
  t.s2 = e * std::cos(3 * theta) * a * (g * (h12 + h21) + 2.0 * I * e * h12);
  t.s3 = g * std::sin(theta) * (-g * g + 3.0 * I * g * e + 3 * e * e + e * std::cos(2 * theta) * cplx(e, g));
  if (flip_s3) t.s3 = -t.s3;
  const double d = g * g + 3 * e * e + e * e * std::cos(2 * theta);
  t.denominator = 4 * d * d;
  if (!(t.denominator > 0.0)) throw DegeneratePoint("tau1_spin_dissipator: vanishing denominator");
  t.tau12 = (t.s1 - t.s2 + 2.0 * I * t.s3 * (h(0, 0) - h(1, 1))) / t.denominator;
  return t;
}

cplx tau1_spin_dissipator(double theta, double E1, double gamma, const CMatrix& hprime) {
  return tau1_spin_terms(theta, E1, gamma, hprime).tau12;
}

CMatrix tau1_spin_matrix(double theta, double E1, double gamma, const CMatrix& hprime, bool flip_s3) {
  const cplx t = tau1_spin_terms(theta, E1, gamma, hprime, flip_s3).tau12;
  CMatrix m(2, 2);
  m << 0.0, t, std::conj(t), 0.0;
  return m;
}

cplx tau1_weak_expansion(double theta, double E1, double gamma, const CMatrix& h, int order) {
  if (!(E1 > 0.0)) throw DegeneratePoint("tau1_weak_expansion: E1 = 0");
  const double c = std::cos(theta), c3 = std::cos(3 * theta), s = std::sin(theta);
  const double q = 3 + std::cos(2 * theta);
  const double q2 = q * q;
  const cplx h12 = h(0, 1), h21 = h(1, 0);
  cplx t = -(7 * c + c3) / (E1 * q2) * h12;
  if (order >= 1) {
    const double den = 2 * E1 * E1 * q2;
    t += -I * gamma * (7 * c + c3) * h12 / den;
    t += I * gamma * (c3 - c) * (h12 + h21) / den;
    t += I * gamma * (3 * s + s * std::cos(2 * theta)) * (h(0, 0) - h(1, 1)) / den;
  }
  return t;
}

cplx alpha1_single_steady_band(cplx hprime_sn, double gap_ns, double shift) {
  if (gap_ns == 0.0 && shift == 0.0) throw DegeneratePoint("alpha1_single_steady_band: zero gap and zero rate");
  return -hprime_sn / cplx(gap_ns, shift);
}

cplx alpha1_single_expansion(cplx hprime_sn, double gap_ns, double shift) {
  if (gap_ns == 0.0) throw DegeneratePoint("alpha1_single_expansion: zero gap");
  const double r = shift / gap_ns;
  return -hprime_sn / gap_ns * cplx(1.0 - r * r, -r);
}

CMatrix alpha1_single_matrix(const SingleSteadyBand& spec, const RVector& energies, const CMatrix& hprime) {
  const int n = static_cast<int>(energies.size());
  validate_spec(DissipatorSpec{spec, {}}, n);
  CMatrix a = CMatrix::Zero(n, n);
  const int s = spec.target;
  for (int j = 0; j < n; ++j) {
    if (j == s) continue;
    const cplx v = alpha1_single_steady_band(hprime(s, j), energies(j) - energies(s), spec.rates[static_cast<std::size_t>(j)]);
    a(s, j) = v;
    a(j, s) = std::conj(v);
  }
  return a;
}

CMatrix alpha1_two_steady_bands(const TwoSteadyBands& spec, const RVector& energies, const CMatrix& hprime,
                                bool exact) {
  const int n = static_cast<int>(energies.size());
  const DissipatorSpec wrapped{spec, {}};
  const Eigen::MatrixXd shift = gap_shifts(wrapped, n);
  const int s1 = spec.target1, s2 = spec.target2;
  const double g12 = energies(s2) - energies(s1);
  if (g12 == 0.0) throw DegeneratePoint("alpha1_two_steady_bands: degenerate steady bands");
  CMatrix a = CMatrix::Zero(n, n);
  for (auto [s, w] : {std::pair{s1, spec.weight1}, std::pair{s2, spec.weight2}}) {
    for (int j = 0; j < n; ++j) {
      if (j == s1 || j == s2) continue;
      const double gap = energies(j) - energies(s);
      const cplx v = w * (exact ? alpha1_single_steady_band(hprime(s, j), gap, shift(s, j))
                                : alpha1_single_expansion(hprime(s, j), gap, shift(s, j)));
      a(s, j) = v;
      a(j, s) = std::conj(v);
    }
  }
  const cplx v = (spec.weight2 - spec.weight1) * hprime(s1, s2) / g12;
  a(s1, s2) = v;
  a(s2, s1) = std::conj(v);
  return a;
}

CMatrix solve_first_order_general(const RVector& energies, const CMatrix& hprime, const std::vector<Jump>& jumps,
                                  const CMatrix& order0) {
  const int n = static_cast<int>(energies.size());
  if (hprime.rows() != n || order0.rows() != n) throw ValidationError("solve_first_order_general: dimension mismatch");
  const HermitianMatrix h0(CMatrix(energies.cast<cplx>().asDiagonal()));
  const Superoperator l0 = build_liouvillian(h0, jumps);

  const CMatrix all_nulls = null_space(l0.matrix());
  // the trace row pins one null direction; of the traceless remainder, population-only
  // directions are harmless (minimum norm fixes them)
  CMatrix traces(1, all_nulls.cols());
  for (Eigen::Index c = 0; c < all_nulls.cols(); ++c) traces(0, c) = unvec(all_nulls.col(c), n).trace();
  const CMatrix nulls = traces.norm() > 1e-8 ? CMatrix(all_nulls * null_space(traces, 1e-8)) : all_nulls;
  double coherent = 0.0;
  for (Eigen::Index c = 0; c < nulls.cols(); ++c) {
    CMatrix m = unvec(nulls.col(c), n);
    m.diagonal().setZero();
    coherent = std::max(coherent, m.norm());
  }
  if (coherent > 1e-8) {
    std::ostringstream os;
    os << "solve_first_order_general: unperturbed generator has " << nulls.cols()
       << " null directions including coherences";
    throw NonUniqueResponse(os.str(), static_cast<int>(nulls.cols()));
  }

  const int n2 = n * n;
  CMatrix a(n2 + 1, n2);
  a.topRows(n2) = l0.matrix();
  a.row(n2) = vec(CMatrix::Identity(n, n)).transpose();
  CVector b(n2 + 1);
  b.head(n2) = vec(I * (hprime * order0 - order0 * hprime));
  b(n2) = 0.0;
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(a);
  cod.setThreshold(1e-11);
  const CVector x = cod.solve(b);
  const double scale = std::max({1.0, b.norm(), l0.matrix().cwiseAbs().maxCoeff() * x.norm()});
  if ((a * x - b).norm() > 1e-9 * scale)
    throw SolverError("solve_first_order_general: inconsistent first-order system");
  return hermitian_part(unvec(x, n));
}

CMatrix solve_first_order_general(const RVector& energies, const CMatrix& basis, const CMatrix& hprime,
                                  const DissipatorSpec& spec, const CMatrix& order0, Momentum k) {
  return solve_first_order_general(energies, hprime, jump_operators(spec, basis, k), order0);
}

MomentumReport validate_momentum_conservation(const DissipatorSpec& spec, const Model& model) {
  MomentumReport r;
  validate_spec(spec, band_count(model));
  r.lines.push_back("dissipator " + spec.name() + " on model " + model_name(model) +
                    ": every jump operator F_j is built per k-block and conserves crystalline momentum");
  for (const auto& c : spec.inter_k) {
    if (c.from.kx == c.to.kx && c.from.ky == c.to.ky) continue;
    r.pass = false;
    std::ostringstream os;
    os << "inter-momentum coupling (" << c.from.kx << ", " << c.from.ky << ") -> (" << c.to.kx << ", " << c.to.ky
       << ") breaks translation invariance";
    r.lines.push_back(os.str());
  }
  return r;
}

}  // namespace openhall
