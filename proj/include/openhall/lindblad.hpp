#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "openhall/algebra.hpp"
#include "openhall/model.hpp"

namespace openhall {

/// All bands decay into `target` through F_j = |target><j|.
struct SingleSteadyBand {
  int target = 0;
  std::vector<double> rates;  // per band; the target entry must be zero
};

/// Two dark bands fed by F_{aj} = |s_a><j|; populations of the dark pair are inputs.
struct TwoSteadyBands {
  int target1 = 0, target2 = 1;
  std::vector<double> rates1, rates2;  // per band; dark entries must be zero
  double weight1 = 0.5, weight2 = 0.5;
};

/// sigma_minus in the spin (orbital) basis, two-band models only.
struct SpinLowering {
  double gamma = 0.0;
  std::function<double(Momentum)> gamma_of_k;  // overrides gamma when set

  double at(Momentum k) const { return gamma_of_k ? gamma_of_k(k) : gamma; }
  bool constant() const { return !gamma_of_k; }
};

/// A jump coupling two different crystal momenta (never produced by the builtin
/// families; carried only so the momentum-conservation check has something to reject).
struct InterMomentumCoupling {
  Momentum from, to;
};

struct DissipatorSpec {
  std::variant<SingleSteadyBand, TwoSteadyBands, SpinLowering> kind;
  std::vector<InterMomentumCoupling> inter_k;

  std::string name() const;
  bool is_closed() const;  // every rate zero
};

DissipatorSpec single_steady_band(int target, std::vector<double> rates);
DissipatorSpec single_steady_band_uniform(int target, int bands, double rate);
DissipatorSpec two_steady_bands(int s1, int s2, std::vector<double> rates1, std::vector<double> rates2,
                                double w1 = 0.5, double w2 = 0.5);
DissipatorSpec two_steady_bands_uniform(int s1, int s2, int bands, double rate, double w1 = 0.5,
                                        double w2 = 0.5);
DissipatorSpec spin_lowering(double gamma);

/// Checks rates, weights and indices against the band count.
void validate_spec(const DissipatorSpec& spec, int bands);

/// Delta_{sn} table (N x N): nonzero only on rows of steady bands and non-dark columns.
Eigen::MatrixXd gap_shifts(const DissipatorSpec& spec, int bands);

/// Jump operators expressed in `basis` (columns are the band states in the lab frame).
/// `k` is used only for k-dependent spin rates.
std::vector<Jump> jump_operators(const DissipatorSpec& spec, const CMatrix& basis, Momentum k = {});

/// Zero-field state predicted by the dissipator family, in the band basis.
/// Spin lowering needs the band frame angles; pass them via `frame`.
CMatrix zeroth_order_state(const DissipatorSpec& spec, int bands, Momentum k,
                           const AngleField* frame = nullptr);

/// Closed-form zeroth-order state of the spin dissipator, ordering (upper, lower).
DensityMatrix steady0_two_band(double theta, double E1, double gamma);

struct Tau1Terms {
  cplx s1, s2, s3;
  double denominator = 0.0;  // 4 [gamma^2 + 3E1^2 + E1^2 cos 2theta]^2
  cplx tau12;
};

/// First-order coherence of the spin dissipator, ordering (upper, lower).
/// `flip_s3` negates the s3 term (used to check that the validation suite notices).
Tau1Terms tau1_spin_terms(double theta, double E1, double gamma, const CMatrix& hprime,
                          bool flip_s3 = false);
cplx tau1_spin_dissipator(double theta, double E1, double gamma, const CMatrix& hprime);
/// Off-diagonal 2x2 matrix [[0, tau12], [conj tau12, 0]].
CMatrix tau1_spin_matrix(double theta, double E1, double gamma, const CMatrix& hprime,
                         bool flip_s3 = false);

/// Weak-dissipation expansion of tau12: order 0 keeps the gamma-free term, order 1 all four terms.
cplx tau1_weak_expansion(double theta, double E1, double gamma, const CMatrix& hprime, int order = 1);

/// Exact coefficient alpha_sn = -H'_sn / (eps_n - eps_s + i Delta_sn).
cplx alpha1_single_steady_band(cplx hprime_sn, double gap_ns, double shift);
/// Large-gap expansion of the same coefficient, to second order in Delta/gap.
cplx alpha1_single_expansion(cplx hprime_sn, double gap_ns, double shift);

/// Full first-order matrix for one steady band, exact rational form.
CMatrix alpha1_single_matrix(const SingleSteadyBand& spec, const RVector& energies, const CMatrix& hprime);

/// First-order matrix for two steady bands. `exact` selects the rational form;
/// otherwise the large-gap expansion is returned.
CMatrix alpha1_two_steady_bands(const TwoSteadyBands& spec, const RVector& energies, const CMatrix& hprime,
                                bool exact = true);

/// Solves L0 rho1 = i [H', rho0] together with Tr rho1 = 0 in the band basis.
/// Null directions of L0 that only move dark-band populations are fixed by
/// minimum norm; any other null direction raises NonUniqueResponse.
CMatrix solve_first_order_general(const RVector& energies, const CMatrix& hprime,
                                  const std::vector<Jump>& jumps, const CMatrix& order0);
CMatrix solve_first_order_general(const RVector& energies, const CMatrix& basis, const CMatrix& hprime,
                                  const DissipatorSpec& spec, const CMatrix& order0, Momentum k = {});

struct MomentumReport {
  bool pass = true;
  std::vector<std::string> lines;
};

MomentumReport validate_momentum_conservation(const DissipatorSpec& spec, const Model& model);

}  // namespace openhall
