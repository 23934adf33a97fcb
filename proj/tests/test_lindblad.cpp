#include <doctest.h>

#include <cmath>

#include "openhall/errors.hpp"
#include "openhall/lindblad.hpp"
#include "openhall/response.hpp"

using namespace openhall;

TEST_SUITE("lindblad") {
  TEST_CASE("dissipator validation") {
    CHECK_THROWS_AS(validate_spec(single_steady_band(0, {0.0, -1.0}), 2), ValidationError);
    CHECK_THROWS_AS(validate_spec(single_steady_band(0, {0.5, 1.0}), 2), ValidationError);
    CHECK_THROWS_AS(validate_spec(single_steady_band(2, {0.0, 1.0}), 2), ValidationError);
    CHECK_THROWS_AS(validate_spec(two_steady_bands(0, 0, {0, 0, 1}, {0, 0, 1}), 3), ValidationError);
    CHECK_THROWS_AS(validate_spec(spin_lowering(0.1), 3), ValidationError);
    CHECK_NOTHROW(validate_spec(two_steady_bands(0, 1, {0, 0, 1}, {0, 0, 2}, 0.3, 0.7), 3));
  }

  TEST_CASE("spin zeroth order matches the null space") {
    const TwoBandModel m = rashba_dresselhaus(23, 10, 5);
    for (double gamma : {0.1, 3.0}) {
      const Momentum k{0.21, -0.13};
      const AngleField a = angles(m, k);
      const CMatrix s = angle_spinors(a);
      const CMatrix h = pauli_dot(m.d_at(k));
      CMatrix sm = CMatrix::Zero(2, 2);
      sm(1, 0) = 1.0;
      const std::vector<Jump> jumps{{sm, gamma}};
      const NullSpaceResult r = null_space_steady_state(build_liouvillian(HermitianMatrix(h), jumps));
      const CMatrix in_frame = s.adjoint() * r.state.matrix() * s;
      const DensityMatrix closed = steady0_two_band(a.theta, a.E1, gamma);
      CHECK((in_frame - closed.matrix()).norm() < 1e-9);
    }
  }

  TEST_CASE("single steady band zeroth order is the target projector") {
    const CMatrix rho = zeroth_order_state(single_steady_band(1, {0.2, 0.0, 0.3}), 3, {});
    CHECK(std::abs(rho(1, 1) - 1.0) < 1e-15);
    CHECK(std::abs(rho.trace() - 1.0) < 1e-15);
  }

  TEST_CASE("alpha1 exact and expansion agree to second order") {
    const cplx h{0.3, -0.2};
    const double gap = 4.0;
    for (double shift : {1e-1, 5e-2, 2.5e-2}) {
      const cplx exact = alpha1_single_steady_band(h, gap, shift);
      const cplx approx = alpha1_single_expansion(h, gap, shift);
      CHECK(std::abs(exact - approx) < 2 * std::abs(h) * std::pow(shift / gap, 3) / gap);
    }
    CHECK(alpha1_single_steady_band(h, gap, 0.0) == -h / gap);
  }

  TEST_CASE("general solver reproduces the single-band closed form") {
    const Model m = spin_one_lift(bi2se3_valley(2, 1, 0.5));
    const DissipatorSpec spec = single_steady_band(0, {0.0, 0.1, 0.17});
    const BandFrame f = band_frame(m, {0.3, 0.4});
    const SteadyStateK c = steady_state_at(m, spec, f, {1.0}, FirstOrderMethod::ClosedForm);
    const SteadyStateK g = steady_state_at(m, spec, f, {1.0}, FirstOrderMethod::General);
    CMatrix off = g.order1;
    for (int i = 0; i < 3; ++i) off(i, i) = 0.0;
    CHECK((off - c.order1).norm() < 1e-12 * std::max(1.0, c.order1.norm()));
  }

  TEST_CASE("general solver reproduces the two-band closed form") {
    const Model m = spin_one_lift(rashba_dresselhaus(23, 10, 5));
    const DissipatorSpec spec = two_steady_bands(0, 1, {0, 0, 0.1}, {0, 0, 0.06}, 0.3, 0.7);
    const BandFrame f = band_frame(m, {0.2, -0.1});
    const SteadyStateK c = steady_state_at(m, spec, f, {1.0}, FirstOrderMethod::ClosedForm);
    const SteadyStateK g = steady_state_at(m, spec, f, {1.0}, FirstOrderMethod::General);
    // the dark pair coherence is left to the general solver; compare the fed bands
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(g.order1(j, 2) - c.order1(j, 2)) < 1e-12 * std::max(1.0, c.order1.norm()));
      CHECK(std::abs(g.order1(2, j) - c.order1(2, j)) < 1e-12 * std::max(1.0, c.order1.norm()));
    }
  }

  TEST_CASE("tau1 closed form is first order in gamma") {
    const TwoBandModel m = rashba_dresselhaus(23, 10, 5);
    const BandFrame f = band_frame(m, {0.2, 0.1});
    CMatrix hp = CMatrix::Zero(2, 2);
    hp(0, 1) = cplx(0.3, 0.1);
    hp(1, 0) = std::conj(hp(0, 1));
    const AngleField a = *f.angles;
    double prev = 0;
    for (double g : {0.2, 0.1, 0.05}) {
      const double err = std::abs(tau1_spin_dissipator(a.theta, a.E1, g, hp) -
                                  tau1_weak_expansion(a.theta, a.E1, g, hp, 1));
      if (prev > 0) CHECK(prev / err > 3.5);  // O(gamma^2)
      prev = err;
    }
  }

  TEST_CASE("flipping s3 changes tau1") {
    CMatrix hp = CMatrix::Zero(2, 2);
    hp(0, 0) = 0.2;
    hp(1, 1) = -0.1;
    hp(0, 1) = cplx(0.3, 0.1);
    hp(1, 0) = std::conj(hp(0, 1));
    const Tau1Terms a = tau1_spin_terms(1.0, 3.0, 0.5, hp);
    const Tau1Terms b = tau1_spin_terms(1.0, 3.0, 0.5, hp, true);
    CHECK(std::abs(a.tau12 - b.tau12) > 1e-6);
  }

  TEST_CASE("momentum conservation check") {
    const Model m = rashba_dresselhaus(23, 10, 5);
    CHECK(validate_momentum_conservation(spin_lowering(0.1), m).pass);
    DissipatorSpec bad = spin_lowering(0.1);
    bad.inter_k.push_back({{0.0, 0.0}, {0.1, 0.0}});
    CHECK_FALSE(validate_momentum_conservation(bad, m).pass);
  }

  TEST_CASE("gap shift table") {
    const Eigen::MatrixXd d = gap_shifts(single_steady_band(0, {0.0, 0.2, 0.4}), 3);
    CHECK(d(0, 0) == 0.0);
    CHECK(d(0, 1) > 0.0);
    CHECK(d(1, 2) == 0.0);
  }
}
