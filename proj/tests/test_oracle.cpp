#include <doctest.h>

#include <cmath>

#include "openhall/errors.hpp"
#include "openhall/oracle.hpp"
#include "openhall/response.hpp"

using namespace openhall;

TEST_SUITE("oracle") {
  TEST_CASE("zero field oracle is the zeroth order state") {
    const Model m = rashba_dresselhaus(23, 10, 5);
    const BandFrame f = band_frame(m, {0.2, 0.1});
    const OracleState s = exact_steady_state_at_field(m, spin_lowering(0.1), f, 0.0);
    const SteadyStateK c = steady_state_at(m, spin_lowering(0.1), f, {1.0});
    CHECK((s.rho - c.order0).norm() < 1e-9);
    CHECK(s.null_multiplicity == 1);
  }

  TEST_CASE("finite-field response matches the general solver") {
    const Model m = spin_one_lift(bi2se3_valley(2, 1, 0.5));
    for (const DissipatorSpec& spec :
         {single_steady_band(0, {0.0, 0.1, 0.17}), two_steady_bands(0, 1, {0, 0, 0.1}, {0, 0, 0.06}, 0.3, 0.7)}) {
      const BandFrame f = band_frame(m, {0.3, -0.2});
      const ResponseProbe p = probe_response(m, spec, f);
      const SteadyStateK g = steady_state_at(m, spec, f, {1.0}, FirstOrderMethod::General);
      CHECK((p.rho1 - g.order1).norm() < 1e-6 * std::max(1e-3, g.order1.norm()));
      CHECK(p.exponent >= 1.8);
    }
  }

  TEST_CASE("two steady bands pin the dark populations") {
    const Model m = spin_one_lift(rashba_dresselhaus(23, 10, 5));
    const DissipatorSpec spec = two_steady_bands(0, 1, {0, 0, 0.1}, {0, 0, 0.06}, 0.3, 0.7);
    const OracleState s = exact_steady_state_at_field(m, spec, Momentum{0.2, 0.1}, 0.0);
    CHECK(s.null_multiplicity > 1);
    CHECK(std::abs(s.rho(0, 0) - 0.3) < 1e-9);
    CHECK(std::abs(s.rho(1, 1) - 0.7) < 1e-9);
  }

  TEST_CASE("probe argument checks") {
    const CMatrix z = CMatrix::Zero(2, 2);
    const std::vector<CMatrix> three{z, z, z};
    CHECK_THROWS_AS(extract_linear_response(std::vector<double>{1e-3, 1e-4}, std::vector<CMatrix>{z, z},
                                            std::vector<CMatrix>{z, z}, z),
                    ValidationError);
    CHECK_THROWS_AS(extract_linear_response(std::vector<double>{1e-3, 5e-4, 2e-4}, three, three, z), ValidationError);
    CHECK_THROWS_AS(extract_linear_response(std::vector<double>{1e-3, -1e-4, 1e-5}, three, three, z), ValidationError);
  }

  TEST_CASE("linear remainder is rejected") {
    // rho(E) = rho0 + E rho1 + |E|^1.2 junk
    const std::vector<double> e{1e-2, 1e-3, 1e-4};
    CMatrix rho1 = CMatrix::Zero(2, 2), junk = CMatrix::Zero(2, 2);
    rho1(0, 1) = 1.0;
    junk(0, 0) = 1.0;
    std::vector<CMatrix> plus, minus;
    for (double x : e) {
      plus.push_back(x * rho1 + std::pow(x, 1.2) * junk);
      minus.push_back(-x * rho1 + std::pow(x, 1.2) * junk);
    }
    CHECK_THROWS_AS(extract_linear_response(e, plus, minus, CMatrix::Zero(2, 2)), NonlinearResponse);
  }

  TEST_CASE("hall from the current on a closed lattice") {
    const Model m = qwz_lattice(-1);
    const BZGrid g = BZGrid::for_domain(model_domain(m), 32);
    const CurrentHall h = hall_from_current(m, single_steady_band(0, {0.0, 0.05}), {1e-4}, g);
    const ConductivityBreakdown b = hall_conductivity_general(m, single_steady_band(0, {0.0, 0.05}), {1.0}, g);
    CHECK(h.sigma_coherent == doctest::Approx(b.total).epsilon(2e-3));
    CHECK_THROWS_AS(hall_from_current(m, single_steady_band(0, {0.0, 0.05}), {0.0}, g), ValidationError);
  }
}
