#include <doctest.h>

#include <cmath>
#include <numbers>

#include "openhall/errors.hpp"
#include "openhall/response.hpp"

using namespace openhall;
using std::numbers::ln2;
using std::numbers::pi;

namespace {

// scipy dblquad of the (theta, phi) integrands, tests/oracles/rashba_closed_forms.py
constexpr double kRashbaDs1Beta10H5 = -0.004325784346601117;
constexpr double kRashbaDs1Beta30H5 = -0.015006157557973666;
constexpr double kRashbaDs1Beta10H2 = -0.010814460865901434;

BZGrid plane_grid(const Model& m) { return BZGrid::for_domain(model_domain(m), 64); }

}  // namespace

TEST_SUITE("response") {
  TEST_CASE("band frame is ascending with the velocity identity") {
    const Model m = rashba_dresselhaus(23, 10, 5);
    const BandFrame f = band_frame(m, {0.2, 0.1});
    CHECK(f.energies(0) < f.energies(1));
    const HamiltonianGrad g = hamiltonian_grad(m, {0.2, 0.1});
    CHECK((f.basis.adjoint() * g.dx * f.basis - f.vx).norm() < 1e-12);
  }

  TEST_CASE("band frame rejects a closed gap") {
    CHECK_THROWS_AS(band_frame(Model{bi2se3_valley(1, 0, 1)}, {0.0, 0.0}), DegeneratePoint);
  }

  TEST_CASE("H prime is hermitian with an empty diagonal") {
    const Model m = magnetic_lattice(1, 0.5, 1, 4, 1, 1);
    const CMatrix hp = perturbation_hprime(m, Momentum{0.3, 0.2}, {1.0}).matrix();
    CHECK(std::abs(hp(0, 0)) == 0.0);
    CHECK(std::abs(hp(1, 1)) == 0.0);
    CHECK(std::abs(hp(0, 1) - std::conj(hp(1, 0))) < 1e-15);
  }

  TEST_CASE("rashba open-system conductivity against the quadrature oracle") {
    struct Case {
      double beta, h0, sigma0, ds1;
    };
    for (const Case c : {Case{10, 5, ln2 / 2, kRashbaDs1Beta10H5}, Case{30, 5, -ln2 / 2, kRashbaDs1Beta30H5},
                         Case{10, 2, ln2 / 2, kRashbaDs1Beta10H2}}) {
      const TwoBandModel m = rashba_dresselhaus(23, c.beta, c.h0);
      const ConductivityBreakdown b = hall_two_band_spin(m, 0.1, plane_grid(m));
      CHECK(b.sigma0 == doctest::Approx(c.sigma0).epsilon(1e-6));
      CHECK(b.dsigma1 == doctest::Approx(c.ds1).epsilon(1e-5));
      CHECK(b.dsigma2 == 0.0);
      CHECK(b.converged);
    }
  }

  TEST_CASE("spin route of the general integrator agrees to first order") {
    const TwoBandModel m = rashba_dresselhaus(23, 10, 5);
    const double gamma = 0.1;
    const ConductivityBreakdown closed = hall_two_band_spin(m, gamma, plane_grid(m));
    const ConductivityBreakdown general = hall_conductivity_general(m, spin_lowering(gamma), {1.0}, plane_grid(m));
    CHECK(general.sigma0 == doctest::Approx(closed.sigma0).epsilon(1e-6));
    CHECK(general.dsigma1 == doctest::Approx(closed.dsigma1).epsilon(1e-4));
    CHECK(std::abs(general.dsigma2) < 10 * gamma * std::abs(general.dsigma1));
  }

  TEST_CASE("bi2se3 numeric values and the gamma term") {
    for (auto [B, D] : {std::pair{1.0, 1.0}, std::pair{0.0, 1.0}, std::pair{1.0, 0.0}}) {
      const TwoBandModel m = bi2se3_valley(1, D, B);
      const ConductivityBreakdown b = hall_two_band_spin(m, 0.1, plane_grid(m));
      CHECK(std::abs(std::abs(b.sigma0) - std::abs(bi2se3_analytic(B, D))) < 2e-3);
      CHECK(std::abs(b.dsigma1) < 1e-6);
    }
    CHECK(bi2se3_analytic(1, 1) == 0.0);
    CHECK(bi2se3_analytic(0, 1) == doctest::Approx(-ln2 / 2));
    CHECK(bi2se3_analytic(1, 0) == doctest::Approx(ln2 / 2));
  }

  TEST_CASE("bi2se3 with B = 0 is rashba with beta = 0") {
    // same d-vector, so the same sign; the quoted analytic value has the opposite one
    const TwoBandModel a = bi2se3_valley(23, 2, 0);
    const TwoBandModel r = rashba_dresselhaus(23, 0, 1);
    const double sa = hall_two_band_spin(a, 0.1, plane_grid(a)).sigma0;
    const double sr = hall_two_band_spin(r, 0.1, plane_grid(r)).sigma0;
    CHECK(sa == doctest::Approx(sr).epsilon(1e-6));
    CHECK(sa > 0.0);
  }

  TEST_CASE("magnetic lattice: no first-order correction, closed form zone value") {
    const TwoBandModel m = magnetic_lattice(1, 0.5, 1, 4, 1, 1);
    const BZGrid zone = BZGrid::for_domain(m.zone(), 64);
    const ConductivityBreakdown b = hall_two_band_spin(m, 0.1, zone);
    CHECK(std::abs(b.dsigma1) < 1e-10);
    const ConvergenceReport l = lattice_hall(m, zone);
    CHECK(b.sigma0 == doctest::Approx(l.scalar()).epsilon(1e-6));
    CHECK(l.scalar() == doctest::Approx(-0.331647).epsilon(1e-5));
  }

  TEST_CASE("chern numbers") {
    const int topological = chern_number(Model{qwz_lattice(-1)}, 0).chern;
    CHECK(std::abs(topological) == 1);
    CHECK(chern_number(Model{qwz_lattice(1)}, 0).chern == -topological);
    CHECK(chern_number(Model{qwz_lattice(3)}, 0).chern == 0);
    CHECK(chern_number(Model{rashba_dresselhaus(23, 10, 5)}, 0).chern == 1);
    CHECK(chern_number(Model{rashba_dresselhaus(23, 30, 5)}, 0).chern == -1);
    CHECK(chern_number(Model{magnetic_lattice(1, 0.5, 1, 4, 1, 1)}, 0).chern == 0);
  }

  TEST_CASE("bands of a model sum to zero chern") {
    const Model m = spin_one_lift(qwz_lattice(-1));
    int total = 0;
    for (int b = 0; b < 3; ++b) total += chern_number(m, b).chern;
    CHECK(total == 0);
  }

  TEST_CASE("closed single band conductivity is the chern number on a torus") {
    const Model m = qwz_lattice(-1);
    const BZGrid g = BZGrid::for_domain(model_domain(m), 64);
    const ConductivityBreakdown b = hall_conductivity_general(m, single_steady_band(0, {0.0, 0.0}), {1.0}, g);
    CHECK(b.sigma0 == doctest::Approx(chern_number(m, 0).chern).epsilon(1e-4));
    CHECK(b.dsigma1 == 0.0);
    CHECK(b.dsigma2 == 0.0);
  }

  TEST_CASE("berry curvature integrates to the chern number") {
    const Model m = qwz_lattice(1);
    const BZGrid g = BZGrid::for_domain(model_domain(m), 64);
    const ConvergenceReport r = integrate([&](Momentum k) { return berry_curvature(band_frame(m, k), 0); }, g);
    CHECK(std::abs(std::abs(r.scalar()) - 1.0) < 1e-4);
  }

  TEST_CASE("chern value and rate") {
    const Model m = qwz_lattice(-1);
    const CurvatureField f = curvature_field(m, 0, BZGrid::for_domain(model_domain(m), 32));
    const double c = chern_number(m, 0).chern;
    std::vector<double> w(f.points.size(), 1.0);
    CHECK(chern_value(w, f) == doctest::Approx(c).epsilon(1e-3));
    ConductivityBreakdown b = make_breakdown(c, 0.0, 0.0);
    CHECK(chern_rate(b) == c);
  }

  TEST_CASE("gauge invariance of the integrand") {
    const Model m = spin_one_lift(rashba_dresselhaus(23, 10, 5));
    const DissipatorSpec spec = single_steady_band(0, {0.0, 0.1, 0.2});
    const BandFrame f = band_frame(m, {0.2, -0.3});
    const auto a = hall_integrand(m, spec, f);
    const auto b = hall_integrand(m, spec, rephased(f, {0.3, -1.2, 2.5}));
    const double scale = std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2])});
    for (int i = 0; i < 3; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10 * scale);
  }

  TEST_CASE("lattice hall rejects a closed gap") {
    CHECK_THROWS_AS(lattice_hall(magnetic_lattice(1, 0.0, 1, 4, 1, 1),
                                 BZGrid::for_domain(magnetic_lattice(1, 0.0, 1, 4, 1, 1).zone(), 16)),
                    DegeneratePoint);
  }
}
