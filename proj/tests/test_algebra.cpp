#include <doctest.h>

#include <cmath>
#include <random>

#include "openhall/algebra.hpp"
#include "openhall/errors.hpp"

using namespace openhall;

namespace {

CMatrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  return (a + a.adjoint()) / 2.0;
}

CMatrix sigma_minus() {
  CMatrix s = CMatrix::Zero(2, 2);
  s(1, 0) = 1.0;
  return s;
}

}  // namespace

TEST_SUITE("algebra") {
  TEST_CASE("hermitian matrix rejects non-hermitian input") {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 1) = 1.0;
    CHECK_THROWS_AS(HermitianMatrix{m}, ValidationError);
    m(1, 0) = 1.0;
    CHECK_NOTHROW(HermitianMatrix{m});
  }

  TEST_CASE("density matrix checks trace and positivity") {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = 0.5;
    CHECK_THROWS_AS(DensityMatrix{m}, ValidationError);
    m(1, 1) = 0.5;
    CHECK_NOTHROW(DensityMatrix{m});
    m(0, 0) = 1.5;
    m(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityMatrix{m}, ValidationError);
  }

  TEST_CASE("vec and unvec stack columns") {
    CMatrix m(2, 2);
    m << 1.0, 2.0, 3.0, 4.0;
    const CVector v = vec(m);
    CHECK(v(1).real() == 3.0);
    CHECK(v(2).real() == 2.0);
    CHECK((unvec(v, 2) - m).norm() == 0.0);
  }

  TEST_CASE("eigensystem is ascending and reconstructs h") {
    std::mt19937_64 rng(7);
    for (int n : {2, 3, 5}) {
      const CMatrix h = random_hermitian(n, rng);
      const Eigensystem es = hermitian_eigensystem(HermitianMatrix(h));
      for (int i = 1; i < n; ++i) CHECK(es.values(i) >= es.values(i - 1));
      const CMatrix back = es.vectors * es.values.cast<cplx>().asDiagonal() * es.vectors.adjoint();
      CHECK((back - h).norm() < 1e-12 * std::max(1.0, h.norm()));
    }
  }

  TEST_CASE("pure decay into the ground state") {
    CMatrix h = CMatrix::Zero(2, 2);
    h(0, 0) = 1.0;
    h(1, 1) = -1.0;
    const std::vector<Jump> jumps{{sigma_minus(), 0.3}};
    const NullSpaceResult r = null_space_steady_state(build_liouvillian(HermitianMatrix(h), jumps));
    CHECK(r.multiplicity == 1);
    CHECK(std::abs(r.state(1, 1) - 1.0) < 1e-12);
    CHECK(r.residual < 1e-12);
  }

  TEST_CASE("closed generator has a degenerate null space") {
    CMatrix h = CMatrix::Zero(3, 3);
    h(0, 0) = -1.0;
    h(2, 2) = 2.0;
    const Superoperator l = build_liouvillian(HermitianMatrix(h), {});
    CHECK(null_space(l.matrix()).cols() == 3);
  }

  TEST_CASE("generator preserves trace and hermiticity") {
    std::mt19937_64 rng(11);
    const CMatrix h = random_hermitian(3, rng);
    CMatrix f = random_hermitian(3, rng);
    f(0, 1) += 0.4;
    const std::vector<Jump> jumps{{f, 0.7}};
    const Superoperator l = build_liouvillian(HermitianMatrix(h), jumps);
    for (int t = 0; t < 5; ++t) {
      const CMatrix rho = random_hermitian(3, rng);
      const CMatrix out = l.apply(rho);
      CHECK(std::abs(out.trace()) < 1e-12 * std::max(1.0, rho.norm()));
      CHECK((out - out.adjoint()).norm() < 1e-12 * std::max(1.0, rho.norm()));
    }
  }

  TEST_CASE("constrained least squares meets the constraint") {
    CMatrix a(2, 2);
    a << 1.0, -1.0, 0.0, 0.0;
    CMatrix c(1, 2);
    c << 1.0, 1.0;
    CVector d(1);
    d << 2.0;
    const CVector x = constrained_least_squares(a, c, d);
    CHECK(std::abs(x(0) - 1.0) < 1e-12);
    CHECK(std::abs(x(1) - 1.0) < 1e-12);
  }

  TEST_CASE("fix_gauge makes the leading component real") {
    CMatrix v(2, 1);
    v << cplx(0.0, 0.6), cplx(0.8, 0.0);
    fix_gauge(v);
    CHECK(std::abs(v(0, 0) - cplx(0.6, 0.0)) < 1e-15);
    CHECK(std::abs(v(1, 0) - cplx(0.0, -0.8)) < 1e-15);
  }
}
