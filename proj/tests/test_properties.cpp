#include <doctest.h>

#include <random>

#include "openhall/errors.hpp"
#include "openhall/response.hpp"
#include "openhall/suite.hpp"

using namespace openhall;

namespace {

void require_all(const SuiteReport& r) {
  for (const auto& c : r.checks) {
    INFO(c.name << ": worst " << c.worst << " threshold " << c.threshold << " " << c.detail);
    CHECK(c.pass);
  }
}

}  // namespace

TEST_SUITE("properties") {
  TEST_CASE("oracle ladder over builtin pairs") {
    for (std::uint64_t seed : {1u, 42u}) {
      SuiteOptions o;
      o.seed = seed;
      o.points = 8;
      require_all(run_oracle_ladder(o));
    }
  }

  TEST_CASE("invariants over builtin pairs") {
    SuiteOptions o;
    o.points = 8;
    require_all(run_invariants(o));
  }

  TEST_CASE("closed limit passes") {
    SuiteOptions o;
    o.gamma = 0.0;
    o.points = 6;
    require_all(run_oracle_ladder(o));
    require_all(run_invariants(o));
  }

  TEST_CASE("s3 mutation is caught") {
    SuiteOptions o;
    o.points = 6;
    o.flip_s3 = true;
    CHECK_FALSE(run_oracle_ladder(o).pass());
  }

  TEST_CASE("velocity response is odd in the field") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (const auto& p : builtin_pairs(0.1)) {
      const Momentum k{u(rng), u(rng)};
      BandFrame f;
      try {
        f = band_frame(p.model, k);
      } catch (const DegeneratePoint&) {
        continue;
      }
      const auto plus = steady_state_at(p.model, p.spec, f, {0.5}, FirstOrderMethod::General);
      const auto minus = steady_state_at(p.model, p.spec, f, {-0.5}, FirstOrderMethod::General);
      INFO(p.label);
      CHECK((plus.order1 + minus.order1).norm() < 1e-12 * std::max(1.0, plus.order1.norm()));
    }
  }

  TEST_CASE("trs lattice has no hall response") {
    const Model m = trs_lattice();
    CHECK(chern_number(m, 0).chern == 0);
    const ConductivityBreakdown b =
        hall_conductivity_general(m, single_steady_band(0, {0.0, 0.1}), {1.0}, BZGrid::for_domain(model_domain(m), 32));
    CHECK(std::abs(b.sigma0) < 1e-8);
  }
}
