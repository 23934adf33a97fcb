#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "openhall/response.hpp"

namespace openhall {

struct CheckResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;      // worst observed value of the checked quantity
  double threshold = 0.0;  // pass bound on `worst` (lower bound for exponents)
  std::string detail;
};

struct SuiteReport {
  std::vector<CheckResult> checks;
  bool pass() const;
  std::size_t failures() const;
};

struct SuiteOptions {
  std::uint64_t seed = 42;
  int points = 20;       // random gapped k-points per (model, dissipator) pair
  double gamma = 0.1;    // meV; 0 runs the closed-system checks only
  bool flip_s3 = false;  // mutation hook: wrong sign of s3 in the spin first-order term
};

/// A builtin model paired with a dissipator, as exercised by the suites.
struct ModelPair {
  std::string label;
  Model model;
  DissipatorSpec spec;
};

std::vector<ModelPair> builtin_pairs(double gamma);

/// Zeroth order vs null space, closed forms vs the general solver (with expansion-order
/// ratio tests), general solver vs the finite-field oracle.
SuiteReport run_oracle_ladder(const SuiteOptions& opt = {});

/// Generator trace/Hermiticity, density-matrix invariants, gauge stability, time
/// reversal, linearity in the field.
SuiteReport run_invariants(const SuiteOptions& opt = {});

/// Time-reversal-symmetric two-band lattice model used by the invariant suite.
TwoBandModel trs_lattice();

}  // namespace openhall
