#pragma once

#include "glra/linalg.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace glra::checks {

struct InvariantResult {
  std::string name;
  Index passed = 0;
  Index failed = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;

  /// Records one trial; passes when residual <= tolerance.
  void record(double residual);
  bool ok() const { return failed == 0; }
};

struct SuiteReport {
  std::string suite;
  std::vector<InvariantResult> invariants;

  bool ok() const;
};

/// Suite names: mp, svd, glra, seq, rrr; "all" runs every suite in that order.
std::vector<std::string> suite_names();

/// Runs seeded random instances of a module's invariant suite. Deterministic in
/// (suite, trials, seed, tol). Throws InputError on an unknown suite name.
std::vector<SuiteReport> run(std::string_view suite, Index trials, std::uint64_t seed,
                             const Tolerances& tol = {});

/// Checks an M, B, C triple against the known two-branch fixture (identity M on 2x2,
/// B = C^T = [[1,0,0],[0,1/2,0]], r = 1): objective 1, NonUnique, branch norms 1 and 4,
/// zero minimality defects.
SuiteReport fixture_check(const Matrix& m, const Matrix& b, const Matrix& c,
                          const Tolerances& tol = {});

}  // namespace glra::checks
