#pragma once

// Property suites over generated instances. Each case runs in its own
// session; a report aggregates pass/fail/inconclusive counts and keeps the
// first failing seed together with a shrunk counterexample when one exists.

#include <string>

#include "rlz/gen.hpp"

namespace rlz {

struct UnknownSuite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SuiteReport {
  std::string name;
  size_t cases = 0;
  size_t passed = 0;
  size_t failed = 0;
  size_t inconclusive = 0;
  uint64_t first_fail_seed = 0;
  std::string detail;  // printable description of the first failure

  bool ok() const { return failed == 0; }
};

// Known suites: determinism, subcommutativity, diamond, standardization,
// soundness, consistency, universality, extraction, intersection.
SuiteReport run_suite(const std::string& name, const GenConfig& cfg, size_t cases);

}  // namespace rlz
