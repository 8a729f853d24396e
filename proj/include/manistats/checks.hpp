#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace manistats {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// The shipped models exercised by the invariant suite, predictions and
// acceptance runs: circle, T^2, S^2, S^3 and RP^2 mixtures with positive
// density on the cut locus of the declared mean.
class DensityModel;
std::vector<DensityModel> shipped_models();

// Runs the library invariant suite (geometry round trips, transport
// identities, two-branch and kappa consistency, density normalization and
// sampler agreement, solver oracles, J/Psi quadrature identities, report
// round trips, parallel-vs-serial kernel agreement). quick trims trial
// counts for interactive use.
std::vector<CheckResult> run_check_suite(std::uint64_t seed, bool quick = false,
                                         const std::string& filter = "");

}  // namespace manistats
