#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dail {

struct GradCheckResult {
  std::string group;
  double max_rel_error = 0.0;
};

/// Checks every analytic parameter gradient of a seeded tiny model against
/// central finite differences (h = 1e-6), across all four loss modes, both
/// optimization stages and linear/angular/combined margins. Per parameter
/// group the relative error is ||analytic - fd|| / (||analytic|| + ||fd||),
/// maximized over the swept configurations.
std::vector<GradCheckResult> run_gradcheck(std::uint64_t seed);

}  // namespace dail
