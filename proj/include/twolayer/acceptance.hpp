#pragma once

#include <vector>

#include "twolayer/io.hpp"

namespace twolayer::acceptance {

// Each check runs one acceptance criterion at its pinned tolerance and runtime budget.

CheckResult initial_conditions();          // closed forms reproduce the initial state
CheckResult rate_identities();             // Vieta identities and discriminant signs
CheckResult ode_oracles(const RunSpec& spec);
CheckResult conservation(const RunSpec& spec);
CheckResult convergence(const RunSpec& spec);
CheckResult qualitative(const RunSpec& spec);
CheckResult linearity(const RunSpec& spec);
CheckResult determinism(const RunSpec& spec);
CheckResult honest_reporting(const RunSpec& spec);

/// Residuals of the solid, bound and internalized equations under the closed forms.
CheckResult ode_residuals(const RunSpec& spec);

std::vector<CheckResult> all(const RunSpec& spec);

}  // namespace twolayer::acceptance
