#pragma once

#include <span>

#include "uot/problem.hpp"

namespace uot {

// fi = er / (er + ep), the damping exponent applied to every rescale ratio.
// er > 0, ep >= 0, both finite; result is in (0, 1].
double compute_fi(double er, double ep);

// (target / sum)^fi. Throws DegenerateSum if sum is not strictly positive or
// the result leaves the positive finite range.
double rescale_factor(double target, double sum, double fi);

// max_i |alpha_i - 1| vs max_j |beta_j - 1|, whichever is larger: both
// marginals are satisfied exactly when every factor is 1.
double convergence_error(const ScalingFactors& f);

}  // namespace uot
