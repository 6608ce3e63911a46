#include "uot/scaling.hpp"

#include <cmath>

#include "uot/error.hpp"

namespace uot {

double compute_fi(double er, double ep) {
  if (!(er > 0.0) || !std::isfinite(er)) throw InvalidParameter("compute_fi: er must be positive and finite");
  if (!(ep >= 0.0) || !std::isfinite(ep)) throw InvalidParameter("compute_fi: ep must be non-negative and finite");
  return er / (er + ep);
}

double rescale_factor(double target, double sum, double fi) {
  if (!(sum > 0.0))
    throw DegenerateSum("rescale_factor: slice sum is not strictly positive");
  const double f = std::pow(target / sum, fi);
  if (!(f > 0.0) || !std::isfinite(f))
    throw DegenerateSum("rescale_factor: factor left the positive finite range");
  return f;
}

double convergence_error(const ScalingFactors& f) {
  double e = 0.0;
  for (double a : f.alpha) e = std::max(e, std::abs(a - 1.0));
  for (double b : f.beta) e = std::max(e, std::abs(b - 1.0));
  return e;
}

}  // namespace uot
