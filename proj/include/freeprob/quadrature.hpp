#pragma once

#include <functional>
#include <vector>

namespace freeprob {

/// Adaptive Simpson with Richardson acceptance test.  `splits` are interior
/// points the interval is cut at before recursion starts (spectral edges,
/// support endpoints); the integrand must be finite at every evaluation point.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-10, double abs_tol = 1e-14,
                        const std::vector<double>& splits = {}, int max_depth = 48);

/// Integrate a density with square-root behavior at one or both interval ends
/// by substituting x = end -/+ s^2 near each flagged end, which removes the
/// root from the integrand.  Works for densities that vanish like sqrt(d) and
/// for integrable d^{-1/2} singularities alike.
double integrate_edge_aware(const std::function<double(double)>& f, double a, double b,
                            bool sqrt_at_a, bool sqrt_at_b, double rel_tol = 1e-11);

}  // namespace freeprob
