#pragma once

#include <complex>
#include <vector>

#include "freeprob/measure.hpp"
#include "freeprob/series.hpp"

namespace freeprob {

/// Horizontal segment {u + iv : u in [u_min, u_max]} sampled at `points`
/// equally spaced abscissas; the domain of Cauchy-transform comparisons.
struct EvalLine {
  double v = 0.0;
  double u_min = 0.0;
  double u_max = 0.0;
  int points = 2;
};

/// Uniform sampling window for density recovery.
struct GridSpec {
  double min = -2.5;
  double max = 2.5;
  int points = 4097;
};

/// G(z) = int d mu(t) / (z - t), Im z > 0.  Exact atom sum plus trapezoid
/// quadrature for gridded parts; the result has Im G < 0.
complex cauchy_transform(const Measure& m, complex z);

/// Cauchy transform of the standard semicircle law, (z - sqrt(z^2-4))/2 with
/// the branch fixed by Im G < 0 and G ~ 1/z.  Real z with |z| > 2 are
/// accepted as boundary values.
complex semicircle_cauchy(complex z);

/// Free additive convolution at the K-function level: cumulant arrays add
/// termwise, the two 1/w principal parts merge into one.
KFunction free_convolve(const KFunction& a, const KFunction& b);

/// K-function of mu^(n), the normalized n-fold free self-convolution of a
/// standardized measure: kappa_k scaled by n^{1-k/2}.  `order` 0 picks the
/// truncation automatically from the coefficient-bound tail rule.
KFunction self_convolve_normalized(const Measure& m, int n, int order = 0);

/// K-function of a raw measure (no normalization), with the exact atomic
/// representation attached when the measure is atomic.
KFunction kfunction_from_measure(const Measure& m, int order = 0);

/// phi(w) = K(w) - w - 1/w evaluated through the cumulant series.
/// Errors when |w| lies beyond the radius the stored truncation supports.
complex phi_eval(const KFunction& k, complex w);

/// Solve G + 1/G + t*phi(G) = z for the Herglotz branch by damped Newton with
/// vertical continuation.  t = 1 recovers the Cauchy transform of the measure
/// behind k; t = 0 is the semicircle.
complex recover_cauchy(const KFunction& k, complex z, double t = 1.0);

/// Warm-started sweep of recover_cauchy along an EvalLine (left to right).
std::vector<complex> recover_on_line(const KFunction& k, const EvalLine& line, double t = 1.0);

/// -(1/pi) Im G(x + i eps), Richardson-extrapolated from eps and eps/2
/// (the smoothing is linear in eps to leading order), clamped at 0.
double stieltjes_density(const KFunction& k, double x, double eps);

/// Result of sampling a K-function back into a measure.
struct RecoveredDensity {
  Measure measure;              // gridded, or mixed when atoms were extracted
  double renorm_factor = 1.0;   // applied to the continuous part
  double ac_mass_raw = 0.0;     // trapezoid mass before renormalization
  double atom_mass = 0.0;       // total extracted atomic mass
};

/// Stieltjes inversion of k over the grid window.  Support edges found on the
/// base grid are refined geometrically; atoms implied by the exact atomic
/// representation are extracted analytically (their poles are subtracted from
/// G before inversion).  The continuous part is renormalized to 1 minus the
/// atomic mass; a factor outside 1 +/- 1e-3 raises numerical_error.
RecoveredDensity measure_from_k(const KFunction& k, const GridSpec& grid, double eps);

/// Expansion G_t = G_Phi + sum c_k t^k of the solution of the parametric
/// functional equation around the semicircle solution, at fixed z.
struct PerturbationExpansion {
  complex base;                  // G_Phi(z)
  std::vector<complex> coeffs;   // c_1 .. c_kmax
  complex z;
};

/// c_1 by its closed form G_Phi phi(G_Phi)/sqrt(z^2-4); c_k for k >= 2 by
/// Taylor expansion of (G phi(G)/(G_2-G))^k around G_Phi.  kmax <= 8.
PerturbationExpansion perturbation_coeffs(const KFunction& k, complex z, int kmax);

/// Atoms of the measure behind an exact atomic K-representation
/// (Bercovici-Voiculescu mass criterion); empty when no exact representation
/// or no atom survives.
std::vector<Atom> atoms_from_k(const KFunction& k);

}  // namespace freeprob
