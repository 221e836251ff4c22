#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

namespace freeprob {

using complex = std::complex<double>;

/// Dense truncated formal power series c_0 + c_1 z + ... + c_N z^N.
/// Arithmetic never reads or writes beyond the stated order.
struct TruncatedSeries {
  std::vector<complex> c;

  TruncatedSeries() = default;
  explicit TruncatedSeries(int order) : c(static_cast<size_t>(order) + 1, complex{0.0, 0.0}) {}
  explicit TruncatedSeries(std::vector<complex> coeffs) : c(std::move(coeffs)) {}

  int order() const { return static_cast<int>(c.size()) - 1; }
  complex& operator[](int k) { return c[static_cast<size_t>(k)]; }
  const complex& operator[](int k) const { return c[static_cast<size_t>(k)]; }
};

TruncatedSeries series_add(const TruncatedSeries& a, const TruncatedSeries& b, int order);
TruncatedSeries series_sub(const TruncatedSeries& a, const TruncatedSeries& b, int order);
TruncatedSeries series_scale(const TruncatedSeries& a, complex s);

/// Cauchy product truncated at `order`.
TruncatedSeries series_mul(const TruncatedSeries& a, const TruncatedSeries& b, int order);

/// Multiplicative inverse of a series with nonzero constant term, truncated at `order`.
TruncatedSeries series_reciprocal(const TruncatedSeries& a, int order);

/// Integer power s^k (k may be negative) of a series with c_0 = 1,
/// by binary exponentiation; reciprocal first when k < 0.
TruncatedSeries series_int_pow(const TruncatedSeries& s, int k, int order);

/// Horner evaluation at z (test/diagnostic use).
complex series_eval(const TruncatedSeries& s, complex z);

// ---------------------------------------------------------------------------
// K-functions (free cumulants)
// ---------------------------------------------------------------------------

/// One exactly representable summand of a K-function: the n-fold free
/// self-convolution of a finite atomic measure, normalized by sqrt(n).
struct ExactKComponent {
  std::vector<std::pair<double, double>> atoms;  // (position, weight)
  double n = 1.0;                                // convolution power
};

/// Exact side representation of a K-function,
///   K(w) = sum_j sqrt(n_j) K_{mu_j}(w/sqrt(n_j)) - (sum_j n_j - 1)/w
///          + shift + semicircle_var * w,
/// closed under free convolution.  It lets the solver evaluate K outside the
/// cumulant series' radius of convergence, which small-n recoveries need.
struct ExactKRep {
  bool present = false;
  std::vector<ExactKComponent> components;
  double shift = 0.0;           // accumulated point-mass translations
  double semicircle_var = 0.0;  // accumulated semicircle variance
};

/// K(w) = 1/w + kappa_1 + kappa_2 w + ... + kappa_K w^{K-1}.
///
/// `validity_radius` is the conservative disc radius backed by the cumulant
/// coefficient bound (1/(4L) for a single measure, sqrt(n)/(8L) after n-fold
/// normalized self-convolution).  `eval_radius` is the larger radius on which
/// the stored truncation actually evaluates to full accuracy, estimated from
/// the observed coefficient decay; series evaluation is guarded by it.
struct KFunction {
  std::vector<double> cumulants;  // kappa_1 .. kappa_K, index 0 = kappa_1
  double validity_radius = 0.0;
  double eval_radius = 0.0;
  bool series_exact = false;  // cumulant list is the complete sequence
  ExactKRep exact;

  int order() const { return static_cast<int>(cumulants.size()); }
  double kappa(int k) const { return cumulants[static_cast<size_t>(k) - 1]; }  // k in [1, order]
};

/// Cumulants from raw moments a_1..a_M via coefficient extraction:
/// kappa_1 = a_1 and kappa_{n+1} = -(1/n) [z^{n+1}] (1 + a_1 z + ...)^{-n}.
/// When the support bound L is supplied, validity_radius = 1/(4L).
KFunction moments_to_kfunction(const std::vector<double>& moments, int order,
                               std::optional<double> support_bound = std::nullopt);

/// Paper-backed cumulant size bound (2L/k)(4L)^k for |kappa_{k+1}|, k >= 1.
double coefficient_bound(double support_bound, int k);

/// Truncation order that keeps the coefficient-bound tail below `tail_tol`
/// at evaluation radius r for the n-fold normalized convolution of a measure
/// with support bound L.  Falls back to `cap` when the bound's geometric
/// ratio is not < 1 at that radius.
int choose_truncation_order(double support_bound, double n, double eval_at,
                            double tail_tol = 1e-14, int min_order = 32, int cap = 256);

/// K_Phi(w) = 1/w + w, exact at any order >= 2.
KFunction semicircle_kfunction(int order = 32);

/// K of a point mass at c: 1/w + c, exact.
KFunction point_mass_kfunction(double c, int order = 8);

/// Series value of K(w) = 1/w + sum kappa_k w^{k-1} (no radius guard).
complex kfunction_series_eval(const KFunction& k, complex w);

namespace detail {
/// Estimate the accurate-evaluation radius from the decay of stored cumulants.
double effective_series_radius(const std::vector<double>& cumulants);
}  // namespace detail

}  // namespace freeprob
