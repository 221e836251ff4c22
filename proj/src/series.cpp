#include "freeprob/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "freeprob/errors.hpp"

namespace freeprob {

TruncatedSeries series_add(const TruncatedSeries& a, const TruncatedSeries& b, int order) {
  TruncatedSeries r(order);
  for (int k = 0; k <= order; ++k) {
    if (k <= a.order()) r[k] += a[k];
    if (k <= b.order()) r[k] += b[k];
  }
  return r;
}

TruncatedSeries series_sub(const TruncatedSeries& a, const TruncatedSeries& b, int order) {
  TruncatedSeries r(order);
  for (int k = 0; k <= order; ++k) {
    if (k <= a.order()) r[k] += a[k];
    if (k <= b.order()) r[k] -= b[k];
  }
  return r;
}

TruncatedSeries series_scale(const TruncatedSeries& a, complex s) {
  TruncatedSeries r = a;
  for (auto& x : r.c) x *= s;
  return r;
}

TruncatedSeries series_mul(const TruncatedSeries& a, const TruncatedSeries& b, int order) {
  TruncatedSeries r(order);
  const int na = std::min(a.order(), order);
  for (int i = 0; i <= na; ++i) {
    if (a[i] == complex{0.0, 0.0}) continue;
    const int nb = std::min(b.order(), order - i);
    for (int j = 0; j <= nb; ++j) r[i + j] += a[i] * b[j];
  }
  return r;
}

TruncatedSeries series_reciprocal(const TruncatedSeries& a, int order) {
  if (a.order() < 0 || a[0] == complex{0.0, 0.0})
    throw invalid_input("series_reciprocal: constant term is zero");
  TruncatedSeries r(order);
  r[0] = 1.0 / a[0];
  for (int n = 1; n <= order; ++n) {
    complex acc{0.0, 0.0};
    const int hi = std::min(n, a.order());
    for (int j = 1; j <= hi; ++j) acc += a[j] * r[n - j];
    r[n] = -acc / a[0];
  }
  return r;
}

TruncatedSeries series_int_pow(const TruncatedSeries& s, int k, int order) {
  if (s.order() < 0 || s[0] != complex{1.0, 0.0})
    throw invalid_input("series_int_pow: requires constant term 1");
  TruncatedSeries base = (k < 0) ? series_reciprocal(s, order) : s;
  unsigned long e = static_cast<unsigned long>(k < 0 ? -static_cast<long>(k) : k);
  TruncatedSeries acc(order);
  acc[0] = 1.0;
  while (e > 0) {
    if (e & 1UL) acc = series_mul(acc, base, order);
    base = series_mul(base, base, order);
    e >>= 1UL;
  }
  return acc;
}

complex series_eval(const TruncatedSeries& s, complex z) {
  complex v{0.0, 0.0};
  for (int k = s.order(); k >= 0; --k) v = v * z + s[k];
  return v;
}

// ---------------------------------------------------------------------------

double coefficient_bound(double support_bound, int k) {
  if (support_bound <= 0.0) throw invalid_input("coefficient_bound: L must be > 0");
  if (k < 1) throw invalid_input("coefficient_bound: k must be >= 1");
  return (2.0 * support_bound / k) * std::pow(4.0 * support_bound, k);
}

int choose_truncation_order(double support_bound, double n, double eval_at,
                            double tail_tol, int min_order, int cap) {
  // Tail of sum_k (2 L sqrt(n)/k) (4 L r / sqrt(n))^k, geometric ratio q.
  const double L = support_bound;
  const double q = 4.0 * L * eval_at / std::sqrt(n);
  if (q >= 0.95) return cap;
  double term = 2.0 * L * std::sqrt(n) * q;  // k = 1 term (without 1/k)
  for (int k = 1; k <= cap; ++k) {
    const double tail = (term / (k + 1)) * q / (1.0 - q);
    if (tail < tail_tol && k >= min_order) return k;
    term *= q;
  }
  return cap;
}

namespace detail {

double effective_series_radius(const std::vector<double>& cumulants) {
  // Radius-of-convergence estimate from |kappa_k|^{-1/(k-1)} over the stored
  // tail, then shrunk until the truncated remainder at that radius is tiny.
  const int K = static_cast<int>(cumulants.size());
  double r_conv = 1e30;
  int used = 0;
  for (int k = std::max(3, K / 2); k <= K; ++k) {
    const double a = std::abs(cumulants[static_cast<size_t>(k) - 1]);
    if (a <= 1e-300) continue;
    r_conv = std::min(r_conv, std::pow(a, -1.0 / (k - 1)));
    ++used;
  }
  if (used == 0) return 1e30;  // tail identically zero: polynomial K

  double scale = 1.0;
  for (double a : cumulants) scale = std::max(scale, std::abs(a));
  for (double s = 0.95; s > 0.01; s *= 0.93) {
    const double r = s * r_conv;
    double tail = 0.0;
    for (int k = std::max(2, K - 6); k <= K; ++k) {
      const double a = std::abs(cumulants[static_cast<size_t>(k) - 1]);
      if (a <= 0.0) continue;
      tail = std::max(tail, a * std::pow(r, k - 1));
    }
    tail *= s / (1.0 - s);  // crude geometric continuation of the cut tail
    if (tail < 1e-12 * scale) return r;
  }
  return 0.01 * r_conv;
}

}  // namespace detail

KFunction moments_to_kfunction(const std::vector<double>& moments, int order,
                               std::optional<double> support_bound) {
  const int M = static_cast<int>(moments.size());
  if (order < 2) throw invalid_input("moments_to_kfunction: order must be >= 2");
  if (order > M) throw invalid_input("moments_to_kfunction: need at least `order` moments");

  // h(z) = 1 + a_1 z + ... + a_K z^K, the z-side of g(z) = z h(z).
  TruncatedSeries h(order);
  h[0] = 1.0;
  for (int k = 1; k <= order; ++k) h[k] = moments[static_cast<size_t>(k) - 1];

  KFunction kf;
  kf.cumulants.assign(static_cast<size_t>(order), 0.0);
  kf.cumulants[0] = moments[0];  // kappa_1 = a_1

  const TruncatedSeries hinv = series_reciprocal(h, order);
  TruncatedSeries p = hinv;  // p = h^{-n}
  for (int n = 1; n <= order - 1; ++n) {
    kf.cumulants[static_cast<size_t>(n)] = -p[n + 1].real() / n;
    if (n + 1 <= order - 1) p = series_mul(p, hinv, order);
  }

  kf.validity_radius = support_bound && *support_bound > 0.0
                           ? 1.0 / (4.0 * *support_bound)
                           : 0.0;
  kf.eval_radius = std::max(kf.validity_radius,
                            detail::effective_series_radius(kf.cumulants));
  return kf;
}

KFunction semicircle_kfunction(int order) {
  if (order < 2) throw invalid_input("semicircle_kfunction: order must be >= 2");
  KFunction kf;
  kf.cumulants.assign(static_cast<size_t>(order), 0.0);
  kf.cumulants[1] = 1.0;  // kappa_2 = 1
  kf.validity_radius = 1e30;
  kf.eval_radius = 1e30;
  kf.series_exact = true;
  kf.exact.present = true;
  kf.exact.semicircle_var = 1.0;
  return kf;
}

KFunction point_mass_kfunction(double c, int order) {
  KFunction kf;
  kf.cumulants.assign(static_cast<size_t>(std::max(order, 2)), 0.0);
  kf.cumulants[0] = c;
  kf.validity_radius = 1e30;
  kf.eval_radius = 1e30;
  kf.series_exact = true;
  kf.exact.present = true;
  kf.exact.shift = c;
  return kf;
}

complex kfunction_series_eval(const KFunction& k, complex w) {
  complex v{0.0, 0.0};
  for (int j = k.order(); j >= 1; --j) v = v * w + k.kappa(j);
  return 1.0 / w + v;
}

}  // namespace freeprob
