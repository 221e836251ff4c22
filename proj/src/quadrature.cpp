#include "freeprob/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "freeprob/errors.hpp"

namespace freeprob {

namespace {

struct SimpsonCtx {
  const std::function<double(double)>& f;
  double rel_tol;
  double abs_tol;
};

double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const SimpsonCtx& ctx, double a, double b, double fa, double fm, double fb,
             double whole, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = ctx.f(lm), frm = ctx.f(rm);
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double delta = left + right - whole;
  if (depth <= 0) return left + right + delta / 15.0;
  if (std::abs(delta) <= 15.0 * std::max(ctx.abs_tol, ctx.rel_tol * std::abs(left + right)))
    return left + right + delta / 15.0;
  return adapt(ctx, a, m, fa, flm, fm, left, depth - 1) +
         adapt(ctx, m, b, fm, frm, fb, right, depth - 1);
}

double simpson_segment(const SimpsonCtx& ctx, double a, double b, int max_depth) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = ctx.f(a), fm = ctx.f(m), fb = ctx.f(b);
  const double whole = simpson(fa, fm, fb, b - a);
  return adapt(ctx, a, b, fa, fm, fb, whole, max_depth);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, double abs_tol, const std::vector<double>& splits,
                        int max_depth) {
  if (!(b > a)) return 0.0;
  std::vector<double> cuts{a, b};
  for (double s : splits)
    if (s > a && s < b) cuts.push_back(s);
  std::sort(cuts.begin(), cuts.end());
  SimpsonCtx ctx{f, rel_tol, abs_tol};
  double total = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i)
    total += simpson_segment(ctx, cuts[i], cuts[i + 1], max_depth);
  return total;
}

double integrate_edge_aware(const std::function<double(double)>& f, double a, double b,
                            bool sqrt_at_a, bool sqrt_at_b, double rel_tol) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  // The transformed integrand is evaluated from s0 > 0 so the density is
  // never sampled exactly at a support edge (0/0 there for pole-type edges);
  // the skipped sliver contributes O(s0) at worst.
  const double s0 = 1e-9 * std::sqrt(b - a);
  double total = 0.0;
  if (sqrt_at_a) {
    // x = a + s^2, dx = 2 s ds
    const double smax = std::sqrt(m - a);
    total += adaptive_simpson([&](double s) { return 2.0 * s * f(a + s * s); }, s0, smax,
                              rel_tol, 1e-15);
  } else {
    total += adaptive_simpson(f, a, m, rel_tol, 1e-15);
  }
  if (sqrt_at_b) {
    const double smax = std::sqrt(b - m);
    total += adaptive_simpson([&](double s) { return 2.0 * s * f(b - s * s); }, s0, smax,
                              rel_tol, 1e-15);
  } else {
    total += adaptive_simpson(f, m, b, rel_tol, 1e-15);
  }
  return total;
}

}  // namespace freeprob
