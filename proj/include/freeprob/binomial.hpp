#pragma once

#include <utility>
#include <vector>

#include "freeprob/measure.hpp"

namespace freeprob {

/// Two-point measure mu{-1/p} = p, mu{1/q} = q, zero mean, variance 1/(pq).
/// `skew` is the constant (p-q)/sqrt(pq) steering the leading error term.
struct BinomialSpec {
  double p = 0.5;
  double q = 0.5;
  double skew = 0.0;
};

BinomialSpec binomial_spec(double p);

Measure binomial_measure(double p);

/// Support [skew/sqrt(n) - 2 sqrt(1-1/n), skew/sqrt(n) + 2 sqrt(1-1/n)] of the
/// absolutely continuous part of the standardized n-fold self-convolution.
std::pair<double, double> binomial_support(const BinomialSpec& spec, int n);

/// Closed-form density of the a.c. part of mu^(n):
///   f_n(x) = (1/2pi) sqrt(4 - x^2 + 2 skew x/sqrt(n) - 1/(pqn))
///            / ((1 + x/sqrt(nq/p)) (1 - x/sqrt(np/q))),
/// zero where the radicand is negative.
double binomial_free_density(const BinomialSpec& spec, int n, double x);

/// Atoms retained by mu^(n) for small n: mass max(1-qn, 0) at -sqrt(nq/p) and
/// mass max(1-pn, 0) at sqrt(np/q).  Empty once n >= 1/min(p, q).
std::vector<Atom> binomial_atoms(const BinomialSpec& spec, int n);

/// Exact distribution function of mu^(n): cumulative quadrature of the
/// density (sqrt-aware at both edges) plus the retained atoms.
Cdf binomial_cdf(const BinomialSpec& spec, int n);

/// Kolmogorov distance between mu^(n) and the semicircle law, via the exact
/// CDF.  Resolved to ~1e-9 so that n^{-1} scale distances stay measurable.
double binomial_distance(const BinomialSpec& spec, int n);

/// min and max of d_n sqrt(n) over the ladder; requires p != q and at least
/// four ladder entries.
std::pair<double, double> rate_bracket(const BinomialSpec& spec, const std::vector<int>& ladder);

}  // namespace freeprob
