#include "freeprob/freeconv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include "freeprob/errors.hpp"

namespace freeprob {

namespace {

constexpr double kNewtonTol = 1e-12;
constexpr int kNewtonMaxIter = 60;
constexpr int kContinuationSteps = 16;

std::string z_str(complex z) {
  std::ostringstream os;
  os << z.real() << (z.imag() >= 0 ? "+" : "") << z.imag() << "i";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Cauchy transforms
// ---------------------------------------------------------------------------

complex cauchy_transform(const Measure& m, complex z) {
  if (!(z.imag() > 0.0)) throw invalid_input("cauchy_transform: Im z must be > 0");
  complex g{0.0, 0.0};
  for (const Atom& a : m.atoms()) g += a.w / (z - a.x);
  const auto& x = m.grid_x();
  const auto& f = m.grid_f();
  for (size_t i = 0; i + 1 < x.size(); ++i) {
    const complex fi = f[i] / (z - x[i]);
    const complex fj = f[i + 1] / (z - x[i + 1]);
    g += 0.5 * (fi + fj) * (x[i + 1] - x[i]);
  }
  return g;
}

complex semicircle_cauchy(complex z) {
  if (z.imag() < 0.0) throw invalid_input("semicircle_cauchy: Im z must be >= 0");
  if (z.imag() == 0.0 && std::abs(z.real()) <= 2.0)
    throw invalid_input("semicircle_cauchy: real z inside the support");
  const complex s = std::sqrt(z * z - 4.0);
  const complex g1 = 0.5 * (z - s);
  const complex g2 = 0.5 * (z + s);
  if (z.imag() > 0.0) {
    // Exactly one candidate maps into the lower half-plane.
    return g1.imag() < 0.0 ? g1 : g2;
  }
  // Boundary values on the real axis outside [-2,2]: G ~ 1/z picks the
  // root of smaller modulus (the product of the roots is 1).
  return std::abs(g1) <= std::abs(g2) ? g1 : g2;
}

// ---------------------------------------------------------------------------
// K-function constructors and combination
// ---------------------------------------------------------------------------

KFunction kfunction_from_measure(const Measure& m, int order) {
  if (order == 0) order = 64;
  std::vector<double> mom(static_cast<size_t>(order));
  for (int k = 1; k <= order; ++k) mom[static_cast<size_t>(k) - 1] = moment(m, k);
  KFunction kf = moments_to_kfunction(mom, order, m.support_bound());
  if (m.kind() == MeasureKind::atomic) {
    ExactKComponent comp;
    for (const Atom& a : m.atoms()) comp.atoms.emplace_back(a.x, a.w);
    comp.n = 1.0;
    kf.exact.present = true;
    kf.exact.components.push_back(std::move(comp));
  }
  return kf;
}

KFunction self_convolve_normalized(const Measure& m, int n, int order) {
  if (n < 1) throw invalid_input("self_convolve_normalized: n must be >= 1");
  if (std::abs(m.mean()) > 1e-8 || std::abs(m.variance() - 1.0) > 1e-8)
    throw invalid_input("self_convolve_normalized: measure must be standardized");
  const double L = m.support_bound();
  if (order == 0) order = choose_truncation_order(L, n, 2.5);

  std::vector<double> mom(static_cast<size_t>(order));
  for (int k = 1; k <= order; ++k) mom[static_cast<size_t>(k) - 1] = moment(m, k);
  KFunction kf = moments_to_kfunction(mom, order, L);

  // kappa_k -> kappa_k n^{1-k/2}: cumulants add over the n-fold convolution
  // and the sqrt(n) normalization scales kappa_k by n^{-k/2}.
  for (int k = 1; k <= kf.order(); ++k)
    kf.cumulants[static_cast<size_t>(k) - 1] *= std::pow(static_cast<double>(n), 1.0 - 0.5 * k);

  kf.validity_radius = std::sqrt(static_cast<double>(n)) / (8.0 * L);
  kf.eval_radius = std::max(kf.validity_radius,
                            detail::effective_series_radius(kf.cumulants));
  if (m.kind() == MeasureKind::atomic) {
    ExactKComponent comp;
    for (const Atom& a : m.atoms()) comp.atoms.emplace_back(a.x, a.w);
    comp.n = static_cast<double>(n);
    kf.exact.present = true;
    kf.exact.components.push_back(std::move(comp));
  }
  return kf;
}

KFunction free_convolve(const KFunction& a, const KFunction& b) {
  KFunction r;
  int order;
  if (a.series_exact && b.series_exact) order = std::max(a.order(), b.order());
  else if (a.series_exact) order = b.order();
  else if (b.series_exact) order = a.order();
  else order = std::min(a.order(), b.order());

  r.cumulants.assign(static_cast<size_t>(order), 0.0);
  for (int k = 1; k <= order; ++k) {
    double v = 0.0;
    if (k <= a.order()) v += a.kappa(k);
    if (k <= b.order()) v += b.kappa(k);
    r.cumulants[static_cast<size_t>(k) - 1] = v;
  }
  r.validity_radius = std::min(a.validity_radius, b.validity_radius);
  r.series_exact = a.series_exact && b.series_exact;
  r.eval_radius = r.series_exact
                      ? 1e30
                      : std::max(r.validity_radius,
                                 detail::effective_series_radius(r.cumulants));
  if (a.exact.present && b.exact.present) {
    r.exact.present = true;
    r.exact.components = a.exact.components;
    r.exact.components.insert(r.exact.components.end(), b.exact.components.begin(),
                              b.exact.components.end());
    r.exact.shift = a.exact.shift + b.exact.shift;
    r.exact.semicircle_var = a.exact.semicircle_var + b.exact.semicircle_var;
  }
  return r;
}

// ---------------------------------------------------------------------------
// phi evaluation backends
// ---------------------------------------------------------------------------

namespace {

complex phi_series(const KFunction& k, complex w) {
  // kappa_1 + (kappa_2 - 1) w + sum_{j>=3} kappa_j w^{j-1}
  complex v{0.0, 0.0};
  for (int j = k.order(); j >= 3; --j) v = (v + k.kappa(j)) * w;
  v = (v + (k.order() >= 2 ? k.kappa(2) - 1.0 : -1.0)) * w;
  return v + (k.order() >= 1 ? k.kappa(1) : 0.0);
}

complex dphi_series(const KFunction& k, complex w) {
  complex v{0.0, 0.0};
  for (int j = k.order(); j >= 3; --j) v = v * w + (j - 1.0) * k.kappa(j);
  return v * w + (k.order() >= 2 ? k.kappa(2) - 1.0 : -1.0);
}

/// Evaluates phi through the exact representation; keeps per-component
/// warm-start state for the inner K_mu inversions (strictly per solver call).
class ExactPhi {
 public:
  explicit ExactPhi(const ExactKRep& rep) : rep_(rep), y_(rep.components.size()) {}

  void reset() { for (auto& y : y_) y.reset(); }

  // K_mu(u) and d/du K_mu(u) for component c, branch-tracked.
  std::pair<complex, complex> k_mu(size_t c, complex u) {
    const auto& atoms = rep_.components[c].atoms;
    complex y;
    if (atoms.size() == 1) {
      y = atoms[0].first + 1.0 / u;
    } else if (atoms.size() == 2) {
      y = k_two_atoms(c, u);
    } else {
      y = k_newton(c, u);
    }
    y_[c] = y;
    // K'(u) = 1/G'(y)
    complex dG{0.0, 0.0};
    for (const auto& [x, w] : atoms) {
      const complex d = y - x;
      dG -= w / (d * d);
    }
    return {y, 1.0 / dG};
  }

  complex phi(complex w) {
    complex v = rep_.shift + (rep_.semicircle_var - 1.0) * w;
    double total_n = 0.0;
    for (size_t c = 0; c < rep_.components.size(); ++c) {
      const double sn = std::sqrt(rep_.components[c].n);
      v += sn * k_mu(c, w / sn).first;
      total_n += rep_.components[c].n;
    }
    return v - total_n / w;
  }

  complex dphi(complex w) {
    complex v = rep_.semicircle_var - 1.0;
    double total_n = 0.0;
    for (size_t c = 0; c < rep_.components.size(); ++c) {
      const double sn = std::sqrt(rep_.components[c].n);
      v += k_mu(c, w / sn).second;
      total_n += rep_.components[c].n;
    }
    return v + total_n / (w * w);
  }

 private:
  complex reference(size_t c, complex u) const {
    if (y_[c]) return *y_[c];
    double mean = 0.0;
    for (const auto& [x, w] : rep_.components[c].atoms) mean += w * x;
    return 1.0 / u + mean;
  }

  complex k_two_atoms(size_t c, complex u) {
    const auto& a = rep_.components[c].atoms;
    const double x1 = a[0].first, x2 = a[1].first;
    const double w1 = a[0].second;
    // u y^2 - (u(x1+x2)+1) y + (u x1 x2 + w1 x2 + (1-w1) x1) = 0
    const complex B = u * (x1 + x2) + 1.0;
    const complex C = u * x1 * x2 + w1 * x2 + (1.0 - w1) * x1;
    complex sq = std::sqrt(B * B - 4.0 * u * C);
    if (B.real() * sq.real() + B.imag() * sq.imag() < 0.0) sq = -sq;
    const complex y_big = (B + sq) / (2.0 * u);
    const complex y_small = C / (u * y_big);
    const complex ref = reference(c, u);
    return std::abs(y_big - ref) <= std::abs(y_small - ref) ? y_big : y_small;
  }

  complex k_newton(size_t c, complex u) {
    const auto& atoms = rep_.components[c].atoms;
    complex y = reference(c, u);
    for (int it = 0; it < 80; ++it) {
      complex R{-u.real(), -u.imag()};
      complex dR{0.0, 0.0};
      for (const auto& [x, w] : atoms) {
        const complex d = y - x;
        R += w / d;
        dR -= w / (d * d);
      }
      if (std::abs(R) < 1e-13 * std::max(1.0, std::abs(u))) return y;
      y -= R / dR;
    }
    throw numerical_error("exact K evaluation: inner inversion did not converge");
  }

  const ExactKRep& rep_;
  std::vector<std::optional<complex>> y_;
};

// ---------------------------------------------------------------------------
// Newton solver for G + 1/G + t phi(G) = z
// ---------------------------------------------------------------------------

enum class Backend { series, exact };

class FunctionalSolver {
 public:
  FunctionalSolver(const KFunction& k, Backend backend)
      : k_(k), backend_(backend), exact_phi_(k.exact) {}

  complex phi(complex w) {
    return backend_ == Backend::series ? phi_series(k_, w) : exact_phi_.phi(w);
  }
  complex dphi(complex w) {
    return backend_ == Backend::series ? dphi_series(k_, w) : exact_phi_.dphi(w);
  }

  double radius_limit() const {
    if (backend_ == Backend::exact || k_.series_exact)
      return std::numeric_limits<double>::infinity();
    return 0.97 * k_.eval_radius;
  }

  std::optional<complex> newton(complex z, double t, complex g0) {
    const double limit = radius_limit();
    complex g = g0;
    if (std::abs(g) >= limit || std::abs(g) < 1e-14) return std::nullopt;
    complex F = g + 1.0 / g + t * phi(g) - z;
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      if (std::abs(F) < kNewtonTol) return g;
      const complex dF = 1.0 - 1.0 / (g * g) + t * dphi(g);
      if (!(std::abs(dF) > 0.0)) return std::nullopt;
      const complex step = -F / dF;
      double lambda = 1.0;
      complex g_new, F_new;
      bool improved = false;
      for (int h = 0; h < 30; ++h) {
        g_new = g + lambda * step;
        if (std::abs(g_new) < limit && std::abs(g_new) > 1e-14) {
          F_new = g_new + 1.0 / g_new + t * phi(g_new) - z;
          if (std::abs(F_new) < std::abs(F)) {
            improved = true;
            break;
          }
        }
        lambda *= 0.5;
      }
      if (!improved) return std::nullopt;
      g = g_new;
      F = F_new;
    }
    return std::abs(F) < kNewtonTol ? std::optional<complex>(g) : std::nullopt;
  }

  /// Full solve at z: direct Newton from the semicircle initial guess, then
  /// vertical continuation from Im z + 4 stepping down geometrically (with
  /// adaptive bisection of steps that fail near the spectral edges).
  complex solve(complex z, double t) {
    exact_phi_.reset();
    if (auto g = newton(z, t, semicircle_cauchy(z))) return check(z, *g);

    const double v_target = std::max(z.imag(), 1e-12);
    const double v_start = z.imag() + 4.0;
    exact_phi_.reset();
    const complex z_top{z.real(), v_start};
    auto g_top = newton(z_top, t, semicircle_cauchy(z_top));
    if (!g_top)
      throw numerical_error("recover_cauchy: no solution at continuation start, z = " +
                            z_str(z));
    complex g = *g_top;
    double v_cur = v_start;

    std::vector<double> ladder;
    for (int j = 1; j <= kContinuationSteps; ++j)
      ladder.push_back(v_target *
                       std::pow(v_start / v_target,
                                1.0 - static_cast<double>(j) / kContinuationSteps));
    ladder.back() = v_target;

    int budget = 600;
    size_t idx = 0;
    while (idx < ladder.size()) {
      if (--budget <= 0)
        throw numerical_error("recover_cauchy: continuation budget exhausted at z = " +
                              z_str(z));
      const double v_next = ladder[idx];
      if (auto gj = newton(complex{z.real(), v_next}, t, g)) {
        g = *gj;
        v_cur = v_next;
        ++idx;
        continue;
      }
      const double v_mid = std::sqrt(v_cur * v_next);
      if (v_mid / v_next < 1.0 + 1e-9 || v_cur / v_mid < 1.0 + 1e-9)
        throw numerical_error("recover_cauchy: continuation stalled at z = " + z_str(z));
      ladder.insert(ladder.begin() + static_cast<long>(idx), v_mid);
    }
    if (z.imag() < v_target) {
      auto gf = newton(z, t, g);
      if (!gf)
        throw numerical_error("recover_cauchy: boundary step failed at z = " + z_str(z));
      g = *gf;
    }
    return check(z, g);
  }

  complex check(complex z, complex g) const {
    if (z.imag() > 0.0 && !(g.imag() < 0.0))
      throw numerical_error("recover_cauchy: non-Herglotz solution at z = " + z_str(z));
    return g;
  }

 private:
  const KFunction& k_;
  Backend backend_;
  ExactPhi exact_phi_;
};

Backend choose_backend(const KFunction& k, complex z) {
  if (k.series_exact) return Backend::series;
  const double needed =
      std::min(z.imag() > 0.0 ? 1.0 / z.imag() : std::numeric_limits<double>::infinity(),
               2.0 * std::abs(semicircle_cauchy(z)) + 0.5);
  if (needed <= 0.9 * k.eval_radius) return Backend::series;
  if (k.exact.present) return Backend::exact;
  return Backend::series;  // guarded; may fail with diagnostics
}

}  // namespace

complex phi_eval(const KFunction& k, complex w) {
  if (!k.series_exact && std::abs(w) >= k.eval_radius)
    throw invalid_input("phi_eval: |w| outside the trusted series radius");
  return phi_series(k, w);
}

complex recover_cauchy(const KFunction& k, complex z, double t) {
  if (z.imag() < 0.0) throw invalid_input("recover_cauchy: Im z must be >= 0");
  Backend backend = choose_backend(k, z);
  try {
    FunctionalSolver solver(k, backend);
    return solver.solve(z, t);
  } catch (const numerical_error&) {
    if (backend == Backend::series && k.exact.present) {
      FunctionalSolver solver(k, Backend::exact);
      return solver.solve(z, t);
    }
    throw;
  }
}

std::vector<complex> recover_on_line(const KFunction& k, const EvalLine& line, double t) {
  if (!(line.v > 0.0)) throw invalid_input("recover_on_line: v must be > 0");
  if (line.points < 2 || !(line.u_min < line.u_max))
    throw invalid_input("recover_on_line: bad line spec");
  const Backend backend = choose_backend(k, complex{line.u_min, line.v});
  FunctionalSolver solver(k, backend);
  std::vector<complex> out(static_cast<size_t>(line.points));
  std::optional<complex> warm;
  for (int i = 0; i < line.points; ++i) {
    const double u = line.u_min + (line.u_max - line.u_min) * i / (line.points - 1);
    const complex z{u, line.v};
    std::optional<complex> g = warm ? solver.newton(z, t, *warm) : std::nullopt;
    if (g && z.imag() > 0.0 && !(g->imag() < 0.0)) g.reset();
    if (!g) g = recover_cauchy(k, z, t);
    out[static_cast<size_t>(i)] = *g;
    warm = *g;
  }
  return out;
}

double stieltjes_density(const KFunction& k, double x, double eps) {
  if (!(eps > 0.0)) throw invalid_input("stieltjes_density: eps must be > 0");
  const double d1 = -recover_cauchy(k, complex{x, eps}).imag() / std::numbers::pi;
  const double d2 = -recover_cauchy(k, complex{x, 0.5 * eps}).imag() / std::numbers::pi;
  return std::max(0.0, 2.0 * d2 - d1);
}

// ---------------------------------------------------------------------------
// Atom extraction
// ---------------------------------------------------------------------------

std::vector<Atom> atoms_from_k(const KFunction& k) {
  std::vector<Atom> out;
  if (!k.exact.present || k.exact.semicircle_var > 0.0) return out;
  const auto& comps = k.exact.components;
  if (comps.size() == 1) {
    // Atom of mu^(n) at sqrt(n) x_j with mass max(n w_j - (n-1), 0).
    const double n = comps[0].n;
    for (const auto& [x, w] : comps[0].atoms) {
      const double mass = n * w - (n - 1.0);
      if (mass > 1e-14)
        out.push_back({std::sqrt(n) * x + k.exact.shift, mass});
    }
  } else if (comps.size() == 2 && comps[0].n == 1.0 && comps[1].n == 1.0) {
    // mu_1 [+] mu_2 has an atom at x_a + x_b iff w_a + w_b > 1.
    for (const auto& [xa, wa] : comps[0].atoms)
      for (const auto& [xb, wb] : comps[1].atoms) {
        const double mass = wa + wb - 1.0;
        if (mass > 1e-14) out.push_back({xa + xb + k.exact.shift, mass});
      }
  }
  std::sort(out.begin(), out.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
  return out;
}

// ---------------------------------------------------------------------------
// Density recovery
// ---------------------------------------------------------------------------

namespace {

/// One Stieltjes sweep along Im = eps with atom poles subtracted from G.
std::vector<complex> sweep_ac(const KFunction& k, const std::vector<double>& xs, double eps,
                              const std::vector<Atom>& atoms, double fresh_window) {
  const Backend backend = choose_backend(k, complex{xs.front(), eps});
  FunctionalSolver solver(k, backend);
  std::vector<complex> g_ac(xs.size());
  std::optional<complex> warm;
  for (size_t i = 0; i < xs.size(); ++i) {
    const complex z{xs[i], eps};
    bool near_atom = false;
    for (const Atom& a : atoms)
      if (std::abs(xs[i] - a.x) < fresh_window) near_atom = true;
    std::optional<complex> g;
    if (!near_atom && warm) {
      g = solver.newton(z, 1.0, *warm);
      if (g && !(g->imag() < 0.0)) g.reset();
    }
    if (!g) g = recover_cauchy(k, z, 1.0);
    warm = *g;
    complex val = *g;
    for (const Atom& a : atoms) val -= a.w / (z - a.x);
    g_ac[i] = val;
  }
  return g_ac;
}

std::vector<double> richardson_density(const KFunction& k, const std::vector<double>& xs,
                                       double eps, const std::vector<Atom>& atoms,
                                       double fresh_window) {
  const auto g1 = sweep_ac(k, xs, eps, atoms, fresh_window);
  const auto g2 = sweep_ac(k, xs, 0.5 * eps, atoms, fresh_window);
  std::vector<double> f(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    const double d1 = -g1[i].imag() / std::numbers::pi;
    const double d2 = -g2[i].imag() / std::numbers::pi;
    f[i] = std::max(0.0, 2.0 * d2 - d1);
  }
  return f;
}

}  // namespace

RecoveredDensity measure_from_k(const KFunction& k, const GridSpec& grid, double eps) {
  if (!(eps > 0.0)) throw invalid_input("measure_from_k: eps must be > 0");
  if (grid.points < 16 || !(grid.min < grid.max))
    throw invalid_input("measure_from_k: bad grid spec");

  const std::vector<Atom> atoms = atoms_from_k(k);
  double atom_mass = 0.0;
  for (const Atom& a : atoms) atom_mass += a.w;
  const double h = (grid.max - grid.min) / (grid.points - 1);
  const double fresh_window = 10.0 * std::max(eps, h);

  if (atom_mass > 1.0 - 1e-9) {
    // Purely atomic limit (n = 1): nothing continuous to sample.
    std::vector<Atom> pure = atoms;
    double mass = 0.0;
    for (const Atom& a : pure) mass += a.w;
    for (Atom& a : pure) a.w /= mass;
    return {Measure::from_atoms(std::move(pure)), 1.0, 0.0, atom_mass};
  }

  // Pass 1: base grid, locate support edges.
  std::vector<double> xs(static_cast<size_t>(grid.points));
  for (int i = 0; i < grid.points; ++i) xs[static_cast<size_t>(i)] = grid.min + h * i;
  std::vector<double> f = richardson_density(k, xs, eps, atoms, fresh_window);

  double fmax = 0.0;
  for (double v : f) fmax = std::max(fmax, v);
  if (!(fmax > 0.0)) throw numerical_error("measure_from_k: recovered density is zero");
  const double thresh = std::max(1e-7 * fmax, 1e-12);

  auto density_at = [&](double x) {
    const double d1 = [&] {
      complex g = recover_cauchy(k, complex{x, eps});
      for (const Atom& a : atoms) g -= a.w / (complex{x, eps} - a.x);
      return -g.imag() / std::numbers::pi;
    }();
    const double d2 = [&] {
      complex g = recover_cauchy(k, complex{x, 0.5 * eps});
      for (const Atom& a : atoms) g -= a.w / (complex{x, 0.5 * eps} - a.x);
      return -g.imag() / std::numbers::pi;
    }();
    return std::max(0.0, 2.0 * d2 - d1);
  };

  // Edges = threshold crossings of the smoothed density; refine each by
  // bisection, then cluster knots geometrically on both sides.
  std::set<double> knots(xs.begin(), xs.end());
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    const bool lo = f[i] > thresh, hi = f[i + 1] > thresh;
    if (lo == hi) continue;
    double a = xs[i], b = xs[i + 1];
    for (int it = 0; it < 50 && (b - a) > 1e-12; ++it) {
      const double mid = 0.5 * (a + b);
      ((density_at(mid) > thresh) == lo ? a : b) = mid;
    }
    const double edge = 0.5 * (a + b);
    for (double d = 0.25 * eps; d < 3.0 * h; d *= 1.25) {
      if (edge - d > grid.min) knots.insert(edge - d);
      if (edge + d < grid.max) knots.insert(edge + d);
    }
    knots.insert(edge);
  }

  // Pass 2: full sweep over the refined knot set.
  xs.assign(knots.begin(), knots.end());
  f = richardson_density(k, xs, eps, atoms, fresh_window);

  fmax = 0.0;
  for (double v : f) fmax = std::max(fmax, v);
  for (double& v : f)
    if (v < 1e-15 * fmax) v = 0.0;

  const double raw_mass = detail::trapezoid(xs, f);
  const double target = 1.0 - atom_mass;
  if (!(raw_mass > 0.0)) throw numerical_error("measure_from_k: zero continuous mass");
  const double factor = target / raw_mass;
  if (std::abs(factor - 1.0) > 1e-3) {
    std::ostringstream os;
    os << "measure_from_k: renormalization factor " << factor
       << " outside 1 +/- 1e-3 (raw mass " << raw_mass << ", target " << target
       << "); grid or eps too coarse";
    throw numerical_error(os.str());
  }
  for (double& v : f) v *= factor;

  Measure m = atoms.empty()
                  ? Measure::from_grid(xs, f, /*renormalize=*/true)
                  : Measure::from_grid_and_atoms(xs, [&] {
                      // from_grid_and_atoms validates exact total mass; rescale
                      // the continuous part onto the target precisely.
                      const double mm = detail::trapezoid(xs, f);
                      std::vector<double> g = f;
                      for (double& v : g) v *= target / mm;
                      return g;
                    }(), atoms);
  return {std::move(m), factor, raw_mass, atom_mass};
}

// ---------------------------------------------------------------------------
// Perturbation expansion around the semicircle solution
// ---------------------------------------------------------------------------

PerturbationExpansion perturbation_coeffs(const KFunction& k, complex z, int kmax) {
  if (kmax < 1 || kmax > 8) throw invalid_input("perturbation_coeffs: kmax must be in [1, 8]");
  if (!(z.imag() > 0.0)) throw invalid_input("perturbation_coeffs: Im z must be > 0");

  const complex g0 = semicircle_cauchy(z);
  const complex s = z - 2.0 * g0;  // = G_2 - G_Phi = sqrt(z^2-4), solver branch
  if (!k.series_exact && std::abs(g0) >= k.eval_radius)
    throw invalid_input("perturbation_coeffs: G_Phi(z) outside the trusted series radius");

  // Taylor coefficients of phi around G_Phi from the cumulant series:
  // t_m = sum_j kt_j C(j-1, m) G_Phi^{j-1-m}, kt = (kappa_1, kappa_2-1, kappa_3, ...).
  const int N = kmax - 1;
  TruncatedSeries phi_t(N);
  for (int m = 0; m <= N; ++m) {
    complex acc{0.0, 0.0};
    for (int j = m + 1; j <= k.order(); ++j) {
      double kt = k.kappa(j);
      if (j == 2) kt -= 1.0;
      if (kt == 0.0) continue;
      double binom = 1.0;
      for (int i = 0; i < m; ++i) binom *= static_cast<double>(j - 1 - i) / (m - i);
      acc += kt * binom * std::pow(g0, j - 1 - m);
    }
    phi_t[m] = acc;
  }
  if (std::abs(phi_t[0]) < 1e-250)
    throw numerical_error("perturbation_coeffs: phi(G_Phi(z)) = 0, expansion undefined");

  // h(d) = (G_Phi + d) phi(G_Phi + d) / (s - d), truncated at order kmax-1.
  TruncatedSeries lin(N);
  lin[0] = g0;
  if (N >= 1) lin[1] = 1.0;
  TruncatedSeries num = series_mul(lin, phi_t, N);
  TruncatedSeries den_inv(N);
  for (int m = 0; m <= N; ++m) den_inv[m] = std::pow(s, -(m + 1));
  const TruncatedSeries hser = series_mul(num, den_inv, N);

  PerturbationExpansion out;
  out.base = g0;
  out.z = z;
  out.coeffs.resize(static_cast<size_t>(kmax));
  out.coeffs[0] = g0 * phi_t[0] / s;  // closed form for c_1
  TruncatedSeries pow = hser;
  for (int kk = 2; kk <= kmax; ++kk) {
    pow = series_mul(pow, hser, N);
    out.coeffs[static_cast<size_t>(kk) - 1] = pow[kk - 1] / static_cast<double>(kk);
  }
  return out;
}

}  // namespace freeprob
