#pragma once

#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace freeprob {

/// Compactly supported probability measure.  `atomic` and `gridded` are the
/// primary kinds; `mixed` carries a gridded density plus finitely many atoms
/// (finite-n free convolutions of atomic measures keep atoms, so density
/// recovery must be able to represent them alongside the continuous part).
enum class MeasureKind { atomic, gridded, mixed };

struct Atom {
  double x = 0.0;
  double w = 0.0;
};

class Measure {
 public:
  /// Atomic measure from (position, weight) pairs.  Weights must be positive
  /// and sum to 1 within 1e-10.
  static Measure from_atoms(std::vector<Atom> atoms);

  /// Gridded density on ascending knots.  Trapezoid mass must be 1 within
  /// 1e-10 unless `renormalize` is set, in which case the density is scaled
  /// to unit mass (the caller can inspect the factor via mass bookkeeping).
  static Measure from_grid(std::vector<double> x, std::vector<double> f,
                           bool renormalize = false);

  /// Gridded density plus atoms; grid mass + atom mass must be 1 within 1e-10.
  static Measure from_grid_and_atoms(std::vector<double> x, std::vector<double> f,
                                     std::vector<Atom> atoms);

  MeasureKind kind() const { return kind_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<double>& grid_x() const { return grid_x_; }
  const std::vector<double>& grid_f() const { return grid_f_; }

  /// Smallest L with support contained in [-L, L].
  double support_bound() const { return support_bound_; }

  double mean() const;
  double variance() const;

 private:
  Measure() = default;
  MeasureKind kind_ = MeasureKind::atomic;
  std::vector<Atom> atoms_;
  std::vector<double> grid_x_;
  std::vector<double> grid_f_;
  double support_bound_ = 0.0;
};

/// Cumulative distribution function: a continuous part (closed form or a
/// piecewise-linear table) plus jump locations for atomic parts.  value() is
/// right-continuous; left() gives the limit from below.
class Cdf {
 public:
  static Cdf from_function(std::function<double(double)> f, double lo, double hi);
  static Cdf from_table(std::vector<double> x, std::vector<double> F);
  static Cdf from_measure(const Measure& m);

  double value(double x) const;
  double left(double x) const;
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<Atom>& jumps() const { return jumps_; }

  /// Add a jump of mass w at x (continuous part left untouched).
  void add_jump(double x, double w);

 private:
  Cdf() = default;
  double continuous(double x) const;
  std::function<double(double)> fn_;
  std::vector<double> tx_, tF_;  // table, used when fn_ is empty
  std::vector<Atom> jumps_;      // sorted by position
  double lo_ = 0.0, hi_ = 0.0;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

Measure atomic_measure(const std::vector<std::pair<double, double>>& points);

/// k-th raw moment; exact sum for atomic parts, trapezoid for gridded.
double moment(const Measure& m, int k);

/// Affine map to zero mean, unit variance.  Fails on zero variance.
Measure standardize(const Measure& m);

Cdf cdf(const Measure& m);

double semicircle_density(double x);
double semicircle_cdf(double x);
Cdf semicircle_cdf_object();

/// Gridded instance of the standard semicircle law: `points` uniform knots on
/// [-2,2] plus geometric refinement toward both edges, renormalized.
Measure semicircle_measure(int points = 4097);

/// sup_x |F_a(x) - F_b(x)| over a refining mesh that always includes jump
/// locations evaluated from both sides; refinement stops when the sup is
/// stable to `tol` or the mesh reaches `max_points`.
double kolmogorov_distance(const Cdf& a, const Cdf& b, double tol = 1e-6,
                           int max_points = (1 << 20));

// ---------------------------------------------------------------------------
// JSON measure spec
//   {"kind":"atomic","atoms":[{"x":-1.0,"w":0.5},...]}
//   {"kind":"gridded","x":[...],"f":[...]}
// ---------------------------------------------------------------------------

Measure measure_from_json(const nlohmann::json& j);
nlohmann::json measure_to_json(const Measure& m);
Measure load_measure_file(const std::string& path);

namespace detail {
/// Trapezoid integral of f against the knots x.
double trapezoid(const std::vector<double>& x, const std::vector<double>& f);
/// Trapezoid integral of g(x)*f(x).
double trapezoid_weighted(const std::vector<double>& x, const std::vector<double>& f,
                          const std::function<double(double)>& g);
}  // namespace detail

}  // namespace freeprob
