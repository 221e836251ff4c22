#include "freeprob/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "freeprob/errors.hpp"

namespace freeprob {

namespace {

constexpr double kMassTol = 1e-10;
constexpr int kMaxMomentOrder = 512;

void check_grid(const std::vector<double>& x, const std::vector<double>& f) {
  if (x.size() < 2) throw invalid_input("gridded measure: need at least 2 knots");
  if (x.size() != f.size()) throw invalid_input("gridded measure: x/f size mismatch");
  for (size_t i = 0; i + 1 < x.size(); ++i)
    if (!(x[i] < x[i + 1])) throw invalid_input("gridded measure: x must be strictly ascending");
  for (double v : f) {
    if (!std::isfinite(v)) throw invalid_input("gridded measure: non-finite density value");
    if (v < 0.0) throw invalid_input("gridded measure: negative density value");
  }
}

}  // namespace

namespace detail {

double trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
  double s = 0.0;
  for (size_t i = 0; i + 1 < x.size(); ++i)
    s += 0.5 * (f[i] + f[i + 1]) * (x[i + 1] - x[i]);
  return s;
}

double trapezoid_weighted(const std::vector<double>& x, const std::vector<double>& f,
                          const std::function<double(double)>& g) {
  double s = 0.0;
  for (size_t i = 0; i + 1 < x.size(); ++i)
    s += 0.5 * (g(x[i]) * f[i] + g(x[i + 1]) * f[i + 1]) * (x[i + 1] - x[i]);
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Measure
// ---------------------------------------------------------------------------

Measure Measure::from_atoms(std::vector<Atom> atoms) {
  if (atoms.empty()) throw invalid_input("atomic measure: empty atom list");
  double mass = 0.0, bound = 0.0;
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.x)) throw invalid_input("atomic measure: non-finite position");
    if (!(a.w > 0.0)) throw invalid_input("atomic measure: weights must be positive");
    mass += a.w;
    bound = std::max(bound, std::abs(a.x));
  }
  if (std::abs(mass - 1.0) > kMassTol)
    throw invalid_input("atomic measure: weights must sum to 1 (got " + std::to_string(mass) + ")");
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
  Measure m;
  m.kind_ = MeasureKind::atomic;
  m.atoms_ = std::move(atoms);
  m.support_bound_ = bound;
  return m;
}

Measure Measure::from_grid(std::vector<double> x, std::vector<double> f, bool renormalize) {
  check_grid(x, f);
  const double mass = detail::trapezoid(x, f);
  if (renormalize) {
    if (!(mass > 0.0)) throw invalid_input("gridded measure: zero mass, cannot renormalize");
    for (double& v : f) v /= mass;
  } else if (std::abs(mass - 1.0) > kMassTol) {
    throw invalid_input("gridded measure: density must integrate to 1 (got " +
                        std::to_string(mass) + ")");
  }
  Measure m;
  m.kind_ = MeasureKind::gridded;
  m.grid_x_ = std::move(x);
  m.grid_f_ = std::move(f);
  m.support_bound_ = std::max(std::abs(m.grid_x_.front()), std::abs(m.grid_x_.back()));
  return m;
}

Measure Measure::from_grid_and_atoms(std::vector<double> x, std::vector<double> f,
                                     std::vector<Atom> atoms) {
  if (atoms.empty()) return from_grid(std::move(x), std::move(f));
  check_grid(x, f);
  double atom_mass = 0.0, bound = 0.0;
  for (const Atom& a : atoms) {
    if (!(a.w > 0.0)) throw invalid_input("mixed measure: atom weights must be positive");
    atom_mass += a.w;
    bound = std::max(bound, std::abs(a.x));
  }
  const double mass = detail::trapezoid(x, f) + atom_mass;
  if (std::abs(mass - 1.0) > kMassTol)
    throw invalid_input("mixed measure: total mass must be 1 (got " + std::to_string(mass) + ")");
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
  Measure m;
  m.kind_ = MeasureKind::mixed;
  m.grid_x_ = std::move(x);
  m.grid_f_ = std::move(f);
  m.atoms_ = std::move(atoms);
  m.support_bound_ = std::max({std::abs(m.grid_x_.front()), std::abs(m.grid_x_.back()), bound});
  return m;
}

double Measure::mean() const { return moment(*this, 1); }

double Measure::variance() const {
  const double m1 = moment(*this, 1);
  return moment(*this, 2) - m1 * m1;
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

Measure atomic_measure(const std::vector<std::pair<double, double>>& points) {
  std::vector<Atom> atoms;
  atoms.reserve(points.size());
  for (auto& [x, w] : points) atoms.push_back({x, w});
  return Measure::from_atoms(std::move(atoms));
}

double moment(const Measure& m, int k) {
  if (k < 0) throw invalid_input("moment: order must be >= 0");
  if (k > kMaxMomentOrder) throw invalid_input("moment: order beyond cap");
  if (k == 0) return 1.0;
  double s = 0.0;
  for (const Atom& a : m.atoms()) s += a.w * std::pow(a.x, k);
  if (!m.grid_x().empty())
    s += detail::trapezoid_weighted(m.grid_x(), m.grid_f(),
                                    [k](double x) { return std::pow(x, k); });
  return s;
}

Measure standardize(const Measure& m) {
  const double mu = m.mean();
  const double var = m.variance();
  if (!(var > 1e-14)) throw invalid_input("standardize: zero variance");
  const double sigma = std::sqrt(var);

  if (m.kind() == MeasureKind::atomic) {
    std::vector<Atom> atoms = m.atoms();
    for (Atom& a : atoms) a.x = (a.x - mu) / sigma;
    return Measure::from_atoms(std::move(atoms));
  }
  std::vector<double> x = m.grid_x(), f = m.grid_f();
  for (double& v : x) v = (v - mu) / sigma;
  for (double& v : f) v *= sigma;
  if (m.kind() == MeasureKind::gridded) return Measure::from_grid(std::move(x), std::move(f));
  std::vector<Atom> atoms = m.atoms();
  for (Atom& a : atoms) a.x = (a.x - mu) / sigma;
  return Measure::from_grid_and_atoms(std::move(x), std::move(f), std::move(atoms));
}

// ---------------------------------------------------------------------------
// Cdf
// ---------------------------------------------------------------------------

Cdf Cdf::from_function(std::function<double(double)> f, double lo, double hi) {
  Cdf c;
  c.fn_ = std::move(f);
  c.lo_ = lo;
  c.hi_ = hi;
  return c;
}

Cdf Cdf::from_table(std::vector<double> x, std::vector<double> F) {
  if (x.size() != F.size() || x.size() < 2) throw invalid_input("Cdf table: bad sizes");
  Cdf c;
  c.lo_ = x.front();
  c.hi_ = x.back();
  c.tx_ = std::move(x);
  c.tF_ = std::move(F);
  return c;
}

Cdf Cdf::from_measure(const Measure& m) {
  Cdf c;
  if (!m.grid_x().empty()) {
    const auto& x = m.grid_x();
    const auto& f = m.grid_f();
    std::vector<double> F(x.size(), 0.0);
    for (size_t i = 0; i + 1 < x.size(); ++i)
      F[i + 1] = F[i] + 0.5 * (f[i] + f[i + 1]) * (x[i + 1] - x[i]);
    c.tx_ = x;
    c.tF_ = std::move(F);
    c.lo_ = x.front();
    c.hi_ = x.back();
  } else {
    c.lo_ = m.atoms().front().x;
    c.hi_ = m.atoms().back().x;
  }
  for (const Atom& a : m.atoms()) {
    c.jumps_.push_back(a);
    c.lo_ = std::min(c.lo_, a.x);
    c.hi_ = std::max(c.hi_, a.x);
  }
  std::sort(c.jumps_.begin(), c.jumps_.end(),
            [](const Atom& a, const Atom& b) { return a.x < b.x; });
  return c;
}

void Cdf::add_jump(double x, double w) {
  jumps_.push_back({x, w});
  std::sort(jumps_.begin(), jumps_.end(),
            [](const Atom& a, const Atom& b) { return a.x < b.x; });
  lo_ = std::min(lo_, x);
  hi_ = std::max(hi_, x);
}

double Cdf::continuous(double x) const {
  if (fn_) return std::clamp(fn_(x), 0.0, 1.0);
  if (tx_.empty()) return 0.0;
  if (x <= tx_.front()) return 0.0;
  if (x >= tx_.back()) return tF_.back();
  const auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
  const size_t i = static_cast<size_t>(it - tx_.begin()) - 1;
  const double t = (x - tx_[i]) / (tx_[i + 1] - tx_[i]);
  return tF_[i] + t * (tF_[i + 1] - tF_[i]);
}

double Cdf::value(double x) const {
  double v = continuous(x);
  for (const Atom& a : jumps_) {
    if (a.x <= x) v += a.w;
    else break;
  }
  return std::clamp(v, 0.0, 1.0);
}

double Cdf::left(double x) const {
  double v = continuous(x);
  for (const Atom& a : jumps_) {
    if (a.x < x) v += a.w;
    else break;
  }
  return std::clamp(v, 0.0, 1.0);
}

Cdf cdf(const Measure& m) { return Cdf::from_measure(m); }

// ---------------------------------------------------------------------------
// Semicircle law
// ---------------------------------------------------------------------------

double semicircle_density(double x) {
  if (std::abs(x) >= 2.0) return 0.0;
  return std::sqrt(4.0 - x * x) / (2.0 * std::numbers::pi);
}

double semicircle_cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  return (x * std::sqrt(4.0 - x * x) / 2.0 + 2.0 * std::asin(x / 2.0)) /
             (2.0 * std::numbers::pi) +
         0.5;
}

Cdf semicircle_cdf_object() {
  return Cdf::from_function([](double x) { return semicircle_cdf(x); }, -2.0, 2.0);
}

Measure semicircle_measure(int points) {
  if (points < 16) throw invalid_input("semicircle_measure: too few points");
  std::set<double> knots;
  for (int i = 0; i < points; ++i)
    knots.insert(-2.0 + 4.0 * i / (points - 1));
  // Geometric clustering toward the edges keeps the sqrt-edge trapezoid
  // error well below the mass tolerance.
  for (double d = 0.25; d > 1e-12; d *= 0.82) {
    knots.insert(-2.0 + d);
    knots.insert(2.0 - d);
  }
  std::vector<double> x(knots.begin(), knots.end());
  std::vector<double> f(x.size());
  for (size_t i = 0; i < x.size(); ++i) f[i] = semicircle_density(x[i]);
  return Measure::from_grid(std::move(x), std::move(f), /*renormalize=*/true);
}

// ---------------------------------------------------------------------------
// Kolmogorov distance
// ---------------------------------------------------------------------------

double kolmogorov_distance(const Cdf& a, const Cdf& b, double tol, int max_points) {
  const double lo = std::min(a.lo(), b.lo()) - 0.5;
  const double hi = std::max(a.hi(), b.hi()) + 0.5;

  // Jump locations always participate, from both sides.
  double jump_sup = 0.0;
  auto probe_jumps = [&](const Cdf& c) {
    for (const Atom& j : c.jumps()) {
      jump_sup = std::max(jump_sup, std::abs(a.value(j.x) - b.value(j.x)));
      jump_sup = std::max(jump_sup, std::abs(a.left(j.x) - b.left(j.x)));
    }
  };
  probe_jumps(a);
  probe_jumps(b);

  double prev = -1.0;
  int n = 1 << 10;
  double sup = jump_sup;
  while (true) {
    sup = jump_sup;
    for (int i = 0; i <= n; ++i) {
      const double x = lo + (hi - lo) * i / n;
      sup = std::max(sup, std::abs(a.value(x) - b.value(x)));
    }
    if (prev >= 0.0 && std::abs(sup - prev) < tol) break;
    prev = sup;
    if (n >= max_points) break;
    n *= 2;
  }
  return std::clamp(sup, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

Measure measure_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw invalid_input("measure JSON: top level must be an object");
  if (!j.contains("kind")) throw invalid_input("measure JSON: missing field \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "atomic") {
    if (!j.contains("atoms")) throw invalid_input("measure JSON: missing field \"atoms\"");
    std::vector<Atom> atoms;
    for (const auto& e : j.at("atoms")) {
      if (!e.contains("x")) throw invalid_input("measure JSON: atom missing field \"x\"");
      if (!e.contains("w")) throw invalid_input("measure JSON: atom missing field \"w\"");
      atoms.push_back({e.at("x").get<double>(), e.at("w").get<double>()});
    }
    return Measure::from_atoms(std::move(atoms));
  }
  if (kind == "gridded") {
    if (!j.contains("x")) throw invalid_input("measure JSON: missing field \"x\"");
    if (!j.contains("f")) throw invalid_input("measure JSON: missing field \"f\"");
    return Measure::from_grid(j.at("x").get<std::vector<double>>(),
                              j.at("f").get<std::vector<double>>());
  }
  throw invalid_input("measure JSON: unknown kind \"" + kind + "\"");
}

nlohmann::json measure_to_json(const Measure& m) {
  nlohmann::json j;
  if (m.kind() == MeasureKind::atomic) {
    j["kind"] = "atomic";
    auto arr = nlohmann::json::array();
    for (const Atom& a : m.atoms()) arr.push_back({{"x", a.x}, {"w", a.w}});
    j["atoms"] = arr;
  } else {
    j["kind"] = "gridded";
    j["x"] = m.grid_x();
    j["f"] = m.grid_f();
  }
  return j;
}

Measure load_measure_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open measure file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw invalid_input("measure JSON parse error in " + path + ": " + e.what());
  }
  return measure_from_json(j);
}

}  // namespace freeprob
