#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gibbsforge/circle.hpp"
#include "gibbsforge/errors.hpp"

namespace gibbsforge {

enum class Monotone { increasing, decreasing };

/// Safeguarded Newton iteration for f(x) = target with f monotone on
/// [lo, hi]. Falls back to bisection whenever a Newton step leaves the
/// bracket. Targets outside [f(lo), f(hi)] clamp to the nearer end.
template <class F, class DF>
double solve_monotone(F&& f, DF&& df, double target, double lo, double hi) {
  double flo = f(lo) - target;
  double fhi = f(hi) - target;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) return std::fabs(flo) < std::fabs(fhi) ? lo : hi;
  const bool rising = fhi > 0.0;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double fx = f(x) - target;
    if (fx == 0.0) return x;
    if ((fx > 0.0) == rising) hi = x; else lo = x;
    double d = df(x);
    double next = (d != 0.0 && std::isfinite(d)) ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                     std::max(1.0, std::fabs(x)) ||
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::fabs(x))) {
      return next;
    }
    x = next;
  }
  return x;
}

/// One monotone piece of the map. Points of the domain are handled in an
/// unwrapped coordinate u in [domain.lo, domain.lo + domain.length); the
/// forward value is likewise unwrapped into [range.lo, range.lo + range.length].
struct BranchSpec {
  Arc domain;
  Arc range;
  std::function<double(double)> forward;
  std::function<double(double)> inverse;
  std::function<double(double)> derivative;
  Monotone direction = Monotone::increasing;
};

/// Where a point sits: its branch and its unwrapped coordinate there.
struct BranchPoint {
  std::size_t branch;
  double u;
};

struct Preimage {
  double point;
  std::size_t branch;
};

/// A piecewise-monotone map of the circle (or of [0,1] when circle == false)
/// together with the contraction region and injectivity covering that the
/// hypothesis checks need. Immutable once built; the constructor validates
/// every structural invariant.
class IntervalMap {
 public:
  struct Parts {
    std::string name;
    std::vector<double> params;
    bool circle = true;
    std::vector<BranchSpec> branches;
    std::vector<Arc> contraction_region;
    std::vector<Arc> covering;
    std::vector<double> special_points;
  };

  explicit IntervalMap(Parts parts) : p_(std::move(parts)) { validate(); }

  const std::string& name() const { return p_.name; }
  const std::vector<double>& params() const { return p_.params; }
  bool circle() const { return p_.circle; }
  const std::vector<BranchSpec>& branches() const { return p_.branches; }
  const BranchSpec& branch(std::size_t i) const { return p_.branches.at(i); }
  const std::vector<Arc>& contraction_region() const { return p_.contraction_region; }
  const std::vector<Arc>& covering() const { return p_.covering; }
  int q() const { return q_; }
  int k0() const { return static_cast<int>(p_.covering.size()); }
  /// Points where the derivative is extremal or non-smooth (neutral fixed
  /// points, profile peaks); sampling routines add them to their grids.
  const std::vector<double>& special_points() const { return p_.special_points; }

  bool full_branch() const {
    return std::all_of(p_.branches.begin(), p_.branches.end(),
                       [](const BranchSpec& b) { return b.range.length >= 1.0 - 1e-12; });
  }

  /// True when every branch has constant derivative (checked on samples).
  bool affine() const { return affine_; }

  bool in_contraction_region(double x) const {
    return contains_any(p_.contraction_region, x);
  }

  std::optional<BranchPoint> locate(double x) const {
    if (p_.circle) {
      double xw = wrap01(x);
      for (std::size_t i = 0; i < p_.branches.size(); ++i) {
        const Arc& d = p_.branches[i].domain;
        double off = d.offset_of(xw);
        if (off < d.length) return BranchPoint{i, d.lo + off};
      }
      return std::nullopt;
    }
    for (std::size_t i = 0; i < p_.branches.size(); ++i) {
      if (p_.branches[i].domain.contains_closed(x)) return BranchPoint{i, x};
    }
    return std::nullopt;
  }

  bool in_domain(double x) const { return locate(x).has_value(); }

  BranchPoint locate_or_throw(double x) const {
    auto loc = locate(x);
    if (!loc) {
      throw Error(ErrorKind::point_outside_domain,
                  "x=" + std::to_string(x) + " lies in no branch of " + p_.name);
    }
    return *loc;
  }

  double evaluate(double x) const {
    auto loc = locate_or_throw(x);
    double v = p_.branches[loc.branch].forward(loc.u);
    if (p_.circle) return wrap01(v);
    return std::clamp(v, 0.0, 1.0);
  }

  double derivative_at(double x) const {
    auto loc = locate_or_throw(x);
    return p_.branches[loc.branch].derivative(loc.u);
  }

  std::vector<Preimage> preimages(double y) const {
    std::vector<Preimage> out;
    for (std::size_t i = 0; i < p_.branches.size(); ++i) {
      const BranchSpec& b = p_.branches[i];
      double v;
      if (p_.circle) {
        double off = b.range.offset_of(y);
        if (!(b.range.full() || off < b.range.length)) continue;
        v = b.range.lo + off;
      } else {
        if (!b.range.contains_closed(y, 1e-15)) continue;
        v = y;
      }
      double u = b.inverse(v);
      out.push_back({p_.circle ? wrap01(u) : std::clamp(u, b.domain.lo, b.domain.hi()), i});
    }
    if (out.empty()) {
      throw Error(ErrorKind::no_preimage,
                  "y=" + std::to_string(y) + " has no preimage under " + p_.name);
    }
    return out;
  }

  /// Optimal local inverse Lipschitz constant 1/|f'(x)|.
  double lipschitz_inverse(double x) const { return 1.0 / std::fabs(derivative_at(x)); }

  /// Adjacent branch on the circle (domain starting where branch i ends),
  /// used to continue local inverses across branch boundaries.
  std::optional<std::size_t> next_branch(std::size_t i) const { return next_.at(i); }
  std::optional<std::size_t> prev_branch(std::size_t i) const { return prev_.at(i); }

  /// Branch-domain endpoints reduced to [0,1), sorted and deduplicated.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (const auto& b : p_.branches) {
      out.push_back(p_.circle ? wrap01(b.domain.lo) : b.domain.lo);
      out.push_back(p_.circle ? wrap01(b.domain.hi()) : b.domain.hi());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::fabs(a - b) < 1e-14; }),
              out.end());
    return out;
  }

  double min_branch_length() const {
    double m = 1.0;
    for (const auto& b : p_.branches) m = std::min(m, b.domain.length);
    return m;
  }

 private:
  static std::vector<double> samples(const Arc& a, int k) {
    std::vector<double> xs;
    xs.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) xs.push_back(a.lo + a.length * (i + 0.5) / k);
    return xs;
  }

  void fail(const std::string& msg) const {
    throw Error(ErrorKind::invalid_parameter, p_.name + ": " + msg);
  }

  void validate() {
    if (p_.branches.empty()) fail("map needs at least one branch");
    for (std::size_t i = 0; i < p_.branches.size(); ++i) {
      const BranchSpec& b = p_.branches[i];
      if (!(b.domain.length > 0.0)) fail("empty branch domain");
      for (double u : samples(b.domain, 64)) {
        double v = b.forward(u);
        if (std::fabs(b.inverse(v) - u) > 1e-9) fail("branch inverse does not round-trip");
        if (!(std::fabs(b.derivative(u)) > 0.0)) fail("vanishing derivative on branch");
      }
      for (std::size_t j = i + 1; j < p_.branches.size(); ++j) {
        for (double u : samples(p_.branches[j].domain, 64)) {
          bool hit = p_.circle ? b.domain.contains(u)
                               : (u > b.domain.lo && u < b.domain.hi());
          if (hit) fail("branch domains overlap");
        }
      }
    }
    // q = number of covering elements meeting the contraction region; they
    // must come first and jointly contain it.
    q_ = 0;
    std::vector<bool> meets(p_.covering.size(), false);
    for (const Arc& a : p_.contraction_region) {
      for (double x : samples(a, 256)) {
        bool covered = false;
        for (std::size_t k = 0; k < p_.covering.size(); ++k) {
          if (p_.covering[k].contains(x)) {
            meets[k] = true;
            covered = true;
          }
        }
        if (!covered) fail("contraction region not covered by the covering");
      }
    }
    for (std::size_t k = 0; k < meets.size(); ++k) {
      if (meets[k]) {
        if (static_cast<int>(k) != q_) fail("covering elements meeting the contraction region must come first");
        ++q_;
      }
    }
    for (const Arc& c : p_.covering) {
      for (double x : samples(c, 64)) {
        auto loc = locate(p_.circle ? wrap01(x) : x);
        if (!loc) fail("covering element leaves the domain");
      }
      // Each element is a domain of injectivity: it sits inside one branch.
      auto first = locate(p_.circle ? wrap01(c.lo + 1e-12) : c.lo + 1e-12);
      for (double x : samples(c, 64)) {
        auto loc = locate(p_.circle ? wrap01(x) : x);
        if (loc->branch != first->branch) fail("covering element spans two branches");
      }
    }
    affine_ = true;
    for (const auto& b : p_.branches) {
      const double d0 = b.derivative(b.domain.lo);
      for (double u : samples(b.domain, 16)) {
        if (std::fabs(b.derivative(u) - d0) > 1e-12 * std::fabs(d0)) affine_ = false;
      }
    }
    next_.assign(p_.branches.size(), std::nullopt);
    prev_.assign(p_.branches.size(), std::nullopt);
    if (p_.circle) {
      for (std::size_t i = 0; i < p_.branches.size(); ++i) {
        for (std::size_t j = 0; j < p_.branches.size(); ++j) {
          if (circle_distance(p_.branches[i].domain.hi(), p_.branches[j].domain.lo) < 1e-13) {
            next_[i] = j;
            prev_[j] = i;
          }
        }
      }
    }
  }

  Parts p_;
  int q_ = 0;
  bool affine_ = false;
  std::vector<std::optional<std::size_t>> next_;
  std::vector<std::optional<std::size_t>> prev_;
};

/// log of the minimal preimage count over a sample grid of y values. This is
/// the n = 1 lower bound for h(f); it is exact for full-branch maps.
inline double degree_floor(const IntervalMap& map, int grid_resolution = 1024) {
  if (grid_resolution < 2) {
    throw Error(ErrorKind::invalid_parameter, "grid_resolution must be >= 2");
  }
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (int k = 0; k < grid_resolution; ++k) {
    double y = (k + 0.5) / grid_resolution;
    std::size_t count = 0;
    try {
      count = map.preimages(y).size();
    } catch (const Error&) {
      count = 0;
    }
    best = std::min(best, count);
  }
  return best == 0 ? -std::numeric_limits<double>::infinity()
                   : std::log(static_cast<double>(best));
}

namespace detail {

/// Degree-2 circle map given by an odd increasing lift G on [-1/2, 1/2]
/// with G(+-1/2) = +-1. Branch A is the arc (-x*, x*) around the fixed
/// point 0, with G(x*) = 1/2, so both branches map onto the full circle
/// and an arc around 0 fits inside a single covering element.
inline IntervalMap odd_lift_circle_map(std::string name, std::vector<double> params,
                                       std::function<double(double)> lift,
                                       std::function<double(double)> lift_deriv,
                                       std::function<double(double)> lift_inverse,
                                       double contraction_half_width,
                                       std::vector<double> special_points) {
  const double xstar = lift_inverse(0.5);
  BranchSpec a;
  a.domain = Arc{1.0 - xstar, 2.0 * xstar};
  a.range = Arc{0.5, 1.0};
  a.forward = [lift](double u) { return lift(u - 1.0) + 1.0; };
  a.inverse = [lift_inverse](double v) { return lift_inverse(v - 1.0) + 1.0; };
  a.derivative = [lift_deriv](double u) { return lift_deriv(u - 1.0); };

  BranchSpec b;
  b.domain = Arc{xstar, 1.0 - 2.0 * xstar};
  b.range = Arc{0.5, 1.0};
  b.forward = [lift](double u) { return u <= 0.5 ? lift(u) : lift(u - 1.0) + 2.0; };
  b.inverse = [lift_inverse](double v) {
    return v <= 1.0 ? lift_inverse(v) : lift_inverse(v - 2.0) + 1.0;
  };
  b.derivative = [lift_deriv](double u) { return u <= 0.5 ? lift_deriv(u) : lift_deriv(u - 1.0); };

  IntervalMap::Parts parts;
  parts.name = std::move(name);
  parts.params = std::move(params);
  parts.circle = true;
  parts.covering = {a.domain, b.domain};
  parts.branches = {std::move(a), std::move(b)};
  if (contraction_half_width > 0.0) {
    parts.contraction_region = {Arc{1.0 - contraction_half_width, 2.0 * contraction_half_width}};
  }
  parts.special_points = std::move(special_points);
  return IntervalMap(std::move(parts));
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::invalid_parameter, what);
}

}  // namespace detail

inline IntervalMap make_doubling() {
  BranchSpec left{Arc{0.0, 0.5}, Arc{0.0, 1.0},
                  [](double u) { return 2.0 * u; },
                  [](double v) { return 0.5 * v; },
                  [](double) { return 2.0; }};
  BranchSpec right{Arc{0.5, 0.5}, Arc{0.0, 1.0},
                   [](double u) { return 2.0 * u - 1.0; },
                   [](double v) { return 0.5 * (v + 1.0); },
                   [](double) { return 2.0; }};
  IntervalMap::Parts parts;
  parts.name = "doubling";
  parts.circle = true;
  parts.covering = {left.domain, right.domain};
  parts.branches = {std::move(left), std::move(right)};
  return IntervalMap(std::move(parts));
}

/// Full-branch piecewise-linear circle map; branch i has slope s_i and the
/// reciprocal slopes must sum to one.
inline IntervalMap make_linear_full_branch(const std::vector<double>& slopes) {
  detail::require(slopes.size() >= 2, "linear_full_branch needs at least two slopes");
  double inv_sum = 0.0;
  for (double s : slopes) {
    detail::require(s > 1.0, "linear_full_branch slopes must exceed 1");
    inv_sum += 1.0 / s;
  }
  detail::require(std::fabs(inv_sum - 1.0) < 1e-9,
                  "linear_full_branch reciprocal slopes must sum to 1");
  IntervalMap::Parts parts;
  parts.name = "linear_full_branch";
  parts.params = slopes;
  parts.circle = true;
  double start = 0.0;
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    const double s = slopes[i];
    const double a = start;
    const double len = (i + 1 == slopes.size()) ? 1.0 - a : 1.0 / s;
    parts.branches.push_back(BranchSpec{Arc{a, len}, Arc{0.0, 1.0},
                                        [s, a](double u) { return s * (u - a); },
                                        [s, a](double v) { return a + v / s; },
                                        [s](double) { return s; }});
    parts.covering.push_back(Arc{a, len});
    start += len;
  }
  return IntervalMap(std::move(parts));
}

/// Circle version of the Manneville-Pomeau map: lift x(1 + 2^a |x|^a) on
/// [-1/2, 1/2], neutral fixed point at 0. The contraction region is the arc
/// of half-width `region` around 0.
inline IntervalMap make_manneville_pomeau_circle(double alpha, double region = 0.1) {
  detail::require(alpha > 0.0 && alpha < 1.0, "manneville_pomeau_circle needs alpha in (0,1)");
  detail::require(region > 0.0 && region < 0.25, "contraction half-width must lie in (0, 1/4)");
  const double k = std::pow(2.0, alpha);
  auto lift = [alpha, k](double x) { return x * (1.0 + k * std::pow(std::fabs(x), alpha)); };
  auto deriv = [alpha, k](double x) {
    return 1.0 + (1.0 + alpha) * k * std::pow(std::fabs(x), alpha);
  };
  auto inverse = [lift, deriv](double v) {
    return solve_monotone(lift, deriv, v, -0.5, 0.5);
  };
  return detail::odd_lift_circle_map("manneville_pomeau_circle", {alpha, region}, lift, deriv,
                                     inverse, region, {0.0, 0.5});
}

/// Doubling map deformed on the window |x| < w/2 around its fixed point 0:
/// the slope follows 2 - (2 - s) sin(2 pi |x| / (w/2)), dipping to s inside
/// the window while the map stays C^1 and equal to 2x outside. s = 2 is the
/// undeformed doubling map.
inline IntervalMap make_pitchfork_doubling(double s, double w) {
  detail::require(s > 0.0 && s < 4.0, "pitchfork_doubling needs s in (0,4)");
  detail::require(w > 0.0 && w <= 0.25, "pitchfork_doubling needs w in (0, 1/4]");
  const double hw = 0.5 * w;
  const double two_pi = 2.0 * std::numbers::pi;
  auto lift = [s, hw, two_pi](double x) {
    double ax = std::fabs(x);
    if (ax >= hw) return 2.0 * x;
    double g = 2.0 * ax - (2.0 - s) * hw * (1.0 - std::cos(two_pi * ax / hw)) / two_pi;
    return x < 0.0 ? -g : g;
  };
  auto deriv = [s, hw, two_pi](double x) {
    double ax = std::fabs(x);
    if (ax >= hw) return 2.0;
    return 2.0 - (2.0 - s) * std::sin(two_pi * ax / hw);
  };
  auto inverse = [lift, deriv, hw](double v) {
    if (std::fabs(v) >= 2.0 * hw) return 0.5 * v;
    return solve_monotone(lift, deriv, v, -hw, hw);
  };
  std::vector<double> special{0.0, hw / 4.0, 3.0 * hw / 4.0, 1.0 - hw / 4.0,
                              1.0 - 3.0 * hw / 4.0, hw, 1.0 - hw};
  return detail::odd_lift_circle_map("pitchfork_doubling", {s, w}, lift, deriv, inverse, hw,
                                     std::move(special));
}

/// Cubic f(x) = -8x(x-1)(x+1/8) restricted to f^{-1}([0,1]); its maximal
/// invariant set is a Cantor set. Not a circle map. 0 is a neutral fixed
/// point (f'(0) = 1) and [0, region) is the contraction region.
inline IntervalMap make_cantor_unimodal(double region = 0.1) {
  auto f = [](double x) { return -8.0 * x * (x - 1.0) * (x + 0.125); };
  auto df = [](double x) { return -24.0 * x * x + 14.0 * x + 1.0; };
  const double crit = (14.0 + std::sqrt(14.0 * 14.0 + 96.0)) / 48.0;
  const double a = solve_monotone(f, df, 1.0, 0.0, crit);
  const double b = solve_monotone(f, df, 1.0, crit, 1.0);
  detail::require(region > 0.0 && region < a, "contraction region must lie inside [0, a)");
  BranchSpec left{Arc{0.0, a}, Arc{0.0, 1.0}, f,
                  [f, df, a](double v) { return solve_monotone(f, df, v, 0.0, a); }, df,
                  Monotone::increasing};
  BranchSpec right{Arc{b, 1.0 - b}, Arc{0.0, 1.0}, f,
                   [f, df, b](double v) { return solve_monotone(f, df, v, b, 1.0); }, df,
                   Monotone::decreasing};
  IntervalMap::Parts parts;
  parts.name = "cantor_unimodal";
  parts.params = {region};
  parts.circle = false;
  parts.covering = {left.domain, right.domain};
  parts.branches = {std::move(left), std::move(right)};
  parts.contraction_region = {Arc{0.0, region}};
  parts.special_points = {0.0, a, b, 1.0};
  return IntervalMap(std::move(parts));
}

/// Builtin map zoo by name. Parameters:
///   doubling                  -
///   linear_full_branch        s_1, ..., s_k (sum of 1/s_i = 1)
///   manneville_pomeau_circle  alpha [, contraction half-width = 0.1]
///   pitchfork_doubling        s, w
///   cantor_unimodal           [contraction width = 0.1]
inline IntervalMap builtin_map(const std::string& name, const std::vector<double>& params) {
  auto arg = [&](std::size_t i, std::optional<double> fallback = std::nullopt) {
    if (i < params.size()) return params[i];
    if (fallback) return *fallback;
    throw Error(ErrorKind::invalid_parameter, name + " needs parameter #" + std::to_string(i + 1));
  };
  if (name == "doubling") return make_doubling();
  if (name == "linear_full_branch") return make_linear_full_branch(params);
  if (name == "manneville_pomeau_circle") return make_manneville_pomeau_circle(arg(0), arg(1, 0.1));
  if (name == "pitchfork_doubling") return make_pitchfork_doubling(arg(0), arg(1));
  if (name == "cantor_unimodal") return make_cantor_unimodal(arg(0, 0.1));
  throw Error(ErrorKind::unknown_map, "no builtin map named '" + name + "'");
}

}  // namespace gibbsforge
