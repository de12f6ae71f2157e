#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "gibbsforge/circle.hpp"
#include "gibbsforge/dynamics.hpp"
#include "gibbsforge/errors.hpp"

namespace gibbsforge {

struct Potential {
  std::string name;
  std::function<double(double)> evaluator;
  double hoelder_exponent = 1.0;
  double hoelder_constant = 0.0;
  /// Points that sampling routines must include (neutral fixed points and
  /// other places where the potential peaks or has a cusp).
  std::vector<double> sample_hints;

  double operator()(double x) const { return evaluator(x); }
};

/// S_n phi(x) = sum_{j<n} phi(f^j x).
inline double birkhoff_sum(const IntervalMap& map, const Potential& phi, double x, long n) {
  if (n < 0) throw Error(ErrorKind::invalid_parameter, "birkhoff_sum needs n >= 0");
  const double x0 = x;
  double sum = 0.0;
  for (long j = 0; j < n; ++j) {
    if (!map.in_domain(x)) throw OrbitEscapedError(x0, j);
    sum += phi(x);
    if (j + 1 < n) x = map.evaluate(x);
  }
  return sum;
}

namespace detail {

inline void extend_range(const Potential& phi, const std::vector<Arc>& domain, int resolution,
                         double& lo, double& hi) {
  auto visit = [&](double x) {
    double v = phi(x);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (const Arc& a : domain) {
    for (int k = 0; k <= resolution; ++k) {
      double x = a.lo + a.length * k / resolution;
      // The right end of a half-open arc is a limit point; evaluate just inside.
      if (k == resolution) x = std::nextafter(x, a.lo);
      visit(x);
    }
    for (double h : phi.sample_hints) {
      if (a.contains(h) || a.contains_closed(h)) visit(h);
    }
  }
}

}  // namespace detail

/// sup - inf of phi over a uniform grid of `resolution` steps per arc (both
/// ends included) plus the potential's sample hints; refined once at double
/// resolution and the larger of the two estimates returned.
inline double oscillation(const Potential& phi, const std::vector<Arc>& domain, int resolution) {
  if (resolution < 16) throw Error(ErrorKind::invalid_parameter, "oscillation needs resolution >= 16");
  if (domain.empty()) return 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  detail::extend_range(phi, domain, resolution, lo, hi);
  double coarse = hi - lo;
  detail::extend_range(phi, domain, 2 * resolution, lo, hi);
  return std::max(coarse, hi - lo);
}

/// Range (inf, sup) of phi on the same sampling used by `oscillation`.
inline std::pair<double, double> potential_range(const Potential& phi,
                                                 const std::vector<Arc>& domain,
                                                 int resolution) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  detail::extend_range(phi, domain, 2 * resolution, lo, hi);
  return {lo, hi};
}

/// Branch domains of the map as arcs; this is the phase space the
/// potentials live on.
inline std::vector<Arc> map_domain(const IntervalMap& map) {
  std::vector<Arc> out;
  for (const auto& b : map.branches()) out.push_back(b.domain);
  return out;
}

/// Largest observed Hoelder quotient |phi(x) - phi(y)| / d(x,y)^a over
/// pairs at geometric offsets 2^-k from base points (a uniform grid plus
/// the hints), both points in the same branch domain.
inline double estimate_hoelder_constant(const IntervalMap& map, const Potential& phi,
                                        double exponent, int base_points = 512) {
  double best = 0.0;
  for (const auto& b : map.branches()) {
    const Arc& d = b.domain;
    std::vector<double> bases;
    for (int k = 0; k <= base_points; ++k) bases.push_back(d.lo + d.length * k / base_points);
    for (double h : phi.sample_hints) {
      if (d.contains(h)) bases.push_back(d.lo + d.offset_of(h));
      else if (!map.circle() && d.contains_closed(h)) bases.push_back(h);
    }
    auto inside = [&](double u) { return u >= d.lo && u < d.hi(); };
    auto at = [&](double u) { return phi(map.circle() ? wrap01(u) : u); };
    for (double u : bases) {
      if (!inside(u)) continue;
      const double fu = at(u);
      for (int k = 1; k <= 40; ++k) {
        const double off = std::ldexp(1.0, -k);
        for (double v : {u + off, u - off}) {
          if (!inside(v)) continue;
          double qv = std::fabs(fu - at(v)) / std::pow(off, exponent);
          if (std::isfinite(qv)) best = std::max(best, qv);
        }
      }
    }
  }
  return best;
}

inline Potential make_zero_potential() {
  return Potential{"zero", [](double) { return 0.0; }, 1.0, 0.0, {}};
}

namespace detail {

/// Hoelder exponent of log|f'| for the builtin maps: the neutral cusp of the
/// Manneville-Pomeau lift limits it to alpha, everything else is Lipschitz
/// on branch domains.
inline double derivative_hoelder_exponent(const IntervalMap& map) {
  if (map.name() == "manneville_pomeau_circle") return map.params().at(0);
  return 1.0;
}

inline std::vector<double> derivative_hints(const IntervalMap& map) {
  std::vector<double> hints = map.special_points();
  for (double b : map.breakpoints()) hints.push_back(b);
  return hints;
}

}  // namespace detail

/// phi = -t log|f'|.
inline Potential make_minus_t_log_deriv(const IntervalMap& map, double t) {
  Potential p;
  p.name = "minus_t_log_deriv";
  p.evaluator = [map, t](double x) { return -t * std::log(std::fabs(map.derivative_at(x))); };
  p.hoelder_exponent = detail::derivative_hoelder_exponent(map);
  p.sample_hints = detail::derivative_hints(map);
  p.hoelder_constant = estimate_hoelder_constant(map, p, p.hoelder_exponent);
  return p;
}

/// phi = -log(|f'| + beta).
inline Potential make_minus_log_deriv_plus_beta(const IntervalMap& map, double beta) {
  if (!(beta >= 0.0)) {
    throw Error(ErrorKind::invalid_parameter, "minus_log_deriv_plus_beta needs beta >= 0");
  }
  Potential p;
  p.name = "minus_log_deriv_plus_beta";
  p.evaluator = [map, beta](double x) {
    return -std::log(std::fabs(map.derivative_at(x)) + beta);
  };
  p.hoelder_exponent = detail::derivative_hoelder_exponent(map);
  p.sample_hints = detail::derivative_hints(map);
  p.hoelder_constant = estimate_hoelder_constant(map, p, p.hoelder_exponent);
  return p;
}

inline Potential builtin_potential(const std::string& name, const std::vector<double>& params,
                                   const IntervalMap& map) {
  auto arg = [&](std::size_t i) {
    if (i < params.size()) return params[i];
    throw Error(ErrorKind::invalid_parameter, name + " needs parameter #" + std::to_string(i + 1));
  };
  if (name == "zero") return make_zero_potential();
  if (name == "minus_t_log_deriv") return make_minus_t_log_deriv(map, arg(0));
  if (name == "minus_log_deriv_plus_beta") return make_minus_log_deriv_plus_beta(map, arg(0));
  throw Error(ErrorKind::unknown_potential, "no builtin potential named '" + name + "'");
}

}  // namespace gibbsforge
