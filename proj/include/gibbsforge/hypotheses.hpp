#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gibbsforge/dynamics.hpp"
#include "gibbsforge/errors.hpp"
#include "gibbsforge/potentials.hpp"

namespace gibbsforge {

struct HypothesisReport {
  double h_f = 0.0;
  double L_sup_inside = 0.0;
  double L_sup_outside = 0.0;
  double sigma = 0.0;
  int q = 0;
  int k0 = 0;
  double oscillation = 0.0;
  double p_margin = 0.0;
  /// Margin with sup phi taken only over the covering elements meeting the
  /// contraction region (the weaker form of the potential condition).
  double p_margin_weak = 0.0;
  double eps0 = 0.0;
  double admissible_c = 0.0;
  double gamma = 0.9;
  bool passes_H1 = false;
  bool passes_H2 = false;
  bool passes_P = false;

  bool passes_all() const { return passes_H1 && passes_H2 && passes_P; }

  /// Names of the failing conditions, e.g. {"P"}.
  std::vector<std::string> failing() const {
    std::vector<std::string> out;
    if (!passes_H1) out.push_back("H1");
    if (!passes_H2) out.push_back("H2");
    if (!passes_P) out.push_back("P");
    return out;
  }
};

struct HypothesisOptions {
  std::optional<double> sigma;  // nullopt: inf |f'| off the contraction region
  double gamma = 0.9;
  int derivative_grid = 10000;
  int oscillation_resolution = 4096;
  int degree_resolution = 1024;
};

namespace detail {

inline std::vector<double> derivative_samples(const IntervalMap& map, bool inside, int n) {
  std::vector<double> xs;
  for (int k = 0; k < n; ++k) {
    double x = (k + 0.5) / n;
    if (!map.in_domain(x)) continue;
    if (map.in_contraction_region(x) == inside) xs.push_back(x);
  }
  if (inside) {
    for (const Arc& a : map.contraction_region()) xs.push_back(wrap01(a.lo));
    for (double s : map.special_points()) {
      double x = map.circle() ? wrap01(s) : s;
      if (map.in_domain(x) && map.in_contraction_region(x)) xs.push_back(x);
    }
  }
  return xs;
}

}  // namespace detail

inline HypothesisReport check_hypotheses(const IntervalMap& map, const Potential& phi,
                                         const HypothesisOptions& opt = {}) {
  if (opt.sigma && !(*opt.sigma > 1.0)) {
    throw Error(ErrorKind::invalid_parameter, "sigma must exceed 1");
  }
  if (!(opt.gamma > 0.0 && opt.gamma < 1.0)) {
    throw Error(ErrorKind::invalid_parameter, "gamma must lie in (0,1)");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  HypothesisReport r;
  r.gamma = opt.gamma;
  r.q = map.q();
  r.k0 = map.k0();
  r.h_f = degree_floor(map, opt.degree_resolution);

  double min_deriv_out = inf;
  for (double x : detail::derivative_samples(map, false, opt.derivative_grid)) {
    min_deriv_out = std::min(min_deriv_out, std::fabs(map.derivative_at(x)));
  }
  r.L_sup_outside = 1.0 / min_deriv_out;
  r.sigma = opt.sigma ? *opt.sigma : min_deriv_out;

  if (map.contraction_region().empty()) {
    // L(x) <= 1/sigma everywhere, so that bound serves as L as well.
    r.L_sup_inside = 1.0 / r.sigma;
  } else {
    double min_deriv_in = inf;
    for (double x : detail::derivative_samples(map, true, opt.derivative_grid)) {
      min_deriv_in = std::min(min_deriv_in, std::fabs(map.derivative_at(x)));
    }
    r.L_sup_inside = 1.0 / min_deriv_in;
  }

  const double log_sigma = std::log(r.sigma);
  const double log_L = std::log(r.L_sup_inside);
  const double mix = -(1.0 - r.gamma) * log_sigma + r.gamma * log_L;
  r.admissible_c = std::max(0.0, -0.5 * mix);
  r.passes_H1 = r.sigma > 1.0 && r.L_sup_outside <= (1.0 + 1e-12) / r.sigma && mix < 0.0;

  const double log_q = r.q == 0 ? -inf : std::log(static_cast<double>(r.q));
  r.passes_H2 = log_q < r.h_f;

  const auto domain = map_domain(map);
  r.oscillation = oscillation(phi, domain, opt.oscillation_resolution);
  if (r.q == 0) {
    r.p_margin = inf;
    r.p_margin_weak = inf;
    r.eps0 = inf;
  } else {
    r.p_margin = r.h_f - log_q - r.oscillation;
    std::vector<Arc> meeting(map.covering().begin(), map.covering().begin() + r.q);
    auto [inf_all, sup_all] = potential_range(phi, domain, opt.oscillation_resolution);
    auto [inf_near, sup_near] = potential_range(phi, meeting, opt.oscillation_resolution);
    (void)sup_all;
    (void)inf_near;
    r.p_margin_weak = r.h_f - log_q - (sup_near - inf_all);
    r.eps0 = 0.5 * std::max(0.0, r.h_f - log_q - r.oscillation - log_L);
  }
  r.passes_P = r.p_margin > 0.0;
  return r;
}

inline HypothesisReport check_hypotheses(const IntervalMap& map, const Potential& phi,
                                         std::optional<double> sigma, double gamma) {
  HypothesisOptions opt;
  opt.sigma = sigma;
  opt.gamma = gamma;
  return check_hypotheses(map, phi, opt);
}

}  // namespace gibbsforge
