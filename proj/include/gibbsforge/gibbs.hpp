#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "gibbsforge/circle.hpp"
#include "gibbsforge/dynamics.hpp"
#include "gibbsforge/errors.hpp"
#include "gibbsforge/grid.hpp"
#include "gibbsforge/hyptimes.hpp"
#include "gibbsforge/potentials.hpp"
#include "gibbsforge/transfer.hpp"

namespace gibbsforge {

struct DynamicalBall {
  double center = 0.0;
  long length = 0;
  double radius = 0.0;
  Arc interval;  // B(x, n, delta); for interval maps a plain subinterval
};

namespace detail {

/// Offset (relative to u) of the local preimage of v + tau along the branch
/// chain of the point u, continuing into the neighbouring branch on the
/// circle and clamping at the domain edge otherwise.
inline double pull_offset(const IntervalMap& map, std::size_t bi, double u, double v, double tau) {
  const BranchSpec& b = map.branch(bi);
  const double t = v + tau;
  const double r_lo = b.range.lo, r_hi = b.range.hi();
  if (t >= r_lo && t <= r_hi) return b.inverse(t) - u;
  if (b.direction == Monotone::decreasing || !map.circle()) {
    return b.inverse(std::clamp(t, r_lo, r_hi)) - u;
  }
  if (t > r_hi) {
    auto nb = map.next_branch(bi);
    const double to_edge = b.domain.hi() - u;
    if (!nb) return to_edge;
    const BranchSpec& n = map.branch(*nb);
    const double target = n.range.lo + (t - r_hi);
    if (target > n.range.hi()) return to_edge + n.domain.length;
    return to_edge + (n.inverse(target) - n.domain.lo);
  }
  auto pb = map.prev_branch(bi);
  const double to_edge = u - b.domain.lo;
  if (!pb) return -to_edge;
  const BranchSpec& p = map.branch(*pb);
  const double target = p.range.hi() - (r_lo - t);
  if (target < p.range.lo) return -to_edge - p.domain.length;
  return -to_edge - (p.domain.hi() - p.inverse(target));
}

}  // namespace detail

inline DynamicalBall dynamical_ball(const IntervalMap& map, double x, long n, double delta) {
  if (!(delta > 0.0 && delta <= 0.5 * map.min_branch_length())) {
    throw Error(ErrorKind::invalid_parameter, "delta must lie in (0, min branch length / 2]");
  }
  if (n < 0) throw Error(ErrorKind::invalid_parameter, "ball length must be >= 0");
  std::vector<BranchPoint> chain;
  std::vector<double> pts{x};
  chain.reserve(static_cast<std::size_t>(n));
  double y = x;
  for (long j = 0; j < n; ++j) {
    auto loc = map.locate(y);
    if (!loc) throw OrbitEscapedError(x, j);
    chain.push_back(*loc);
    y = map.evaluate(y);
    pts.push_back(y);
  }
  double lo = -delta, hi = delta;
  if (!map.circle()) {
    lo = std::max(lo, -pts.back());
    hi = std::min(hi, 1.0 - pts.back());
  }
  for (long j = n - 1; j >= 0; --j) {
    const BranchPoint& c = chain[static_cast<std::size_t>(j)];
    const BranchSpec& b = map.branch(c.branch);
    const double v = b.forward(c.u);
    double a = detail::pull_offset(map, c.branch, c.u, v, lo);
    double d = detail::pull_offset(map, c.branch, c.u, v, hi);
    if (a > d) std::swap(a, d);
    lo = std::max(a, -delta);
    hi = std::min(d, delta);
    if (!map.circle()) {
      const double xj = pts[static_cast<std::size_t>(j)];
      lo = std::max(lo, -xj);
      hi = std::min(hi, 1.0 - xj);
    }
    const double floor_width = 4.0 * std::numeric_limits<double>::epsilon() *
                               std::max(1.0, std::fabs(pts[static_cast<std::size_t>(j)]));
    if (!(hi - lo > floor_width)) {
      throw Error(ErrorKind::degenerate_ball, "dynamical ball collapsed at step " + std::to_string(j));
    }
  }
  DynamicalBall ball;
  ball.center = x;
  ball.length = n;
  ball.radius = delta;
  ball.interval = Arc{map.circle() ? wrap01(x + lo) : x + lo, hi - lo};
  return ball;
}

/// Sample points of the ball: `count` equally spaced interior points.
inline std::vector<double> ball_samples(const IntervalMap& map, const DynamicalBall& ball, int count) {
  std::vector<double> ys;
  for (int k = 0; k < count; ++k) {
    double y = ball.interval.lo + ball.interval.length * (k + 0.5) / count;
    ys.push_back(map.circle() ? wrap01(y) : y);
  }
  return ys;
}

/// max over sampled y, z in the ball of exp(S_n phi(z) - S_n phi(y)), which
/// equals the ratio of Jacobians J_nu f^n(y) / J_nu f^n(z).
inline double distortion_ratio(const IntervalMap& map, const Potential& phi, const EigenData&,
                               const DynamicalBall& ball, int count = 50) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double y : ball_samples(map, ball, count)) {
    double s = birkhoff_sum(map, phi, y, ball.length);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return std::exp(hi - lo);
}

/// K0 = exp(C (2 delta)^a sum_{j>=0} e^{-c a j / 2}): the distortion bound at
/// hyperbolic times for a potential with Hoelder data (C, a).
inline double distortion_bound(double hoelder_constant, double hoelder_exponent, double c, double delta) {
  if (!(c > 0.0)) return std::numeric_limits<double>::infinity();
  const double series = 1.0 / (1.0 - std::exp(-c * hoelder_exponent / 2.0));
  return std::exp(hoelder_constant * std::pow(2.0 * delta, hoelder_exponent) * series);
}

inline bool is_hyperbolic_time(const IntervalMap& map, double x, long n, double c) {
  if (n < 1) return false;
  auto rec = hyperbolic_times(make_orbit(map, x, n), c);
  return !rec.times.empty() && rec.times.back() == n;
}

/// nu(B) / exp(-P n + S_n phi(x)) for the ball B = B(x, n, delta).
///
/// Balls at large n are far below the grid resolution, so nu(B) is read off
/// the conformal relation nu(B) = lambda^{-n} int_{f^n B} e^{S_n phi(g y)} d nu(y),
/// g the inverse of f^n on B: the ball is cut into `pieces` subintervals,
/// each pushed forward n steps and weighed with nu of its image.
inline double ball_ratio(const IntervalMap& map, const Potential& phi, const EigenData& e,
                         const DynamicalBall& ball, int pieces = 256) {
  const DiscreteMeasure& nu = e.eigenmeasure;
  const long n = ball.length;
  const double sx = birkhoff_sum(map, phi, ball.center, n);
  auto image = [&](double u) {
    double y = map.circle() ? wrap01(u) : u;
    for (long j = 0; j < n; ++j) y = map.evaluate(y);
    return y;
  };
  std::vector<double> v(static_cast<std::size_t>(pieces) + 1);
  for (int k = 0; k <= pieces; ++k) {
    v[static_cast<std::size_t>(k)] = image(ball.interval.lo + ball.interval.length * k / pieces);
  }
  double total = 0.0;
  for (int k = 0; k < pieces; ++k) {
    const double a = v[static_cast<std::size_t>(k)], b = v[static_cast<std::size_t>(k) + 1];
    double m;
    if (map.circle()) {
      const double d = circle_offset(b, a);
      m = nu.mass(d >= 0.0 ? Arc{a, d} : Arc{b, -d});
    } else {
      m = nu.mass_interval(std::min(a, b), std::max(a, b));
    }
    if (!(m > 0.0)) continue;
    const double mid = ball.interval.lo + ball.interval.length * (k + 0.5) / pieces;
    total += m * std::exp(birkhoff_sum(map, phi, map.circle() ? wrap01(mid) : mid, n) - sx);
  }
  return total;
}

/// nu(B(x, n, delta)) / exp(-P n + S_n phi(x)) at a c-hyperbolic time n.
inline double gibbs_ratio(const IntervalMap& map, const Potential& phi, const EigenData& e, double x, long n,
                          double delta, double c) {
  if (!is_hyperbolic_time(map, x, n, c)) {
    throw Error(ErrorKind::not_hyperbolic_time, std::to_string(n) + " is not a hyperbolic time");
  }
  return ball_ratio(map, phi, e, dynamical_ball(map, x, n, delta));
}

/// Default ball radius: half the distance from the contraction region to
/// the boundary of the covering elements containing it, floored at 0.05
/// and capped at half the shortest branch.
inline double default_delta(const IntervalMap& map) {
  double best = std::numeric_limits<double>::infinity();
  for (const Arc& a : map.contraction_region()) {
    for (int k = 0; k < map.q(); ++k) {
      const Arc& p = map.covering()[static_cast<std::size_t>(k)];
      if (!p.contains(a.lo) && !p.contains_closed(a.lo)) continue;
      double start = p.offset_of(a.lo);
      double end = start + a.length;
      best = std::min({best, start, std::max(0.0, p.length - end)});
    }
  }
  double d = std::isfinite(best) ? std::max(0.05, 0.5 * best) : 0.05;
  return std::min(d, 0.5 * map.min_branch_length());
}

struct GibbsSample {
  double x;
  long n;
  double ratio;
};

struct GibbsSurvey {
  std::vector<GibbsSample> rows;
  double K = 1.0;  // smallest K with every ratio in [1/K, K]
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
};

/// Gibbs ratios at every hyperbolic time n <= n_max of `samples` points drawn
/// from nu.
inline GibbsSurvey gibbs_survey(const IntervalMap& map, const Potential& phi, const EigenData& e,
                                double c, double delta, long n_max, long samples, std::uint64_t seed) {
  GibbsSurvey out;
  const DiscreteMeasure& nu = e.eigenmeasure;
  for (long s = 0; s < samples; ++s) {
    auto rng = sample_rng(seed, static_cast<std::uint64_t>(s));
    const double x = nu.sample(rng);
    OrbitRecord orbit;
    try {
      orbit = make_orbit(map, x, n_max);
    } catch (const OrbitEscapedError&) {
      continue;
    }
    for (long n : hyperbolic_times(orbit, c).times) {
      const double r = ball_ratio(map, phi, e, dynamical_ball(map, x, n, delta));
      out.rows.push_back({x, n, r});
      out.min_ratio = std::min(out.min_ratio, r);
      out.max_ratio = std::max(out.max_ratio, r);
    }
  }
  if (!out.rows.empty()) {
    out.K = std::max(out.max_ratio, out.min_ratio > 0.0 ? 1.0 / out.min_ratio
                                                        : std::numeric_limits<double>::infinity());
  }
  return out;
}

}  // namespace gibbsforge
