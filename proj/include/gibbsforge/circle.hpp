#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace gibbsforge {

/// Reduce to [0, 1).
inline double wrap01(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

inline double circle_distance(double a, double b) {
  double d = std::fabs(wrap01(a) - wrap01(b));
  return std::min(d, 1.0 - d);
}

/// Signed representative of x - y in [-1/2, 1/2).
inline double circle_offset(double x, double y) {
  return wrap01(x - y + 0.5) - 0.5;
}

/// Half-open arc [lo, lo + length) of the circle R/Z, or a plain
/// subinterval of [0, 1] when lo + length <= 1. An arc may wrap past 1.
struct Arc {
  double lo = 0.0;
  double length = 0.0;

  double hi() const { return lo + length; }
  bool wraps() const { return lo + length > 1.0; }
  bool full() const { return length >= 1.0; }

  /// Offset of x from lo measured along the circle, in [0, 1).
  double offset_of(double x) const { return wrap01(x - lo); }

  bool contains(double x) const {
    if (full()) return true;
    return offset_of(x) < length;
  }

  /// Closed-interval membership for non-wrapping interval maps.
  bool contains_closed(double x, double tol = 0.0) const {
    return x >= lo - tol && x <= lo + length + tol;
  }

  /// Split into at most two non-wrapping pieces inside [0, 1].
  std::vector<Arc> pieces() const {
    if (full()) return {Arc{0.0, 1.0}};
    double start = wrap01(lo);
    if (start + length <= 1.0) return {Arc{start, length}};
    return {Arc{start, 1.0 - start}, Arc{0.0, start + length - 1.0}};
  }
};

inline double total_length(const std::vector<Arc>& arcs) {
  double s = 0.0;
  for (const auto& a : arcs) s += a.length;
  return s;
}

inline bool contains_any(const std::vector<Arc>& arcs, double x) {
  return std::any_of(arcs.begin(), arcs.end(),
                     [x](const Arc& a) { return a.contains(x); });
}

}  // namespace gibbsforge
