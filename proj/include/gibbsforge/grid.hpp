#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "gibbsforge/circle.hpp"
#include "gibbsforge/dynamics.hpp"
#include "gibbsforge/errors.hpp"

namespace gibbsforge {

/// Partition of [0,1] into N bins by N+1 increasing endpoints.
class Grid {
 public:
  Grid() : Grid(std::vector<double>{0.0, 1.0}) {}

  explicit Grid(std::vector<double> endpoints) : e_(std::move(endpoints)) {
    if (e_.size() < 2) throw Error(ErrorKind::invalid_parameter, "grid needs at least one bin");
    if (e_.front() != 0.0 || e_.back() != 1.0) {
      throw Error(ErrorKind::invalid_parameter, "grid endpoints must start at 0 and end at 1");
    }
    for (std::size_t i = 1; i < e_.size(); ++i) {
      if (!(e_[i] > e_[i - 1])) {
        throw Error(ErrorKind::invalid_parameter, "grid endpoints must increase strictly");
      }
    }
  }

  static Grid uniform(std::size_t n) {
    if (n < 1) throw Error(ErrorKind::invalid_parameter, "grid needs at least one bin");
    std::vector<double> e(n + 1);
    for (std::size_t i = 0; i <= n; ++i) e[i] = static_cast<double>(i) / static_cast<double>(n);
    return Grid(std::move(e));
  }

  /// Uniform grid with extra endpoints inserted at the given breakpoints
  /// (points closer than 1e-12 to an existing endpoint are merged).
  static Grid aligned(std::size_t n, const std::vector<double>& breaks) {
    std::vector<double> e = uniform(n).e_;
    for (double b : breaks) {
      double x = wrap01(b);
      if (x == 0.0) continue;
      auto it = std::lower_bound(e.begin(), e.end(), x);
      bool close = (it != e.end() && std::fabs(*it - x) < 1e-12) ||
                   (it != e.begin() && std::fabs(*(it - 1) - x) < 1e-12);
      if (!close) e.insert(it, x);
    }
    return Grid(std::move(e));
  }

  std::size_t size() const { return e_.size() - 1; }
  const std::vector<double>& endpoints() const { return e_; }
  double lo(std::size_t i) const { return e_[i]; }
  double hi(std::size_t i) const { return e_[i + 1]; }
  double width(std::size_t i) const { return e_[i + 1] - e_[i]; }
  double midpoint(std::size_t i) const { return 0.5 * (e_[i] + e_[i + 1]); }

  std::vector<double> midpoints() const {
    std::vector<double> m(size());
    for (std::size_t i = 0; i < size(); ++i) m[i] = midpoint(i);
    return m;
  }

  double max_width() const {
    double w = 0.0;
    for (std::size_t i = 0; i < size(); ++i) w = std::max(w, width(i));
    return w;
  }

  /// Bin index containing x in [0,1]; x = 1 maps to the last bin.
  std::size_t locate(double x) const {
    if (x <= 0.0) return 0;
    if (x >= 1.0) return size() - 1;
    auto it = std::upper_bound(e_.begin(), e_.end(), x);
    return static_cast<std::size_t>(it - e_.begin()) - 1;
  }

  bool operator==(const Grid& other) const { return e_ == other.e_; }

 private:
  std::vector<double> e_;
};

/// Probability vector on the bins of a grid, read as a piecewise-constant
/// density (mass spread uniformly inside each bin).
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  DiscreteMeasure(Grid grid, std::vector<double> weights)
      : grid_(std::move(grid)), w_(std::move(weights)) {
    if (w_.size() != grid_.size()) {
      throw Error(ErrorKind::invalid_parameter, "weights do not match the grid");
    }
    double total = 0.0;
    for (double& v : w_) {
      if (v < 0.0) {
        if (v < -1e-13) throw Error(ErrorKind::invalid_parameter, "negative measure weight");
        v = 0.0;
      }
      total += v;
    }
    if (!(total > 0.0)) throw Error(ErrorKind::invalid_parameter, "measure has zero mass");
    for (double& v : w_) v /= total;
    build_cdf();
  }

  static DiscreteMeasure lebesgue(const Grid& grid) {
    std::vector<double> w(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) w[i] = grid.width(i);
    return DiscreteMeasure(grid, std::move(w));
  }

  const Grid& grid() const { return grid_; }
  const std::vector<double>& weights() const { return w_; }
  double weight(std::size_t i) const { return w_[i]; }
  std::size_t size() const { return w_.size(); }

  /// Density with respect to Lebesgue on bin i.
  double density(std::size_t i) const { return w_[i] / grid_.width(i); }

  /// Cumulative mass of [0, x].
  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    std::size_t j = grid_.locate(x);
    return cum_[j] + w_[j] * (x - grid_.lo(j)) / grid_.width(j);
  }

  /// Mass of the interval [a, b] inside [0, 1], summed bin by bin so that
  /// tiny intervals keep full relative precision.
  double mass_interval(double a, double b) const {
    a = std::clamp(a, 0.0, 1.0);
    b = std::clamp(b, 0.0, 1.0);
    if (!(b > a)) return 0.0;
    std::size_t ja = grid_.locate(a);
    std::size_t jb = grid_.locate(b);
    if (ja == jb) return w_[ja] * (b - a) / grid_.width(ja);
    double m = w_[ja] * (grid_.hi(ja) - a) / grid_.width(ja);
    for (std::size_t j = ja + 1; j < jb; ++j) m += w_[j];
    m += w_[jb] * (b - grid_.lo(jb)) / grid_.width(jb);
    return m;
  }

  /// Mass of a circle arc (wrapping arcs are split at 0).
  double mass(const Arc& arc) const {
    double m = 0.0;
    for (const Arc& p : arc.pieces()) m += mass_interval(p.lo, p.lo + p.length);
    return m;
  }

  /// Inverse-CDF draw: a bin by its weight, then a uniform point inside it.
  template <class Rng>
  double sample(Rng& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    auto it = std::upper_bound(cum_.begin() + 1, cum_.end(), u);
    std::size_t j = static_cast<std::size_t>(it - cum_.begin()) - 1;
    if (j >= w_.size()) j = w_.size() - 1;
    while (w_[j] == 0.0 && j > 0) --j;
    return grid_.lo(j) + unif(rng) * grid_.width(j);
  }

 private:
  void build_cdf() {
    cum_.assign(w_.size() + 1, 0.0);
    for (std::size_t i = 0; i < w_.size(); ++i) cum_[i + 1] = cum_[i] + w_[i];
  }

  Grid grid_;
  std::vector<double> w_;
  std::vector<double> cum_;
};

inline double l1_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (!(a.grid() == b.grid())) throw Error(ErrorKind::invalid_parameter, "measures live on different grids");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::fabs(a.weight(i) - b.weight(i));
  return d;
}

/// sup_x |F_a(x) - F_b(x)|; both CDFs are piecewise linear on the common
/// grid, so the sup is attained at an endpoint.
inline double kolmogorov_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (!(a.grid() == b.grid())) throw Error(ErrorKind::invalid_parameter, "measures live on different grids");
  double ca = 0.0, cb = 0.0, d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca += a.weight(i);
    cb += b.weight(i);
    d = std::max(d, std::fabs(ca - cb));
  }
  return d;
}

/// Grid whose endpoints are f^{-depth}(0) for a full-branch circle map
/// fixing 0. Every bin is a cylinder of length `depth`, so f maps bins
/// onto unions of bins (a Markov partition).
inline Grid cylinder_grid(const IntervalMap& map, int depth) {
  if (!map.circle() || !map.full_branch()) {
    throw Error(ErrorKind::invalid_parameter, "cylinder grids need a full-branch circle map");
  }
  if (circle_distance(map.evaluate(0.0), 0.0) > 1e-14) {
    throw Error(ErrorKind::invalid_parameter, "cylinder grids need 0 to be a fixed point");
  }
  if (depth < 0) throw Error(ErrorKind::invalid_parameter, "cylinder depth must be >= 0");
  std::vector<double> pts{0.0};
  for (int d = 0; d < depth; ++d) {
    std::vector<double> next;
    next.reserve(pts.size() * map.branches().size());
    for (double y : pts) {
      for (const auto& p : map.preimages(y)) next.push_back(p.point);
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end(),
                           [](double a, double b) { return std::fabs(a - b) < 1e-15; }),
               next.end());
    pts = std::move(next);
  }
  if (pts.front() != 0.0) pts.insert(pts.begin(), 0.0);
  pts.push_back(1.0);
  return Grid(std::move(pts));
}

enum class GridKind { automatic, uniform, aligned, cylinder };

inline GridKind parse_grid_kind(const std::string& s) {
  if (s == "auto") return GridKind::automatic;
  if (s == "uniform") return GridKind::uniform;
  if (s == "aligned") return GridKind::aligned;
  if (s == "cylinder") return GridKind::cylinder;
  throw Error(ErrorKind::invalid_parameter, "unknown grid kind '" + s + "'");
}

inline const char* to_string(GridKind k) {
  switch (k) {
    case GridKind::automatic: return "auto";
    case GridKind::uniform: return "uniform";
    case GridKind::aligned: return "aligned";
    case GridKind::cylinder: return "cylinder";
  }
  return "auto";
}

namespace detail {

/// depth with degree^depth == n, or -1.
inline int exact_log(std::size_t n, std::size_t degree) {
  if (degree < 2) return -1;
  int d = 0;
  std::size_t v = 1;
  while (v < n) {
    v *= degree;
    ++d;
  }
  return v == n ? d : -1;
}

}  // namespace detail

/// Grid used for a map at resolution n. Automatic choice: the cylinder grid
/// when the map admits one with n bins and either has affine branches or
/// keeps every bin within 4/n in width; otherwise the uniform grid with
/// branch breakpoints inserted.
inline Grid make_grid(const IntervalMap& map, std::size_t n, GridKind kind = GridKind::automatic) {
  switch (kind) {
    case GridKind::uniform: return Grid::uniform(n);
    case GridKind::aligned: return Grid::aligned(n, map.breakpoints());
    case GridKind::cylinder: {
      int d = detail::exact_log(n, map.branches().size());
      if (d < 0) {
        throw Error(ErrorKind::invalid_parameter,
                    "cylinder grid size must be a power of the number of branches");
      }
      return cylinder_grid(map, d);
    }
    case GridKind::automatic: break;
  }
  int d = detail::exact_log(n, map.branches().size());
  if (d >= 0 && map.circle() && map.full_branch() &&
      circle_distance(map.evaluate(0.0), 0.0) <= 1e-14) {
    Grid g = cylinder_grid(map, d);
    if (g.size() == n && (map.affine() || g.max_width() <= 4.0 / static_cast<double>(n))) return g;
  }
  return Grid::aligned(n, map.breakpoints());
}

}  // namespace gibbsforge
