#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gibbsforge/circle.hpp"
#include "gibbsforge/dynamics.hpp"
#include "gibbsforge/errors.hpp"
#include "gibbsforge/grid.hpp"
#include "gibbsforge/potentials.hpp"
#include "gibbsforge/sparse.hpp"

namespace gibbsforge {

/// Collocated transfer operator: entry (i, j) sums e^{phi(y)} over the
/// preimages y of midpoint i that fall in bin j.
struct TransferMatrix {
  Grid grid;
  SparseMatrix entries;
  std::vector<std::size_t> empty_rows;
};

struct EigenData {
  double lambda = 0.0;
  std::vector<double> eigenfunction;  // h, normalized so sum h_j nu_j = 1
  DiscreteMeasure eigenmeasure;       // nu, a probability
  double residual_right = 0.0;
  double residual_left = 0.0;
  long iterations = 0;

  const Grid& grid() const { return eigenmeasure.grid(); }
};

inline TransferMatrix build_matrix(const IntervalMap& map, const Potential& phi, const Grid& grid) {
  const std::size_t n = grid.size();
  std::vector<std::vector<SparseMatrix::Entry>> rows(n);
  std::vector<std::size_t> empty;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Preimage> pre;
    try {
      pre = map.preimages(grid.midpoint(i));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::no_preimage) throw;
    }
    if (pre.empty()) {
      empty.push_back(i);
      continue;
    }
    for (const auto& p : pre) rows[i].emplace_back(grid.locate(p.point), std::exp(phi(p.point)));
  }
  return TransferMatrix{grid, SparseMatrix(n, std::move(rows)), std::move(empty)};
}

namespace detail {

/// int_p^q g(x) dx by three-point Gauss-Legendre.
template <class G>
double gauss3(G&& g, double p, double q) {
  static constexpr std::array<double, 3> nodes{-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr std::array<double, 3> wts{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double c = 0.5 * (p + q), r = 0.5 * (q - p);
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += wts[k] * g(c + r * nodes[k]);
  return s * r;
}

}  // namespace detail

/// Bin-averaged transfer operator: entry (i, j) is the mean over y in bin i
/// of the sum of e^{phi(g y)} over local inverses g with g y in bin j.
inline TransferMatrix build_matrix_averaged(const IntervalMap& map, const Potential& phi, const Grid& grid) {
  const std::size_t n = grid.size();
  std::vector<std::vector<SparseMatrix::Entry>> rows(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double p = grid.lo(j), q = grid.hi(j);
    for (const auto& b : map.branches()) {
      const double dlo = b.domain.lo, dhi = b.domain.hi();
      for (int shift = 0; shift <= (map.circle() ? 1 : 0); ++shift) {
        const double ua = std::max(p + shift, dlo);
        const double ub = std::min(q + shift, dhi);
        if (!(ub > ua)) continue;
        double va = b.forward(ua), vb = b.forward(ub);
        if (va > vb) std::swap(va, vb);
        auto weight = [&](double v) {
          const double u = b.inverse(v);
          return std::exp(phi(map.circle() ? wrap01(u) : u));
        };
        double t = va;
        while (t < vb) {
          const double k = map.circle() ? std::floor(t) : 0.0;
          std::size_t i = grid.locate(t - k);
          double end = k + grid.hi(i);
          while (end <= t && i + 1 < n) end = k + grid.hi(++i);
          if (end <= t) end = k + 1.0;
          const double seg_end = std::min(vb, end);
          const double w = detail::gauss3(weight, t, seg_end) / grid.width(i);
          if (w > 0.0) rows[i].emplace_back(j, w);
          t = seg_end;
        }
      }
    }
  }
  std::vector<std::size_t> empty;
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].empty()) empty.push_back(i);
  }
  return TransferMatrix{grid, SparseMatrix(n, std::move(rows)), std::move(empty)};
}

enum class TransferScheme { averaged, collocation };

inline TransferScheme parse_transfer_scheme(const std::string& s) {
  if (s == "averaged") return TransferScheme::averaged;
  if (s == "collocation") return TransferScheme::collocation;
  throw Error(ErrorKind::invalid_parameter, "unknown transfer scheme: " + s);
}

inline const char* to_string(TransferScheme s) {
  return s == TransferScheme::averaged ? "averaged" : "collocation";
}

struct PowerOptions {
  double tol = 1e-10;
  long max_iter = 100000;
  TransferScheme scheme = TransferScheme::averaged;
};

/// Power iteration on A and A^T from all-ones starts. The eigenvalue
/// estimate is nu^T A h / nu^T h; iteration stops once both residuals drop
/// below tol.
inline EigenData power_eigendata(const TransferMatrix& m, const PowerOptions& opt = {}) {
  if (!m.empty_rows.empty()) {
    throw Error(ErrorKind::no_preimage,
                std::to_string(m.empty_rows.size()) + " grid midpoints have no preimage");
  }
  if (!(opt.tol > 0.0)) throw Error(ErrorKind::invalid_parameter, "tol must be positive");
  const auto& a = m.entries;
  const std::size_t n = a.rows();
  std::vector<double> h(n, 1.0);
  std::vector<double> nu(n, 1.0 / static_cast<double>(n));
  double lambda = 0.0, res_r = 0.0, res_l = 0.0;
  for (long it = 0; it <= opt.max_iter; ++it) {
    std::vector<double> ah = a.multiply(h);
    std::vector<double> nua = a.left_multiply(nu);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += nu[i] * ah[i];
      den += nu[i] * h[i];
    }
    lambda = num / den;
    double hmax = 0.0, rr = 0.0, rl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      hmax = std::max(hmax, std::fabs(h[i]));
      rr = std::max(rr, std::fabs(ah[i] - lambda * h[i]));
      rl += std::fabs(nua[i] - lambda * nu[i]);
    }
    res_r = rr / hmax;
    res_l = rl;
    if (res_r <= opt.tol && res_l <= opt.tol) {
      EigenData e;
      e.lambda = lambda;
      e.residual_right = res_r;
      e.residual_left = res_l;
      e.iterations = it;
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += h[i] * nu[i];
      for (double& v : h) v /= s;
      e.eigenfunction = std::move(h);
      e.eigenmeasure = DiscreteMeasure(m.grid, std::move(nu));
      return e;
    }
    double amax = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      amax = std::max(amax, ah[i]);
      total += nua[i];
    }
    if (!(amax > 0.0) || !(total > 0.0)) {
      throw Error(ErrorKind::no_convergence, "power iteration collapsed to zero");
    }
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = ah[i] / amax;
      nu[i] = nua[i] / total;
    }
  }
  throw NoConvergenceError("power iteration residuals " + std::to_string(res_r) + ", " +
                               std::to_string(res_l) + " above tol",
                           opt.max_iter);
}

inline EigenData power_eigendata(const TransferMatrix& m, double tol, long max_iter) {
  return power_eigendata(m, PowerOptions{tol, max_iter, TransferScheme::averaged});
}

inline EigenData solve_transfer(const IntervalMap& map, const Potential& phi, const Grid& grid,
                                const PowerOptions& opt = {}) {
  return power_eigendata(opt.scheme == TransferScheme::averaged ? build_matrix_averaged(map, phi, grid)
                                                                : build_matrix(map, phi, grid),
                         opt);
}

inline double pressure(const EigenData& e) { return std::log(e.lambda); }

/// J_nu f(x) = lambda e^{-phi(x)}.
inline double jacobian_at(const EigenData& e, const Potential& phi, double x) {
  return e.lambda * std::exp(-phi(x));
}

/// Closed interval [a, a + length] on the circle (or in [0,1]).
struct TestInterval {
  double a;
  double length;
};

namespace detail {

/// int over [a, b] (inside [0,1]) of g d(nu), with nu read as a
/// piecewise-constant density.
template <class G>
double integrate_against(const DiscreteMeasure& nu, G&& g, double a, double b) {
  double s = 0.0;
  if (!(b > a)) return 0.0;
  const Grid& grid = nu.grid();
  for (std::size_t j = grid.locate(a); j < grid.size() && grid.lo(j) < b; ++j) {
    double p = std::max(a, grid.lo(j)), q = std::min(b, grid.hi(j));
    if (q > p && nu.weight(j) > 0.0) s += nu.density(j) * gauss3(g, p, q);
  }
  return s;
}

}  // namespace detail

/// max over test intervals A of |nu(f(A)) - int_A lambda e^{-phi} d nu|.
inline double conformality_residual(const IntervalMap& map, const EigenData& e,
                                    const Potential& phi,
                                    const std::vector<TestInterval>& intervals) {
  const DiscreteMeasure& nu = e.eigenmeasure;
  double worst = 0.0;
  for (const auto& iv : intervals) {
    auto loc = map.locate(iv.a);
    if (!loc) throw Error(ErrorKind::point_outside_domain, "test interval starts outside the domain");
    const BranchSpec& b = map.branch(loc->branch);
    const double ua = loc->u, ub = loc->u + iv.length;
    if (ub > b.domain.hi() + 1e-15 || iv.length <= 0.0) {
      throw Error(ErrorKind::interval_spans_branches, "test interval leaves its branch domain");
    }
    const double va = b.forward(ua), vb = b.forward(std::min(ub, b.domain.hi()));
    const double image_lo = std::min(va, vb), image_len = std::fabs(vb - va);
    double image_mass;
    if (map.circle()) {
      image_mass = image_len >= 1.0 ? 1.0 : nu.mass(Arc{wrap01(image_lo), image_len});
    } else {
      image_mass = nu.mass_interval(image_lo, image_lo + image_len);
    }
    auto jac = [&](double x) { return e.lambda * std::exp(-phi(map.circle() ? wrap01(x) : x)); };
    double integral = 0.0;
    if (map.circle()) {
      for (const Arc& piece : Arc{wrap01(iv.a), iv.length}.pieces()) {
        integral += detail::integrate_against(nu, jac, piece.lo, piece.lo + piece.length);
      }
    } else {
      integral = detail::integrate_against(nu, jac, iv.a, iv.a + iv.length);
    }
    worst = std::max(worst, std::fabs(image_mass - integral));
  }
  return worst;
}

}  // namespace gibbsforge
