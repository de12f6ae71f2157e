#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "gibbsforge/dynamics.hpp"
#include "gibbsforge/errors.hpp"
#include "gibbsforge/grid.hpp"
#include "gibbsforge/hyptimes.hpp"
#include "gibbsforge/potentials.hpp"
#include "gibbsforge/sparse.hpp"
#include "gibbsforge/transfer.hpp"

namespace gibbsforge {

/// Mass transport matrix of f on the grid, rows = source bins: entry (j, i)
/// is the fraction of bin j (Lebesgue-uniform inside the bin) that f sends
/// into bin i. Rows sum to the fraction of bin j inside the map's domain.
inline SparseMatrix pushforward_matrix(const IntervalMap& map, const Grid& grid) {
  const std::size_t n = grid.size();
  std::vector<std::vector<SparseMatrix::Entry>> rows(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double p = grid.lo(j), q = grid.hi(j), w = q - p;
    for (const auto& b : map.branches()) {
      const double dlo = b.domain.lo, dhi = b.domain.hi();
      for (int shift = 0; shift <= (map.circle() ? 1 : 0); ++shift) {
        const double ua = std::max(p + shift, dlo);
        const double ub = std::min(q + shift, dhi);
        if (!(ub > ua)) continue;
        double va = b.forward(ua), vb = b.forward(ub);
        if (va > vb) std::swap(va, vb);
        double t = va;
        int guard = 0;
        while (t < vb && guard++ < 1000000) {
          const double k = map.circle() ? std::floor(t) : 0.0;
          std::size_t i = grid.locate(t - k);
          double end = k + grid.hi(i);
          while (end <= t && i + 1 < n) end = k + grid.hi(++i);
          if (end <= t) end = k + 1.0;
          const double seg_end = std::min(vb, end);
          const double mass = std::fabs(b.inverse(seg_end) - b.inverse(t)) / w;
          if (mass > 0.0) rows[j].emplace_back(i, mass);
          t = seg_end;
        }
      }
    }
  }
  return SparseMatrix(n, std::move(rows));
}

/// Mass transport with nu as the reference inside bins: a measure with
/// constant density w.r.t. nu on bin j sends the fraction
///   int_{bin i \cap f(bin j)} e^{phi(g y)} d nu(y) / sum over all i
/// to bin i, g the local inverse. This is how f moves nu itself (by
/// conformality nu(g A) = lambda^{-1} int_A e^{phi o g} d nu), so it also
/// moves measures that are singular w.r.t. Lebesgue. Rows of bins with
/// nu-mass 0 fall back to the Lebesgue-reference row.
inline SparseMatrix conformal_pushforward_matrix(const IntervalMap& map, const Potential& phi,
                                                 const EigenData& e) {
  const DiscreteMeasure& nu = e.eigenmeasure;
  const Grid& grid = nu.grid();
  const SparseMatrix ulam = pushforward_matrix(map, grid);
  const std::size_t n = grid.size();
  std::vector<std::vector<SparseMatrix::Entry>> rows(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double p = grid.lo(j), q = grid.hi(j);
    double total = 0.0;
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
          if (nu.weight(i) > 0.0) {
            const double m = nu.density(i) * detail::gauss3(weight, t, seg_end);
            if (m > 0.0) {
              rows[j].emplace_back(i, m);
              total += m;
            }
          }
          t = seg_end;
        }
      }
    }
    if (nu.weight(j) > 0.0 && total > 0.0) {
      for (auto& en : rows[j]) en.second /= total;
    } else {
      rows[j].clear();
      for (std::size_t k = ulam.row_begin(j); k < ulam.row_end(j); ++k) {
        rows[j].emplace_back(ulam.col(k), ulam.value(k));
      }
    }
  }
  return SparseMatrix(n, std::move(rows));
}

namespace detail {

inline std::vector<double> renormalized(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  if (s > 0.0) {
    for (double& x : v) x /= s;
  }
  return v;
}

}  // namespace detail

/// f_* mu on the grid (renormalized if mass leaves the domain).
inline DiscreteMeasure pushforward(const SparseMatrix& pf, const DiscreteMeasure& mu) {
  return DiscreteMeasure(mu.grid(), pf.left_multiply(mu.weights()));
}

inline DiscreteMeasure pushforward(const IntervalMap& map, const DiscreteMeasure& mu) {
  return pushforward(pushforward_matrix(map, mu.grid()), mu);
}

/// (1/n) sum_{j<n} of the iterates of mu under a transport matrix.
inline DiscreteMeasure cesaro_pushforward(const SparseMatrix& transport, const DiscreteMeasure& mu, long n) {
  if (n < 1) throw Error(ErrorKind::invalid_parameter, "cesaro_pushforward needs n >= 1");
  std::vector<double> cur = mu.weights();
  std::vector<double> acc(cur.size(), 0.0);
  for (long k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < cur.size(); ++i) acc[i] += cur[i];
    if (k + 1 < n) cur = detail::renormalized(transport.left_multiply(cur));
  }
  return DiscreteMeasure(mu.grid(), std::move(acc));
}

/// (1/n) sum_{j<n} f^j_* nu with Lebesgue-uniform mass inside bins.
inline DiscreteMeasure cesaro_pushforward(const IntervalMap& map, const DiscreteMeasure& nu, long n) {
  return cesaro_pushforward(pushforward_matrix(map, nu.grid()), nu, n);
}

/// nu_n = (1/n) sum_{j<n} f^j_* nu for the eigenmeasure, transported with
/// nu as the sub-bin reference.
inline DiscreteMeasure cesaro_pushforward(const IntervalMap& map, const Potential& phi, const EigenData& e,
                                          long n) {
  return cesaro_pushforward(conformal_pushforward_matrix(map, phi, e), e.eigenmeasure, n);
}

struct EquilibriumState {
  DiscreteMeasure measure;             // mu = h nu
  std::vector<double> density_vs_nu;   // d mu / d nu per bin
  double density_sup = 0.0;
  double density_inf = 0.0;
  double entropy = std::numeric_limits<double>::quiet_NaN();
  double entropy_direct = std::numeric_limits<double>::quiet_NaN();
  double rokhlin_discrepancy = std::numeric_limits<double>::quiet_NaN();
  double phi_integral = std::numeric_limits<double>::quiet_NaN();
  double variational_defect = std::numeric_limits<double>::quiet_NaN();
};

inline EquilibriumState equilibrium_from_eigendata(const EigenData& e) {
  const auto& nu = e.eigenmeasure;
  std::vector<double> w(nu.size());
  for (std::size_t j = 0; j < nu.size(); ++j) w[j] = e.eigenfunction[j] * nu.weight(j);
  EquilibriumState s;
  s.measure = DiscreteMeasure(nu.grid(), std::move(w));
  s.density_vs_nu.assign(nu.size(), 0.0);
  s.density_sup = 0.0;
  s.density_inf = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < nu.size(); ++j) {
    if (nu.weight(j) <= 0.0) continue;
    const double d = s.measure.weight(j) / nu.weight(j);
    s.density_vs_nu[j] = d;
    s.density_sup = std::max(s.density_sup, d);
    s.density_inf = std::min(s.density_inf, d);
  }
  return s;
}

inline double phi_integral(const Potential& phi, const DiscreteMeasure& mu) {
  double s = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (mu.weight(j) > 0.0) s += mu.weight(j) * phi(mu.grid().midpoint(j));
  }
  return s;
}

struct RokhlinEntropy {
  double value;        // int log(lambda e^{-phi} h o f / h) d mu
  double direct;       // log lambda - int phi d mu
  double discrepancy;  // |value - direct|
};

inline RokhlinEntropy entropy_rokhlin(const IntervalMap& map, const Potential& phi,
                                      const EquilibriumState& eq, const EigenData& e) {
  if (!(eq.density_inf > 0.0)) {
    throw Error(ErrorKind::degenerate_density, "density d mu / d nu is not bounded away from 0");
  }
  const Grid& g = eq.measure.grid();
  const auto& h = e.eigenfunction;
  const double log_lambda = std::log(e.lambda);
  double value = 0.0, integral = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double mj = eq.measure.weight(j);
    if (mj <= 0.0) continue;
    const double x = g.midpoint(j);
    const double ph = phi(x);
    const double hf = h[g.locate(map.evaluate(x))];
    if (!(hf > 0.0) || !(h[j] > 0.0)) {
      throw Error(ErrorKind::degenerate_density, "eigenfunction vanishes on the support of mu");
    }
    value += mj * (log_lambda - ph + std::log(hf) - std::log(h[j]));
    integral += mj * ph;
  }
  const double direct = log_lambda - integral;
  return {value, direct, std::fabs(value - direct)};
}

inline double variational_defect(const EquilibriumState& eq, const EigenData& e) {
  return std::fabs(eq.entropy + eq.phi_integral - std::log(e.lambda));
}

/// Equilibrium state with entropy, phi integral and defect filled in.
inline EquilibriumState solve_equilibrium(const IntervalMap& map, const Potential& phi, const EigenData& e) {
  EquilibriumState s = equilibrium_from_eigendata(e);
  s.phi_integral = phi_integral(phi, s.measure);
  RokhlinEntropy r = entropy_rokhlin(map, phi, s, e);
  s.entropy = r.value;
  s.entropy_direct = r.direct;
  s.rokhlin_discrepancy = r.discrepancy;
  s.variational_defect = variational_defect(s, e);
  return s;
}

/// || f_* mu - mu ||_1 on the grid.
inline double invariance_defect(const IntervalMap& map, const DiscreteMeasure& mu) {
  return l1_distance(pushforward(map, mu), mu);
}

/// Same, with mass moved inside each bin according to nu.
inline double invariance_defect(const IntervalMap& map, const Potential& phi, const EigenData& e,
                                const DiscreteMeasure& mu) {
  return l1_distance(pushforward(conformal_pushforward_matrix(map, phi, e), mu), mu);
}

/// int psi d mu with mu read as a piecewise-constant density.
inline double integrate(const DiscreteMeasure& mu, const std::function<double(double)>& psi) {
  return detail::integrate_against(mu, psi, 0.0, 1.0);
}

/// Default orbit perturbation for long forward orbits of circle maps.
inline constexpr double kOrbitJitter = 1e-13;

/// Orbit segment x_0, ..., x_{n-1} built backwards from x_{n-1} drawn from
/// nu. Each step picks the preimage y of the current point with probability
/// proportional to e^{phi(y)} h(y), the time reversal of the mu-stationary
/// process. Inverse branches contract, so the segment is a true orbit up to
/// rounding, unlike a forward orbit from a grid sample, which follows the
/// Lebesgue-typical statistics once rounding has been amplified.
template <class Rng>
std::vector<double> backward_orbit(const IntervalMap& map, const Potential& phi, const EigenData& e, long n,
                                   Rng& rng) {
  if (n < 1) throw Error(ErrorKind::invalid_parameter, "orbit length must be >= 1");
  const Grid& g = e.grid();
  std::vector<double> pts(static_cast<std::size_t>(n));
  pts.back() = e.eigenmeasure.sample(rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> w;
  for (long j = n - 2; j >= 0; --j) {
    const auto pre = map.preimages(pts[static_cast<std::size_t>(j) + 1]);
    w.assign(pre.size(), 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < pre.size(); ++k) {
      w[k] = std::exp(phi(pre[k].point)) * e.eigenfunction[g.locate(pre[k].point)];
      total += w[k];
    }
    double u = unif(rng) * total;
    std::size_t pick = 0;
    if (total > 0.0) {
      while (pick + 1 < pre.size() && u >= w[pick]) u -= w[pick++];
    } else {
      pick = static_cast<std::size_t>(unif(rng) * static_cast<double>(pre.size())) % pre.size();
    }
    pts[static_cast<std::size_t>(j)] = pre[pick].point;
  }
  return pts;
}

/// max over psi of |median Birkhoff average of psi - int psi d mu|, the
/// averages taken over `samples` backward orbits of length n seeded by nu.
inline double basin_check(const IntervalMap& map, const Potential& phi, const EigenData& e,
                          const EquilibriumState& eq,
                          const std::vector<std::function<double(double)>>& test_functions, long n,
                          long samples, std::uint64_t seed) {
  if (n < 1 || samples < 1) throw Error(ErrorKind::invalid_parameter, "n and samples must be >= 1");
  std::vector<std::vector<double>> averages(test_functions.size());
  for (long s = 0; s < samples; ++s) {
    auto rng = sample_rng(seed, static_cast<std::uint64_t>(s));
    const std::vector<double> orbit = backward_orbit(map, phi, e, n, rng);
    for (std::size_t k = 0; k < test_functions.size(); ++k) {
      double sum = 0.0;
      for (double y : orbit) sum += test_functions[k](y);
      averages[k].push_back(sum / static_cast<double>(orbit.size()));
    }
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < test_functions.size(); ++k) {
    auto& a = averages[k];
    std::sort(a.begin(), a.end());
    const std::size_t m = a.size();
    const double median = m % 2 ? a[m / 2] : 0.5 * (a[m / 2 - 1] + a[m / 2]);
    worst = std::max(worst, std::fabs(median - integrate(eq.measure, test_functions[k])));
  }
  return worst;
}

}  // namespace gibbsforge
