#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gibbsforge/dynamics.hpp"
#include "gibbsforge/equilibrium.hpp"
#include "gibbsforge/errors.hpp"
#include "gibbsforge/grid.hpp"
#include "gibbsforge/hypotheses.hpp"
#include "gibbsforge/potentials.hpp"
#include "gibbsforge/sparse.hpp"
#include "gibbsforge/transfer.hpp"

namespace gibbsforge {

/// One-parameter family (f_t, phi_t); t = 0 is the base point.
struct PerturbationFamily {
  std::vector<double> parameter_values;
  std::function<IntervalMap(double)> map_at;
  std::function<Potential(double, const IntervalMap&)> potential_at;
};

struct SweepResult {
  std::vector<double> parameter;
  std::vector<double> distance_L1;
  std::vector<double> distance_kolmogorov;
  std::vector<double> lambdas;
  std::vector<double> pressures;
};

/// Coordinate in which the translations act. `lebesgue`: plain additive
/// noise. `conformal`: translations in the coordinate H(x) = nu([0, x)),
/// i.e. y = H^{-1}(H(f x) + omega); the law of y is then absolutely
/// continuous w.r.t. nu with density 1/(2 eps), and when nu is Lebesgue the
/// two coincide.
enum class NoiseReference { lebesgue, conformal };

inline NoiseReference parse_noise_reference(const std::string& s) {
  if (s == "lebesgue") return NoiseReference::lebesgue;
  if (s == "conformal") return NoiseReference::conformal;
  throw Error(ErrorKind::invalid_parameter, "unknown noise reference '" + s + "'");
}

inline const char* to_string(NoiseReference r) {
  return r == NoiseReference::lebesgue ? "lebesgue" : "conformal";
}

struct SweepOptions {
  HypothesisOptions hypotheses;
  PowerOptions power;
  NoiseReference noise = NoiseReference::conformal;
};

namespace detail {

inline void require_hypotheses(const IntervalMap& map, const Potential& phi,
                               const HypothesisOptions& opt, const std::string& where) {
  HypothesisReport r = check_hypotheses(map, phi, opt);
  if (!r.passes_all()) {
    std::string names;
    for (const auto& f : r.failing()) names += (names.empty() ? "" : ",") + f;
    throw Error(ErrorKind::hypothesis_violated, where + ": fails (" + names + ")");
  }
}

}  // namespace detail

/// Equilibrium states along the family on one fixed grid, compared with the
/// base state at t = 0.
inline SweepResult statistical_sweep(const PerturbationFamily& family, const Grid& grid,
                                     const SweepOptions& opt = {}) {
  auto equilibrium_at = [&](double t, double& lambda) {
    IntervalMap map = family.map_at(t);
    Potential phi = family.potential_at(t, map);
    detail::require_hypotheses(map, phi, opt.hypotheses, "t=" + std::to_string(t));
    EigenData e = solve_transfer(map, phi, grid, opt.power);
    lambda = e.lambda;
    return equilibrium_from_eigendata(e).measure;
  };
  double base_lambda = 0.0;
  const DiscreteMeasure base = equilibrium_at(0.0, base_lambda);
  SweepResult r;
  for (double t : family.parameter_values) {
    double lambda = 0.0;
    DiscreteMeasure mu = t == 0.0 ? base : equilibrium_at(t, lambda);
    if (t == 0.0) lambda = base_lambda;
    r.parameter.push_back(t);
    r.distance_L1.push_back(l1_distance(mu, base));
    r.distance_kolmogorov.push_back(kolmogorov_distance(mu, base));
    r.lambdas.push_back(lambda);
    r.pressures.push_back(std::log(lambda));
  }
  return r;
}

/// Transition matrix of x -> x + omega (mod 1), omega uniform on
/// [-eps, eps], between grid bins with uniform mass inside each bin.
struct NoiseKernel {
  double epsilon = 0.0;
  SparseMatrix matrix;
};

namespace detail {

/// Lebesgue area of {(x, y) : x in [a, b], y in [c, d], |y - x| <= eps}.
inline double band_overlap(double a, double b, double c, double d, double eps) {
  auto ramp = [](double z) { return z > 0.0 ? 0.5 * z * z : 0.0; };
  auto r = [&](double k) { return ramp(k + eps) - ramp(k - eps); };
  return r(d - a) - r(c - a) - r(d - b) + r(c - b);
}

/// Translation kernel between the cells [e_i, e_{i+1}] of a partition of
/// [0, 1]; zero-length cells spread their mass over [e_i - eps, e_i + eps].
inline SparseMatrix translation_kernel(const std::vector<double>& e, double epsilon, bool circle) {
  const std::size_t n = e.size() - 1;
  std::vector<std::vector<SparseMatrix::Entry>> rows(n);
  const int reach = circle ? static_cast<int>(std::ceil(epsilon)) + 1 : 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = e[i], b = e[i + 1], w = b - a;
    for (int s = -reach; s <= reach; ++s) {
      const double lo = a - epsilon - s, hi = b + epsilon - s;
      if (hi <= 0.0 || lo >= 1.0) continue;
      auto it = std::upper_bound(e.begin(), e.end(), std::max(0.0, lo));
      std::size_t j = it == e.begin() ? 0 : static_cast<std::size_t>(it - e.begin()) - 1;
      for (; j < n && e[j] < hi; ++j) {
        const double c = e[j] + s, d = e[j + 1] + s;
        double v;
        if (w > 1e-300) {
          v = band_overlap(a, b, c, d, epsilon) / (w * 2.0 * epsilon);
        } else {
          v = std::max(0.0, std::min(d, a + epsilon) - std::max(c, a - epsilon)) / (2.0 * epsilon);
        }
        if (v > 0.0) rows[i].emplace_back(j, v);
      }
    }
    double total = 0.0;
    for (const auto& en : rows[i]) total += en.second;
    if (total > 0.0) {
      for (auto& en : rows[i]) en.second /= total;
    }
  }
  return SparseMatrix(n, std::move(rows));
}

}  // namespace detail

inline NoiseKernel make_noise_kernel(const Grid& grid, double epsilon, bool circle = true) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::invalid_parameter, "epsilon must be positive");
  if (epsilon < grid.max_width()) {
    throw Error(ErrorKind::grid_too_coarse, "epsilon is below the grid's bin width");
  }
  return NoiseKernel{epsilon, detail::translation_kernel(grid.endpoints(), epsilon, circle)};
}

/// Kernel of translations in the nu-coordinate (see NoiseReference). Bins
/// are cells of length nu_j there, so epsilon must be at least max nu_j.
inline NoiseKernel make_noise_kernel(const DiscreteMeasure& nu, double epsilon, bool circle = true) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::invalid_parameter, "epsilon must be positive");
  std::vector<double> e{0.0};
  double widest = 0.0;
  for (double w : nu.weights()) {
    e.push_back(e.back() + w);
    widest = std::max(widest, w);
  }
  e.back() = 1.0;
  if (epsilon < widest) {
    throw Error(ErrorKind::grid_too_coarse, "epsilon is below the largest nu-mass of a bin");
  }
  return NoiseKernel{epsilon, detail::translation_kernel(e, epsilon, circle)};
}

/// Row-stochastic transition of the chain x -> f(x) + omega: first the mass
/// transport of f, then the noise kernel. Rows that lost mass outside the
/// domain (interval maps) are renormalized.
inline SparseMatrix noisy_transition(const SparseMatrix& transport, const NoiseKernel& kernel) {
  SparseMatrix t = multiply(transport, kernel.matrix);
  std::vector<std::vector<SparseMatrix::Entry>> rows(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const double s = t.row_sum(i);
    for (std::size_t k = t.row_begin(i); k < t.row_end(i); ++k) {
      rows[i].emplace_back(t.col(k), s > 0.0 ? t.value(k) / s : t.value(k));
    }
  }
  return SparseMatrix(t.cols(), std::move(rows));
}

inline SparseMatrix noisy_transition(const IntervalMap& map, const Grid& grid, const NoiseKernel& kernel) {
  return noisy_transition(pushforward_matrix(map, grid), kernel);
}

struct StationaryResult {
  DiscreteMeasure measure;
  double residual = 0.0;
  long iterations = 0;
};

/// Leading left fixed vector of a row-stochastic matrix by power iteration
/// from the uniform vector.
inline StationaryResult stationary_measure(const SparseMatrix& t, const Grid& grid, double tol = 1e-10,
                                           long max_iter = 100000) {
  const std::size_t n = t.rows();
  std::vector<double> mu(n, 1.0 / static_cast<double>(n));
  double res = 0.0;
  for (long it = 0; it <= max_iter; ++it) {
    std::vector<double> next = detail::renormalized(t.left_multiply(mu));
    res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res += std::fabs(next[i] - mu[i]);
    mu = std::move(next);
    if (res <= tol) return {DiscreteMeasure(grid, std::move(mu)), res, it + 1};
  }
  throw NoConvergenceError("stationary measure residual " + std::to_string(res), max_iter);
}

/// (1/n) sum_{j<n} nu T^j: the stationary measure reached by pushing the
/// initial measure through the chain.
inline DiscreteMeasure stationary_cesaro(const SparseMatrix& t, const DiscreteMeasure& nu, long n) {
  std::vector<double> cur = nu.weights(), acc(cur.size(), 0.0);
  for (long k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < cur.size(); ++i) acc[i] += cur[i];
    cur = detail::renormalized(t.left_multiply(cur));
  }
  return DiscreteMeasure(nu.grid(), std::move(acc));
}

/// L1(nu) distance between d mu_eps / d nu and d mu / d nu; mass of mu_eps
/// on bins where nu vanishes counts in full.
inline double nu_density_distance(const DiscreteMeasure& mu_eps, const DiscreteMeasure& mu,
                                  const DiscreteMeasure& nu) {
  double d = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu.weight(i) > 0.0) {
      d += nu.weight(i) * std::fabs(mu_eps.weight(i) / nu.weight(i) - mu.weight(i) / nu.weight(i));
    } else {
      d += mu_eps.weight(i) + mu.weight(i);
    }
  }
  return d;
}

/// Stationary measures of the noisy chain for each epsilon (descending,
/// each at least two bin widths) compared with the equilibrium state.
inline SweepResult stochastic_sweep(const IntervalMap& map, const Potential& phi, const Grid& grid,
                                    const std::vector<double>& epsilons, const SweepOptions& opt = {}) {
  for (std::size_t k = 1; k < epsilons.size(); ++k) {
    if (!(epsilons[k] < epsilons[k - 1])) {
      throw Error(ErrorKind::invalid_parameter, "epsilons must be strictly descending");
    }
  }
  for (double eps : epsilons) {
    if (eps < 2.0 * grid.max_width()) {
      throw Error(ErrorKind::grid_too_coarse, "epsilon " + std::to_string(eps) +
                                                  " is below two bin widths");
    }
  }
  detail::require_hypotheses(map, phi, opt.hypotheses, map.name());
  EigenData e = solve_transfer(map, phi, grid, opt.power);
  const DiscreteMeasure mu = equilibrium_from_eigendata(e).measure;
  const bool conformal = opt.noise == NoiseReference::conformal;
  const SparseMatrix transport =
      conformal ? conformal_pushforward_matrix(map, phi, e) : pushforward_matrix(map, grid);
  double widest = 0.0;
  for (double w : e.eigenmeasure.weights()) widest = std::max(widest, w);
  SweepResult r;
  for (double eps : epsilons) {
    if (conformal && eps < 2.0 * widest) {
      throw Error(ErrorKind::grid_too_coarse, "epsilon " + std::to_string(eps) +
                                                  " is below two bin masses of nu");
    }
    NoiseKernel kernel =
        conformal ? make_noise_kernel(e.eigenmeasure, eps, map.circle()) : make_noise_kernel(grid, eps, map.circle());
    SparseMatrix t = noisy_transition(transport, kernel);
    StationaryResult st = stationary_measure(t, grid, 1e-12, opt.power.max_iter);
    r.parameter.push_back(eps);
    r.distance_L1.push_back(nu_density_distance(st.measure, mu, e.eigenmeasure));
    r.distance_kolmogorov.push_back(kolmogorov_distance(st.measure, mu));
    r.lambdas.push_back(e.lambda);
    r.pressures.push_back(std::log(e.lambda));
  }
  return r;
}

}  // namespace gibbsforge
