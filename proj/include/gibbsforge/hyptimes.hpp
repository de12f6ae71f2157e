#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gibbsforge/dynamics.hpp"
#include "gibbsforge/errors.hpp"
#include "gibbsforge/grid.hpp"

namespace gibbsforge {

struct OrbitRecord {
  double x0 = 0.0;
  std::vector<double> points;  // n + 1 points
  std::vector<double> log_L;   // log L(f^j x), j < n

  std::size_t length() const { return log_L.size(); }
};

struct OrbitOptions {
  /// Half-width of a uniform perturbation added after every step. Long
  /// double-precision orbits of maps like x -> 2x mod 1 otherwise collapse
  /// onto 0 once the mantissa bits are shifted out.
  double jitter = 0.0;
  std::uint64_t seed = 0;
};

inline OrbitRecord make_orbit(const IntervalMap& map, double x0, long n, const OrbitOptions& opt = {}) {
  if (n < 0) throw Error(ErrorKind::invalid_parameter, "orbit length must be >= 0");
  OrbitRecord r;
  r.x0 = x0;
  r.points.reserve(static_cast<std::size_t>(n) + 1);
  r.log_L.reserve(static_cast<std::size_t>(n));
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> noise(-opt.jitter, opt.jitter);
  double x = x0;
  r.points.push_back(x);
  for (long j = 0; j < n; ++j) {
    auto loc = map.locate(x);
    if (!loc) throw OrbitEscapedError(x0, j);
    const BranchSpec& b = map.branch(loc->branch);
    r.log_L.push_back(-std::log(std::fabs(b.derivative(loc->u))));
    double v = b.forward(loc->u);
    if (map.circle()) {
      x = wrap01(v + (opt.jitter > 0.0 ? noise(rng) : 0.0));
    } else {
      x = std::clamp(v, 0.0, 1.0);
    }
    r.points.push_back(x);
  }
  return r;
}

/// Build an orbit record directly from a log L sequence (no map needed).
inline OrbitRecord orbit_from_log_L(std::vector<double> log_L) {
  OrbitRecord r;
  r.points.assign(log_L.size() + 1, 0.0);
  r.log_L = std::move(log_L);
  return r;
}

struct HyperbolicTimeRecord {
  double c = 0.0;
  std::vector<long> times;
  double density = 0.0;
  /// max of n_{k+1}/n_k over the second half of the list of times
  /// (infinity when fewer than two times fall there).
  double max_gap_ratio = std::numeric_limits<double>::infinity();
  /// max of n_{k+1} - n_k over the same range.
  long max_gap = 0;
  std::optional<long> first_time;
};

namespace detail {

inline void fill_gap_stats(HyperbolicTimeRecord& r) {
  const std::size_t k = r.times.size();
  if (k < 2) return;
  std::size_t start = k / 2;
  if (start + 1 >= k) start = k - 2;
  double ratio = 0.0;
  long gap = 0;
  for (std::size_t i = start; i + 1 < k; ++i) {
    ratio = std::max(ratio, static_cast<double>(r.times[i + 1]) / static_cast<double>(r.times[i]));
    gap = std::max(gap, r.times[i + 1] - r.times[i]);
  }
  r.max_gap_ratio = ratio;
  r.max_gap = gap;
}

}  // namespace detail

/// n is a c-hyperbolic time iff sum_{j=n-k}^{n-1} log L(f^j x) < -ck for all
/// 1 <= k <= n. With P(m) = sum_{j<m} (log L_j + c) this reads
/// P(n) < P(m) for every m < n, i.e. P(n) is a strict running minimum.
inline HyperbolicTimeRecord hyperbolic_times(const OrbitRecord& orbit, double c) {
  if (!(c > 0.0)) throw Error(ErrorKind::invalid_parameter, "c must be positive");
  HyperbolicTimeRecord r;
  r.c = c;
  double prefix = 0.0, running_min = 0.0;
  for (std::size_t n = 1; n <= orbit.log_L.size(); ++n) {
    prefix += orbit.log_L[n - 1] + c;
    if (prefix < running_min) {
      r.times.push_back(static_cast<long>(n));
      running_min = prefix;
    }
  }
  if (!orbit.log_L.empty()) {
    r.density = static_cast<double>(r.times.size()) / static_cast<double>(orbit.log_L.size());
  }
  if (!r.times.empty()) r.first_time = r.times.front();
  detail::fill_gap_stats(r);
  return r;
}

/// Returns whether "average log L <= -2c implies at least one hyperbolic
/// time" held for this orbit.
inline bool pliss_check(const OrbitRecord& orbit, double c) {
  if (orbit.log_L.empty()) return true;
  double s = 0.0;
  for (double v : orbit.log_L) s += v;
  if (s / static_cast<double>(orbit.log_L.size()) > -2.0 * c) return true;
  return !hyperbolic_times(orbit, c).times.empty();
}

struct FirstTimeTail {
  std::vector<double> tail;  // tail[n] = P(n1 > n), n = 0..n_max
  double mean_n1 = 0.0;      // over orbits with n1 <= n_max
  long samples = 0;
  long escaped = 0;
  long censored = 0;  // no hyperbolic time up to n_max
  std::uint64_t seed = 0;
};

/// Per-sample generator for sample index s; each sample owns its stream so
/// that results do not depend on evaluation order.
inline std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t s) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return std::mt19937_64(seq);
}

inline FirstTimeTail first_time_tail(const IntervalMap& map, const DiscreteMeasure& nu, double c,
                                     long n_max, long samples, std::uint64_t seed) {
  if (samples < 1000) throw Error(ErrorKind::invalid_parameter, "first_time_tail needs samples >= 1000");
  if (n_max < 1) throw Error(ErrorKind::invalid_parameter, "n_max must be >= 1");
  if (!(c > 0.0)) throw Error(ErrorKind::invalid_parameter, "c must be positive");
  FirstTimeTail out;
  out.seed = seed;
  out.samples = samples;
  std::vector<long> counts(static_cast<std::size_t>(n_max) + 1, 0);  // counts[n] = #{n1 = n}
  double sum = 0.0;
  long hits = 0;
  for (long s = 0; s < samples; ++s) {
    auto rng = sample_rng(seed, static_cast<std::uint64_t>(s));
    double x = nu.sample(rng);
    double prefix = 0.0;
    long n1 = -1;
    bool escaped = false;
    for (long n = 1; n <= n_max; ++n) {
      auto loc = map.locate(x);
      if (!loc) {
        escaped = true;
        break;
      }
      const BranchSpec& b = map.branch(loc->branch);
      prefix += -std::log(std::fabs(b.derivative(loc->u))) + c;
      // The first strict running minimum below P(0) = 0 is the first time.
      if (prefix < 0.0) {
        n1 = n;
        break;
      }
      double v = b.forward(loc->u);
      x = map.circle() ? wrap01(v) : std::clamp(v, 0.0, 1.0);
    }
    if (escaped) {
      ++out.escaped;
    } else if (n1 < 0) {
      ++out.censored;
    } else {
      ++counts[static_cast<std::size_t>(n1)];
      sum += static_cast<double>(n1);
      ++hits;
    }
  }
  const double valid = static_cast<double>(samples - out.escaped);
  out.tail.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  double below = 0.0;
  for (long n = 0; n <= n_max; ++n) {
    below += static_cast<double>(counts[static_cast<std::size_t>(n)]);
    out.tail[static_cast<std::size_t>(n)] = valid > 0.0 ? (valid - below) / valid : 0.0;
  }
  out.mean_n1 = hits > 0 ? sum / static_cast<double>(hits) : std::numeric_limits<double>::infinity();
  return out;
}

/// Monte Carlo estimate of nu(B(n)), B(n) = {x : (1/n) #{j < n : f^j x in A} >= gamma}.
/// Orbits that leave the domain are dropped from the estimate.
inline double visit_frequency_measure(const IntervalMap& map, const DiscreteMeasure& nu, double gamma,
                                      long n, long samples, std::uint64_t seed) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorKind::invalid_parameter, "gamma must lie in [0,1]");
  if (n < 1 || samples < 1) throw Error(ErrorKind::invalid_parameter, "n and samples must be >= 1");
  long inside = 0, valid = 0;
  for (long s = 0; s < samples; ++s) {
    auto rng = sample_rng(seed, static_cast<std::uint64_t>(s));
    double x = nu.sample(rng);
    long visits = 0;
    bool escaped = false;
    for (long j = 0; j < n; ++j) {
      if (!map.in_domain(x)) {
        escaped = true;
        break;
      }
      if (map.in_contraction_region(x)) ++visits;
      if (j + 1 < n) x = map.evaluate(x);
    }
    if (escaped) continue;
    ++valid;
    if (static_cast<double>(visits) >= gamma * static_cast<double>(n)) ++inside;
  }
  return valid > 0 ? static_cast<double>(inside) / static_cast<double>(valid) : 0.0;
}

using BigInt = boost::multiprecision::cpp_int;

/// #{itineraries (i_0..i_{n-1}) in {1..k0}^n : #{j : i_j <= q} > gamma n}
///   = sum_{m > gamma n} C(n,m) q^m (k0-q)^{n-m}, exactly.
inline BigInt itinerary_count(int n, double gamma, int q, int k0) {
  if (n < 0 || n > 64) throw Error(ErrorKind::invalid_parameter, "itinerary_count needs 0 <= n <= 64");
  if (k0 < 1 || q < 0 || q > k0) throw Error(ErrorKind::invalid_parameter, "need 0 <= q <= k0, k0 >= 1");
  BigInt total = 0;
  BigInt binom = 1;  // C(n, m)
  for (int m = 0; m <= n; ++m) {
    if (m > 0) binom = binom * (n - m + 1) / m;
    if (static_cast<double>(m) > gamma * static_cast<double>(n)) {
      BigInt term = binom;
      for (int i = 0; i < m; ++i) term *= q;
      for (int i = 0; i < n - m; ++i) term *= (k0 - q);
      total += term;
    }
  }
  return total;
}

/// (1/n) log #I(gamma, n); -inf when the count is zero.
inline double c_gamma_estimate(double gamma, int q, int k0, int n) {
  if (n < 1) throw Error(ErrorKind::invalid_parameter, "c_gamma_estimate needs n >= 1");
  BigInt count = itinerary_count(n, gamma, q, k0);
  if (count == 0) return -std::numeric_limits<double>::infinity();
  // Scale down before converting so the double keeps its precision.
  int shift = 0;
  while (count > BigInt(1) << 60) {
    count >>= 1;
    ++shift;
  }
  return (std::log(count.convert_to<double>()) + shift * std::log(2.0)) / n;
}

}  // namespace gibbsforge
