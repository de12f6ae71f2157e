#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gibbsforge/gibbs.hpp"
#include "gibbsforge/hypotheses.hpp"

using namespace gibbsforge;

namespace {

double pitchfork_c(const IntervalMap& f) {
  return check_hypotheses(f, make_zero_potential(), std::nullopt, 0.5).admissible_c;
}

// Lipschitz test potential with constant 1 on the circle.
Potential wave() {
  return Potential{"wave", [](double x) { return std::cos(2 * M_PI * x) / (2 * M_PI); }, 1.0, 1.0, {}};
}

double iterate(const IntervalMap& f, double x, long n) {
  for (long j = 0; j < n; ++j) x = f.evaluate(x);
  return x;
}

}  // namespace

TEST(DynamicalBall, DoublingClosedForm) {
  IntervalMap f = make_doubling();
  for (double x : {0.1, 0.37, 0.999}) {
    for (long n : {0L, 1L, 5L, 20L}) {
      DynamicalBall b = dynamical_ball(f, x, n, 0.25);
      EXPECT_NEAR(b.interval.length, 0.5 * std::ldexp(1.0, -static_cast<int>(n)), 1e-15);
      EXPECT_NEAR(circle_offset(b.interval.lo, x), -0.5 * b.interval.length, 1e-12);
    }
  }
  EXPECT_THROW(dynamical_ball(f, 0.1, 3, 0.3), Error);
  EXPECT_THROW(dynamical_ball(f, 0.1, 3, 0.0), Error);
}

TEST(DynamicalBall, MembershipAndNesting) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const IntervalMap& f : {make_manneville_pomeau_circle(0.5), make_pitchfork_doubling(0.8, 0.05),
                               make_linear_full_branch({3.0, 1.5})}) {
    const double delta = 0.1;
    for (int k = 0; k < 30; ++k) {
      const double x = u(rng);
      double prev = 1.0;
      for (long n = 0; n <= 15; ++n) {
        DynamicalBall b = dynamical_ball(f, x, n, delta);
        EXPECT_LE(b.interval.length, prev + 1e-15);
        prev = b.interval.length;
        for (double y : ball_samples(f, b, 100)) {
          double fy = y, fx = x;
          for (long j = 0; j <= n; ++j) {
            ASSERT_LE(circle_distance(fy, fx), delta + 1e-9) << f.name() << " x=" << x << " n=" << n;
            fy = f.evaluate(fy);
            fx = f.evaluate(fx);
          }
        }
        if (n > 0) {
          // Contained in the previous ball.
          DynamicalBall a = dynamical_ball(f, x, n - 1, delta);
          EXPECT_LE(circle_offset(b.interval.lo, a.interval.lo), a.interval.length - b.interval.length + 1e-12);
          EXPECT_GE(circle_offset(b.interval.lo, a.interval.lo), -1e-12);
        }
      }
    }
  }
}

TEST(DynamicalBall, ContractionAtHyperbolicTimes) {
  IntervalMap f = make_pitchfork_doubling(0.8, 0.05);
  const double c = pitchfork_c(f), delta = default_delta(f);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int k = 0; k < 200; ++k) {
    const double x = u(rng);
    for (long n : hyperbolic_times(make_orbit(f, x, 25), c).times) {
      EXPECT_LE(dynamical_ball(f, x, n, delta).interval.length, 2 * delta * std::exp(-c * n / 2) * (1 + 1e-12));
      ++checked;
    }
  }
  EXPECT_GT(checked, 100);

  IntervalMap mp = make_manneville_pomeau_circle(0.5);
  if (is_hyperbolic_time(mp, 0.9, 3, 0.1)) {
    const double len = dynamical_ball(mp, 0.9, 3, 0.1).interval.length;
    EXPECT_GT(len, 0.0);
    EXPECT_LE(len, 0.2 * std::exp(-3 * 0.1 / 2));
  }
}

TEST(Distortion, Values) {
  IntervalMap f = make_doubling();
  EigenData e = solve_transfer(f, make_zero_potential(), make_grid(f, 64));
  EXPECT_EQ(distortion_ratio(f, make_zero_potential(), e, dynamical_ball(f, 0.3, 10, 0.25)), 1.0);

  // Lipschitz potential on doubling: every n is a hyperbolic time for c < log 2,
  // and the oscillation over the ball is at most sum_j 2 delta 2^{-j}.
  Potential w = wave();
  for (double delta : {0.05, 0.25}) {
    for (double x : {0.11, 0.5, 0.83}) {
      const double r = distortion_ratio(f, w, e, dynamical_ball(f, x, 12, delta));
      EXPECT_LE(r, std::exp(4 * delta));
      EXPECT_LE(r, distortion_bound(1.0, 1.0, 0.5, delta));
    }
  }
}

TEST(Distortion, BelowSeriesBoundAtHyperbolicTimes) {
  IntervalMap f = make_pitchfork_doubling(0.8, 0.05);
  const double c = pitchfork_c(f), delta = default_delta(f);
  for (const Potential& phi : {make_minus_t_log_deriv(f, 0.7), make_minus_t_log_deriv(f, 1.0)}) {
    const double k0 = distortion_bound(phi.hoelder_constant, phi.hoelder_exponent, c, delta);
    EigenData e = solve_transfer(f, phi, make_grid(f, 1024));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
      const double x = u(rng);
      for (long n : hyperbolic_times(make_orbit(f, x, 20), c).times) {
        EXPECT_LE(distortion_ratio(f, phi, e, dynamical_ball(f, x, n, delta)), k0);
      }
    }
  }
}

TEST(Distortion, BoundFormula) {
  const double c = 0.2, a = 0.5, C = 3.0, delta = 0.1;
  double series = 0.0;
  for (int j = 0; j < 10000; ++j) series += std::exp(-c * a * j / 2);
  const double expected = std::exp(C * std::pow(2 * delta, a) * series);
  EXPECT_NEAR(distortion_bound(C, a, c, delta), expected, 1e-12 * expected);
  EXPECT_TRUE(std::isinf(distortion_bound(C, a, 0.0, delta)));
  EXPECT_EQ(distortion_bound(0.0, 1.0, c, delta), 1.0);
}

TEST(GibbsRatio, DoublingIsOneHalf) {
  IntervalMap f = make_doubling();
  EigenData e = solve_transfer(f, make_zero_potential(), make_grid(f, 256));
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const double x = u(rng);
    for (long n : {1L, 4L, 13L, 20L}) EXPECT_NEAR(gibbs_ratio(f, make_zero_potential(), e, x, n, 0.25, 0.1), 0.5, 1e-9);
  }
}

TEST(GibbsRatio, LinearMapGivesTwoDelta) {
  IntervalMap f = make_linear_full_branch({3.0, 1.5});
  Potential phi = make_minus_t_log_deriv(f, 1.0);
  EigenData e = solve_transfer(f, phi, make_grid(f, 1024));
  const double delta = 0.01, c = 0.1;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int k = 0; k < 400 && checked < 50; ++k) {
    const double x = u(rng);
    const long n = 8;
    // Keep orbits away from the breakpoints so the ball stays on one branch chain.
    bool clear = true;
    for (long j = 0; j <= n && clear; ++j) {
      const double y = iterate(f, x, j);
      clear = circle_distance(y, 0.0) > delta && circle_distance(y, 1.0 / 3.0) > delta;
    }
    if (!clear || !is_hyperbolic_time(f, x, n, c)) continue;
    EXPECT_NEAR(gibbs_ratio(f, phi, e, x, n, delta, c), 2 * delta, 1e-8);
    ++checked;
  }
  EXPECT_GE(checked, 20);
}

TEST(GibbsRatio, NotHyperbolicTime) {
  IntervalMap f = make_manneville_pomeau_circle(0.5);
  EigenData e = solve_transfer(f, make_minus_log_deriv_plus_beta(f, 0.9), make_grid(f, 256));
  // Next to the neutral point the derivative is close to 1.
  try {
    gibbs_ratio(f, make_minus_log_deriv_plus_beta(f, 0.9), e, 1e-4, 1, 0.1, 0.1);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::not_hyperbolic_time);
  }
}

TEST(GibbsRatio, PitchforkSurveyIsBoundedAndStable) {
  IntervalMap f = make_pitchfork_doubling(0.8, 0.05);
  const double c = pitchfork_c(f), delta = default_delta(f);
  EXPECT_GE(delta, 0.05);
  EXPECT_LE(delta, 0.5 * f.min_branch_length());
  std::vector<double> ks;
  for (std::size_t n : {2048u, 4096u}) {
    EigenData e = solve_transfer(f, make_zero_potential(), make_grid(f, n));
    GibbsSurvey s = gibbs_survey(f, make_zero_potential(), e, c, delta, 20, 100, 4);
    ASSERT_GT(s.rows.size(), 100u);
    EXPECT_LE(s.max_ratio / s.min_ratio, s.K * s.K);
    EXPECT_TRUE(std::isfinite(s.K));
    for (const auto& r : s.rows) EXPECT_TRUE(r.ratio * s.K >= 1 - 1e-12 && r.ratio <= s.K);
    ks.push_back(s.K);
  }
  EXPECT_NEAR(ks[1], ks[0], 0.2 * ks[0]);
}
