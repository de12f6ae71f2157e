#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "gibbsforge/hypotheses.hpp"

using namespace gibbsforge;

TEST(Hypotheses, MannevillePomeauPhiBeta) {
  IntervalMap mp = make_manneville_pomeau_circle(0.25);
  HypothesisReport ok = check_hypotheses(mp, make_minus_log_deriv_plus_beta(mp, 0.5));
  EXPECT_TRUE(ok.passes_P);
  EXPECT_GT(ok.p_margin, 0.0);
  HypothesisReport bad = check_hypotheses(mp, make_minus_log_deriv_plus_beta(mp, 0.1));
  EXPECT_FALSE(bad.passes_P);
  ASSERT_EQ(bad.failing().size(), 1u);
  EXPECT_EQ(bad.failing()[0], "P");
}

TEST(Hypotheses, PMarginClosedForm) {
  // osc(-log(|f'| + b)) = log((2 + a + b) / (1 + b)) and h = log 2, q = 1.
  for (double a : {0.1, 0.25, 0.4}) {
    IntervalMap mp = make_manneville_pomeau_circle(a);
    for (double b : {0.05, 0.3, 0.9}) {
      HypothesisReport r = check_hypotheses(mp, make_minus_log_deriv_plus_beta(mp, b));
      EXPECT_NEAR(r.p_margin, std::log(2.0) - std::log((2.0 + a + b) / (1.0 + b)), 1e-12);
      EXPECT_EQ(r.passes_P, b > a);
    }
  }
}

TEST(Hypotheses, DoublingHasNoContractionRegion) {
  HypothesisReport r = check_hypotheses(make_doubling(), make_zero_potential());
  EXPECT_EQ(r.q, 0);
  EXPECT_TRUE(r.passes_P);
  EXPECT_TRUE(r.passes_H2);
  EXPECT_TRUE(r.passes_H1);
  EXPECT_EQ(r.p_margin, std::numeric_limits<double>::infinity());
  EXPECT_DOUBLE_EQ(r.sigma, 2.0);
  EXPECT_NEAR(r.h_f, std::log(2.0), 1e-15);
}

TEST(Hypotheses, AdmissibleCPitchfork) {
  IntervalMap f = make_pitchfork_doubling(0.8, 0.05);
  HypothesisReport r = check_hypotheses(f, make_zero_potential(), std::nullopt, 0.5);
  EXPECT_DOUBLE_EQ(r.sigma, 2.0);
  EXPECT_NEAR(r.L_sup_inside, 1.0 / 0.8, 1e-6);
  // c = -(gamma log L - (1 - gamma) log sigma) / 2.
  EXPECT_NEAR(r.admissible_c, 0.25 * (std::log(2.0) - std::log(1.25)), 1e-6);
  EXPECT_TRUE(r.passes_all());
  // With gamma = 0.9, sigma^{-0.1} L^{0.9} > 1: no admissible c.
  HypothesisReport strict = check_hypotheses(f, make_zero_potential());
  EXPECT_EQ(strict.admissible_c, 0.0);
  EXPECT_FALSE(strict.passes_H1);
}

TEST(Hypotheses, AdmissibleCPositiveIffRelationHolds) {
  IntervalMap f = make_pitchfork_doubling(0.8, 0.05);
  for (double g : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    HypothesisReport r = check_hypotheses(f, make_zero_potential(), std::nullopt, g);
    const double rel = std::pow(r.sigma, -(1.0 - g)) * std::pow(r.L_sup_inside, g);
    EXPECT_EQ(r.admissible_c > 0.0, rel < 1.0) << g;
    if (r.admissible_c > 0.0) EXPECT_NEAR(rel, std::exp(-2.0 * r.admissible_c), 1e-12);
  }
}

TEST(Hypotheses, Eps0) {
  IntervalMap mp = make_manneville_pomeau_circle(0.25);
  HypothesisReport r = check_hypotheses(mp, make_minus_log_deriv_plus_beta(mp, 0.9));
  EXPECT_NEAR(r.eps0, 0.5 * std::max(0.0, r.h_f - std::log(1.0) - r.oscillation - std::log(r.L_sup_inside)), 1e-15);
  EXPECT_GE(r.p_margin_weak, r.p_margin);
}

TEST(Hypotheses, InvalidParameters) {
  IntervalMap d = make_doubling();
  EXPECT_THROW(check_hypotheses(d, make_zero_potential(), 1.0, 0.5), Error);
  EXPECT_THROW(check_hypotheses(d, make_zero_potential(), 2.0, 1.0), Error);
  EXPECT_THROW(check_hypotheses(d, make_zero_potential(), 2.0, 0.0), Error);
  EXPECT_NO_THROW(check_hypotheses(d, make_zero_potential(), 1.5, 0.5));
}

TEST(Hypotheses, FlipPointBisection) {
  for (double a : {0.1, 0.25, 0.4}) {
    IntervalMap mp = make_manneville_pomeau_circle(a);
    double lo = a / 2, hi = 2 * a;
    while (hi - lo > 1e-5) {
      const double mid = 0.5 * (lo + hi);
      (check_hypotheses(mp, make_minus_log_deriv_plus_beta(mp, mid)).passes_P ? hi : lo) = mid;
    }
    EXPECT_NEAR(0.5 * (lo + hi), a, 1e-3);
  }
}

TEST(Hypotheses, CantorNeutralPoint) {
  IntervalMap c = make_cantor_unimodal();
  HypothesisReport r = check_hypotheses(c, make_zero_potential(), std::nullopt, 0.5);
  EXPECT_EQ(r.q, 1);
  EXPECT_NEAR(r.h_f, std::log(2.0), 1e-15);
  EXPECT_TRUE(r.passes_H2);
  EXPECT_TRUE(r.passes_P);
  EXPECT_NEAR(r.L_sup_inside, 1.0, 1e-12);
}
