#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gibbsforge/stability.hpp"

using namespace gibbsforge;

namespace {

std::vector<std::vector<double>> dense(const SparseMatrix& m) {
  std::vector<std::vector<double>> d(m.rows(), std::vector<double>(m.cols(), 0.0));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t k = m.row_begin(i); k < m.row_end(i); ++k) d[i][m.col(k)] += m.value(k);
  }
  return d;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::invalid_parameter;
}

SweepOptions pitchfork_options() {
  SweepOptions opt;
  opt.hypotheses.gamma = 0.5;
  return opt;
}

}  // namespace

TEST(NoiseKernel, RowsAreStochastic) {
  IntervalMap pf = make_pitchfork_doubling(0.8, 0.05);
  for (const Grid& g : {Grid::uniform(200), make_grid(pf, 300)}) {
    for (double eps : {0.01, 0.05, 0.3}) {
      for (bool circle : {true, false}) {
        SparseMatrix k = make_noise_kernel(g, eps, circle).matrix;
        for (std::size_t i = 0; i < k.rows(); ++i) {
          EXPECT_NEAR(k.row_sum(i), 1.0, 1e-12);
          for (std::size_t p = k.row_begin(i); p < k.row_end(i); ++p) EXPECT_GE(k.value(p), 0.0);
        }
      }
    }
  }
}

TEST(NoiseKernel, BandOverlapMatchesQuadrature) {
  struct Box {
    double a, b, c, d, eps;
  };
  for (const Box& q : {Box{0.0, 0.1, 0.05, 0.2, 0.07}, Box{0.3, 0.35, 0.1, 0.5, 0.02},
                       Box{0.2, 0.4, 0.6, 0.9, 0.25}, Box{0.0, 1.0, 0.0, 1.0, 0.1}}) {
    const int m = 1000;
    double area = 0.0;
    const double hx = (q.b - q.a) / m, hy = (q.d - q.c) / m;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const double x = q.a + (i + 0.5) * hx, y = q.c + (j + 0.5) * hy;
        if (std::fabs(y - x) <= q.eps) area += hx * hy;
      }
    }
    EXPECT_NEAR(detail::band_overlap(q.a, q.b, q.c, q.d, q.eps), area, 2e-3 * (q.b - q.a) * (q.d - q.c) + 1e-6);
  }
  // Disjoint band.
  EXPECT_EQ(detail::band_overlap(0.0, 0.1, 0.5, 0.6, 0.1), 0.0);
}

TEST(NoiseKernel, LebesgueIsFixedOnTheCircle) {
  Grid g = Grid::uniform(256);
  for (double eps : {0.01, 0.1, 0.37}) {
    SparseMatrix k = make_noise_kernel(g, eps).matrix;
    std::vector<double> leb(g.size(), 1.0 / g.size());
    std::vector<double> out = k.left_multiply(leb);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(out[i], leb[i], 1e-14);
  }
}

TEST(NoiseKernel, WideNoiseIsUniform) {
  IntervalMap pf = make_pitchfork_doubling(0.8, 0.05);
  Grid g = make_grid(pf, 128);
  // The translates x + [-1/2, 1/2] and x + [-1, 1] cover the circle uniformly.
  for (double eps : {0.5, 1.0}) {
    auto d = dense(make_noise_kernel(g, eps).matrix);
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(d[i][j], g.width(j), 1e-12);
    }
  }
}

TEST(NoiseKernel, NuKernelEqualsLebesgueKernelForLebesgue) {
  Grid g = Grid::uniform(100);
  for (double eps : {0.02, 0.15}) {
    auto a = dense(make_noise_kernel(g, eps).matrix);
    auto b = dense(make_noise_kernel(DiscreteMeasure::lebesgue(g), eps).matrix);
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(a[i][j], b[i][j], 1e-12);
    }
  }
}

TEST(NoiseKernel, Errors) {
  Grid g = Grid::uniform(100);
  EXPECT_EQ(kind_of([&] { make_noise_kernel(g, 0.005); }), ErrorKind::grid_too_coarse);
  EXPECT_EQ(kind_of([&] { make_noise_kernel(g, 0.0); }), ErrorKind::invalid_parameter);
  DiscreteMeasure spiky(g, [] {
    std::vector<double> w(100, 0.5 / 99);
    w[3] = 0.5;
    return w;
  }());
  EXPECT_EQ(kind_of([&] { make_noise_kernel(spiky, 0.1); }), ErrorKind::grid_too_coarse);
  EXPECT_NO_THROW(make_noise_kernel(spiky, 0.6));

  IntervalMap d = make_doubling();
  EXPECT_EQ(kind_of([&] { stochastic_sweep(d, make_zero_potential(), g, {0.1, 0.015}); }),
            ErrorKind::grid_too_coarse);
  EXPECT_EQ(kind_of([&] { stochastic_sweep(d, make_zero_potential(), g, {0.05, 0.1}); }),
            ErrorKind::invalid_parameter);
  IntervalMap mp = make_manneville_pomeau_circle(0.25);
  EXPECT_EQ(kind_of([&] { stochastic_sweep(mp, make_minus_log_deriv_plus_beta(mp, 0.1), g, {0.1}); }),
            ErrorKind::hypothesis_violated);
}

TEST(Stationary, DoublingNoiseKeepsLebesgue) {
  IntervalMap d = make_doubling();
  Grid g = Grid::uniform(512);
  for (double eps : {0.01, 0.1}) {
    SparseMatrix t = noisy_transition(d, g, make_noise_kernel(g, eps));
    StationaryResult st = stationary_measure(t, g, 1e-12);
    EXPECT_LE(st.residual, 1e-10);
    EXPECT_LE(l1_distance(st.measure, DiscreteMeasure::lebesgue(g)), 1e-10);
  }
  for (NoiseReference ref : {NoiseReference::lebesgue, NoiseReference::conformal}) {
    SweepOptions opt;
    opt.noise = ref;
    SweepResult r = stochastic_sweep(d, make_zero_potential(), g, {0.2, 0.05, 0.01}, opt);
    for (double v : r.distance_L1) EXPECT_LE(v, 1e-10);
    for (double v : r.distance_kolmogorov) EXPECT_LE(v, 1e-10);
    for (double l : r.lambdas) EXPECT_NEAR(l, 2.0, 1e-12);
  }
}

TEST(Stationary, ResidualAndTransitionRows) {
  IntervalMap pf = make_pitchfork_doubling(0.8, 0.05);
  Potential phi = make_minus_t_log_deriv(pf, 0.5);
  Grid g = make_grid(pf, 1024);
  EigenData e = solve_transfer(pf, phi, g);
  SparseMatrix t = noisy_transition(conformal_pushforward_matrix(pf, phi, e), make_noise_kernel(e.eigenmeasure, 0.02));
  for (std::size_t i = 0; i < t.rows(); ++i) EXPECT_NEAR(t.row_sum(i), 1.0, 1e-12);
  StationaryResult st = stationary_measure(t, g, 1e-10);
  EXPECT_LE(st.residual, 1e-8);
  ASSERT_EQ(st.measure.size(), t.rows());
  std::vector<double> moved = t.left_multiply(st.measure.weights());
  double r = 0.0;
  for (std::size_t i = 0; i < moved.size(); ++i) r += std::fabs(moved[i] - st.measure.weight(i));
  EXPECT_LE(r, 1e-8);
  // The Cesàro average of the chain started from nu reaches the same measure.
  EXPECT_LE(l1_distance(stationary_cesaro(t, e.eigenmeasure, 4000), st.measure), 0.01);
}

TEST(Stationary, ConformalNoiseApproachesEquilibrium) {
  IntervalMap pf = make_pitchfork_doubling(0.8, 0.05);
  Potential phi = make_minus_t_log_deriv(pf, 0.3);
  SweepResult r = stochastic_sweep(pf, phi, make_grid(pf, 2048), {0.1, 0.05, 0.02, 0.01}, pitchfork_options());
  ASSERT_EQ(r.distance_L1.size(), 4u);
  for (std::size_t k = 1; k < r.distance_L1.size(); ++k) EXPECT_LE(r.distance_L1[k], r.distance_L1[k - 1] + 0.01);
  EXPECT_LE(r.distance_L1.back(), 0.05);
}

TEST(StatisticalSweep, ConstantFamilyGivesZero) {
  PerturbationFamily fam;
  fam.parameter_values = {0.0, 0.1, 0.2};
  fam.map_at = [](double) { return make_manneville_pomeau_circle(0.25); };
  fam.potential_at = [](double, const IntervalMap& m) { return make_minus_log_deriv_plus_beta(m, 0.5); };
  SweepResult r = statistical_sweep(fam, Grid::uniform(512));
  ASSERT_EQ(r.parameter.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(r.distance_L1[k], 0.0);
    EXPECT_EQ(r.distance_kolmogorov[k], 0.0);
    EXPECT_EQ(r.lambdas[k], r.lambdas[0]);
  }
}

TEST(StatisticalSweep, DoublingThermodynamicFamily) {
  PerturbationFamily fam;
  fam.parameter_values = {0.0, 0.25, 0.5, 1.0};
  fam.map_at = [](double) { return make_doubling(); };
  fam.potential_at = [](double t, const IntervalMap& m) { return make_minus_t_log_deriv(m, t); };
  SweepResult r = statistical_sweep(fam, Grid::uniform(256));
  for (std::size_t k = 0; k < r.parameter.size(); ++k) {
    const double t = r.parameter[k];
    EXPECT_NEAR(r.lambdas[k], std::pow(2.0, 1.0 - t), 1e-10);
    EXPECT_NEAR(r.pressures[k], (1.0 - t) * std::log(2.0), 1e-10);
    EXPECT_LE(r.distance_L1[k], 1e-10);
  }
}

TEST(StatisticalSweep, HypothesisGate) {
  PerturbationFamily fam;
  fam.parameter_values = {0.0, 0.3};
  fam.map_at = [](double) { return make_manneville_pomeau_circle(0.25); };
  fam.potential_at = [](double t, const IntervalMap& m) { return make_minus_log_deriv_plus_beta(m, 0.5 - t); };
  EXPECT_EQ(kind_of([&] { statistical_sweep(fam, Grid::uniform(256)); }), ErrorKind::hypothesis_violated);
}

TEST(NoiseReference, Parse) {
  EXPECT_EQ(parse_noise_reference("lebesgue"), NoiseReference::lebesgue);
  EXPECT_STREQ(to_string(parse_noise_reference("conformal")), "conformal");
  EXPECT_THROW(parse_noise_reference("gaussian"), Error);
}
