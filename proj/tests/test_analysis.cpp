#include "letd/analysis.hpp"
#include "letd/harness.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace letd;

TEST(LinfNorms, WorkedExample) {
  const std::vector<Vector> h = {{1.0, 2.0, 3.0}, {0.0, -1.0, 0.5}};
  const std::vector<Vector> r = {{1.0, 2.5, 3.0}, {0.25, 1.0, 0.5}};
  const ErrorReport rep = linf_norms(h, r);
  ASSERT_EQ(rep.linf_space.size(), 2u);
  EXPECT_DOUBLE_EQ(rep.linf_space[0], 0.5);
  EXPECT_DOUBLE_EQ(rep.linf_space[1], 2.0);
  EXPECT_DOUBLE_EQ(rep.linf_spacetime, 2.0);
}

TEST(LinfNorms, RejectsNaNAndShapeMismatch) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<Vector> ok = {{1.0, 2.0}};
  EXPECT_THROW(linf_norms(std::vector<Vector>{{1.0, nan}}, ok), std::domain_error);
  EXPECT_THROW(linf_norms(ok, std::vector<Vector>{{nan, 2.0}}), std::domain_error);
  EXPECT_THROW(linf_norms(ok, std::vector<Vector>{{1.0}}), std::invalid_argument);
  EXPECT_THROW(linf_norms(ok, std::vector<Vector>{{1.0, 2.0}, {1.0, 2.0}}), std::invalid_argument);
}

TEST(LinfNorms, PermutationInvariant) {
  Vector a = oracle::random_vector(200, 1);
  Vector b = oracle::random_vector(200, 2);
  const double before = linf_norms(std::vector<Vector>{a}, std::vector<Vector>{b}).linf_spacetime;
  std::vector<std::size_t> perm(a.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(5));
  Vector pa(a.size()), pb(b.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    pa[i] = a[perm[i]];
    pb[i] = b[perm[i]];
  }
  EXPECT_EQ(linf_norms(std::vector<Vector>{pa}, std::vector<Vector>{pb}).linf_spacetime, before);
}

TEST(LinfNorms, ScalesLinearly) {
  const Vector a = oracle::random_vector(50, 3);
  const Vector b = oracle::random_vector(50, 4);
  const double base = linf_norms(std::vector<Vector>{a}, std::vector<Vector>{b}).linf_spacetime;
  for (double s : {0.5, 4.0, 1e-3}) {
    Vector sa = a, sb = b;
    for (auto& x : sa) x *= s;
    for (auto& x : sb) x *= s;
    EXPECT_NEAR(linf_norms(std::vector<Vector>{sa}, std::vector<Vector>{sb}).linf_spacetime, s * base,
                1e-15 * s * base);
  }
}

TEST(Contraction, GeometricCurveGivesSquare) {
  for (double r : {0.2, 0.5, 0.9, 0.97}) {
    std::vector<double> e;
    for (int k = 1; k <= 60; ++k) e.push_back(std::pow(r, k));
    EXPECT_NEAR(estimate_contraction(e), r * r, 1e-12);
    EXPECT_NEAR(per_iteration_rate(e), r, 1e-12);
  }
}

TEST(Contraction, IgnoresEarlyTransient) {
  std::vector<double> e;
  for (int k = 1; k <= 30; ++k) e.push_back(std::pow(0.8, k));
  e[0] = 50.0;
  e[1] = 0.001;
  EXPECT_NEAR(per_iteration_rate(e), 0.8, 1e-12);
}

TEST(Contraction, NoisyGeometricData) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> noise(0.97, 1.03);
  std::vector<double> e;
  for (int k = 1; k <= 60; ++k) e.push_back(std::pow(0.9, k) * noise(rng));
  EXPECT_NEAR(per_iteration_rate(e), 0.9, 0.01);
}

TEST(Contraction, RejectsShortOrInvalidCurves) {
  EXPECT_THROW(estimate_contraction(std::vector<double>{1, 0.5, 0.25, 0.125, 0.0625}), std::invalid_argument);
  EXPECT_THROW(estimate_contraction(std::vector<double>{1, 0.5, 0.0, 0.125, 0.0625, 0.03}), std::invalid_argument);
  EXPECT_THROW(estimate_contraction(std::vector<double>{1, 0.5, -1, 0.125, 0.0625, 0.03}), std::invalid_argument);
  EXPECT_NO_THROW(estimate_contraction(std::vector<double>{1, 0.5, 0.25, 0.125, 0.0625, 0.03}));
}

TEST(ObservedOrder, PrintedRowExample) {
  // Errors of the widest-overlap ETD1 row.
  const std::vector<double> e = {2.6140e-1, 1.4418e-1, 7.6449e-2, 3.9281e-2};
  const std::vector<double> dt = {1.0 / 40, 1.0 / 80, 1.0 / 160, 1.0 / 320};
  const auto p = observed_order(e, dt);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_NEAR(p[0], 0.86, 0.005);
  EXPECT_NEAR(p[1], 0.92, 0.01);
  EXPECT_NEAR(p[2], 0.96, 0.005);
}

TEST(ObservedOrder, ExactPowerLawAndScaleInvariance) {
  const std::vector<double> dt = {0.1, 0.03, 0.01, 0.002};
  for (double order : {1.0, 2.0, 1.5}) {
    std::vector<double> e, scaled;
    for (double d : dt) {
      e.push_back(3.0 * std::pow(d, order));
      scaled.push_back(1e-6 * e.back());
    }
    const auto p = observed_order(e, dt);
    const auto q = observed_order(scaled, dt);
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_NEAR(p[i], order, 1e-12);
      EXPECT_NEAR(q[i], p[i], 1e-12);
    }
  }
}

TEST(ObservedOrder, RejectsBadInput) {
  EXPECT_THROW(observed_order(std::vector<double>{1.0}, std::vector<double>{0.1}), std::invalid_argument);
  EXPECT_THROW(observed_order(std::vector<double>{1.0, 0.5}, std::vector<double>{0.1, 0.1}), std::invalid_argument);
  EXPECT_THROW(observed_order(std::vector<double>{1.0, 0.5}, std::vector<double>{0.1, 0.2}), std::invalid_argument);
  EXPECT_THROW(observed_order(std::vector<double>{1.0, 0.0}, std::vector<double>{0.2, 0.1}), std::invalid_argument);
  EXPECT_THROW(observed_order(std::vector<double>{1.0, 0.5, 0.2}, std::vector<double>{0.2, 0.1}),
               std::invalid_argument);
}

TEST(RelativeError, ExactTrajectoryHasZeroError) {
  const auto p = analytic_1d_problem();
  const LocalizedSystem<1> sys(p, decompose_1d(make_grid<1>(p, {63}), 2, 4), make_time_grid(0.25, 5));
  Trajectory traj;
  for (int m = 0; m <= 5; ++m) {
    std::vector<Vector> states;
    for (std::size_t s = 0; s < sys.count(); ++s) states.push_back(exact_on_subdomain(sys, s, m));
    traj.push_back(states);
  }
  EXPECT_EQ(relative_spacetime_error(sys, traj), 0.0);
  EXPECT_EQ(final_time_error(sys, traj), 0.0);
  traj[3][1][0] += 0.5;
  const double den = std::exp(std::numbers::pi * std::numbers::pi * 0.25);
  EXPECT_NEAR(relative_spacetime_error(sys, traj), 0.5 / den, 1e-3 * 0.5 / den);
  EXPECT_EQ(final_time_error(sys, traj), 0.0);
  traj.pop_back();
  EXPECT_THROW(relative_spacetime_error(sys, traj), std::invalid_argument);
}

TEST(RelativeError, ProblemWithoutExactSolutionIsRejected) {
  auto p = analytic_1d_problem();
  p.exact = nullptr;
  const LocalizedSystem<1> sys(p, decompose_1d(make_grid<1>(p, {31}), 2, 2), make_time_grid(0.25, 2));
  EXPECT_THROW(relative_spacetime_error(sys, monodomain_solve(sys, Scheme::etd1)), std::invalid_argument);
}

TEST(RelativeError, MonodomainEtd2CoarsestStep) {
  const auto p = analytic_1d_problem();
  const LocalizedSystem<1> sys(p, monodomain_layout(make_grid<1>(p, {511})), make_time_grid(0.25, 10));
  const double e = relative_spacetime_error(sys, monodomain_solve(sys, Scheme::etd2));
  EXPECT_NEAR(e, 5.17e-3, 0.02 * 5.17e-3);
}

TEST(TrajectoryDistance, Basics) {
  const Trajectory a = {{{1.0, 2.0}, {3.0}}, {{0.0, 0.0}, {1.0}}};
  Trajectory b = a;
  EXPECT_EQ(trajectory_distance(a, b), 0.0);
  b[1][1][0] = -1.0;
  EXPECT_EQ(trajectory_distance(a, b), 2.0);
  b.pop_back();
  EXPECT_THROW(trajectory_distance(a, b), std::invalid_argument);
}
