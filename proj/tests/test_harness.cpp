#include "letd/harness.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace letd;

namespace {

std::string csv_body(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') out += line + "\n";
  }
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(BuiltinProblems, AnalyticOneDimensional) {
  const auto p = analytic_1d_problem();
  constexpr double pi = std::numbers::pi;
  EXPECT_DOUBLE_EQ(p.horizon, 0.25);
  EXPECT_DOUBLE_EQ(p.origin[0], -1.0);
  EXPECT_DOUBLE_EQ(p.length[0], 2.0);
  EXPECT_NEAR(p.initial({0.25}), 0.0, 1e-15);
  EXPECT_NEAR(p.initial({0.75}), 1.0, 1e-15);
  EXPECT_NEAR(p.exact({0.75}, 0.25), std::exp(pi * pi / 4), 1e-12);
  EXPECT_NEAR(p.boundary({-1.0}, 0.1), std::exp(pi * pi * 0.1) * std::sin(-1.25 * pi), 1e-12);
  EXPECT_NEAR(p.boundary({1.0}, 0.1), std::exp(pi * pi * 0.1) * std::sin(0.75 * pi), 1e-12);
  // u_t - u_xx = 2 pi^2 u by finite differences.
  const double h = 1e-4;
  for (double x : {-0.6, 0.1, 0.8}) {
    for (double t : {0.05, 0.2}) {
      const double ut = (p.exact({x}, t + h) - p.exact({x}, t - h)) / (2 * h);
      const double uxx = (p.exact({x + h}, t) - 2 * p.exact({x}, t) + p.exact({x - h}, t)) / (h * h);
      EXPECT_NEAR(ut - uxx, p.source({x}, t), 1e-4 * std::abs(p.source({x}, t)) + 1e-5);
    }
  }
}

TEST(BuiltinProblems, AnalyticTwoDimensional) {
  const auto p = analytic_2d_problem();
  EXPECT_DOUBLE_EQ(p.horizon, 0.5);
  EXPECT_DOUBLE_EQ(p.length[0], std::numbers::pi);
  EXPECT_NEAR(p.exact({0.25, 1.0}, 0.3), 0.0, 1e-15);
  EXPECT_NEAR(p.exact({0.25 + std::numbers::pi / 2, 0.125 + std::numbers::pi / 4}, 0.0), 1.0, 1e-14);
  const double h = 1e-4;
  for (double x : {0.4, 1.7, 2.9}) {
    for (double y : {0.3, 1.1, 2.5}) {
      const double t = 0.2;
      auto u = [&](double a, double b, double s) { return p.exact({a, b}, s); };
      const double ut = (u(x, y, t + h) - u(x, y, t - h)) / (2 * h);
      const double lap = (u(x + h, y, t) + u(x - h, y, t) + u(x, y + h, t) + u(x, y - h, t) - 4 * u(x, y, t)) / (h * h);
      EXPECT_LT(std::abs(ut - lap - p.source({x, y}, t)), 1e-6);
    }
  }
}

TEST(BuiltinProblems, ErrorEquationIsZero) {
  const auto p = error_equation_problem();
  EXPECT_DOUBLE_EQ(p.length[0], 2.0);
  EXPECT_DOUBLE_EQ(p.horizon, 1.0);
  for (double x : {0.0, 0.5, 2.0}) {
    EXPECT_EQ(p.source({x}, 0.3), 0.0);
    EXPECT_EQ(p.initial({x}), 0.0);
    EXPECT_EQ(p.boundary({x}, 0.3), 0.0);
  }
}

TEST(BuiltinProblems, UnknownNamesAreRejected) {
  EXPECT_THROW(builtin_problem("heat"), std::invalid_argument);
  EXPECT_THROW(parse_solver("method3"), std::invalid_argument);
  EXPECT_THROW(parse_scheme("etd3"), std::invalid_argument);
  EXPECT_THROW(parse_convention("quarter"), std::invalid_argument);
  EXPECT_THROW(parse_guess("zero"), std::invalid_argument);
  EXPECT_THROW(default_config("heat"), std::invalid_argument);
}

TEST(ExperimentConfig, DefaultsAndValidation) {
  ExperimentConfig c = default_config("error_equation");
  EXPECT_EQ(c.effective_fixed_iterations(), kErrorEquationIterations);
  EXPECT_TRUE(c.random_guess());
  EXPECT_DOUBLE_EQ(c.effective_tolerance(), 1e-4);
  c.scheme = Scheme::etd2;
  EXPECT_DOUBLE_EQ(c.effective_tolerance(), 1e-6);
  c.solver = SolverKind::mono;
  EXPECT_FALSE(c.effective_fixed_iterations().has_value());
  EXPECT_FALSE(c.random_guess());

  ExperimentConfig a = default_config("analytic_1d");
  EXPECT_FALSE(a.random_guess());
  a.guess = GuessKind::random;
  EXPECT_TRUE(a.random_guess());
  a.dts = {};
  EXPECT_THROW(a.validate(), std::invalid_argument);
  a = default_config("analytic_1d");
  a.dts = {-0.1};
  EXPECT_THROW(a.validate(), std::invalid_argument);
  a = default_config("analytic_1d");
  a.n = 2;
  EXPECT_THROW(a.validate(), std::invalid_argument);
}

TEST(Experiment, ErrorEquationDecayRecipe) {
  ExperimentConfig c = default_config("error_equation");
  c.n = 63;
  c.dts = {0.1};
  c.overlap_cells = {2, 8};
  c.fixed_iterations = 12;
  c.seeds = 2;
  const ExperimentResult r = run_experiment(c);
  // Two seeds plus a mean row for each overlap.
  ASSERT_EQ(r.summary.size(), 6u);
  EXPECT_EQ(r.summary[0].run_id, "c2-dt0-s1");
  EXPECT_EQ(r.summary[1].run_id, "c2-dt0-s2");
  EXPECT_EQ(r.summary[2].run_id, "c2-dt0-mean");
  ASSERT_TRUE(r.summary[2].contraction.has_value());
  EXPECT_NEAR(*r.summary[2].contraction, (*r.summary[0].contraction + *r.summary[1].contraction) / 2, 1e-15);
  EXPECT_LT(*r.summary[5].contraction, *r.summary[2].contraction);
  for (const auto& row : r.summary) {
    EXPECT_EQ(row.iters_used, 12);
    EXPECT_GT(*row.contraction, 0.0);
    EXPECT_LT(*row.contraction, 1.0);
  }
  // One row per face plus a max row, for every iteration of every seeded run.
  EXPECT_EQ(r.decay.size(), 2u * 2u * 12u * 3u);
  EXPECT_EQ(r.decay[2].interface, "max");
  EXPECT_DOUBLE_EQ(*r.decay[2].normalized_error, 1.0);
}

TEST(Experiment, Method1DecayUsesFirstLevel) {
  ExperimentConfig c = default_config("error_equation");
  c.solver = SolverKind::method1;
  c.n = 63;
  c.dts = {0.25};
  c.fixed_iterations = 8;
  c.seeds = 1;
  const ExperimentResult r = run_experiment(c);
  ASSERT_EQ(r.summary.size(), 1u);
  EXPECT_EQ(r.summary[0].run_id, "c8-dt0-s1");
  // 4 steps, 8 iterations each, 2 faces plus max.
  EXPECT_EQ(r.decay.size(), 4u * 8u * 3u);
  EXPECT_EQ(r.decay.front().time_level, 1);
  EXPECT_EQ(r.decay.back().time_level, 4);
}

TEST(Experiment, MonodomainMatchesSingleSubdomainMethod1) {
  ExperimentConfig mono = default_config("analytic_1d");
  mono.n = 127;
  mono.dts = {1.0 / 40, 1.0 / 80};
  mono.solver = SolverKind::mono;
  ExperimentConfig one = mono;
  one.solver = SolverKind::method1;
  one.px = 1;
  const ExperimentResult a = run_experiment(mono);
  const ExperimentResult b = run_experiment(one);
  ASSERT_EQ(a.summary.size(), b.summary.size());
  for (std::size_t i = 0; i < a.summary.size(); ++i) {
    EXPECT_EQ(*a.summary[i].linf_error, *b.summary[i].linf_error);
  }
  ASSERT_TRUE(a.summary[1].observed_order.has_value());
  EXPECT_FALSE(a.summary[0].observed_order.has_value());
}

TEST(Experiment, EtdOneRowWidestOverlap) {
  ExperimentConfig c = default_config("analytic_1d");
  c.dts = {1.0 / 40, 1.0 / 80};
  const ExperimentResult r = run_experiment(c);
  ASSERT_EQ(r.summary.size(), 2u);
  EXPECT_NEAR(*r.summary[0].linf_error, 2.6140e-1, 0.02 * 2.6140e-1);
  EXPECT_NEAR(*r.summary[1].linf_error, 1.4418e-1, 0.02 * 1.4418e-1);
  EXPECT_NEAR(*r.summary[1].observed_order, 0.86, 0.05);
}

TEST(Experiment, TwoDimensionalMonodomainSmall) {
  ExperimentConfig c = default_config("analytic_2d");
  c.solver = SolverKind::mono;
  c.n = 31;
  c.dts = {0.5 / 16, 0.5 / 32};
  const ExperimentResult r = run_experiment(c);
  ASSERT_EQ(r.summary.size(), 2u);
  EXPECT_EQ(r.summary[0].parts, "2x2");
  EXPECT_LT(*r.summary[1].linf_error, *r.summary[0].linf_error);
  EXPECT_LT(*r.summary[1].linf_error, 1e-2);
}

TEST(Experiment, CsvIsDeterministic) {
  ExperimentConfig c = default_config("error_equation");
  c.n = 63;
  c.dts = {0.1};
  c.fixed_iterations = 8;
  c.seeds = 2;
  const auto dir = std::filesystem::temp_directory_path() / "letd_harness_test";
  std::filesystem::remove_all(dir);
  c.out_dir = (dir / "a").string();
  write_outputs(c, run_experiment(c), true);
  c.out_dir = (dir / "b").string();
  write_outputs(c, run_experiment(c), false);
  for (const char* name : {"summary.csv", "decay.csv"}) {
    const std::string a = read_file(dir / "a" / name);
    const std::string b = read_file(dir / "b" / name);
    EXPECT_EQ(csv_body(a), csv_body(b)) << name;
    EXPECT_NE(a.find("# generated:"), std::string::npos);
    EXPECT_EQ(b.find("# generated:"), std::string::npos);
    EXPECT_NE(a.find("# seed: 1"), std::string::npos);
  }
  const std::string summary = csv_body(read_file(dir / "a" / "summary.csv"));
  EXPECT_EQ(summary.substr(0, summary.find('\n')),
            "run_id,delta_cells,dt,T,P,scheme,solver,contraction,linf_error,observed_order,iters_used");
  const std::string decay = csv_body(read_file(dir / "a" / "decay.csv"));
  EXPECT_EQ(decay.substr(0, decay.find('\n')), "run_id,iteration,time_level,interface,raw_update,normalized_error");
  std::filesystem::remove_all(dir);
}

TEST(Experiment, FormatNumberRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 2.7910e-3, 1e-300, -5.5}) {
    EXPECT_EQ(std::stod(format_number(x)), x);
  }
}
