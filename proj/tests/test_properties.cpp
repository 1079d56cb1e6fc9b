#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

namespace asmplan {
namespace {

TEST(Properties, StripsInvariantsUnderRandomSequences) {
  auto err = oracle::fuzz_strips(10000, 2024);
  EXPECT_FALSE(err.has_value()) << *err;
}

TEST(Properties, RewardBoundsOnBundledScenarios) {
  for (const char* name : {"B", "C"}) {
    const Scenario sc = load_scenario(bundled_scenario(name));
    const oracle::RewardCheck r = oracle::check_reward_bounds(sc, 500, 77);
    EXPECT_FALSE(r.violation.has_value()) << name << ": " << *r.violation;
    EXPECT_EQ(r.scored, 500);
    // The sample is only meaningful if it hits non-trivial rewards.
    EXPECT_GT(r.nonzero, 50) << name;
  }
}

TEST(Properties, QpMatchesGridOracle) {
  const auto cases = oracle::load_grid_cases(ASMPLAN_TEST_DATA_DIR "/qp_grid_cases.json");
  ASSERT_EQ(cases.size(), 50u);
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const QpSolution s = solve_qp(cases[k].problem);
    ASSERT_TRUE(s.optimal()) << k << ": " << s.diagnostic;
    EXPECT_LE((s.values - cases[k].grid_solution).cwiseAbs().maxCoeff(), 2e-3) << k;
    EXPECT_LE(check_kkt(cases[k].problem, s).max(), 1e-5) << k;
    // The grid point is feasible, so it cannot beat the exact optimum.
    EXPECT_LE(cases[k].problem.objective(s.values),
              cases[k].problem.objective(cases[k].grid_solution) + 1e-12)
        << k;
  }
}

TEST(Properties, PoseSolutionsSatisfyConstraints) {
  // Every feasible random sequence on C (unfiltered: filtered walks mostly
  // dead-end there) satisfies its own constraint system
  // and, with removal on, is free of interpenetration.
  const Scenario sc = load_scenario(bundled_scenario("C"));
  const Observation obs = observation_for_seed(sc, 0);
  const PlanningProblem problem(sc.scene.catalog, obs, sc.scene.table_extent, sc.search);
  std::mt19937_64 rng(5);
  int feasible = 0;
  for (int k = 0; k < 300; ++k) {
    const OperatorSequence seq = oracle::random_sequence(problem, rng, false);
    if (seq.empty()) continue;
    const PoseSolveResult r = problem.solve(seq);
    if (!r.feasible) continue;
    ++feasible;
    EXPECT_LE(r.system.residual(r.poses), 1e-6);
    const Catalog& cat = sc.scene.catalog;
    for (std::size_t a = 0; a < cat.size(); ++a) {
      for (std::size_t b = a + 1; b < cat.size(); ++b) {
        ASSERT_FALSE(boxes_interpenetrate(cat[a], r.poses[a], cat[b], r.poses[b], 1e-6));
      }
    }
  }
  EXPECT_GT(feasible, 20);
}

TEST(Properties, ExhaustiveMatchesSearchOnSmallCatalogs) {
  for (const char* name : {"A", "B", "C"}) {
    const Scenario sc = load_scenario(bundled_scenario(name));
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const oracle::SubProblem sub = oracle::restrict_scenario(sc, observation_for_seed(sc, seed), 3);
      const PlanningProblem problem(sub.catalog, sub.observation, sc.scene.table_extent, sc.search);
      const oracle::ExhaustiveResult best = oracle::exhaustive_best(problem);
      SearchConfig cfg = sc.search;
      cfg.seed = seed;
      const PlanResult r = plan(sub.catalog, sub.observation, sub.layout, cfg, sc.scene.table_extent);
      EXPECT_DOUBLE_EQ(r.reward, best.best_reward) << name << " seed " << seed;
    }
  }
}

}  // namespace
}  // namespace asmplan
