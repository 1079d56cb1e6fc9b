#include <gtest/gtest.h>

#include <cmath>
#include <regex>
#include <sstream>

#include "asmplan/harness.hpp"

namespace asmplan {
namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(Summary, MeanStdMedian) {
  Summary s = summarize({4, 1, 3, 2});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.stddev, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  s = summarize({7});
  EXPECT_DOUBLE_EQ(s.mean, 7);
  EXPECT_DOUBLE_EQ(s.stddev, 0);
  EXPECT_DOUBLE_EQ(s.median, 7);
  s = summarize({5, 1, 9});
  EXPECT_DOUBLE_EQ(s.median, 5);
  s = summarize({});
  EXPECT_EQ(s.mean, 0);
}

TEST(Harness, SeedRange) {
  EXPECT_EQ(seed_range(5, 3), (std::vector<std::uint64_t>{5, 6, 7}));
  EXPECT_TRUE(seed_range(0, 0).empty());
}

TEST(Harness, StructureAAllOneRollout) {
  Scenario sc = load_scenario(bundled_scenario("A"));
  RunReport r = run_scenario(sc, seed_range(0, 5));
  EXPECT_DOUBLE_EQ(r.success_rate, 1.0);
  EXPECT_DOUBLE_EQ(r.rollouts.mean, 1.0);
  EXPECT_DOUBLE_EQ(r.rollouts.stddev, 0.0);
  for (const SeedRecord& rec : r.records) {
    EXPECT_EQ(rec.visible, 5u);
    EXPECT_EQ(rec.hidden, 0u);
    EXPECT_TRUE(rec.check.penetration_free);
    EXPECT_TRUE(rec.check.stable);
  }
}

TEST(Harness, AggregatesRecomputableFromCsv) {
  Scenario sc = load_scenario(bundled_scenario("B"));
  RunReport r = run_scenario(sc, seed_range(0, 6));
  const auto rows = lines_of(report_to_csv(r));
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0],
            "seed,success,rollouts_used,wall_seconds,reward,mean_reward_per_rollout,visible,hidden,"
            "penetration_free,constraint_residual");
  std::vector<double> rollouts, rewards, wall;
  double successes = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::vector<std::string> cells;
    std::stringstream ss(rows[i]);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 10u);
    successes += std::stod(cells[1]);
    rollouts.push_back(std::stod(cells[2]));
    wall.push_back(std::stod(cells[3]));
    rewards.push_back(std::stod(cells[4]));
  }
  const double n = static_cast<double>(rollouts.size());
  double mean = 0;
  for (double v : rollouts) mean += v / n;
  double var = 0;
  for (double v : rollouts) var += (v - mean) * (v - mean) / (n - 1);
  EXPECT_NEAR(r.rollouts.mean, mean, 1e-12);
  EXPECT_NEAR(r.rollouts.stddev, std::sqrt(var), 1e-12);
  EXPECT_NEAR(r.success_rate, successes / n, 1e-15);
  EXPECT_NEAR(r.reward.mean, summarize(rewards).mean, 1e-15);
  EXPECT_NEAR(r.wall_seconds.mean, summarize(wall).mean, 1e-12 + 1e-9 * r.wall_seconds.mean);

  Json j = report_to_json(r);
  EXPECT_NEAR(j["aggregate"]["rollouts"]["mean"].get<double>(), mean, 1e-12);
  EXPECT_EQ(j["seeds"].size(), 6u);
}

TEST(Harness, ReportsAreReproducible) {
  Scenario sc = load_scenario(bundled_scenario("B"));
  const auto seeds = seed_range(3, 4);
  const std::string first = report_to_json(run_scenario(sc, seeds), false).dump();
  EXPECT_EQ(first.find("wall"), std::string::npos);
  EXPECT_EQ(report_to_json(run_scenario(sc, seeds), false).dump(), first);
  // Worker threads only change scheduling.
  EXPECT_EQ(report_to_json(run_scenario(sc, seeds, 3), false).dump(), first);
}

TEST(Harness, AblationRows) {
  Scenario sc = load_scenario(bundled_scenario("A"));
  auto rows = run_ablation_matrix(sc, seed_range(0, 2));
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[0].label, "R.S. guided");
  EXPECT_EQ(rows[5].label, "MCTS-dense unguided");
  for (const AblationRow& row : rows) {
    EXPECT_DOUBLE_EQ(row.report.success_rate, 1.0) << row.label;
    EXPECT_DOUBLE_EQ(row.report.rollouts.mean, 1.0) << row.label;
  }
  EXPECT_FALSE(rows[6].report.search.penetration_removal);
  EXPECT_EQ(rows[7].report.search.uct_variant, UctVariant::kInverted);
  const std::string table = ablation_table(rows);
  EXPECT_EQ(lines_of(table).size() >= 9, true);
  EXPECT_NE(table.find("MCTS-sparse guided"), std::string::npos);
  EXPECT_EQ(ablation_to_json(rows, false).size(), 8u);
}

TEST(CheckPlan, DetectsPenetrationAndEdges) {
  Catalog cat({Primitive{1, {0.06, 0.06, 0.06}, ""}, Primitive{2, {0.06, 0.06, 0.06}, ""},
               Primitive{3, {0.02, 0.02, 0.02}, ""}});
  PlanResult plan;
  plan.operator_sequence = {put_on(0, kTable), put_on(1, kTable), put_on(2, 1)};
  plan.solved_poses = {{1, {{0.0, 0, 0.03}, Rotation::kNone}},
                       {2, {{0.05, 0, 0.03}, Rotation::kNone}},
                       {3, {{0.078, 0, 0.07}, Rotation::kNone}}};
  Rect table{-0.5, 0.5, -0.5, 0.5};
  PlanCheck c = check_plan(plan, cat, table);
  EXPECT_FALSE(c.penetration_free);
  EXPECT_NEAR(c.max_penetration, 0.01, 1e-12);
  EXPECT_TRUE(c.stable);
  EXPECT_EQ(c.edge_warnings, (std::vector<PrimitiveId>{3}));

  plan.solved_poses[3].position.x = 0.085;  // past the edge of its support
  c = check_plan(plan, cat, table);
  EXPECT_FALSE(c.stable);
  EXPECT_NEAR(c.constraint_residual, 0.005, 1e-12);
}

TEST(Export, StepListFormat) {
  Scenario sc = load_scenario(bundled_scenario("A"));
  SearchConfig cfg = sc.search;
  cfg.place_offset = {0.0, 0.1, 0.0};
  PlanResult plan = asmplan::plan(sc.scene.catalog, observation_for_seed(sc, 0), sc.layout, cfg,
                                  sc.scene.table_extent);
  ASSERT_TRUE(plan.success);
  const auto lines = lines_of(export_plan(plan, sc.scene.catalog, ExportFormat::kStepList));
  ASSERT_EQ(lines.size(), 5u);
  const std::regex line(
      R"(^(\d)\. pick \((-?\d+\.\d{4}),(-?\d+\.\d{4})\) → place \((-?\d+\.\d{4}),(-?\d+\.\d{4}),(-?\d+\.\d{4}),([01])\)  \[id (\d+)\]$)");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::smatch m;
    ASSERT_TRUE(std::regex_match(lines[i], m, line)) << lines[i];
    EXPECT_EQ(std::stoi(m[1]), static_cast<int>(i + 1));
    const PlanStep& step = plan.steps[i];
    EXPECT_EQ(std::stoi(m[8]), step.id);
    EXPECT_NEAR(std::stod(m[5]), step.place.position.y + 0.1, 1e-4);
  }
}

TEST(Export, BestEffortHeader) {
  Catalog cat({Primitive{1, {0.05, 0.05, 0.05}, ""}});
  PlanResult plan;
  plan.success = false;
  plan.reward = 0.5;
  plan.steps = {PlanStep{1, {}, {{0, 0, 0.025}, Rotation::kNone}, std::nullopt}};
  const auto lines = lines_of(export_plan(plan, cat, ExportFormat::kStepList));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0].rfind("# best-effort plan", 0), 0u);
  EXPECT_NE(lines[0].find("0.5000"), std::string::npos);
  EXPECT_EQ(lines[1].rfind("1. pick", 0), 0u);
}

TEST(Export, EmptyCatalog) {
  Catalog cat;
  PlanResult plan;
  plan.success = true;
  EXPECT_EQ(export_plan(plan, cat, ExportFormat::kStepList), "");
  Json j = Json::parse(export_plan(plan, cat, ExportFormat::kJson));
  EXPECT_TRUE(j["steps"].empty());
  EXPECT_NO_THROW(plan_from_json(j, cat));
}

}  // namespace
}  // namespace asmplan
