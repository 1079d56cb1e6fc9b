#pragma once

// Experiment plumbing: scenario files, seeded batch runs, ablation tables,
// plan checks and plan export.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "asmplan/io.hpp"
#include "asmplan/planner.hpp"
#include "asmplan/scene.hpp"
#include "asmplan/vision.hpp"

namespace asmplan {

struct Scenario {
  std::string name;
  std::filesystem::path source;  // the scenario file itself
  Scene scene;
  Layout layout;
  /// Authored detections used instead of the vision simulator.
  std::optional<Observation> observation;
  VisionConfig vision;
  SearchConfig search;
  /// Ground-truth build order, when known.
  OperatorSequence reference_sequence;
};

/// Reads a scenario file. Scene, layout and observation paths are resolved
/// relative to it. Errors carry the offending file and JSON pointer.
Scenario load_scenario(const std::filesystem::path& path);

/// Path of a bundled scenario by short name ("A", "B", "C", ...).
std::filesystem::path bundled_scenario(const std::string& name);

/// Observation for one seed: the authored one if present, else the vision
/// simulator run with the seed.
Observation observation_for_seed(const Scenario& scenario, std::uint64_t seed);

/// Physical checks of a solved plan.
struct PlanCheck {
  double constraint_residual = 0.0;  // max stability-row violation
  double max_penetration = 0.0;      // deepest pairwise overlap, meters
  bool penetration_free = true;      // max_penetration <= tol
  bool stable = true;                // constraint_residual <= tol
  /// Objects whose center of mass lies within `margin` of a support edge.
  std::vector<PrimitiveId> edge_warnings;
};

PlanCheck check_plan(const PlanResult& plan, const Catalog& catalog,
                     const Rect& table_extent, double tol = 1e-6,
                     double margin = 0.005);

struct SeedRecord {
  std::uint64_t seed = 0;
  bool success = false;
  int rollouts_used = 0;
  double wall_seconds = 0.0;
  double reward = 0.0;
  double mean_reward_per_rollout = 0.0;
  std::size_t visible = 0;
  std::size_t hidden = 0;
  PlanCheck check;
  std::vector<std::pair<int, double>> trajectory;
};

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for n < 2
  double median = 0.0;
};

Summary summarize(const std::vector<double>& values);

struct RunReport {
  std::string scenario;
  SearchConfig search;
  VisionConfig vision;
  std::vector<SeedRecord> records;  // in seed order
  double success_rate = 0.0;
  Summary rollouts;
  Summary wall_seconds;
  Summary reward;
};

/// observe -> plan -> check for every seed. `jobs` > 1 runs seeds on worker
/// threads; records are still assembled in seed order.
RunReport run_scenario(const Scenario& scenario,
                       const std::vector<std::uint64_t>& seeds, int jobs = 1);

/// Aggregates recomputed from the records.
void aggregate(RunReport& report);

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count);

/// With include_timing = false the output depends only on the inputs.
Json report_to_json(const RunReport& report, bool include_timing = true);

/// Header: seed,success,rollouts_used,wall_seconds,reward,
/// mean_reward_per_rollout,visible,hidden,penetration_free,constraint_residual
std::string report_to_csv(const RunReport& report);

struct AblationRow {
  std::string label;
  RunReport report;
};

/// Rows: {R.S., MCTS-sparse, MCTS-dense} x {guided, unguided}, then
/// MCTS-dense-guided with penetration removal off, then with the literal UCT
/// variant. Every row starts from the scenario's search config.
std::vector<AblationRow> run_ablation_matrix(const Scenario& scenario,
                                             const std::vector<std::uint64_t>& seeds,
                                             int jobs = 1);

/// Fixed-width text table: label, success %, penetration-free % of the
/// successful plans, rollouts mean +- std, median, mean wall time.
std::string ablation_table(const std::vector<AblationRow>& rows);
Json ablation_to_json(const std::vector<AblationRow>& rows, bool include_timing = true);

enum class ExportFormat : std::uint8_t { kJson, kStepList };

/// JSON keeps every field of the plan. The step list has one numbered line
/// per placement, "pick (x,y) → place (x,y,z,rot)" with the place offset
/// added, preceded by a flag line when the plan is best-effort.
std::string export_plan(const PlanResult& plan, const Catalog& catalog,
                        ExportFormat format);

}  // namespace asmplan
