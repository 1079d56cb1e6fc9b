#include "asmplan/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "asmplan/constraints.hpp"

namespace asmplan {

namespace {

std::vector<Pose> poses_by_index(const PlanResult& plan, const Catalog& catalog) {
  std::vector<Pose> poses;
  for (const Primitive& p : catalog.primitives()) {
    auto it = plan.solved_poses.find(p.id);
    if (it == plan.solved_poses.end()) return {};
    poses.push_back(it->second);
  }
  return poses;
}

double penetration_depth(const Primitive& a, const Pose& pa, const Primitive& b,
                         const Pose& pb) {
  const Vec3 ea = rotated_extents(a.dims, pa.rot);
  const Vec3 eb = rotated_extents(b.dims, pb.rot);
  const Vec3 d = pa.position - pb.position;
  const double ox = 0.5 * (ea.x + eb.x) - std::abs(d.x);
  const double oy = 0.5 * (ea.y + eb.y) - std::abs(d.y);
  const double oz = 0.5 * (ea.z + eb.z) - std::abs(d.z);
  return std::max(0.0, std::min({ox, oy, oz}));
}

Json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"std", s.stddev}, {"median", s.median}};
}

std::string fixed(double v, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

SeedRecord run_seed(const Scenario& scenario, std::uint64_t seed) {
  SeedRecord rec;
  rec.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  const Observation obs = observation_for_seed(scenario, seed);
  rec.visible = obs.visible_ids(scenario.scene.catalog).size();
  rec.hidden = scenario.scene.catalog.size() - rec.visible;
  SearchConfig cfg = scenario.search;
  cfg.seed = seed;
  try {
    const PlanResult result =
        plan(scenario.scene.catalog, obs, scenario.layout, cfg, scenario.scene.table_extent);
    rec.success = result.success;
    rec.rollouts_used = result.rollouts_used;
    rec.reward = result.reward;
    rec.mean_reward_per_rollout = result.mean_reward_per_rollout;
    rec.trajectory = result.best_reward_trajectory;
    rec.check = check_plan(result, scenario.scene.catalog, scenario.scene.table_extent);
  } catch (const PlanningError&) {
    // Nothing visible or every root operator pruned: counts as a failure.
    rec.check.stable = false;
    rec.check.penetration_free = false;
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace

Scenario load_scenario(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  const std::filesystem::path dir = path.parent_path();
  auto resolve = [&](const Json& value, const std::string& where) {
    if (!value.is_string()) throw InputError(path.string() + ": " + where + ": expected a file name");
    return dir / value.get<std::string>();
  };
  Scenario s;
  s.source = path;
  try {
    if (!j.is_object()) throw InputError("/: expected an object");
    s.name = j.value("name", path.stem().string());
    if (!j.contains("scene")) throw InputError("/: missing field 'scene'");
    if (!j.contains("layout")) throw InputError("/: missing field 'layout'");
    if (j.contains("vision")) apply_json(j["vision"], s.vision, "/vision");
    if (j.contains("search")) apply_json(j["search"], s.search, "/search");
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  s.scene = load_scene(resolve(j["scene"], "/scene"));
  s.layout = load_layout(resolve(j["layout"], "/layout"));
  if (j.contains("observation")) s.observation = load_observation(resolve(j["observation"], "/observation"));
  for (const auto& [id, pose] : s.scene.placements) {
    (void)pose;
    if (!s.layout.pick_poses.count(id)) {
      throw InputError(path.string() + ": /layout: no pick pose for primitive " + std::to_string(id));
    }
  }
  for (PrimitiveId id : s.vision.forced_hidden) {
    if (!s.scene.catalog.contains(id)) {
      throw InputError(path.string() + ": /vision/forced_hidden: unknown primitive " + std::to_string(id));
    }
  }
  if (j.contains("reference_sequence")) {
    try {
      s.reference_sequence =
          sequence_from_json(j["reference_sequence"], s.scene.catalog, "/reference_sequence");
    } catch (const InputError& e) {
      throw InputError(path.string() + ": " + e.what());
    }
  }
  return s;
}

std::filesystem::path bundled_scenario(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const std::filesystem::path dir(ASMPLAN_SCENARIO_DIR);
  const std::filesystem::path structure = dir / ("structure_" + lower + ".json");
  return std::filesystem::exists(structure) ? structure : dir / (lower + ".json");
}

Observation observation_for_seed(const Scenario& scenario, std::uint64_t seed) {
  if (scenario.observation) return *scenario.observation;
  VisionConfig vision = scenario.vision;
  vision.seed = seed;
  return observe(scenario.scene, vision);
}

PlanCheck check_plan(const PlanResult& plan, const Catalog& catalog,
                     const Rect& table_extent, double tol, double margin) {
  PlanCheck check;
  const std::vector<Pose> poses = poses_by_index(plan, catalog);
  if (poses.empty() && !catalog.empty()) {
    check.stable = false;
    check.penetration_free = false;
    check.constraint_residual = std::numeric_limits<double>::infinity();
    return check;
  }
  try {
    const ConstraintSystem system =
        stability_constraints(plan.operator_sequence, catalog, table_extent);
    check.constraint_residual = system.residual(poses);
    for (std::size_t i = 0; i < catalog.size(); ++i) {
      const SupportRecord& s = system.supports[i];
      if (s.kind != SupportKind::kOn) continue;
      const Rect r = footprint(catalog[s.first], poses[s.first]);
      const Vec3& c = poses[i].position;
      const double slack = std::min({c.x - r.min_x, r.max_x - c.x, c.y - r.min_y, r.max_y - c.y});
      if (slack < margin) check.edge_warnings.push_back(catalog[i].id);
    }
  } catch (const std::invalid_argument&) {
    check.constraint_residual = std::numeric_limits<double>::infinity();
  }
  for (std::size_t i = 0; i < poses.size(); ++i) {
    for (std::size_t k = i + 1; k < poses.size(); ++k) {
      check.max_penetration = std::max(
          check.max_penetration, penetration_depth(catalog[i], poses[i], catalog[k], poses[k]));
    }
  }
  check.stable = check.constraint_residual <= tol;
  check.penetration_free = check.max_penetration <= tol;
  return check;
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  s.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return s;
}

void aggregate(RunReport& report) {
  std::vector<double> rollouts;
  std::vector<double> wall;
  std::vector<double> reward;
  std::size_t successes = 0;
  for (const SeedRecord& r : report.records) {
    successes += r.success ? 1 : 0;
    rollouts.push_back(r.rollouts_used);
    wall.push_back(r.wall_seconds);
    reward.push_back(r.reward);
  }
  report.success_rate =
      report.records.empty() ? 0.0 : static_cast<double>(successes) / report.records.size();
  report.rollouts = summarize(rollouts);
  report.wall_seconds = summarize(wall);
  report.reward = summarize(reward);
}

RunReport run_scenario(const Scenario& scenario, const std::vector<std::uint64_t>& seeds,
                       int jobs) {
  RunReport report;
  report.scenario = scenario.name;
  report.search = scenario.search;
  report.vision = scenario.vision;
  report.records.resize(seeds.size());
  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, seeds.size() ? seeds.size() : 1);
  if (workers == 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) report.records[i] = run_seed(scenario, seeds[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
          try {
            report.records[i] = run_seed(scenario, seeds[i]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }
  aggregate(report);
  return report;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(first + static_cast<std::uint64_t>(i));
  return seeds;
}

Json report_to_json(const RunReport& report, bool include_timing) {
  Json seeds = Json::array();
  for (const SeedRecord& r : report.records) {
    Json trajectory = Json::array();
    for (const auto& [rollout, reward] : r.trajectory) trajectory.push_back({rollout, reward});
    Json rec = {{"seed", r.seed},
                {"success", r.success},
                {"rollouts_used", r.rollouts_used},
                {"reward", r.reward},
                {"mean_reward_per_rollout", r.mean_reward_per_rollout},
                {"visible", r.visible},
                {"hidden", r.hidden},
                {"penetration_free", r.check.penetration_free},
                {"max_penetration", r.check.max_penetration},
                {"stable", r.check.stable},
                {"constraint_residual", std::isfinite(r.check.constraint_residual)
                                            ? Json(r.check.constraint_residual)
                                            : Json(nullptr)},
                {"edge_warnings", r.check.edge_warnings},
                {"reward_trajectory", trajectory}};
    if (include_timing) rec["wall_seconds"] = r.wall_seconds;
    seeds.push_back(rec);
  }
  Json agg = {{"runs", report.records.size()},
              {"success_rate", report.success_rate},
              {"rollouts", summary_json(report.rollouts)},
              {"reward", summary_json(report.reward)}};
  if (include_timing) agg["wall_seconds"] = summary_json(report.wall_seconds);
  return {{"scenario", report.scenario},
          {"search", to_json(report.search)},
          {"vision", to_json(report.vision)},
          {"seeds", seeds},
          {"aggregate", agg}};
}

std::string report_to_csv(const RunReport& report) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "seed,success,rollouts_used,wall_seconds,reward,mean_reward_per_rollout,"
         "visible,hidden,penetration_free,constraint_residual\n";
  for (const SeedRecord& r : report.records) {
    out << r.seed << ',' << (r.success ? 1 : 0) << ',' << r.rollouts_used << ','
        << r.wall_seconds << ',' << r.reward << ',' << r.mean_reward_per_rollout << ','
        << r.visible << ',' << r.hidden << ',' << (r.check.penetration_free ? 1 : 0) << ','
        << r.check.constraint_residual << '\n';
  }
  return out.str();
}

std::vector<AblationRow> run_ablation_matrix(const Scenario& scenario,
                                             const std::vector<std::uint64_t>& seeds,
                                             int jobs) {
  struct Variant {
    std::string label;
    SearchMethod method;
    RewardMode reward;
    bool guided;
    bool removal;
    UctVariant uct;
  };
  const std::vector<Variant> variants = {
      {"R.S. guided", SearchMethod::kRandom, RewardMode::kDense, true, true, UctVariant::kStandard},
      {"R.S. unguided", SearchMethod::kRandom, RewardMode::kDense, false, true, UctVariant::kStandard},
      {"MCTS-sparse guided", SearchMethod::kMcts, RewardMode::kSparse, true, true, UctVariant::kStandard},
      {"MCTS-sparse unguided", SearchMethod::kMcts, RewardMode::kSparse, false, true, UctVariant::kStandard},
      {"MCTS-dense guided", SearchMethod::kMcts, RewardMode::kDense, true, true, UctVariant::kStandard},
      {"MCTS-dense unguided", SearchMethod::kMcts, RewardMode::kDense, false, true, UctVariant::kStandard},
      {"MCTS-dense guided, no penetration removal", SearchMethod::kMcts, RewardMode::kDense, true,
       false, UctVariant::kStandard},
      {"MCTS-dense guided, inverted UCT", SearchMethod::kMcts, RewardMode::kDense, true, true,
       UctVariant::kInverted},
  };
  std::vector<AblationRow> rows;
  for (const Variant& v : variants) {
    Scenario s = scenario;
    s.search.method = v.method;
    s.search.reward_mode = v.reward;
    s.search.guided = v.guided;
    s.search.penetration_removal = v.removal;
    s.search.uct_variant = v.uct;
    rows.push_back({v.label, run_scenario(s, seeds, jobs)});
  }
  return rows;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(44) << "method" << std::right << std::setw(10) << "success%"
      << std::setw(10) << "clean%" << std::setw(22) << "rollouts mean+-std" << std::setw(10)
      << "median" << std::setw(12) << "wall s" << "\n";
  for (const AblationRow& row : rows) {
    const RunReport& r = row.report;
    // Share of successful plans without interpenetration.
    int successes = 0;
    int clean = 0;
    for (const SeedRecord& rec : r.records) {
      if (!rec.success) continue;
      ++successes;
      if (rec.check.penetration_free) ++clean;
    }
    const std::string clean_pct = successes ? fixed(100.0 * clean / successes, 1) : "-";
    out << std::left << std::setw(44) << row.label << std::right << std::setw(10)
        << fixed(100.0 * r.success_rate, 1) << std::setw(10) << clean_pct << std::setw(22)
        << (fixed(r.rollouts.mean, 1) + "+-" + fixed(r.rollouts.stddev, 1)) << std::setw(10)
        << fixed(r.rollouts.median, 1) << std::setw(12) << fixed(r.wall_seconds.mean, 3) << "\n";
  }
  return out.str();
}

Json ablation_to_json(const std::vector<AblationRow>& rows, bool include_timing) {
  Json out = Json::array();
  for (const AblationRow& row : rows) {
    out.push_back({{"label", row.label}, {"report", report_to_json(row.report, include_timing)}});
  }
  return out;
}

std::string export_plan(const PlanResult& plan, const Catalog& catalog, ExportFormat format) {
  if (format == ExportFormat::kJson) return to_json(plan, catalog).dump(2) + "\n";
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  if (!plan.success) {
    out << "# best-effort plan: not every visible object matched (reward "
        << plan.reward << ")\n";
  }
  const Vec3& o = plan.place_offset;
  int n = 1;
  for (const PlanStep& s : plan.steps) {
    const Vec3 q = s.place.position + o;
    out << n++ << ". pick (" << s.pick.position.x << "," << s.pick.position.y
        << ") → place (" << q.x << "," << q.y << "," << q.z << ","
        << quarter_turns(s.place.rot) << ")  [id " << s.id << "]\n";
  }
  return out.str();
}

}  // namespace asmplan
