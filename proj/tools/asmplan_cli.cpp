// asmplan: command-line front end for observation generation, planning,
// seeded batch runs, ablations, KKT verification and plan export.
//
// Exit codes: 0 success, 1 planning failure, 2 input error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asmplan/harness.hpp"
#include "asmplan/io.hpp"
#include "asmplan/planner.hpp"
#include "asmplan/qp.hpp"
#include "asmplan/vision.hpp"

using namespace asmplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPlanningFailure = 1;
constexpr int kExitInputError = 2;

// Command-line overrides; only options actually given are applied.
struct SearchFlags {
  std::optional<double> exploration;
  std::optional<std::string> reward_mode;
  std::optional<bool> guided;
  std::optional<int> rollout_budget;
  std::optional<double> epsilon;
  std::optional<std::string> uct_variant;
  std::optional<std::string> method;
  std::optional<std::uint64_t> seed;
  std::optional<bool> penetration_removal;
  std::optional<int> max_augmentations;
  std::vector<double> place_offset;

  void add(CLI::App* app, bool with_seed) {
    app->add_option("--exploration", exploration, "UCT exploration constant");
    app->add_option("--reward-mode", reward_mode, "dense | sparse")
        ->check(CLI::IsMember({"dense", "sparse"}));
    app->add_option("--guided", guided, "prefer operators on detected objects (true|false)");
    app->add_option("--rollout-budget", rollout_budget, "maximum rollouts");
    app->add_option("--epsilon", epsilon, "match radius in meters");
    app->add_option("--uct-variant", uct_variant, "standard | inverted")
        ->check(CLI::IsMember({"standard", "inverted"}));
    app->add_option("--method", method, "mcts | random")->check(CLI::IsMember({"mcts", "random"}));
    if (with_seed) app->add_option("--seed", seed, "search seed");
    app->add_option("--penetration-removal", penetration_removal, "true|false");
    app->add_option("--max-augmentations", max_augmentations, "penetration removal rounds");
    app->add_option("--place-offset", place_offset, "x y z added to place poses")->expected(3);
  }

  Json to_json() const {
    Json j = Json::object();
    if (exploration) j["exploration"] = *exploration;
    if (reward_mode) j["reward_mode"] = *reward_mode;
    if (guided) j["guided"] = *guided;
    if (rollout_budget) j["rollout_budget"] = *rollout_budget;
    if (epsilon) j["epsilon"] = *epsilon;
    if (uct_variant) j["uct_variant"] = *uct_variant;
    if (method) j["method"] = *method;
    if (seed) j["seed"] = *seed;
    if (penetration_removal) j["penetration_removal"] = *penetration_removal;
    if (max_augmentations) j["max_augmentations"] = *max_augmentations;
    if (!place_offset.empty()) j["place_offset"] = place_offset;
    return j;
  }

  void apply(SearchConfig& config) const { apply_json(to_json(), config, "(command line)"); }
};

struct VisionFlags {
  std::vector<double> camera_dir;
  std::optional<double> occlusion_threshold;
  std::optional<double> pos_noise_sigma;
  std::optional<double> false_positive_rate;
  std::optional<double> confidence_threshold;
  std::vector<int> forced_hidden;

  void add(CLI::App* app) {
    app->add_option("--camera-dir", camera_dir, "viewing direction x y z")->expected(3);
    app->add_option("--occlusion-threshold", occlusion_threshold, "minimum visible fraction");
    app->add_option("--pos-noise-sigma", pos_noise_sigma, "position noise (m)");
    app->add_option("--false-positive-rate", false_positive_rate, "expected hallucinations");
    app->add_option("--confidence-threshold", confidence_threshold, "detector cutoff");
    app->add_option("--forced-hidden", forced_hidden, "ids never detected");
  }

  void apply(VisionConfig& config) const {
    Json j = Json::object();
    if (!camera_dir.empty()) j["camera_dir"] = camera_dir;
    if (occlusion_threshold) j["occlusion_threshold"] = *occlusion_threshold;
    if (pos_noise_sigma) j["pos_noise_sigma"] = *pos_noise_sigma;
    if (false_positive_rate) j["false_positive_rate"] = *false_positive_rate;
    if (confidence_threshold) j["confidence_threshold"] = *confidence_threshold;
    if (!forced_hidden.empty()) j["forced_hidden"] = forced_hidden;
    apply_json(j, config, "(command line)");
  }
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError(path + ": cannot open for writing");
  out << text;
}

Scenario scenario_arg(const std::string& arg) {
  const std::filesystem::path p(arg);
  if (std::filesystem::exists(p)) return load_scenario(p);
  const std::filesystem::path bundled = bundled_scenario(arg);
  if (std::filesystem::exists(bundled)) return load_scenario(bundled);
  throw InputError(arg + ": no such scenario file or bundled scenario");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Assembly planning from partial observations"};
  app.require_subcommand(1);

  // generate-observation
  auto* gen = app.add_subcommand("generate-observation", "run the vision simulator on a scene");
  std::string gen_scene, gen_out;
  std::uint64_t gen_seed = 0;
  VisionFlags gen_vision;
  gen->add_option("--scene", gen_scene, "scene JSON")->required();
  gen->add_option("--seed", gen_seed, "noise seed");
  gen->add_option("-o,--out", gen_out, "output file (default stdout)");
  gen_vision.add(gen);

  // plan
  auto* pl = app.add_subcommand("plan", "plan one observation");
  std::string pl_scene, pl_obs, pl_layout, pl_out, pl_trace, pl_config, pl_steps;
  bool pl_dump = false;
  SearchFlags pl_search;
  pl->add_option("--scene", pl_scene, "scene JSON (catalog and table)")->required();
  pl->add_option("--observation", pl_obs, "observation JSON")->required();
  pl->add_option("--layout", pl_layout, "layout JSON (pick poses)")->required();
  pl->add_option("--config", pl_config, "search config JSON");
  pl->add_option("-o,--out", pl_out, "plan JSON (default stdout)");
  pl->add_option("--trace", pl_trace, "per-rollout CSV");
  pl->add_option("--steps", pl_steps, "also write the step list here");
  pl->add_flag("--dump-constraints", pl_dump, "print the final constraint system to stderr");
  pl_search.add(pl, true);

  // run
  auto* run = app.add_subcommand("run", "seeded batch run of a scenario");
  std::string run_scenario_arg, run_json, run_csv;
  int run_seeds = 20, run_jobs = 1;
  std::uint64_t run_first = 0;
  bool run_no_timing = false;
  SearchFlags run_search;
  run->add_option("scenario", run_scenario_arg, "scenario file or bundled name (A, B, C, overlap)")
      ->required();
  run->add_option("--seeds", run_seeds, "number of seeds");
  run->add_option("--first-seed", run_first, "first seed");
  run->add_option("--jobs", run_jobs, "worker threads");
  run->add_option("--json", run_json, "report JSON (default stdout)");
  run->add_option("--csv", run_csv, "per-seed CSV");
  run->add_flag("--no-timing", run_no_timing, "omit wall times from the JSON report");
  run_search.add(run, false);

  // ablate
  auto* abl = app.add_subcommand("ablate", "search-method and penetration-removal ablation");
  std::string abl_scenario, abl_json;
  int abl_seeds = 20, abl_jobs = 1;
  std::uint64_t abl_first = 0;
  SearchFlags abl_search;
  abl->add_option("scenario", abl_scenario, "scenario file or bundled name")->required();
  abl->add_option("--seeds", abl_seeds, "number of seeds");
  abl->add_option("--first-seed", abl_first, "first seed");
  abl->add_option("--jobs", abl_jobs, "worker threads");
  abl->add_option("--json", abl_json, "full reports as JSON");
  abl_search.add(abl, false);

  // verify
  auto* ver = app.add_subcommand("verify", "re-solve a plan's poses and check KKT conditions");
  std::string ver_plan, ver_scene, ver_obs;
  double ver_tol = 1e-5;
  SearchFlags ver_search;
  ver->add_option("--plan", ver_plan, "plan JSON")->required();
  ver->add_option("--scene", ver_scene, "scene JSON")->required();
  ver->add_option("--observation", ver_obs, "observation JSON")->required();
  ver->add_option("--tolerance", ver_tol, "KKT residual tolerance");
  ver_search.add(ver, false);

  // export
  auto* exp = app.add_subcommand("export", "write a plan as JSON or a step list");
  std::string exp_plan, exp_scene, exp_format = "steps", exp_out;
  exp->add_option("--plan", exp_plan, "plan JSON")->required();
  exp->add_option("--scene", exp_scene, "scene JSON")->required();
  exp->add_option("--format", exp_format, "json | steps")->check(CLI::IsMember({"json", "steps"}));
  exp->add_option("-o,--out", exp_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (gen->parsed()) {
      const Scene scene = load_scene(gen_scene);
      VisionConfig vision;
      gen_vision.apply(vision);
      vision.seed = gen_seed;
      write_text(gen_out, to_json(observe(scene, vision)).dump(2) + "\n");
      return kExitOk;
    }

    if (pl->parsed()) {
      const Scene scene = load_scene(pl_scene);
      const Observation obs = load_observation(pl_obs);
      const Layout layout = load_layout(pl_layout);
      SearchConfig config;
      if (!pl_config.empty()) apply_json(read_json_file(pl_config), config, pl_config);
      pl_search.apply(config);
      std::ofstream trace;
      if (!pl_trace.empty()) {
        trace.open(pl_trace);
        if (!trace) throw InputError(pl_trace + ": cannot open for writing");
      }
      const PlanResult result = plan(scene.catalog, obs, layout, config, scene.table_extent,
                                     pl_trace.empty() ? nullptr : &trace);
      if (pl_dump && !result.operator_sequence.empty()) {
        const PlanningProblem problem(scene.catalog, obs, scene.table_extent, config);
        const PoseSolveResult solved = problem.solve(result.operator_sequence);
        std::cerr << solved.system.dump(scene.catalog);
      }
      write_text(pl_out, to_json(result, scene.catalog).dump(2) + "\n");
      if (!pl_steps.empty()) {
        write_text(pl_steps, export_plan(result, scene.catalog, ExportFormat::kStepList));
      }
      std::cerr << (result.success ? "success" : "failure") << ": reward " << result.reward
                << " after " << result.rollouts_used << " rollouts"
                << (result.diagnostic.empty() ? "" : " (" + result.diagnostic + ")") << "\n";
      return result.success ? kExitOk : kExitPlanningFailure;
    }

    if (run->parsed()) {
      Scenario scenario = scenario_arg(run_scenario_arg);
      run_search.apply(scenario.search);
      const RunReport report = run_scenario(scenario, seed_range(run_first, run_seeds), run_jobs);
      write_text(run_json, report_to_json(report, !run_no_timing).dump(2) + "\n");
      if (!run_csv.empty()) write_text(run_csv, report_to_csv(report));
      std::cerr << scenario.name << ": success " << 100.0 * report.success_rate << "%, rollouts "
                << report.rollouts.mean << " +- " << report.rollouts.stddev << " (median "
                << report.rollouts.median << ")\n";
      return report.success_rate == 1.0 ? kExitOk : kExitPlanningFailure;
    }

    if (abl->parsed()) {
      Scenario scenario = scenario_arg(abl_scenario);
      abl_search.apply(scenario.search);
      const auto rows = run_ablation_matrix(scenario, seed_range(abl_first, abl_seeds), abl_jobs);
      std::cout << ablation_table(rows);
      if (!abl_json.empty()) write_text(abl_json, ablation_to_json(rows).dump(2) + "\n");
      return kExitOk;
    }

    if (ver->parsed()) {
      const Scene scene = load_scene(ver_scene);
      const Observation obs = load_observation(ver_obs);
      const PlanResult result = load_plan(ver_plan, scene.catalog);
      SearchConfig config;
      ver_search.apply(config);
      const PlanningProblem problem(scene.catalog, obs, scene.table_extent, config);
      const PoseSolveResult solved = problem.solve(result.operator_sequence);
      if (!solved.feasible) {
        std::cout << "infeasible: " << solved.diagnostic << "\n";
        return kExitPlanningFailure;
      }
      const KktReport kkt = check_kkt(solved.problem, solved.solution);
      double drift = 0.0;
      for (std::size_t i = 0; i < scene.catalog.size(); ++i) {
        auto it = result.solved_poses.find(scene.catalog[i].id);
        if (it == result.solved_poses.end()) continue;
        drift = std::max(drift, norm(it->second.position - solved.poses[i].position));
      }
      const PlanCheck check = check_plan(result, scene.catalog, scene.table_extent);
      std::cout << "stationarity " << kkt.stationarity << "\nprimal_feasibility "
                << kkt.primal_feasibility << "\ndual_feasibility " << kkt.dual_feasibility
                << "\ncomplementarity " << kkt.complementarity << "\nkkt_max " << kkt.max()
                << "\npose_drift " << drift << "\nconstraint_residual "
                << check.constraint_residual << "\nmax_penetration " << check.max_penetration
                << "\n";
      for (PrimitiveId id : check.edge_warnings) {
        std::cout << "warning: primitive " << id << " rests near its support edge\n";
      }
      const bool ok = kkt.max() <= ver_tol && drift <= 1e-6 && check.stable;
      std::cout << (ok ? "OK" : "FAILED") << "\n";
      return ok ? kExitOk : kExitPlanningFailure;
    }

    if (exp->parsed()) {
      const Scene scene = load_scene(exp_scene);
      const PlanResult result = load_plan(exp_plan, scene.catalog);
      write_text(exp_out, export_plan(result, scene.catalog,
                                      exp_format == "json" ? ExportFormat::kJson
                                                           : ExportFormat::kStepList));
      return kExitOk;
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const PlanningError& e) {
    std::cerr << "planning failed: " << e.what() << "\n";
    return kExitPlanningFailure;
  }
  return kExitInputError;
}
