#include "asmplan/planner.hpp"

#include <algorithm>
#include <numeric>
#include <limits>
#include <ostream>

namespace asmplan {

std::string to_string(RewardMode mode) {
  return mode == RewardMode::kDense ? "dense" : "sparse";
}
std::string to_string(UctVariant variant) {
  return variant == UctVariant::kStandard ? "standard" : "inverted";
}
std::string to_string(SearchMethod method) {
  return method == SearchMethod::kMcts ? "mcts" : "random";
}

void SearchConfig::validate() const {
  if (!(exploration > 0.0)) throw std::invalid_argument("exploration constant must be > 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (rollout_budget < 1) throw std::invalid_argument("rollout budget must be >= 1");
  if (max_augmentations < 0) throw std::invalid_argument("max_augmentations must be >= 0");
}

namespace {

std::vector<double> heights_of(const Catalog& catalog) {
  std::vector<double> h;
  h.reserve(catalog.size());
  for (const Primitive& p : catalog.primitives()) h.push_back(p.dims.z);
  return h;
}

Rotation rotation_of(const ObjectStatus& st) {
  return st.rotated ? Rotation::kQuarter : Rotation::kNone;
}

}  // namespace

PlanningProblem::PlanningProblem(Catalog catalog, const Observation& observation,
                                 Rect table_extent, SearchConfig config)
    : catalog_(std::move(catalog)),
      domain_(heights_of(catalog_)),
      targets_(VisibleTargets::from(observation, catalog_)),
      table_(table_extent),
      config_(config) {
  config_.validate();
  num_visible_ = targets_.count();
  if (num_visible_ == 0) throw PlanningError("no visible objects");
}

bool PlanningProblem::placement_consistent(const StripsState& state,
                                           const Operator& op) const {
  const int a = op.actor;
  const Pose& target = *targets_.by_index[a];
  const ObjectStatus& actor = state.object(a);
  if (rotation_of(actor) != target.rot) return false;

  const double eps = config_.epsilon;
  const double margin = 2.0 * eps;
  const Vec3& p = target.position;
  const double bottom = p.z - 0.5 * catalog_[a].dims.z;
  if (std::abs(domain_.support_top(state, op.first) - bottom) > eps) return false;

  auto extents_of = [&](int s) {
    return rotated_extents(catalog_[s].dims, rotation_of(state.object(s)));
  };
  auto observed = [&](int s) -> const Vec3* {
    return targets_.visible(s) ? &targets_.by_index[s]->position : nullptr;
  };

  switch (op.kind) {
    case OpKind::kRotate:
      return true;
    case OpKind::kPutOn: {
      if (op.first == kTable) {
        const Vec3 e = extents_of(a);
        return p.x >= table_.min_x + 0.5 * e.x - margin &&
               p.x <= table_.max_x - 0.5 * e.x + margin &&
               p.y >= table_.min_y + 0.5 * e.y - margin &&
               p.y <= table_.max_y - 0.5 * e.y + margin;
      }
      const Vec3* q = observed(op.first);
      if (q == nullptr) return true;
      const Vec3 e = extents_of(op.first);
      return std::abs(p.x - q->x) <= 0.5 * e.x + margin &&
             std::abs(p.y - q->y) <= 0.5 * e.y + margin;
    }
    case OpKind::kPutOnAlongX:
    case OpKind::kPutOnAlongY: {
      const bool along_x = op.kind == OpKind::kPutOnAlongX;
      auto along = [along_x](const Vec3& v) { return along_x ? v.x : v.y; };
      auto across = [along_x](const Vec3& v) { return along_x ? v.y : v.x; };
      for (int s : {op.first, op.second}) {
        const Vec3* q = observed(s);
        if (q == nullptr) continue;
        if (std::abs(across(p) - across(*q)) > 0.5 * across(extents_of(s)) + margin) {
          return false;
        }
      }
      if (const Vec3* low = observed(op.first); low && along(*low) > along(p) + margin) {
        return false;
      }
      if (const Vec3* high = observed(op.second); high && along(p) > along(*high) + margin) {
        return false;
      }
      return true;
    }
  }
  return true;
}

bool PlanningProblem::admissible(const StripsState& state, const Operator& op) const {
  if (!domain_.is_applicable(state, op)) return false;
  const int a = op.actor;
  if (op.kind == OpKind::kRotate) {
    return !visible(a) || targets_.by_index[a]->rot == Rotation::kQuarter;
  }
  if (op.kind == OpKind::kPutOn && op.first == kTable) {
    const Vec3 e = rotated_extents(catalog_[a].dims, rotation_of(state.object(a)));
    if (e.x > table_.width() || e.y > table_.depth()) return false;
  }
  if ((op.kind == OpKind::kPutOnAlongX || op.kind == OpKind::kPutOnAlongY) &&
      !bridge_possible(state, op)) {
    return false;
  }
  if (!visible(a)) return true;
  return placement_consistent(state, op);
}

bool PlanningProblem::bridge_possible(const StripsState& state, const Operator& op) const {
  if (!visible(op.first) || !visible(op.second)) return true;
  const bool along_x = op.kind == OpKind::kPutOnAlongX;
  auto along = [along_x](const Vec3& v) { return along_x ? v.x : v.y; };
  auto across = [along_x](const Vec3& v) { return along_x ? v.y : v.x; };
  auto extents_of = [&](int s) {
    return rotated_extents(catalog_[s].dims, rotation_of(state.object(s)));
  };
  const double margin = 2.0 * config_.epsilon;
  const Vec3& low = targets_.by_index[op.first]->position;
  const Vec3& high = targets_.by_index[op.second]->position;
  const Vec3 el = extents_of(op.first);
  const Vec3 eh = extents_of(op.second);
  if (along(low) > along(high) + margin) return false;
  // Shortest bridge that still covers the required fraction of both supports.
  const double span = (along(high) - 0.5 * along(eh) + kBridgeOverlap * along(eh)) -
                      (along(low) + 0.5 * along(el) - kBridgeOverlap * along(el));
  if (along(extents_of(op.actor)) + 2.0 * margin < span) return false;
  return std::abs(across(low) - across(high)) <=
         0.5 * (across(el) + across(eh)) + 2.0 * margin;
}

std::vector<Operator> PlanningProblem::admissible_operators(
    const StripsState& state) const {
  std::vector<Operator> ops = domain_.applicable_operators(state);
  std::erase_if(ops, [&](const Operator& op) { return !admissible(state, op); });
  return ops;
}

PoseSolveResult PlanningProblem::solve(const OperatorSequence& seq) const {
  PoseSolveOptions options;
  options.penetration_removal = config_.penetration_removal;
  options.max_augmentations = config_.max_augmentations;
  return solve_with_penetration_removal(seq, catalog_, targets_, table_, options);
}

ScoredSequence score_poses(const std::vector<Pose>& poses,
                           const VisibleTargets& targets, double epsilon,
                           RewardMode mode) {
  ScoredSequence out;
  out.feasible = true;
  std::size_t visible = 0;
  for (std::size_t i = 0; i < targets.by_index.size(); ++i) {
    if (!targets.by_index[i]) continue;
    ++visible;
    const Pose& want = *targets.by_index[i];
    if (poses[i].rot == want.rot &&
        norm(poses[i].position - want.position) <= epsilon) {
      ++out.matched;
    }
  }
  out.success = visible > 0 && out.matched == visible;
  if (visible > 0) {
    out.reward = mode == RewardMode::kDense
                     ? static_cast<double>(out.matched) / static_cast<double>(visible)
                     : (out.success ? 1.0 : 0.0);
  }
  out.poses = poses;
  return out;
}

ScoredSequence PlanningProblem::score(const OperatorSequence& seq) const {
  const auto placements = std::count_if(seq.begin(), seq.end(),
                                        [](const Operator& op) { return op.is_placement(); });
  if (placements != static_cast<long>(catalog_.size())) return {};
  PoseSolveResult solved = solve(seq);
  if (!solved.feasible) return {};
  return score_poses(solved.poses, targets_, config_.epsilon, config_.reward_mode);
}

ScoredSequence score_sequence(const OperatorSequence& seq,
                              const PlanningProblem& problem) {
  return problem.score(seq);
}

double uct_score(const SearchNode& parent, const SearchNode& child,
                 const SearchConfig& config) {
  const double q = child.mean_return();
  const double n_parent = static_cast<double>(parent.visits);
  const double n_child = static_cast<double>(child.visits);
  if (config.uct_variant == UctVariant::kInverted) {
    return q + config.exploration * std::sqrt(std::log(n_child) / n_parent);
  }
  return q + config.exploration * std::sqrt(std::log(n_parent) / n_child);
}

TreeSearch::TreeSearch(const PlanningProblem& problem, std::uint64_t seed)
    : problem_(problem), rng_(seed) {
  root_ = make_node(problem_.domain().initial_state(), Operator{}, nullptr);
  if (root_->dead_end) {
    throw PlanningError("every operator is pruned at the root");
  }
}

std::unique_ptr<SearchNode> TreeSearch::make_node(StripsState state,
                                                  const Operator& incoming,
                                                  SearchNode* parent) {
  auto node = std::make_unique<SearchNode>();
  node->state = std::move(state);
  node->incoming = incoming;
  node->parent = parent;
  node->terminal = problem_.domain().is_terminal(node->state);
  if (!node->terminal) node->untried = problem_.admissible_operators(node->state);
  node->untried_rank.resize(node->untried.size());
  std::iota(node->untried_rank.begin(), node->untried_rank.end(), 0);
  node->dead_end = !node->terminal && node->untried.empty();
  node->exhausted = node->terminal || node->dead_end;
  ++node_count_;
  return node;
}

Operator TreeSearch::pick_operator(const std::vector<Operator>& ops) {
  if (problem_.config().guided) {
    std::vector<std::size_t> preferred;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      if (problem_.visible(ops[i].actor)) preferred.push_back(i);
    }
    if (!preferred.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, preferred.size() - 1);
      return ops[preferred[pick(rng_)]];
    }
  }
  std::uniform_int_distribution<std::size_t> pick(0, ops.size() - 1);
  return ops[pick(rng_)];
}

SearchNode* TreeSearch::best_child(SearchNode& node) {
  std::vector<SearchNode*> open;
  for (auto& child : node.children) {
    if (!child->exhausted) open.push_back(child.get());
  }
  if (open.empty()) return nullptr;
  if (problem_.config().method == SearchMethod::kRandom) {
    std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
    return open[pick(rng_)];
  }
  SearchNode* best = nullptr;
  double best_score = -std::numeric_limits<double>::infinity();
  for (SearchNode* child : open) {
    // Ties go to the operator listed first in canonical order.
    const double s = uct_score(node, *child, problem_.config());
    if (s > best_score || (s == best_score && child->rank < best->rank)) {
      best_score = s;
      best = child;
    }
  }
  return best;
}

std::vector<SearchNode*> TreeSearch::select_and_expand() {
  std::vector<SearchNode*> path{root_.get()};
  SearchNode* node = root_.get();
  while (!node->terminal && !node->dead_end) {
    if (!node->untried.empty()) {
      const Operator op = pick_operator(node->untried);
      const auto at = std::find(node->untried.begin(), node->untried.end(), op) -
                      node->untried.begin();
      const int rank = node->untried_rank[at];
      node->untried.erase(node->untried.begin() + at);
      node->untried_rank.erase(node->untried_rank.begin() + at);
      StripsState next = problem_.domain().apply(node->state, op);
      node->children.push_back(make_node(std::move(next), op, node));
      node->children.back()->rank = rank;
      path.push_back(node->children.back().get());
      return path;
    }
    SearchNode* child = best_child(*node);
    if (child == nullptr) break;
    path.push_back(child);
    node = child;
  }
  return path;
}

std::pair<OperatorSequence, bool> TreeSearch::rollout(
    const std::vector<SearchNode*>& path) {
  OperatorSequence seq;
  for (std::size_t i = 1; i < path.size(); ++i) seq.push_back(path[i]->incoming);
  StripsState state = path.back()->state;
  const StripsDomain& domain = problem_.domain();
  while (!domain.is_terminal(state)) {
    const std::vector<Operator> ops = problem_.admissible_operators(state);
    if (ops.empty()) return {std::move(seq), true};
    const Operator op = pick_operator(ops);
    seq.push_back(op);
    state = domain.apply(state, op);
  }
  return {std::move(seq), false};
}

void TreeSearch::backpropagate(const std::vector<SearchNode*>& path, double reward) {
  for (SearchNode* node : path) {
    ++node->visits;
    node->total_return += reward;
  }
}

void TreeSearch::refresh_exhausted(const std::vector<SearchNode*>& path) {
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    SearchNode* node = *it;
    if (node->exhausted) continue;
    if (!node->untried.empty()) return;
    const bool all_done = std::all_of(node->children.begin(), node->children.end(),
                                      [](const auto& c) { return c->exhausted; });
    if (!all_done) return;
    node->exhausted = true;
  }
}

IterationOutcome TreeSearch::iterate() {
  IterationOutcome out;
  const std::vector<SearchNode*> path = select_and_expand();
  auto [seq, dead_end] = rollout(path);
  out.sequence = std::move(seq);
  out.dead_end = dead_end;
  if (!dead_end) out.score = problem_.score(out.sequence);
  backpropagate(path, out.score.reward);
  refresh_exhausted(path);
  return out;
}

std::vector<PlanStep> make_steps(const OperatorSequence& seq, const Catalog& catalog,
                                 const std::vector<Pose>& poses, const Layout& layout) {
  std::vector<PlanStep> steps;
  for (const Operator& op : seq) {
    if (!op.is_placement()) continue;
    const Primitive& prim = catalog[op.actor];
    PlanStep step;
    step.id = prim.id;
    if (auto it = layout.pick_poses.find(prim.id); it != layout.pick_poses.end()) {
      step.pick = it->second;
    }
    step.place = poses[op.actor];
    const Vec3 e = rotated_extents(prim.dims, step.place.rot);
    step.grasp_axis = e.x >= e.y ? GraspAxis::kX : GraspAxis::kY;
    steps.push_back(step);
  }
  return steps;
}

PlanResult plan(const Catalog& catalog, const Observation& observation,
                const Layout& layout, const SearchConfig& config,
                const Rect& table_extent, std::ostream* trace) {
  for (const Primitive& p : catalog.primitives()) {
    if (!layout.pick_poses.count(p.id)) {
      throw std::invalid_argument("layout has no pick pose for primitive " +
                                  std::to_string(p.id));
    }
  }
  const PlanningProblem problem(catalog, observation, table_extent, config);
  TreeSearch search(problem, config.seed);

  PlanResult result;
  result.place_offset = config.place_offset;
  OperatorSequence best_seq;
  ScoredSequence best;
  bool have_best = false;
  double total_reward = 0.0;
  int rollouts = 0;

  if (trace) *trace << "rollout,reward,feasible,sequence_length\n";
  while (rollouts < config.rollout_budget && !search.exhausted()) {
    IterationOutcome it = search.iterate();
    ++rollouts;
    total_reward += it.score.reward;
    if (trace) {
      *trace << rollouts << "," << it.score.reward << ","
             << (it.score.feasible ? 1 : 0) << "," << it.sequence.size() << "\n";
    }
    const bool better =
        it.score.feasible &&
        (!have_best || it.score.reward > best.reward ||
         (it.score.reward == best.reward && it.score.matched > best.matched));
    if (better) {
      have_best = true;
      best = it.score;
      best_seq = it.sequence;
      result.best_reward_trajectory.emplace_back(rollouts, best.reward);
    }
    if (it.score.success) break;
  }

  result.rollouts_used = rollouts;
  result.mean_reward_per_rollout = rollouts > 0 ? total_reward / rollouts : 0.0;
  result.search_exhausted = search.exhausted();
  if (!have_best) {
    result.diagnostic = "no feasible sequence found";
    return result;
  }
  result.success = best.success;
  result.reward = best.reward;
  result.operator_sequence = best_seq;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    result.solved_poses[catalog[i].id] = best.poses[i];
  }
  result.steps = make_steps(best_seq, catalog, best.poses, layout);
  if (!result.success) {
    result.diagnostic = search.exhausted() ? "search space exhausted"
                                           : "rollout budget exhausted";
  }
  return result;
}

}  // namespace asmplan
