#pragma once

// Monte Carlo tree search over STRIPS operator sequences. Each rollout is
// completed with random admissible operators, its poses are recovered by the
// constrained least-squares fit, and the fraction of visible objects matched
// to their observed poses is backed up the tree.

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "asmplan/constraints.hpp"
#include "asmplan/scene.hpp"
#include "asmplan/strips.hpp"

namespace asmplan {

enum class RewardMode : std::uint8_t { kDense, kSparse };
enum class UctVariant : std::uint8_t { kStandard, kInverted };
enum class SearchMethod : std::uint8_t { kMcts, kRandom };

std::string to_string(RewardMode mode);
std::string to_string(UctVariant variant);
std::string to_string(SearchMethod method);

struct SearchConfig {
  double exploration = std::sqrt(2.0);
  RewardMode reward_mode = RewardMode::kDense;
  bool guided = true;
  int rollout_budget = 20000;
  double epsilon = 0.01;  // match radius, meters
  UctVariant uct_variant = UctVariant::kStandard;
  SearchMethod method = SearchMethod::kMcts;
  std::uint64_t seed = 0;
  bool penetration_removal = true;
  int max_augmentations = 10;
  Vec3 place_offset;

  /// Throws std::invalid_argument unless exploration > 0, epsilon > 0 and
  /// rollout_budget >= 1.
  void validate() const;
};

class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScoredSequence {
  double reward = 0.0;
  bool feasible = false;
  bool success = false;  // every visible object matched
  std::size_t matched = 0;
  std::vector<Pose> poses;  // per catalog index, empty when infeasible
};

/// Catalog + observation + table bundled with the successor filter and the
/// reward. Immutable once built; shared by every search strategy.
class PlanningProblem {
 public:
  /// Throws PlanningError when no catalog object is visible.
  PlanningProblem(Catalog catalog, const Observation& observation,
                  Rect table_extent, SearchConfig config);

  const Catalog& catalog() const { return catalog_; }
  const StripsDomain& domain() const { return domain_; }
  const VisibleTargets& targets() const { return targets_; }
  const Rect& table_extent() const { return table_; }
  const SearchConfig& config() const { return config_; }

  bool visible(int index) const { return targets_.visible(index); }
  std::size_t num_visible() const { return num_visible_; }

  /// Applicable operators minus those that provably contradict the
  /// observation: a visible actor placed at a support height that does not
  /// match its observed height, with the wrong rotation, or with its observed
  /// center outside a visible support's footprint (margin 2 * epsilon).
  std::vector<Operator> admissible_operators(const StripsState& state) const;
  bool admissible(const StripsState& state, const Operator& op) const;

  /// Reward of a terminal sequence; 0 (infeasible) for non-terminal input.
  ScoredSequence score(const OperatorSequence& seq) const;

  /// Pose recovery for `seq` with the configured penetration handling.
  PoseSolveResult solve(const OperatorSequence& seq) const;

 private:
  bool placement_consistent(const StripsState& state, const Operator& op) const;
  /// False when both bridge supports are visible and their observed poses
  /// rule the bridge out for any actor.
  bool bridge_possible(const StripsState& state, const Operator& op) const;

  Catalog catalog_;
  StripsDomain domain_;
  VisibleTargets targets_;
  Rect table_;
  SearchConfig config_;
  std::size_t num_visible_ = 0;
};

/// Match-based reward of a solved pose set. Dense: fraction of visible
/// objects within epsilon (and with the observed rotation). Sparse: 1 only if
/// all of them are.
ScoredSequence score_poses(const std::vector<Pose>& poses,
                           const VisibleTargets& targets, double epsilon,
                           RewardMode mode);

ScoredSequence score_sequence(const OperatorSequence& seq,
                              const PlanningProblem& problem);

struct SearchNode {
  StripsState state;
  Operator incoming;  // operator leading here (unused at the root)
  SearchNode* parent = nullptr;
  int visits = 0;
  double total_return = 0.0;
  std::vector<std::unique_ptr<SearchNode>> children;
  std::vector<Operator> untried;
  std::vector<int> untried_rank;  // canonical position of each untried operator
  int rank = 0;                   // canonical position of `incoming` at the parent
  bool terminal = false;
  bool dead_end = false;   // non-terminal with no admissible operator
  bool exhausted = false;  // whole subtree enumerated

  double mean_return() const { return visits > 0 ? total_return / visits : 0.0; }
};

/// Upper confidence bound of `child` seen from `parent`.
///   standard:      Q + C sqrt(ln n(parent) / n(child))
///   inverted:      Q + C sqrt(ln n(child) / n(parent))
double uct_score(const SearchNode& parent, const SearchNode& child,
                 const SearchConfig& config);

struct IterationOutcome {
  OperatorSequence sequence;
  ScoredSequence score;
  bool dead_end = false;
};

class TreeSearch {
 public:
  /// Throws PlanningError if every operator is pruned at the root.
  TreeSearch(const PlanningProblem& problem, std::uint64_t seed);

  SearchNode& root() { return *root_; }
  const SearchNode& root() const { return *root_; }

  /// Descends from the root and expands one untried operator. The returned
  /// path starts at the root and ends at the new leaf (or at a terminal /
  /// dead-end node reached by descent).
  std::vector<SearchNode*> select_and_expand();

  /// Random completion of the leaf at the end of `path`. Returns the full
  /// root-to-terminal sequence and whether a dead end was hit.
  std::pair<OperatorSequence, bool> rollout(const std::vector<SearchNode*>& path);

  static void backpropagate(const std::vector<SearchNode*>& path, double reward);

  /// One select / expand / rollout / score / backpropagate cycle.
  IterationOutcome iterate();

  bool exhausted() const { return root_->exhausted; }
  std::size_t node_count() const { return node_count_; }

 private:
  Operator pick_operator(const std::vector<Operator>& ops);
  std::unique_ptr<SearchNode> make_node(StripsState state, const Operator& incoming,
                                        SearchNode* parent);
  SearchNode* best_child(SearchNode& node);
  static void refresh_exhausted(const std::vector<SearchNode*>& path);

  const PlanningProblem& problem_;
  std::mt19937_64 rng_;
  std::unique_ptr<SearchNode> root_;
  std::size_t node_count_ = 0;
};

struct PlanResult {
  bool success = false;
  double reward = 0.0;
  int rollouts_used = 0;
  OperatorSequence operator_sequence;
  std::map<PrimitiveId, Pose> solved_poses;
  std::vector<PlanStep> steps;
  Vec3 place_offset;
  double mean_reward_per_rollout = 0.0;
  /// (rollout index, reward) each time the best reward improved.
  std::vector<std::pair<int, double>> best_reward_trajectory;
  bool search_exhausted = false;
  std::string diagnostic;
};

/// Runs the search until a sequence matches every visible object, the budget
/// is spent, or the tree is exhausted. `trace`, when given, receives one CSV
/// row per rollout: rollout,reward,feasible,sequence_length.
PlanResult plan(const Catalog& catalog, const Observation& observation,
                const Layout& layout, const SearchConfig& config,
                const Rect& table_extent, std::ostream* trace = nullptr);

/// Builds the step list for a solved sequence (placement order of `seq`).
std::vector<PlanStep> make_steps(const OperatorSequence& seq,
                                 const Catalog& catalog,
                                 const std::vector<Pose>& poses,
                                 const Layout& layout);

}  // namespace asmplan
