#pragma once

// Translation of a terminal operator sequence into linear pose constraints,
// and the pose-recovery loop that alternates QP solves with linearized
// penetration removal.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asmplan/qp.hpp"
#include "asmplan/scene.hpp"
#include "asmplan/strips.hpp"

namespace asmplan {

/// A bridging object must overlap each support by this fraction of the
/// support's extent along the bridging axis.
inline constexpr double kBridgeOverlap = 0.2;

enum class Axis : std::uint8_t { kX = 0, kY = 1, kZ = 2 };

char axis_name(Axis axis);

struct Term {
  int object = 0;  // catalog index
  Axis axis = Axis::kX;
  double coeff = 0.0;
};

enum class ConstraintKind : std::uint8_t { kEquality, kInequality };

enum class ConstraintOrigin : std::uint8_t {
  kSupport,     // center of mass over a single support
  kHeight,      // z chain equality
  kTable,       // footprint inside the table extent
  kBridge,      // PutOnAlongX / PutOnAlongY overlap and ordering
  kSeparation,  // added by penetration removal
};

/// sum(coeff * var) <= bound, or == bound for equalities.
struct LinearConstraint {
  std::vector<Term> terms;
  double bound = 0.0;
  ConstraintKind kind = ConstraintKind::kInequality;
  ConstraintOrigin origin = ConstraintOrigin::kSupport;

  /// Signed violation at `poses`: positive means violated.
  double violation(const std::vector<Pose>& poses) const;
  std::string to_string(const Catalog& catalog) const;
};

struct SupportRecord {
  SupportKind kind = SupportKind::kNone;
  int first = kTable;
  int second = kTable;
};

struct Separation {
  int low = 0;   // object on the lower-coordinate side
  int high = 0;
  Axis axis = Axis::kX;

  friend bool operator==(const Separation&, const Separation&) = default;
};

struct ConstraintSystem {
  std::vector<LinearConstraint> constraints;
  std::vector<Rotation> rotations;  // per catalog index
  std::vector<Vec3> extents;        // rotation-adjusted box sizes
  std::vector<double> z;            // center heights fixed by the chains
  std::vector<SupportRecord> supports;
  std::vector<Separation> separations;
  bool feasible = true;
  std::string diagnostic;

  std::size_t size() const { return constraints.size(); }
  /// Max constraint violation over all rows (0 when satisfied).
  double residual(const std::vector<Pose>& poses) const;
  /// One constraint per line, variables named x_<id>, y_<id>, z_<id>.
  std::string dump(const Catalog& catalog) const;
};

/// Stability constraints of a terminal sequence. Throws std::invalid_argument
/// for structurally invalid sequences (unplaced or covered supports, double
/// placement, non-terminal); a height disagreement between bridge supports
/// returns a system with feasible = false.
ConstraintSystem stability_constraints(const OperatorSequence& seq,
                                       const Catalog& catalog,
                                       const Rect& table_extent);

/// Adds one separating constraint for each interpenetrating pair (tolerance
/// `tol`) along its axis of least horizontal overlap, ties toward x, oriented
/// by the current ordering of the two centers.
ConstraintSystem penetration_constraints(const std::vector<Pose>& current_poses,
                                         const Catalog& catalog,
                                         const ConstraintSystem& existing,
                                         double tol = 1e-6);

/// Observed pose per catalog index; empty for hidden objects.
struct VisibleTargets {
  std::vector<std::optional<Pose>> by_index;

  static VisibleTargets from(const Observation& obs, const Catalog& catalog);
  std::size_t count() const;
  bool visible(int index) const { return by_index[index].has_value(); }
};

struct PoseSolveOptions {
  bool penetration_removal = true;
  int max_augmentations = 10;
  double hidden_weight = 1e-4;
  double table_anchor_weight = 1e-6;
  double penetration_tolerance = 1e-6;
  QpOptions qp;
};

/// Least-squares fit of the x/y coordinates to the visible targets subject
/// to the x/y rows of `system`. Hidden objects are tied to the center of
/// their support footprint (and, for hidden supports, to the load they
/// carry) with a small weight so the minimizer is unique.
QpProblem build_pose_qp(const ConstraintSystem& system,
                        const VisibleTargets& targets,
                        const Rect& table_extent,
                        const PoseSolveOptions& options = {});

struct PoseSolveResult {
  bool feasible = false;
  std::vector<Pose> poses;  // per catalog index
  ConstraintSystem system;  // final, including separations
  QpProblem problem;
  QpSolution solution;
  int augmentations = 0;
  std::string diagnostic;
};

/// Solves a given constraint system once, without augmentation.
PoseSolveResult solve_poses(const ConstraintSystem& system,
                            const VisibleTargets& targets,
                            const Rect& table_extent,
                            const PoseSolveOptions& options = {});

/// solve -> detect penetrations -> augment, until penetration-free, the
/// augmentation cap, or infeasibility. With penetration_removal disabled a
/// single solve of the stability constraints is returned.
PoseSolveResult solve_with_penetration_removal(
    const OperatorSequence& seq, const Catalog& catalog,
    const VisibleTargets& targets, const Rect& table_extent,
    const PoseSolveOptions& options = {});

}  // namespace asmplan
