#pragma once

// STRIPS encoding of box assembly: predicates over catalog indices and the
// four operators PutOn, PutOnAlongX, PutOnAlongY and Rotate.
//
// Objects are referred to by their index in the catalog. kTable is the
// distinguished support that is always clear and has its top at z = 0.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace asmplan {

inline constexpr int kTable = -1;

enum class OpKind : std::uint8_t { kPutOn, kPutOnAlongX, kPutOnAlongY, kRotate };

inline constexpr int kNumOperatorKinds = 4;

struct Operator {
  OpKind kind = OpKind::kPutOn;
  int actor = 0;
  // PutOn: first = support (or kTable). AlongX/AlongY: first is the support
  // with the lower coordinate along the bridging axis, second the higher one.
  int first = kTable;
  int second = kTable;

  bool is_placement() const { return kind != OpKind::kRotate; }

  friend auto operator<=>(const Operator&, const Operator&) = default;
};

Operator put_on(int actor, int support);
Operator put_on_along_x(int actor, int low, int high);
Operator put_on_along_y(int actor, int low, int high);
Operator rotate(int actor);

std::string to_string(const Operator& op);

using OperatorSequence = std::vector<Operator>;

enum class PredicateKind : std::uint8_t {
  kOnTable,
  kClear,
  kOn,
  kOnAlongX,
  kOnAlongY,
  kRot
};

struct Predicate {
  PredicateKind kind = PredicateKind::kClear;
  int a = 0;
  int b = kTable;
  int c = kTable;

  friend auto operator<=>(const Predicate&, const Predicate&) = default;
};

std::string to_string(const Predicate& p);

enum class SupportKind : std::uint8_t { kNone, kTable, kOn, kAlongX, kAlongY };

/// Per-object slice of a state. `top` is the symbolic height of the object's
/// upper face, i.e. the sum of vertical extents along its support chain.
struct ObjectStatus {
  SupportKind support = SupportKind::kNone;
  int first = kTable;
  int second = kTable;
  bool rotated = false;
  bool covered = false;
  double top = 0.0;

  bool placed() const { return support != SupportKind::kNone; }
  bool clear() const { return placed() && !covered; }
};

class StripsState {
 public:
  StripsState() = default;
  explicit StripsState(std::size_t num_objects)
      : objects_(num_objects), unmoved_(num_objects) {}

  std::size_t size() const { return objects_.size(); }
  const ObjectStatus& object(int index) const { return objects_[index]; }
  const std::vector<ObjectStatus>& objects() const { return objects_; }

  bool moved(int index) const { return objects_[index].placed(); }
  std::vector<int> moved_set() const;
  std::vector<int> unmoved_set() const;
  std::size_t num_unmoved() const { return unmoved_; }

  /// Predicates asserted in this state, sorted.
  std::vector<Predicate> predicates() const;

 private:
  friend class StripsDomain;
  std::vector<ObjectStatus> objects_;
  std::size_t unmoved_ = 0;
};

/// Successor generation for a fixed catalog. Only the vertical extents of the
/// primitives matter symbolically; yaw rotation never changes them.
class StripsDomain {
 public:
  explicit StripsDomain(std::vector<double> heights);

  std::size_t num_objects() const { return heights_.size(); }
  double height(int index) const { return heights_[index]; }

  StripsState initial_state() const { return StripsState(heights_.size()); }

  /// Operators whose preconditions hold, in canonical order: for each
  /// unmoved actor ascending, Rotate, PutOn(TABLE), PutOn(b), PutOnAlongX,
  /// PutOnAlongY.
  std::vector<Operator> applicable_operators(const StripsState& state) const;

  bool is_applicable(const StripsState& state, const Operator& op) const;

  /// Throws std::invalid_argument if `op` is not applicable.
  StripsState apply(const StripsState& state, const Operator& op) const;

  bool is_terminal(const StripsState& state) const {
    return state.num_unmoved() == 0;
  }

  /// Support-top height (kTable -> 0).
  double support_top(const StripsState& state, int support) const;

  /// Replays `seq` from the initial state; throws on an inapplicable step.
  StripsState replay(const OperatorSequence& seq) const;

  /// Returns a description of the first violated state invariant, if any.
  std::optional<std::string> check_invariants(const StripsState& state) const;

  static constexpr double kHeightTolerance = 1e-9;

 private:
  bool bridge_supports_ok(const StripsState& state, int actor, int low,
                          int high) const;

  std::vector<double> heights_;
};

}  // namespace asmplan
