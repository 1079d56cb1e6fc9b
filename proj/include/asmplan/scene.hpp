#pragma once

// Domain types shared by every stage of the planner: box primitives, Manhattan
// poses, scenes, observations and plans.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace asmplan {

using PrimitiveId = int;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
double norm(const Vec3& v);

/// Yaw of 0 or 90 degrees about the vertical axis. A quarter turn swaps the
/// horizontal extents of a box.
enum class Rotation : std::uint8_t { kNone = 0, kQuarter = 1 };

inline int quarter_turns(Rotation r) { return static_cast<int>(r); }

struct Primitive {
  PrimitiveId id = 0;
  Vec3 dims;  // (s_x, s_y, s_z), meters
  std::string label;
};

/// Center-of-mass position plus rotation class.
struct Pose {
  Vec3 position;
  Rotation rot = Rotation::kNone;

  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Closed axis-aligned rectangle in the table plane.
struct Rect {
  double min_x = 0.0;
  double max_x = 0.0;
  double min_y = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double depth() const { return max_y - min_y; }
  double area() const { return width() * depth(); }
  double center_x() const { return 0.5 * (min_x + max_x); }
  double center_y() const { return 0.5 * (min_y + max_y); }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Box extents after applying the rotation class (x and y swap on a quarter
/// turn, z is unchanged).
Vec3 rotated_extents(const Vec3& dims, Rotation rot);

Rect footprint(const Primitive& prim, const Pose& pose);

/// True iff the two axis-aligned boxes overlap by more than `tol` along all
/// three axes at once. Touching boxes do not interpenetrate.
bool boxes_interpenetrate(const Primitive& a, const Pose& pose_a,
                          const Primitive& b, const Pose& pose_b, double tol);

/// The set B of primitives. Ids are unique; order is the canonical index order
/// used by the planner internals.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<Primitive> primitives);

  const std::vector<Primitive>& primitives() const { return primitives_; }
  std::size_t size() const { return primitives_.size(); }
  bool empty() const { return primitives_.empty(); }
  const Primitive& operator[](std::size_t index) const {
    return primitives_[index];
  }

  bool contains(PrimitiveId id) const { return index_.count(id) != 0; }
  /// Throws std::out_of_range for unknown ids.
  std::size_t index_of(PrimitiveId id) const;
  const Primitive& by_id(PrimitiveId id) const {
    return primitives_[index_of(id)];
  }

 private:
  std::vector<Primitive> primitives_;
  std::map<PrimitiveId, std::size_t> index_;
};

struct Scene {
  Catalog catalog;
  Rect table_extent{-0.5, 0.5, -0.5, 0.5};
  std::map<PrimitiveId, Pose> placements;  // ground truth

  /// Throws std::invalid_argument when a placement refers to an unknown id or
  /// two ground-truth boxes interpenetrate by more than 1e-6 m.
  void validate() const;
};

/// A hallucinated detection of something shaped like a catalog primitive.
struct FalsePositive {
  Primitive shape;
  Pose pose;
  double confidence = 0.0;
};

/// Output of the vision stage: the visible set V with poses q^V.
struct Observation {
  std::map<PrimitiveId, Pose> detections;
  std::map<PrimitiveId, double> confidence;
  std::vector<FalsePositive> false_positives;

  /// Detection ids that belong to the catalog, in ascending id order.
  std::vector<PrimitiveId> visible_ids(const Catalog& catalog) const;
};

/// Pick poses of every primitive in the layout area.
struct Layout {
  std::map<PrimitiveId, Pose> pick_poses;
};

enum class GraspAxis : std::uint8_t { kX, kY };

struct PlanStep {
  PrimitiveId id = 0;
  Pose pick;
  Pose place;
  std::optional<GraspAxis> grasp_axis;
};

}  // namespace asmplan
