#include "asmplan/scene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace asmplan {

double norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

Vec3 rotated_extents(const Vec3& dims, Rotation rot) {
  if (rot == Rotation::kQuarter) return {dims.y, dims.x, dims.z};
  return dims;
}

Rect footprint(const Primitive& prim, const Pose& pose) {
  const Vec3 ext = rotated_extents(prim.dims, pose.rot);
  const Vec3& c = pose.position;
  return {c.x - 0.5 * ext.x, c.x + 0.5 * ext.x, c.y - 0.5 * ext.y,
          c.y + 0.5 * ext.y};
}

namespace {

double interval_overlap(double center_a, double extent_a, double center_b,
                        double extent_b) {
  const double lo = std::max(center_a - 0.5 * extent_a, center_b - 0.5 * extent_b);
  const double hi = std::min(center_a + 0.5 * extent_a, center_b + 0.5 * extent_b);
  return hi - lo;
}

}  // namespace

bool boxes_interpenetrate(const Primitive& a, const Pose& pose_a,
                          const Primitive& b, const Pose& pose_b, double tol) {
  const Vec3 ea = rotated_extents(a.dims, pose_a.rot);
  const Vec3 eb = rotated_extents(b.dims, pose_b.rot);
  const Vec3& pa = pose_a.position;
  const Vec3& pb = pose_b.position;
  return interval_overlap(pa.x, ea.x, pb.x, eb.x) > tol &&
         interval_overlap(pa.y, ea.y, pb.y, eb.y) > tol &&
         interval_overlap(pa.z, ea.z, pb.z, eb.z) > tol;
}

Catalog::Catalog(std::vector<Primitive> primitives)
    : primitives_(std::move(primitives)) {
  for (std::size_t i = 0; i < primitives_.size(); ++i) {
    const Primitive& p = primitives_[i];
    if (!(p.dims.x > 0.0 && p.dims.y > 0.0 && p.dims.z > 0.0)) {
      throw std::invalid_argument("primitive " + std::to_string(p.id) +
                                  " has non-positive dimensions");
    }
    if (!index_.emplace(p.id, i).second) {
      throw std::invalid_argument("duplicate primitive id " +
                                  std::to_string(p.id));
    }
  }
}

std::size_t Catalog::index_of(PrimitiveId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw std::out_of_range("unknown primitive id " + std::to_string(id));
  }
  return it->second;
}

void Scene::validate() const {
  for (const auto& [id, pose] : placements) {
    if (!catalog.contains(id)) {
      throw std::invalid_argument("placement for unknown primitive id " +
                                  std::to_string(id));
    }
  }
  for (auto i = placements.begin(); i != placements.end(); ++i) {
    for (auto j = std::next(i); j != placements.end(); ++j) {
      if (boxes_interpenetrate(catalog.by_id(i->first), i->second,
                               catalog.by_id(j->first), j->second, 1e-6)) {
        throw std::invalid_argument(
            "ground-truth boxes " + std::to_string(i->first) + " and " +
            std::to_string(j->first) + " interpenetrate");
      }
    }
  }
}

std::vector<PrimitiveId> Observation::visible_ids(const Catalog& catalog) const {
  std::vector<PrimitiveId> ids;
  for (const auto& [id, pose] : detections) {
    if (catalog.contains(id)) ids.push_back(id);
  }
  return ids;
}

}  // namespace asmplan
