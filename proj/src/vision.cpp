#include "asmplan/vision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>

namespace asmplan {

namespace {

Vec3 scale(const Vec3& v, double s) { return {v.x * s, v.y * s, v.z * s}; }
double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

struct ImagePlane {
  Vec3 dir;
  Vec3 u;
  Vec3 v;
};

ImagePlane image_plane(const Vec3& camera_dir) {
  const double len = norm(camera_dir);
  if (!(len > 0.0)) throw std::invalid_argument("camera direction must be non-zero");
  ImagePlane plane;
  plane.dir = scale(camera_dir, 1.0 / len);
  Vec3 up{0.0, 0.0, 1.0};
  if (std::abs(dot(up, plane.dir)) > 0.999) up = {0.0, 1.0, 0.0};
  const Vec3 u = cross(up, plane.dir);
  plane.u = scale(u, 1.0 / norm(u));
  plane.v = cross(plane.dir, plane.u);
  return plane;
}

Rect project(const Primitive& prim, const Pose& pose, const ImagePlane& plane) {
  const Vec3 e = rotated_extents(prim.dims, pose.rot);
  Rect r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
         std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (int corner = 0; corner < 8; ++corner) {
    const Vec3 c{pose.position.x + ((corner & 1) ? 0.5 : -0.5) * e.x,
                 pose.position.y + ((corner & 2) ? 0.5 : -0.5) * e.y,
                 pose.position.z + ((corner & 4) ? 0.5 : -0.5) * e.z};
    const double pu = dot(c, plane.u);
    const double pv = dot(c, plane.v);
    r.min_x = std::min(r.min_x, pu);
    r.max_x = std::max(r.max_x, pu);
    r.min_y = std::min(r.min_y, pv);
    r.max_y = std::max(r.max_y, pv);
  }
  return r;
}

std::optional<Rect> intersect(const Rect& a, const Rect& b) {
  Rect r{std::max(a.min_x, b.min_x), std::min(a.max_x, b.max_x),
         std::max(a.min_y, b.min_y), std::min(a.max_y, b.max_y)};
  if (r.min_x >= r.max_x || r.min_y >= r.max_y) return std::nullopt;
  return r;
}

double visible_fraction_impl(PrimitiveId target, const Scene& scene,
                             const ImagePlane& plane) {
  const Pose& pose = scene.placements.at(target);
  const Primitive& prim = scene.catalog.by_id(target);
  const Rect self = project(prim, pose, plane);
  const double depth = dot(pose.position, plane.dir);
  std::vector<Rect> covers;
  for (const auto& [id, other] : scene.placements) {
    if (id == target || dot(other.position, plane.dir) >= depth) continue;
    if (auto r = intersect(self, project(scene.catalog.by_id(id), other, plane))) {
      covers.push_back(*r);
    }
  }
  const double covered = union_area(covers);
  return std::clamp(1.0 - covered / self.area(), 0.0, 1.0);
}

}  // namespace

void VisionConfig::validate() const {
  if (!(norm(camera_dir) > 0.0)) throw std::invalid_argument("camera direction must be non-zero");
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(occlusion_threshold)) throw std::invalid_argument("occlusion threshold outside [0,1]");
  if (!unit(confidence_threshold)) throw std::invalid_argument("confidence threshold outside [0,1]");
  if (!(pos_noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  if (!(false_positive_rate >= 0.0)) throw std::invalid_argument("false positive rate must be >= 0");
}

double union_area(const std::vector<Rect>& rects) {
  if (rects.empty()) return 0.0;
  std::vector<double> xs;
  for (const Rect& r : rects) {
    xs.push_back(r.min_x);
    xs.push_back(r.max_x);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  double area = 0.0;
  std::vector<std::pair<double, double>> spans;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double x0 = xs[i];
    const double x1 = xs[i + 1];
    spans.clear();
    for (const Rect& r : rects) {
      if (r.min_x <= x0 && r.max_x >= x1) spans.emplace_back(r.min_y, r.max_y);
    }
    std::sort(spans.begin(), spans.end());
    double covered = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool open = false;
    for (const auto& [a, b] : spans) {
      if (!open || a > hi) {
        if (open) covered += hi - lo;
        lo = a;
        hi = b;
        open = true;
      } else {
        hi = std::max(hi, b);
      }
    }
    if (open) covered += hi - lo;
    area += covered * (x1 - x0);
  }
  return area;
}

double visible_fraction(PrimitiveId target, const Scene& scene,
                        const Vec3& camera_dir) {
  return visible_fraction_impl(target, scene, image_plane(camera_dir));
}

Observation observe(const Scene& scene, const VisionConfig& config) {
  config.validate();
  const ImagePlane plane = image_plane(config.camera_dir);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  Observation obs;
  for (const auto& [id, pose] : scene.placements) {
    const bool forced = std::find(config.forced_hidden.begin(), config.forced_hidden.end(),
                                  id) != config.forced_hidden.end();
    const double fraction = visible_fraction_impl(id, scene, plane);
    // Draw noise for every object so the stream does not depend on which
    // objects survive.
    const Vec3 delta{config.pos_noise_sigma * noise(rng), config.pos_noise_sigma * noise(rng),
                     config.pos_noise_sigma * noise(rng)};
    if (forced || fraction < config.occlusion_threshold) continue;
    if (fraction < config.confidence_threshold) continue;
    obs.detections[id] = Pose{pose.position + delta, pose.rot};
    obs.confidence[id] = fraction;
  }

  if (config.false_positive_rate > 0.0 && !scene.catalog.empty()) {
    std::poisson_distribution<int> count(config.false_positive_rate);
    std::uniform_int_distribution<std::size_t> shape(0, scene.catalog.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::bernoulli_distribution quarter(0.5);
    const int hallucinations = count(rng);
    const Rect& t = scene.table_extent;
    for (int k = 0; k < hallucinations; ++k) {
      FalsePositive fp;
      fp.shape = scene.catalog[shape(rng)];
      fp.pose.rot = quarter(rng) ? Rotation::kQuarter : Rotation::kNone;
      const Vec3 e = rotated_extents(fp.shape.dims, fp.pose.rot);
      fp.pose.position = {t.min_x + 0.5 * e.x + unit(rng) * std::max(0.0, t.width() - e.x),
                          t.min_y + 0.5 * e.y + unit(rng) * std::max(0.0, t.depth() - e.y),
                          0.5 * e.z};
      fp.confidence = config.confidence_threshold +
                      unit(rng) * (1.0 - config.confidence_threshold);
      const PrimitiveId id = fp.shape.id;
      const bool forced = std::find(config.forced_hidden.begin(), config.forced_hidden.end(),
                                    id) != config.forced_hidden.end();
      // A hallucination claims the identity of an undetected catalog object
      // and then counts as visible; a duplicate of a detected one is kept
      // only in the false-positive list.
      if (!forced && !obs.detections.count(id)) {
        obs.detections[id] = fp.pose;
        obs.confidence[id] = fp.confidence;
      }
      obs.false_positives.push_back(fp);
    }
  }
  return obs;
}

}  // namespace asmplan
