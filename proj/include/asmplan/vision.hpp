#pragma once

// Synthetic detector: turns a ground-truth scene into an Observation with
// occlusion-driven misses, Gaussian position noise, false positives and a
// confidence threshold.

#include <cstdint>
#include <vector>

#include "asmplan/scene.hpp"

namespace asmplan {

struct VisionConfig {
  Vec3 camera_dir{0.0, 1.0, 0.0};  // viewing direction, need not be unit
  double occlusion_threshold = 0.7;
  double pos_noise_sigma = 0.003;
  double false_positive_rate = 0.0;  // expected hallucinations per scene
  double confidence_threshold = 0.95;
  std::vector<PrimitiveId> forced_hidden;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on a zero camera direction or out-of-range
  /// thresholds / sigma.
  void validate() const;
};

/// Fraction of the target's projected rectangle not covered by the union of
/// the projections of boxes whose centers are nearer to the camera.
/// Projection is orthographic along `camera_dir`; each box projects to the
/// bounding rectangle of its eight corners.
double visible_fraction(PrimitiveId target, const Scene& scene,
                        const Vec3& camera_dir);

Observation observe(const Scene& scene, const VisionConfig& config);

/// Exact area of a union of axis-aligned rectangles.
double union_area(const std::vector<Rect>& rects);

}  // namespace asmplan
