#include <gtest/gtest.h>

#include <random>
#include <stdexcept>

#include "asmplan/scene.hpp"

namespace asmplan {
namespace {

Primitive box(PrimitiveId id, double sx, double sy, double sz) {
  return Primitive{id, {sx, sy, sz}, ""};
}

Pose at(double x, double y, double z, Rotation rot = Rotation::kNone) {
  return Pose{{x, y, z}, rot};
}

void expect_rect(const Rect& r, double x0, double x1, double y0, double y1) {
  EXPECT_NEAR(r.min_x, x0, 1e-12);
  EXPECT_NEAR(r.max_x, x1, 1e-12);
  EXPECT_NEAR(r.min_y, y0, 1e-12);
  EXPECT_NEAR(r.max_y, y1, 1e-12);
}

TEST(Footprint, CenteredAtOrigin) {
  expect_rect(footprint(box(1, 0.06, 0.04, 0.02), at(0, 0, 0)), -0.03, 0.03, -0.02, 0.02);
}

TEST(Footprint, QuarterTurnSwapsAxes) {
  expect_rect(footprint(box(1, 0.06, 0.04, 0.02), at(0, 0, 0, Rotation::kQuarter)),
              -0.02, 0.02, -0.03, 0.03);
}

TEST(Footprint, Translated) {
  expect_rect(footprint(box(1, 0.06, 0.04, 0.02), at(0.10, -0.05, 0.01)),
              0.07, 0.13, -0.07, -0.03);
}

TEST(Footprint, AreaInvariantUnderRotationAndTranslation) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> size(0.01, 0.2);
  std::uniform_real_distribution<double> pos(-0.4, 0.4);
  for (int k = 0; k < 200; ++k) {
    Primitive p = box(1, size(rng), size(rng), size(rng));
    double expected = p.dims.x * p.dims.y;
    for (Rotation r : {Rotation::kNone, Rotation::kQuarter}) {
      EXPECT_NEAR(footprint(p, at(pos(rng), pos(rng), 0, r)).area(), expected, 1e-12);
    }
  }
}

TEST(RotatedExtents, ZUnchanged) {
  Vec3 e = rotated_extents({0.06, 0.02, 0.03}, Rotation::kQuarter);
  EXPECT_EQ(e, (Vec3{0.02, 0.06, 0.03}));
  EXPECT_EQ(rotated_extents({0.06, 0.02, 0.03}, Rotation::kNone), (Vec3{0.06, 0.02, 0.03}));
}

TEST(Interpenetrate, OverlappingCubes) {
  Primitive c = box(1, 0.06, 0.06, 0.06);
  EXPECT_TRUE(boxes_interpenetrate(c, at(0, 0, 0.03), c, at(0.04, 0, 0.03), 1e-6));
}

TEST(Interpenetrate, TouchingCubesDoNot) {
  Primitive c = box(1, 0.06, 0.06, 0.06);
  EXPECT_FALSE(boxes_interpenetrate(c, at(0, 0, 0.03), c, at(0.06, 0, 0.03), 1e-6));
}

TEST(Interpenetrate, SelfOverlap) {
  Primitive c = box(1, 0.05, 0.03, 0.02);
  EXPECT_TRUE(boxes_interpenetrate(c, at(0.1, 0.2, 0.01), c, at(0.1, 0.2, 0.01), 1e-6));
}

TEST(Interpenetrate, StackedBoxesShareFootprintOnly) {
  Primitive c = box(1, 0.06, 0.06, 0.06);
  EXPECT_FALSE(boxes_interpenetrate(c, at(0, 0, 0.03), c, at(0, 0, 0.09), 1e-6));
}

TEST(Interpenetrate, RotationMatters) {
  Primitive bar = box(1, 0.10, 0.02, 0.02);
  Primitive cube = box(2, 0.02, 0.02, 0.02);
  // The cube sits 0.04 along y: clear of the bar unless it is turned.
  EXPECT_FALSE(boxes_interpenetrate(bar, at(0, 0, 0.01), cube, at(0, 0.04, 0.01), 1e-6));
  EXPECT_TRUE(boxes_interpenetrate(bar, at(0, 0, 0.01, Rotation::kQuarter), cube,
                                   at(0, 0.04, 0.01), 1e-6));
}

TEST(Interpenetrate, Symmetric) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> size(0.01, 0.1);
  std::uniform_real_distribution<double> pos(-0.08, 0.08);
  std::bernoulli_distribution turn(0.5);
  for (int k = 0; k < 1000; ++k) {
    Primitive a = box(1, size(rng), size(rng), size(rng));
    Primitive b = box(2, size(rng), size(rng), size(rng));
    Pose pa = at(pos(rng), pos(rng), pos(rng), turn(rng) ? Rotation::kQuarter : Rotation::kNone);
    Pose pb = at(pos(rng), pos(rng), pos(rng), turn(rng) ? Rotation::kQuarter : Rotation::kNone);
    EXPECT_EQ(boxes_interpenetrate(a, pa, b, pb, 1e-6), boxes_interpenetrate(b, pb, a, pa, 1e-6));
  }
}

TEST(Catalog, LookupAndDuplicates) {
  Catalog cat({box(4, 0.1, 0.1, 0.1), box(2, 0.1, 0.1, 0.1)});
  EXPECT_EQ(cat.index_of(4), 0u);
  EXPECT_EQ(cat.index_of(2), 1u);
  EXPECT_TRUE(cat.contains(2));
  EXPECT_FALSE(cat.contains(3));
  EXPECT_THROW(cat.index_of(3), std::out_of_range);
  EXPECT_THROW(Catalog({box(1, 0.1, 0.1, 0.1), box(1, 0.1, 0.1, 0.1)}), std::invalid_argument);
}

TEST(Catalog, RejectsNonPositiveDims) {
  EXPECT_THROW(Catalog({box(1, 0.0, 0.1, 0.1)}), std::invalid_argument);
  EXPECT_THROW(Catalog({box(1, 0.1, -0.1, 0.1)}), std::invalid_argument);
}

TEST(Scene, ValidateRejectsUnknownIdAndOverlap) {
  Scene scene;
  scene.catalog = Catalog({box(1, 0.06, 0.06, 0.06), box(2, 0.06, 0.06, 0.06)});
  scene.placements = {{1, at(0, 0, 0.03)}, {2, at(0.06, 0, 0.03)}};
  EXPECT_NO_THROW(scene.validate());
  scene.placements[2] = at(0.04, 0, 0.03);
  EXPECT_THROW(scene.validate(), std::invalid_argument);
  scene.placements.erase(2);
  scene.placements[7] = at(0.3, 0, 0.03);
  EXPECT_THROW(scene.validate(), std::invalid_argument);
}

TEST(Observation, VisibleIdsIgnoreUnknown) {
  Catalog cat({box(1, 0.1, 0.1, 0.1), box(3, 0.1, 0.1, 0.1)});
  Observation obs;
  obs.detections = {{3, at(0, 0, 0)}, {9, at(0, 0, 0)}, {1, at(0, 0, 0)}};
  EXPECT_EQ(obs.visible_ids(cat), (std::vector<PrimitiveId>{1, 3}));
}

}  // namespace
}  // namespace asmplan
