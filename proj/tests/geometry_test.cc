// Copyright 2026 The Reactive Horizon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "reactive_horizon/geometry.h"

#include <cmath>
#include <random>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace reactive_horizon {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Convex by construction: vertices on an ellipse, sorted by angle.
ConvexPolygon RandomConvexPolygon(std::mt19937* rng) {
  std::uniform_int_distribution<int> count(3, 8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = count(*rng);
  std::vector<double> angles(n);
  for (double& a : angles) a = 2.0 * kPi * unit(*rng);
  std::sort(angles.begin(), angles.end());
  // Reject angle gaps that collapse an edge.
  for (int i = 1; i < n; ++i) {
    if (angles[i] - angles[i - 1] < 0.05) return RandomConvexPolygon(rng);
  }
  if (2.0 * kPi - (angles.back() - angles.front()) < 0.05) {
    return RandomConvexPolygon(rng);
  }
  const double sx = 0.5 + 1.5 * unit(*rng);
  const double sy = 0.5 + 1.5 * unit(*rng);
  const Matrix2d rot = RotationMatrix(2.0 * kPi * unit(*rng));
  const Vector2d offset(4.0 * unit(*rng) - 2.0, 4.0 * unit(*rng) - 2.0);
  std::vector<Vector2d> vs;
  vs.reserve(n);
  for (double a : angles) {
    vs.push_back(rot * Vector2d(sx * std::cos(a), sy * std::sin(a)) + offset);
  }
  return ConvexPolygon::FromVertices(std::move(vs));
}

Ellipsoid RandomEllipsoid(std::mt19937* rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Ellipsoid e;
  e.center = Vector2d(4.0 * unit(*rng) - 2.0, 4.0 * unit(*rng) - 2.0);
  const double a = 0.2 + unit(*rng);
  const double b = 0.2 + unit(*rng);
  e.shape = RotationMatrix(2.0 * kPi * unit(*rng)) *
            Eigen::DiagonalMatrix<double, 2>(a, b) *
            RotationMatrix(2.0 * kPi * unit(*rng));
  return e;
}

TEST(ConvexPolygonTest, FacesAreUnitAndConsistent) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const ConvexPolygon p = RandomConvexPolygon(&rng);
    for (const HalfSpace& f : p.faces()) {
      EXPECT_NEAR(f.normal.norm(), 1.0, 1e-12);
    }
    for (const Vector2d& v : p.vertices()) {
      int active = 0;
      for (const HalfSpace& f : p.faces()) {
        const double slack = f.offset - f.normal.dot(v);
        EXPECT_GE(slack, -1e-9);
        if (std::abs(slack) < 1e-9) ++active;
      }
      EXPECT_GE(active, 2);
    }
  }
}

TEST(ConvexPolygonTest, ClockwiseInputIsReversed) {
  const ConvexPolygon p = ConvexPolygon::FromVertices(
      {{0.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {1.0, 0.0}});
  EXPECT_GT(p.Area(), 0.0);
  EXPECT_TRUE(p.Contains({0.5, 0.5}));
}

TEST(ConvexPolygonTest, RejectsDegenerateInput) {
  EXPECT_THROW(ConvexPolygon::FromVertices({{0, 0}, {1, 1}}), GeometryError);
  EXPECT_THROW(ConvexPolygon::FromVertices({{0, 0}, {1, 0}, {2, 0}}),
               GeometryError);
  EXPECT_THROW(
      ConvexPolygon::FromVertices({{0, 0}, {2, 0}, {1, 3}, {1, 0.1}}),
      GeometryError);
}

TEST(ConvexPolygonTest, AreaCentroidContainment) {
  const ConvexPolygon box = ConvexPolygon::AxisAlignedBox({-1, -2}, {3, 4});
  EXPECT_NEAR(box.Area(), 24.0, 1e-12);
  EXPECT_NEAR(box.Centroid().x(), 1.0, 1e-12);
  EXPECT_NEAR(box.Centroid().y(), 1.0, 1e-12);
  EXPECT_TRUE(box.Contains({3.0, 4.0}));
  EXPECT_FALSE(box.Contains({3.0001, 4.0}));
  EXPECT_TRUE(box.Contains({3.0001, 4.0}, 1e-3));
  EXPECT_NEAR(box.ContainmentViolation({4.0, 1.0}), 1.0, 1e-12);
  EXPECT_LT(box.ContainmentViolation({1.0, 1.0}), 0.0);
}

TEST(ConvexPolygonTest, OrientedBoxMatchesManualTransform) {
  const double angle = 0.7;
  const ConvexPolygon obb =
      ConvexPolygon::OrientedBox({1.0, 2.0}, 0.5, 0.25, angle);
  const Matrix2d r = RotationMatrix(angle);
  for (const Vector2d& corner :
       {Vector2d(0.5, 0.25), Vector2d(-0.5, 0.25), Vector2d(0.5, -0.25)}) {
    EXPECT_TRUE(obb.Contains(Vector2d(1.0, 2.0) + r * corner, 1e-9));
  }
  EXPECT_NEAR(obb.Area(), 0.5, 1e-12);
}

TEST(ConvexPolygonTest, TransformedRotatesAboutPivot) {
  const ConvexPolygon box = ConvexPolygon::AxisAlignedBox({0, 0}, {2, 1});
  const Vector2d pivot(2.0, 1.0);
  const ConvexPolygon moved = box.Transformed(kPi / 2, {0.5, 0.0}, pivot);
  // The pivot corner only translates.
  EXPECT_TRUE(moved.Contains(pivot + Vector2d(0.5, 0.0), 1e-9));
  EXPECT_NEAR(moved.Area(), box.Area(), 1e-9);
  // Corner (0, 0) maps to pivot + R (0 - pivot) + t = (3.5, -1).
  EXPECT_TRUE(moved.Contains({3.5, -1.0}, 1e-9));
}

TEST(EllipsoidTest, UnitBallMapSendsBoundaryToUnitCircle) {
  std::mt19937 rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const Ellipsoid e = RandomEllipsoid(&rng);
    const AffineMap2 f = UnitBallMap(e);
    for (int i = 0; i < 1000; ++i) {
      const double a = 2.0 * kPi * i / 1000.0;
      EXPECT_NEAR(f.Apply(e.BoundaryPoint(a)).norm(), 1.0, 1e-9);
    }
    // Round trip through the inverse.
    const AffineMap2 id = f.Compose(f.Inverse());
    EXPECT_NEAR((id.linear - Matrix2d::Identity()).norm(), 0.0, 1e-9);
    EXPECT_NEAR(id.translation.norm(), 0.0, 1e-9);
  }
}

TEST(EllipsoidTest, AreaAndContainment) {
  Ellipsoid e;
  e.center = Vector2d(1.0, -1.0);
  e.shape = RotationMatrix(0.3) * Eigen::DiagonalMatrix<double, 2>(2.0, 0.5);
  EXPECT_NEAR(e.Area(), kPi, 1e-12);
  EXPECT_TRUE(e.Contains(e.center));
  EXPECT_TRUE(e.Contains(e.BoundaryPoint(1.234), 1e-12));
  EXPECT_FALSE(e.Contains(e.center + Vector2d(2.1, 0.0)));
}

TEST(EllipsoidTest, DegenerateShapeThrows) {
  Ellipsoid e;
  e.center = Vector2d::Zero();
  e.shape << 1.0, 0.0, 2.0, 0.0;
  EXPECT_THROW(UnitBallMap(e), GeometryError);
}

double SampledInPolygonMargin(const Ellipsoid& e, const ConvexPolygon& p,
                              int samples) {
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const Vector2d y = e.BoundaryPoint(2.0 * kPi * i / samples);
    for (const HalfSpace& f : p.faces()) {
      margin = std::min(margin, f.offset - f.normal.dot(y));
    }
  }
  return margin;
}

TEST(InPolygonMarginTest, MatchesBoundarySampling) {
  std::mt19937 rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    const ConvexPolygon p = RandomConvexPolygon(&rng);
    const Ellipsoid e = RandomEllipsoid(&rng);
    const double closed = EllipsoidInPolygonMargin(e, p);
    const double sampled = SampledInPolygonMargin(e, p, 4096);
    EXPECT_NEAR(closed, sampled, 1e-5) << "trial " << trial;
  }
}

TEST(InPolygonMarginTest, CircleInBoxClosedForm) {
  const ConvexPolygon box = ConvexPolygon::AxisAlignedBox({0, 0}, {4, 2});
  Ellipsoid e;
  e.center = Vector2d(1.0, 1.0);
  e.shape = 0.25 * Matrix2d::Identity();
  // Nearest wall is 1 away in three directions; margin = 1 - 0.25.
  EXPECT_NEAR(EllipsoidInPolygonMargin(e, box), 0.75, 1e-12);
  e.center = Vector2d(3.9, 1.0);
  EXPECT_NEAR(EllipsoidInPolygonMargin(e, box), 0.1 - 0.25, 1e-12);
}

TEST(SeparationTest, CircleBoxClosedForm) {
  const ConvexPolygon box = ConvexPolygon::AxisAlignedBox({1, -1}, {2, 1});
  Ellipsoid e;
  e.center = Vector2d::Zero();
  e.shape = 0.5 * Matrix2d::Identity();
  // Distance 1 to the near face, radius 0.5.
  EXPECT_NEAR(EllipsoidPolygonSeparation(e, box), 2.0 - 1.0, 1e-12);
  e.center = Vector2d(1.5, 0.0);
  e.shape = 0.25 * Matrix2d::Identity();
  // Center inside, 0.5 from the near face.
  EXPECT_NEAR(EllipsoidPolygonSeparation(e, box), -1.0 - 2.0, 1e-12);
}

TEST(SeparationTest, ConsistentWithUnitBallTransform) {
  std::mt19937 rng(44);
  for (int trial = 0; trial < 200; ++trial) {
    const ConvexPolygon p = RandomConvexPolygon(&rng);
    const Ellipsoid e = RandomEllipsoid(&rng);
    const AffineMap2 f = UnitBallMap(e);
    std::vector<Vector2d> mapped;
    for (const Vector2d& v : p.vertices()) mapped.push_back(f.Apply(v));
    const ConvexPolygon image = ConvexPolygon::FromVertices(mapped);
    const double margin = EllipsoidPolygonSeparation(e, p);
    const double via_image = PointPolygonDistance(Vector2d::Zero(), image) -
                             PointPolygonPenetration(Vector2d::Zero(), image) -
                             1.0;
    EXPECT_NEAR(margin, via_image, 1e-9) << "trial " << trial;
  }
}

TEST(SeparationTest, SignAgreesWithMonteCarloOverlap) {
  std::mt19937 rng(55);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const ConvexPolygon p = RandomConvexPolygon(&rng);
    const Ellipsoid e = RandomEllipsoid(&rng);
    const double margin = EllipsoidPolygonSeparation(e, p);
    if (std::abs(margin) < 1e-3) continue;
    bool overlap = false;
    for (int i = 0; i < 10000 && !overlap; ++i) {
      // Uniform in the unit disc, pushed through the shape map.
      const double r = std::sqrt(unit(rng));
      const double a = 2.0 * kPi * unit(rng);
      const Vector2d z(r * std::cos(a), r * std::sin(a));
      overlap = p.Contains(e.center + e.shape * z);
    }
    // Sampling can miss thin overlaps near tangency but must agree on sign
    // once the configuration is clearly separated or clearly overlapping.
    if (margin > 0.0) {
      EXPECT_FALSE(overlap) << "trial " << trial << " margin " << margin;
    } else if (margin < -0.05) {
      EXPECT_TRUE(overlap) << "trial " << trial << " margin " << margin;
    }
    ++checked;
  }
  EXPECT_GT(checked, 300);
}

TEST(PointDistanceTest, MatchesBoundarySampling) {
  std::mt19937 rng(66);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const ConvexPolygon p = RandomConvexPolygon(&rng);
    const Vector2d q(8.0 * unit(rng) - 4.0, 8.0 * unit(rng) - 4.0);
    const double d = PointPolygonDistance(q, p);
    if (p.Contains(q)) {
      EXPECT_EQ(d, 0.0);
      continue;
    }
    double sampled = std::numeric_limits<double>::infinity();
    const auto& vs = p.vertices();
    for (size_t i = 0; i < vs.size(); ++i) {
      const Vector2d& a = vs[i];
      const Vector2d& b = vs[(i + 1) % vs.size()];
      for (int s = 0; s <= 2000; ++s) {
        const Vector2d y = a + (b - a) * (s / 2000.0);
        sampled = std::min(sampled, (q - y).norm());
      }
    }
    EXPECT_NEAR(d, sampled, 1e-5);
  }
}

TEST(PointDistanceTest, PenetrationIsDistanceToBoundaryInside) {
  const ConvexPolygon box = ConvexPolygon::AxisAlignedBox({0, 0}, {4, 2});
  EXPECT_NEAR(PointPolygonPenetration({1.0, 1.0}, box), 1.0, 1e-12);
  EXPECT_NEAR(PointPolygonPenetration({0.25, 1.0}, box), 0.25, 1e-12);
  EXPECT_EQ(PointPolygonPenetration({-1.0, 1.0}, box), 0.0);
}

TEST(SegmentIntersectionTest, KnownCases) {
  const ConvexPolygon box = ConvexPolygon::AxisAlignedBox({0, 0}, {1, 1});
  EXPECT_TRUE(SegmentIntersectsPolygon({0.2, 0.2}, {0.8, 0.8}, box));
  EXPECT_TRUE(SegmentIntersectsPolygon({-1, 0.5}, {2, 0.5}, box));
  EXPECT_TRUE(SegmentIntersectsPolygon({-1, 0.5}, {0.5, 0.5}, box));
  EXPECT_FALSE(SegmentIntersectsPolygon({-1, -1}, {-0.1, -0.1}, box));
  EXPECT_FALSE(SegmentIntersectsPolygon({-1, 2}, {2, 2}, box));
  // Touching an edge or a corner counts as intersecting a closed set.
  EXPECT_TRUE(SegmentIntersectsPolygon({-1, 1}, {2, 1}, box));
  EXPECT_TRUE(SegmentIntersectsPolygon({1, 1}, {2, 2}, box));
  EXPECT_TRUE(SegmentIntersectsPolygon({-1, 2}, {2, -1}, box));
}

TEST(SegmentIntersectionTest, AgreesWithDenseSampling) {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const ConvexPolygon p = RandomConvexPolygon(&rng);
    const Vector2d a(10.0 * unit(rng) - 5.0, 10.0 * unit(rng) - 5.0);
    const Vector2d b(10.0 * unit(rng) - 5.0, 10.0 * unit(rng) - 5.0);
    bool hit = false;
    double deepest = -std::numeric_limits<double>::infinity();
    for (int s = 0; s <= 4000; ++s) {
      const Vector2d y = a + (b - a) * (s / 4000.0);
      deepest = std::max(deepest, -p.ContainmentViolation(y));
      if (p.Contains(y)) hit = true;
    }
    const bool reported = SegmentIntersectsPolygon(a, b, p);
    if (hit) EXPECT_TRUE(reported) << "trial " << trial;
    // A clear miss (every sample well outside) must not be reported.
    if (deepest < -1e-3) EXPECT_FALSE(reported) << "trial " << trial;
  }
}

TEST(EnclosingEllipsoidTest, SquareGivesCircumscribedCircle) {
  const Ellipsoid e = MinimumEnclosingEllipsoid(
      {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}});
  EXPECT_NEAR(e.center.norm(), 0.0, 1e-6);
  EXPECT_NEAR(e.Area(), 2.0 * kPi, 0.01 * 2.0 * kPi);
  for (const Vector2d v : {Vector2d(-1, -1), Vector2d(1, -1), Vector2d(1, 1),
                           Vector2d(-1, 1)}) {
    EXPECT_TRUE(e.Contains(v, 1e-9));
  }
}

TEST(EnclosingEllipsoidTest, ContainsRandomClouds) {
  std::mt19937 rng(88);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vector2d> pts;
    const int n = 5 + static_cast<int>(95 * unit(rng));
    for (int i = 0; i < n; ++i) {
      pts.emplace_back(3.0 * unit(rng) - 1.0, 2.0 * unit(rng) + 0.5);
    }
    const Ellipsoid e = MinimumEnclosingEllipsoid(pts);
    const AffineMap2 f = UnitBallMap(e);
    for (const Vector2d& p : pts) {
      EXPECT_LE(f.Apply(p).norm(), 1.0 + 1e-9);
    }
  }
}

TEST(EnclosingEllipsoidTest, NearOptimalOnCirclePoints) {
  std::vector<Vector2d> pts;
  for (int i = 0; i < 16; ++i) {
    const double a = 2.0 * kPi * i / 16.0;
    pts.emplace_back(2.0 + 1.5 * std::cos(a), -1.0 + 1.5 * std::sin(a));
  }
  const Ellipsoid e = MinimumEnclosingEllipsoid(pts, 1e-8, 100000);
  EXPECT_NEAR(e.center.x(), 2.0, 1e-3);
  EXPECT_NEAR(e.center.y(), -1.0, 1e-3);
  EXPECT_NEAR(e.Area(), kPi * 1.5 * 1.5, 0.01 * kPi * 1.5 * 1.5);
}

TEST(EnclosingEllipsoidTest, CollinearInputThrows) {
  EXPECT_THROW(MinimumEnclosingEllipsoid({{0, 0}, {1, 1}, {2, 2}, {3, 3}}),
               GeometryError);
}

// Finite difference checks for the analytic margin gradients. Perturbs the
// ellipsoid center, the shape matrix entrywise, and a rigid pose of the
// polygon about a pivot.
template <typename MarginFn>
void CheckMarginGradient(const Ellipsoid& e, const ConvexPolygon& p,
                         const Vector2d& pivot, const MarginDerivatives& grad,
                         MarginFn margin_of, double tol) {
  const double h = 1e-6;
  for (int i = 0; i < 2; ++i) {
    Ellipsoid ep = e, em = e;
    ep.center[i] += h;
    em.center[i] -= h;
    const double fd = (margin_of(ep, p) - margin_of(em, p)) / (2 * h);
    EXPECT_NEAR(grad.d_center[i], fd, tol) << "center " << i;
  }
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      Ellipsoid ep = e, em = e;
      ep.shape(r, c) += h;
      em.shape(r, c) -= h;
      const double fd = (margin_of(ep, p) - margin_of(em, p)) / (2 * h);
      EXPECT_NEAR(grad.d_shape(r, c), fd, tol) << "shape " << r << c;
    }
  }
  for (int i = 0; i < 3; ++i) {
    double dp[3] = {0, 0, 0};
    dp[i] = h;
    const ConvexPolygon pp =
        p.Transformed(dp[2], Vector2d(dp[0], dp[1]), pivot);
    dp[i] = -h;
    const ConvexPolygon pm =
        p.Transformed(dp[2], Vector2d(dp[0], dp[1]), pivot);
    const double fd = (margin_of(e, pp) - margin_of(e, pm)) / (2 * h);
    EXPECT_NEAR(grad.d_poly_pose[i], fd, tol) << "pose " << i;
  }
}

// Skip configurations where the active face is nearly tied; the subgradient
// is not unique there and finite differences see the other branch.
bool InPolygonFaceTied(const Ellipsoid& e, const ConvexPolygon& p) {
  std::vector<double> margins;
  for (const HalfSpace& f : p.faces()) {
    margins.push_back(f.offset - f.normal.dot(e.center) -
                      (e.shape.transpose() * f.normal).norm());
  }
  std::sort(margins.begin(), margins.end());
  return margins.size() > 1 && margins[1] - margins[0] < 1e-3;
}

TEST(InPolygonMarginTest, GradientMatchesFiniteDifferences) {
  std::mt19937 rng(99);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const ConvexPolygon p = RandomConvexPolygon(&rng);
    const Ellipsoid e = RandomEllipsoid(&rng);
    if (InPolygonFaceTied(e, p)) continue;
    const Vector2d pivot = p.Centroid();
    const InPolygonMargin m = EllipsoidInPolygonMarginGrad(e, p, pivot);
    EXPECT_NEAR(m.margin, EllipsoidInPolygonMargin(e, p), 1e-12);
    CheckMarginGradient(
        e, p, pivot, m.grad,
        [](const Ellipsoid& ee, const ConvexPolygon& pp) {
          return EllipsoidInPolygonMargin(ee, pp);
        },
        1e-4);
    ++checked;
  }
  EXPECT_GT(checked, 150);
}

// Interior ridge points and near-tangency make the separation gradient
// nonunique; keep clearly one sided configurations.
bool SeparationNearNonsmooth(const Ellipsoid& e, const ConvexPolygon& p) {
  const double margin = EllipsoidPolygonSeparation(e, p);
  if (std::abs(margin + 1.0) < 0.05) return true;  // near boundary crossing
  if (!p.Contains(e.center)) return false;
  // Inside: check for a face distance tie in the transformed frame.
  const AffineMap2 f = UnitBallMap(e);
  std::vector<Vector2d> mapped;
  for (const Vector2d& v : p.vertices()) mapped.push_back(f.Apply(v));
  const ConvexPolygon image = ConvexPolygon::FromVertices(mapped);
  std::vector<double> depths;
  for (const HalfSpace& face : image.faces()) {
    depths.push_back(face.offset);  // origin depth per face
  }
  std::sort(depths.begin(), depths.end());
  return depths.size() > 1 && depths[1] - depths[0] < 1e-3;
}

TEST(SeparationTest, GradientMatchesFiniteDifferences) {
  std::mt19937 rng(111);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const ConvexPolygon p = RandomConvexPolygon(&rng);
    const Ellipsoid e = RandomEllipsoid(&rng);
    if (SeparationNearNonsmooth(e, p)) continue;
    const Vector2d pivot = p.Centroid();
    const SeparationMargin m = EllipsoidPolygonSeparationGrad(e, p, pivot);
    EXPECT_NEAR(m.margin, EllipsoidPolygonSeparation(e, p), 1e-12);
    CheckMarginGradient(
        e, p, pivot, m.grad,
        [](const Ellipsoid& ee, const ConvexPolygon& pp) {
          return EllipsoidPolygonSeparation(ee, pp);
        },
        1e-4);
    ++checked;
  }
  EXPECT_GT(checked, 150);
}

TEST(PointDistanceTest, GradientMatchesFiniteDifferences) {
  std::mt19937 rng(122);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const ConvexPolygon p = RandomConvexPolygon(&rng);
    const Vector2d q(10.0 * unit(rng) - 5.0, 10.0 * unit(rng) - 5.0);
    if (PointPolygonDistance(q, p) < 1e-3) continue;
    const PointDistance d = PointPolygonDistanceGrad(q, p);
    const double h = 1e-6;
    for (int i = 0; i < 2; ++i) {
      Vector2d qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const double fd =
          (PointPolygonDistance(qp, p) - PointPolygonDistance(qm, p)) /
          (2 * h);
      EXPECT_NEAR(d.d_point[i], fd, 1e-4);
    }
  }
}

}  // namespace
}  // namespace reactive_horizon
