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

#ifndef REACTIVE_HORIZON_GEOMETRY_H_
#define REACTIVE_HORIZON_GEOMETRY_H_

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace reactive_horizon {

using Vector2d = Eigen::Vector2d;
using Matrix2d = Eigen::Matrix2d;

// Thrown when a geometric argument violates a type invariant (degenerate
// ellipsoid shape, unbounded or empty polygon, collinear point set).
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One supporting half-space {y : normal . y <= offset} of a convex polygon.
// Normals are unit length and point out of the set.
struct HalfSpace {
  Vector2d normal;
  double offset = 0.0;
};

// Bounded, nonempty convex polygon kept in both half-space and vertex form.
// Vertices are counterclockwise; face k joins vertex k to vertex k+1.
class ConvexPolygon {
 public:
  // Builds from a counterclockwise vertex list (>= 3 non-collinear points).
  // Clockwise input is reversed rather than rejected.
  static ConvexPolygon FromVertices(std::vector<Vector2d> vertices);

  // Axis-aligned rectangle [xmin, xmax] x [ymin, ymax].
  static ConvexPolygon AxisAlignedBox(const Vector2d& min_corner,
                                      const Vector2d& max_corner);

  // Rectangle of given half extents, rotated by `angle` and centered at
  // `center`. Used for walls and unknown-box obstacles.
  static ConvexPolygon OrientedBox(const Vector2d& center, double half_length,
                                   double half_width, double angle);

  const std::vector<Vector2d>& vertices() const { return vertices_; }
  const std::vector<HalfSpace>& faces() const { return faces_; }

  bool Contains(const Vector2d& p, double tol = 0.0) const;

  // Largest violation of the face inequalities at p; <= 0 inside.
  double ContainmentViolation(const Vector2d& p) const;

  Vector2d Centroid() const;
  double Area() const;

  // Rigid transform: rotate by angle about `pivot`, then translate.
  ConvexPolygon Transformed(double angle, const Vector2d& translation,
                            const Vector2d& pivot) const;

  void BoundingBox(Vector2d* min_corner, Vector2d* max_corner) const;

 private:
  ConvexPolygon() = default;
  std::vector<Vector2d> vertices_;
  std::vector<HalfSpace> faces_;
};

// Ellipsoid {center + shape * z : |z| <= 1}. The shape matrix must be
// invertible; it need not be symmetric.
struct Ellipsoid {
  Vector2d center = Vector2d::Zero();
  Matrix2d shape = Matrix2d::Identity();

  double Area() const;
  bool Contains(const Vector2d& p, double tol = 0.0) const;
  Vector2d BoundaryPoint(double angle) const;
};

// Affine map F(y) = linear * y + translation.
struct AffineMap2 {
  Matrix2d linear = Matrix2d::Identity();
  Vector2d translation = Vector2d::Zero();

  Vector2d Apply(const Vector2d& y) const { return linear * y + translation; }
  AffineMap2 Inverse() const;
  AffineMap2 Compose(const AffineMap2& inner) const;
};

// Map taking the ellipsoid onto the unit ball: F(y) = S^-1 (y - c).
// Throws GeometryError if the shape matrix is singular.
AffineMap2 UnitBallMap(const Ellipsoid& e);

// Gradients of a scalar margin with respect to the ellipsoid parameters and
// a rigid pose applied to the polygon (pivot given per call).
struct MarginDerivatives {
  Vector2d d_center = Vector2d::Zero();
  Matrix2d d_shape = Matrix2d::Zero();
  // Polygon pose: (d/d tx, d/d ty, d/d rotation about the pivot).
  Eigen::Vector3d d_poly_pose = Eigen::Vector3d::Zero();
};

struct InPolygonMargin {
  double margin = 0.0;
  int face = -1;  // minimizing face, first in face order on ties
  MarginDerivatives grad;
};

// Largest uniform support-function inflation of e that stays inside p,
// in meters: min over faces of (offset - normal.center - |S^T normal|).
// margin >= 0 iff e is contained in p.
double EllipsoidInPolygonMargin(const Ellipsoid& e, const ConvexPolygon& p);

// Margin plus analytic gradients; the subgradient at a face tie comes from
// the first minimizing face. `pose_pivot` is the point the polygon-rotation
// derivative is taken about.
InPolygonMargin EllipsoidInPolygonMarginGrad(
    const Ellipsoid& e, const ConvexPolygon& p,
    const Vector2d& pose_pivot = Vector2d::Zero());

// Containment margin against one face only. Containment in the polygon is
// the conjunction of these over all faces; posing them separately keeps each
// row smooth where the min-aggregated margin kinks at face ties.
double EllipsoidInPolygonFaceMargin(const Ellipsoid& e, const ConvexPolygon& p,
                                    int face);

InPolygonMargin EllipsoidInPolygonFaceMarginGrad(
    const Ellipsoid& e, const ConvexPolygon& p, int face,
    const Vector2d& pose_pivot = Vector2d::Zero());

struct SeparationMargin {
  double margin = 0.0;
  MarginDerivatives grad;
};

// Dimensionless separation between ellipsoid and polygon, computed in the
// unit-ball frame of e: distance(origin, F(o)) - 1 when the origin is
// outside the transformed polygon, and -1 - penetration depth otherwise.
// margin > 0 iff e and o are disjoint.
double EllipsoidPolygonSeparation(const Ellipsoid& e, const ConvexPolygon& o);

SeparationMargin EllipsoidPolygonSeparationGrad(
    const Ellipsoid& e, const ConvexPolygon& o,
    const Vector2d& pose_pivot = Vector2d::Zero());

// Euclidean distance from p to the polygon; 0 inside.
double PointPolygonDistance(const Vector2d& p, const ConvexPolygon& poly);

// Distance plus gradient w.r.t. p (zero subgradient inside the polygon).
struct PointDistance {
  double distance = 0.0;
  Vector2d d_point = Vector2d::Zero();
};
PointDistance PointPolygonDistanceGrad(const Vector2d& p,
                                       const ConvexPolygon& poly);

// Depth of p below the nearest face plane when p is inside poly; 0 outside.
double PointPolygonPenetration(const Vector2d& p, const ConvexPolygon& poly);

// True iff the closed segment [a, b] meets the closed polygon.
bool SegmentIntersectsPolygon(const Vector2d& a, const Vector2d& b,
                              const ConvexPolygon& poly);

// Minimum-volume enclosing ellipsoid by Khachiyan iteration. Requires >= 3
// affinely independent points; throws GeometryError on degenerate input.
// The result contains every point within -tol margin and has area within
// (1 + tol) of the optimum.
Ellipsoid MinimumEnclosingEllipsoid(const std::vector<Vector2d>& points,
                                    double tol = 1e-6,
                                    int max_iterations = 10000);

inline Matrix2d RotationMatrix(double angle) {
  Matrix2d r;
  const double c = std::cos(angle), s = std::sin(angle);
  r << c, -s, s, c;
  return r;
}

// d/d angle of RotationMatrix(angle).
inline Matrix2d RotationMatrixDerivative(double angle) {
  Matrix2d r;
  const double c = std::cos(angle), s = std::sin(angle);
  r << -s, -c, c, -s;
  return r;
}

}  // namespace reactive_horizon

#endif  // REACTIVE_HORIZON_GEOMETRY_H_
