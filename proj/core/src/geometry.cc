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

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace reactive_horizon {
namespace {

constexpr double kSingularDet = 1e-12;

double Cross(const Vector2d& a, const Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Closest point to `p` on segment [a, b] and its parameter in [0, 1].
std::pair<Vector2d, double> ClosestPointOnSegment(const Vector2d& p,
                                                  const Vector2d& a,
                                                  const Vector2d& b) {
  const Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return {a, 0.0};
  double t = (p - a).dot(ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return {a + t * ab, t};
}

}  // namespace

ConvexPolygon ConvexPolygon::FromVertices(std::vector<Vector2d> vertices) {
  if (vertices.size() < 3) {
    throw GeometryError("polygon needs at least 3 vertices");
  }
  // Orientation from the signed area; reverse clockwise input.
  double twice_area = 0.0;
  for (size_t i = 0; i < vertices.size(); ++i) {
    const Vector2d& a = vertices[i];
    const Vector2d& b = vertices[(i + 1) % vertices.size()];
    twice_area += Cross(a, b);
  }
  if (std::abs(twice_area) < kSingularDet) {
    throw GeometryError("degenerate polygon: zero area");
  }
  if (twice_area < 0.0) std::reverse(vertices.begin(), vertices.end());

  ConvexPolygon poly;
  poly.vertices_ = std::move(vertices);
  const size_t n = poly.vertices_.size();
  poly.faces_.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const Vector2d& a = poly.vertices_[i];
    const Vector2d& b = poly.vertices_[(i + 1) % n];
    const Vector2d edge = b - a;
    const double len = edge.norm();
    if (len < 1e-12) throw GeometryError("degenerate polygon: repeated vertex");
    // Outward normal of a counterclockwise edge.
    const Vector2d normal(edge.y() / len, -edge.x() / len);
    poly.faces_.push_back({normal, normal.dot(a)});
  }
  // Convexity: every vertex must satisfy every face inequality.
  for (const Vector2d& v : poly.vertices_) {
    for (const HalfSpace& f : poly.faces_) {
      if (f.normal.dot(v) > f.offset + 1e-9) {
        throw GeometryError("vertex list is not convex");
      }
    }
  }
  return poly;
}

ConvexPolygon ConvexPolygon::AxisAlignedBox(const Vector2d& min_corner,
                                            const Vector2d& max_corner) {
  return FromVertices({{min_corner.x(), min_corner.y()},
                       {max_corner.x(), min_corner.y()},
                       {max_corner.x(), max_corner.y()},
                       {min_corner.x(), max_corner.y()}});
}

ConvexPolygon ConvexPolygon::OrientedBox(const Vector2d& center,
                                         double half_length, double half_width,
                                         double angle) {
  const Matrix2d r = RotationMatrix(angle);
  std::vector<Vector2d> vs;
  vs.reserve(4);
  for (const Vector2d& corner :
       {Vector2d(-half_length, -half_width), Vector2d(half_length, -half_width),
        Vector2d(half_length, half_width), Vector2d(-half_length, half_width)}) {
    vs.push_back(center + r * corner);
  }
  return FromVertices(std::move(vs));
}

bool ConvexPolygon::Contains(const Vector2d& p, double tol) const {
  for (const HalfSpace& f : faces_) {
    if (f.normal.dot(p) > f.offset + tol) return false;
  }
  return true;
}

double ConvexPolygon::ContainmentViolation(const Vector2d& p) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const HalfSpace& f : faces_) {
    worst = std::max(worst, f.normal.dot(p) - f.offset);
  }
  return worst;
}

Vector2d ConvexPolygon::Centroid() const {
  // Area-weighted centroid (shoelace form).
  double twice_area = 0.0;
  Vector2d c = Vector2d::Zero();
  const size_t n = vertices_.size();
  for (size_t i = 0; i < n; ++i) {
    const Vector2d& a = vertices_[i];
    const Vector2d& b = vertices_[(i + 1) % n];
    const double w = Cross(a, b);
    twice_area += w;
    c += w * (a + b);
  }
  return c / (3.0 * twice_area);
}

double ConvexPolygon::Area() const {
  double twice_area = 0.0;
  const size_t n = vertices_.size();
  for (size_t i = 0; i < n; ++i) {
    twice_area += Cross(vertices_[i], vertices_[(i + 1) % n]);
  }
  return 0.5 * twice_area;
}

ConvexPolygon ConvexPolygon::Transformed(double angle,
                                         const Vector2d& translation,
                                         const Vector2d& pivot) const {
  const Matrix2d r = RotationMatrix(angle);
  std::vector<Vector2d> vs;
  vs.reserve(vertices_.size());
  for (const Vector2d& v : vertices_) {
    vs.push_back(r * (v - pivot) + pivot + translation);
  }
  return FromVertices(std::move(vs));
}

void ConvexPolygon::BoundingBox(Vector2d* min_corner,
                                Vector2d* max_corner) const {
  *min_corner = vertices_.front();
  *max_corner = vertices_.front();
  for (const Vector2d& v : vertices_) {
    *min_corner = min_corner->cwiseMin(v);
    *max_corner = max_corner->cwiseMax(v);
  }
}

double Ellipsoid::Area() const {
  return M_PI * std::abs(shape.determinant());
}

bool Ellipsoid::Contains(const Vector2d& p, double tol) const {
  return (shape.inverse() * (p - center)).norm() <= 1.0 + tol;
}

Vector2d Ellipsoid::BoundaryPoint(double angle) const {
  return center + shape * Vector2d(std::cos(angle), std::sin(angle));
}

AffineMap2 AffineMap2::Inverse() const {
  AffineMap2 inv;
  inv.linear = linear.inverse();
  inv.translation = -inv.linear * translation;
  return inv;
}

AffineMap2 AffineMap2::Compose(const AffineMap2& inner) const {
  AffineMap2 out;
  out.linear = linear * inner.linear;
  out.translation = linear * inner.translation + translation;
  return out;
}

AffineMap2 UnitBallMap(const Ellipsoid& e) {
  if (std::abs(e.shape.determinant()) <= kSingularDet) {
    throw GeometryError("degenerate ellipsoid: singular shape matrix");
  }
  AffineMap2 f;
  f.linear = e.shape.inverse();
  f.translation = -f.linear * e.center;
  return f;
}

double EllipsoidInPolygonMargin(const Ellipsoid& e, const ConvexPolygon& p) {
  double margin = std::numeric_limits<double>::infinity();
  for (const HalfSpace& f : p.faces()) {
    const double m =
        f.offset - f.normal.dot(e.center) - (e.shape.transpose() * f.normal).norm();
    margin = std::min(margin, m);
  }
  return margin;
}

double EllipsoidInPolygonFaceMargin(const Ellipsoid& e, const ConvexPolygon& p,
                                    int face) {
  const HalfSpace& f = p.faces().at(face);
  return f.offset - f.normal.dot(e.center) -
         (e.shape.transpose() * f.normal).norm();
}

InPolygonMargin EllipsoidInPolygonFaceMarginGrad(const Ellipsoid& e,
                                                 const ConvexPolygon& p,
                                                 int face,
                                                 const Vector2d& pose_pivot) {
  const HalfSpace& f = p.faces().at(face);
  InPolygonMargin out;
  out.face = face;
  const Vector2d n = f.normal;
  const Vector2d stn = e.shape.transpose() * n;
  const double stn_norm = stn.norm();
  out.margin = f.offset - n.dot(e.center) - stn_norm;
  const Vector2d u = stn_norm > 1e-15 ? Vector2d(stn / stn_norm) : Vector2d(0, 0);
  out.grad.d_center = -n;
  out.grad.d_shape = -n * u.transpose();
  // Rigid pose of the polygon about pose_pivot: translation enters through
  // the face offset, rotation through the face normal.
  const Matrix2d j = RotationMatrixDerivative(0.0);
  const Vector2d jn = j * n;
  out.grad.d_poly_pose.head<2>() = n;
  out.grad.d_poly_pose[2] = jn.dot(pose_pivot - e.center - e.shape * u);
  return out;
}

InPolygonMargin EllipsoidInPolygonMarginGrad(const Ellipsoid& e,
                                             const ConvexPolygon& p,
                                             const Vector2d& pose_pivot) {
  int min_face = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  const auto& faces = p.faces();
  for (int k = 0; k < static_cast<int>(faces.size()); ++k) {
    const double m = faces[k].offset - faces[k].normal.dot(e.center) -
                     (e.shape.transpose() * faces[k].normal).norm();
    if (m < min_margin) {
      min_margin = m;
      min_face = k;
    }
  }
  return EllipsoidInPolygonFaceMarginGrad(e, p, min_face, pose_pivot);
}

namespace {

// Closest point of the polygon image S^-1 (poly - c) to the origin, the
// matching world-frame point on the polygon, and whether the origin lies
// inside the image.
struct TransformedClosest {
  double distance = 0.0;
  Vector2d w_star = Vector2d::Zero();  // transformed frame
  Vector2d v_star = Vector2d::Zero();  // world frame
  bool inside = false;
};

TransformedClosest ClosestTransformedFeature(const Ellipsoid& e,
                                             const ConvexPolygon& o) {
  if (std::abs(e.shape.determinant()) <= kSingularDet) {
    throw GeometryError("degenerate ellipsoid: singular shape matrix");
  }
  const Matrix2d s_inv = e.shape.inverse();
  const auto& vs = o.vertices();
  const size_t n = vs.size();
  std::vector<Vector2d> w(n);
  for (size_t i = 0; i < n; ++i) w[i] = s_inv * (vs[i] - e.center);

  TransformedClosest best;
  best.distance = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i) {
    const Vector2d& a = w[i];
    const Vector2d& b = w[(i + 1) % n];
    const auto [q, t] = ClosestPointOnSegment(Vector2d::Zero(), a, b);
    const double d = q.norm();
    if (d < best.distance) {
      best.distance = d;
      best.w_star = q;
      best.v_star = vs[i] + t * (vs[(i + 1) % n] - vs[i]);
    }
  }
  // Origin inside the image iff the ellipsoid center is inside the polygon.
  best.inside = o.Contains(e.center);
  return best;
}

}  // namespace

double EllipsoidPolygonSeparation(const Ellipsoid& e, const ConvexPolygon& o) {
  const TransformedClosest c = ClosestTransformedFeature(e, o);
  return c.inside ? -1.0 - c.distance : c.distance - 1.0;
}

SeparationMargin EllipsoidPolygonSeparationGrad(const Ellipsoid& e,
                                                const ConvexPolygon& o,
                                                const Vector2d& pose_pivot) {
  const TransformedClosest c = ClosestTransformedFeature(e, o);
  SeparationMargin out;
  out.margin = c.inside ? -1.0 - c.distance : c.distance - 1.0;
  const double dist = std::max(c.distance, 1e-12);
  const Vector2d u = c.w_star / dist;
  // Envelope theorem: the segment parameter of the closest feature is
  // stationary, so differentiate at fixed v_star.
  const double sign = c.inside ? -1.0 : 1.0;
  const Matrix2d s_inv_t = e.shape.inverse().transpose();
  const Vector2d siu = s_inv_t * u;
  out.grad.d_center = -sign * siu;
  out.grad.d_shape = -sign * siu * c.w_star.transpose();
  out.grad.d_poly_pose.head<2>() = sign * siu;
  const Matrix2d j = RotationMatrixDerivative(0.0);
  out.grad.d_poly_pose[2] = sign * siu.dot(j * (c.v_star - pose_pivot));
  return out;
}

double PointPolygonDistance(const Vector2d& p, const ConvexPolygon& poly) {
  if (poly.Contains(p)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const auto& vs = poly.vertices();
  for (size_t i = 0; i < vs.size(); ++i) {
    const auto [q, t] = ClosestPointOnSegment(p, vs[i], vs[(i + 1) % vs.size()]);
    best = std::min(best, (p - q).norm());
  }
  return best;
}

PointDistance PointPolygonDistanceGrad(const Vector2d& p,
                                       const ConvexPolygon& poly) {
  PointDistance out;
  if (poly.Contains(p)) return out;
  double best = std::numeric_limits<double>::infinity();
  Vector2d proj = Vector2d::Zero();
  const auto& vs = poly.vertices();
  for (size_t i = 0; i < vs.size(); ++i) {
    const auto [q, t] = ClosestPointOnSegment(p, vs[i], vs[(i + 1) % vs.size()]);
    const double d = (p - q).norm();
    if (d < best) {
      best = d;
      proj = q;
    }
  }
  out.distance = best;
  out.d_point = (p - proj) / std::max(best, 1e-12);
  return out;
}

double PointPolygonPenetration(const Vector2d& p, const ConvexPolygon& poly) {
  if (!poly.Contains(p)) return 0.0;
  double depth = std::numeric_limits<double>::infinity();
  for (const HalfSpace& f : poly.faces()) {
    depth = std::min(depth, f.offset - f.normal.dot(p));
  }
  return depth;
}

bool SegmentIntersectsPolygon(const Vector2d& a, const Vector2d& b,
                              const ConvexPolygon& poly) {
  // Clip the parametric segment a + t (b - a), t in [0, 1], by every
  // half-space; a nonempty interval remains iff the segment meets the set.
  double t_lo = 0.0, t_hi = 1.0;
  const Vector2d d = b - a;
  for (const HalfSpace& f : poly.faces()) {
    const double num = f.offset - f.normal.dot(a);
    const double den = f.normal.dot(d);
    if (std::abs(den) < 1e-15) {
      if (num < 0.0) return false;  // parallel and strictly outside
      continue;
    }
    const double t = num / den;
    if (den > 0.0) {
      t_hi = std::min(t_hi, t);
    } else {
      t_lo = std::max(t_lo, t);
    }
    if (t_lo > t_hi) return false;
  }
  return true;
}

Ellipsoid MinimumEnclosingEllipsoid(const std::vector<Vector2d>& points,
                                    double tol, int max_iterations) {
  const int n = static_cast<int>(points.size());
  if (n < 3) throw GeometryError("enclosing ellipsoid needs >= 3 points");
  if (tol <= 0.0) throw GeometryError("tolerance must be positive");

  // Affine independence check: the centered point cloud must span the plane.
  Vector2d mean = Vector2d::Zero();
  for (const Vector2d& p : points) mean += p;
  mean /= n;
  Matrix2d scatter = Matrix2d::Zero();
  for (const Vector2d& p : points) {
    scatter += (p - mean) * (p - mean).transpose();
  }
  Eigen::SelfAdjointEigenSolver<Matrix2d> scatter_eig(scatter);
  if (scatter_eig.eigenvalues()(0) <=
      1e-18 * std::max(scatter_eig.eigenvalues()(1), 1e-30)) {
    throw GeometryError("degenerate input: points are collinear");
  }

  // Khachiyan iteration on lifted points q = (x, y, 1).
  Eigen::Matrix3Xd q(3, n);
  for (int i = 0; i < n; ++i) q.col(i) << points[i].x(), points[i].y(), 1.0;
  Eigen::VectorXd u = Eigen::VectorXd::Constant(n, 1.0 / n);

  for (int it = 0; it < max_iterations; ++it) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    for (int i = 0; i < n; ++i) m += u(i) * q.col(i) * q.col(i).transpose();
    const Eigen::Matrix3d m_inv = m.inverse();
    int worst = 0;
    double kappa_max = 0.0;
    for (int i = 0; i < n; ++i) {
      const double kappa = q.col(i).dot(m_inv * q.col(i));
      if (kappa > kappa_max) {
        kappa_max = kappa;
        worst = i;
      }
    }
    if (kappa_max <= 3.0 * (1.0 + tol)) break;
    const double step = (kappa_max - 3.0) / (3.0 * (kappa_max - 1.0));
    u *= (1.0 - step);
    u(worst) += step;
  }

  Vector2d center = Vector2d::Zero();
  for (int i = 0; i < n; ++i) center += u(i) * points[i];
  Matrix2d sigma = Matrix2d::Zero();
  for (int i = 0; i < n; ++i) {
    sigma += u(i) * points[i] * points[i].transpose();
  }
  sigma -= center * center.transpose();
  // {x : (x - c)^T A (x - c) <= 1} with A = sigma^-1 / 2; S = A^-1/2.
  Eigen::SelfAdjointEigenSolver<Matrix2d> eig(2.0 * sigma);
  if (eig.eigenvalues()(0) <= 0.0) {
    throw GeometryError("degenerate input: enclosing ellipsoid collapsed");
  }
  Matrix2d s = eig.eigenvectors() *
               eig.eigenvalues().cwiseSqrt().asDiagonal() *
               eig.eigenvectors().transpose();

  // Exact containment: expand by the worst residual of the approximate dual.
  const Matrix2d s_inv = s.inverse();
  double worst_ratio = 0.0;
  for (const Vector2d& p : points) {
    worst_ratio = std::max(worst_ratio, (s_inv * (p - center)).norm());
  }
  if (worst_ratio > 1.0) s *= worst_ratio;

  Ellipsoid e;
  e.center = center;
  e.shape = s;
  return e;
}

}  // namespace reactive_horizon
