#pragma once

// Small displacement torsors of planar surfaces.
//
// The plane normal is z. A torsor carries the normal translation tz (mm) and
// the two small rotations rx, ry (rad), expressed at an explicit point of the
// plane. The normal displacement it induces at a point p is
//
//     w(p) = tz + rx * (p.y - at.y) - ry * (p.x - at.x)
//
// (z component of T + R x (p - at)).

#include <array>
#include <cmath>

#include <Eigen/Core>

#include "itol/errors.hpp"

namespace itol {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Torsor {
  double tz = 0.0;
  double rx = 0.0;
  double ry = 0.0;
  Point2 at{};

  Eigen::Vector3d vec() const { return {tz, rx, ry}; }
  static Torsor from_vec(const Eigen::Vector3d& v, Point2 at) { return {v[0], v[1], v[2], at}; }

  /// Normal displacement of the plane point p.
  double displacement(Point2 p) const {
    return tz + rx * (p.y - at.y) - ry * (p.x - at.x);
  }
};

/// Rectangular planar surface placed in the mechanism frame.
struct SurfaceGeometry {
  double lx = 0.0;
  double ly = 0.0;
  Point2 center{};

  SurfaceGeometry() = default;
  SurfaceGeometry(double lx_, double ly_, Point2 center_ = {}) : lx(lx_), ly(ly_), center(center_) {
    if (!(lx_ > 0.0 && ly_ > 0.0)) throw InvalidArgument("surface extents must be > 0");
  }

  /// Corners ordered (-,-), (+,-), (-,+), (+,+) in (x, y) signs.
  std::array<Point2, 4> corners() const {
    const double hx = lx / 2, hy = ly / 2;
    return {{{center.x - hx, center.y - hy},
             {center.x + hx, center.y - hy},
             {center.x - hx, center.y + hy},
             {center.x + hx, center.y + hy}}};
  }

  bool contains(Point2 p, double tol = 1e-9) const {
    return std::abs(p.x - center.x) <= lx / 2 + tol && std::abs(p.y - center.y) <= ly / 2 + tol;
  }
};

/// Row r with r . (tz, rx, ry) = w(p) for a torsor expressed at `at`.
inline Eigen::RowVector3d influence_row(Point2 at, Point2 p) {
  return {1.0, p.y - at.y, -(p.x - at.x)};
}

/// Linear map taking torsor components expressed at `from` to the same
/// displacement field expressed at `to`.
inline Eigen::Matrix3d transport_matrix(Point2 from, Point2 to) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 1) = to.y - from.y;
  m(0, 2) = -(to.x - from.x);
  return m;
}

/// Re-express t at another point. Rotations are unchanged; tz becomes the
/// displacement of the field at the new point.
inline Torsor transport(const Torsor& t, Point2 to) {
  return {t.displacement(to), t.rx, t.ry, to};
}

/// Normal deviations at the four surface corners, ordered as
/// SurfaceGeometry::corners().
inline std::array<double, 4> corner_deviations(const Torsor& t, const SurfaceGeometry& g) {
  std::array<double, 4> w{};
  const auto cs = g.corners();
  for (std::size_t i = 0; i < 4; ++i) w[i] = t.displacement(cs[i]);
  return w;
}

}  // namespace itol
