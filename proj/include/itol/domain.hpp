#pragma once

// Deviation domains: convex polytopes in (tz, rx, ry) torsor space.
//
// A domain is stored in both representations, the half-spaces n . x <= h
// (unit normals) and the vertices. Domains that are unbounded along a line
// (an orientation zone leaves tz free) also record that lineality direction;
// their vertices are those of the cross-section through the origin
// orthogonal to it.
//
// Stack-ups combine by Minkowski sum. The support function of a sum is the
// sum of the supports, so a sum fits inside a polytope exactly when, for
// every facet (n, h) of that polytope, sum_i support_i(n) <= h.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "itol/errors.hpp"
#include "itol/mechanism.hpp"
#include "itol/sdt.hpp"

namespace itol {

struct Facet {
  Eigen::Vector3d normal;  // unit length
  double offset = 0.0;     // normal . x <= offset
};

class DeviationDomain {
 public:
  DeviationDomain() = default;

  /// Build from half-spaces. Normals need not be normalised. `lineality`
  /// lists at most one direction along which every facet normal is
  /// orthogonal (the domain is a prism along it).
  static DeviationDomain from_facets(const std::vector<Facet>& facets, Point2 at,
                                     std::vector<Eigen::Vector3d> lineality = {}) {
    if (lineality.size() > 1) throw InvalidArgument("domains support at most one unbounded direction");
    DeviationDomain d;
    d.at_ = at;
    for (const auto& f : facets) {
      const double len = f.normal.norm();
      if (!(len > 0.0)) throw InvalidArgument("facet normal must be nonzero");
      d.facets_.push_back({f.normal / len, f.offset / len});
    }
    for (auto& l : lineality) d.lineality_.push_back(l.normalized());
    d.enumerate_vertices();
    return d;
  }

  const std::vector<Facet>& facets() const noexcept { return facets_; }
  const std::vector<Eigen::Vector3d>& vertices() const noexcept { return vertices_; }
  const std::vector<Eigen::Vector3d>& lineality() const noexcept { return lineality_; }
  Point2 at() const noexcept { return at_; }
  bool bounded() const noexcept { return lineality_.empty(); }

  /// max over the domain of u . x; +infinity along an unbounded direction.
  double support(const Eigen::Vector3d& u) const {
    for (const auto& l : lineality_) {
      if (std::abs(u.dot(l)) > 1e-12 * u.norm()) return std::numeric_limits<double>::infinity();
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : vertices_) best = std::max(best, u.dot(v));
    return best;
  }

  /// Half-space membership with a relative slack on each facet offset.
  bool contains(const Eigen::Vector3d& x, double rel_tol = 1e-12) const {
    for (const auto& f : facets_) {
      if (f.normal.dot(x) > f.offset + rel_tol * std::abs(f.offset)) return false;
    }
    return true;
  }

  DeviationDomain intersect(const DeviationDomain& other) const {
    if (!(other.at_ == at_)) throw InvalidArgument("intersected domains must share an expression point");
    auto facets = facets_;
    facets.insert(facets.end(), other.facets_.begin(), other.facets_.end());
    std::vector<Eigen::Vector3d> lin;
    if (!lineality_.empty() && !other.lineality_.empty() &&
        std::abs(std::abs(lineality_[0].dot(other.lineality_[0])) - 1.0) < 1e-12) {
      lin = lineality_;
    }
    return from_facets(facets, at_, lin);
  }

  /// Same set of plane motions, with torsor components expressed at `to`.
  DeviationDomain transported(Point2 to) const {
    const Eigen::Matrix3d m = transport_matrix(at_, to);
    const Eigen::Matrix3d m_inv_t = m.inverse().transpose();
    DeviationDomain d;
    d.at_ = to;
    for (const auto& f : facets_) {
      const Eigen::Vector3d n = m_inv_t * f.normal;
      const double len = n.norm();
      d.facets_.push_back({n / len, f.offset / len});
    }
    for (const auto& v : vertices_) d.vertices_.push_back(m * v);
    for (const auto& l : lineality_) d.lineality_.push_back((m * l).normalized());
    return d;
  }

  DeviationDomain scaled(double s) const {
    if (!(s > 0.0)) throw InvalidArgument("scale must be > 0");
    DeviationDomain d = *this;
    for (auto& f : d.facets_) f.offset *= s;
    for (auto& v : d.vertices_) v *= s;
    return d;
  }

  /// Largest |x_axis| reached in the domain (domains here are symmetric).
  double half_width(Axis a) const {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e[static_cast<Eigen::Index>(a)] = 1.0;
    return std::max(support(e), support(-e));
  }

 private:
  void enumerate_vertices() {
    std::vector<Facet> hs = facets_;
    // Cut prisms by the plane through the origin orthogonal to the line.
    for (const auto& l : lineality_) {
      hs.push_back({l, 0.0});
      hs.push_back({-l, 0.0});
    }
    double scale = 0.0;
    for (const auto& f : hs) scale = std::max(scale, std::abs(f.offset));
    if (!(scale > 0.0)) scale = 1.0;

    std::vector<Eigen::Vector3d> pts;
    const std::size_t n = hs.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
          Eigen::Matrix3d a;
          a.row(0) = hs[i].normal.transpose();
          a.row(1) = hs[j].normal.transpose();
          a.row(2) = hs[k].normal.transpose();
          if (std::abs(a.determinant()) < 1e-12) continue;
          const Eigen::Vector3d x = a.partialPivLu().solve(Eigen::Vector3d(hs[i].offset, hs[j].offset, hs[k].offset));
          bool feasible = true;
          for (const auto& f : hs) {
            if (f.normal.dot(x) > f.offset + 1e-10 * scale) {
              feasible = false;
              break;
            }
          }
          if (!feasible) continue;
          Eigen::Vector3d v = x;
          for (const auto& l : lineality_) v -= v.dot(l) * l;
          pts.push_back(v);
        }
      }
    }
    if (pts.empty()) throw NumericalError("half-spaces define an empty or unbounded domain");

    // Deduplicate with a per-axis tolerance: the axes carry different units.
    Eigen::Vector3d lo = pts[0], hi = pts[0];
    for (const auto& p : pts) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Eigen::Vector3d tol = ((hi - lo).array() * 1e-9 + 1e-300).matrix();
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
      return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
    });
    for (const auto& p : pts) {
      const bool dup = std::any_of(vertices_.begin(), vertices_.end(), [&](const Eigen::Vector3d& v) {
        return ((p - v).cwiseAbs().array() <= tol.array()).all();
      });
      if (!dup) vertices_.push_back(p);
    }
  }

  std::vector<Facet> facets_;
  std::vector<Eigen::Vector3d> vertices_;
  std::vector<Eigen::Vector3d> lineality_;
  Point2 at_{};
};

/// Plane motions keeping every point of the surface inside a slab of width
/// t1 centred on the nominal plane: |w(corner)| <= t1/2 at the four corners.
inline DeviationDomain location_zone_domain(double t1, const SurfaceGeometry& g) {
  if (!(t1 > 0.0)) throw InvalidArgument("location zone width must be > 0");
  std::vector<Facet> fs;
  for (const auto& c : g.corners()) {
    const Eigen::Vector3d a = influence_row(g.center, c).transpose();
    fs.push_back({a, t1 / 2});
    fs.push_back({-a, t1 / 2});
  }
  return DeviationDomain::from_facets(fs, g.center);
}

/// Orientation-only zone of width t2: the rotational part of the field stays
/// within t2/2 at the corners, translation is free.
inline DeviationDomain orientation_zone_domain(double t2, const SurfaceGeometry& g) {
  if (!(t2 > 0.0)) throw InvalidArgument("orientation zone width must be > 0");
  const double hx = g.lx / 2, hy = g.ly / 2;
  std::vector<Facet> fs;
  for (const Eigen::Vector3d& a : {Eigen::Vector3d(0.0, hy, -hx), Eigen::Vector3d(0.0, hy, hx)}) {
    fs.push_back({a, t2 / 2});
    fs.push_back({-a, t2 / 2});
  }
  return DeviationDomain::from_facets(fs, g.center, {Eigen::Vector3d::UnitX()});
}

/// Domain of one component: its location zone, cut by the orientation zone
/// when it has one.
inline DeviationDomain component_domain(const ComponentSpec& c, double t1, double t2) {
  auto d = location_zone_domain(t1, c.geometry);
  if (c.orientation_zone) d = d.intersect(orientation_zone_domain(t2, c.geometry));
  return d;
}

inline double minkowski_support(std::span<const DeviationDomain> terms, const Eigen::Vector3d& u) {
  double s = 0.0;
  for (const auto& d : terms) s += d.support(u);
  return s;
}

inline std::string format_direction(const Eigen::Vector3d& u) {
  std::ostringstream os;
  os.precision(6);
  os << "(tz " << u[0] << ", rx " << u[1] << ", ry " << u[2] << ")";
  return os.str();
}

/// Smallest relative slack (h - sum support) / h over the facets of `fr`.
/// Negative when the stack-up leaves the FR domain. Summands must already be
/// expressed at the FR frame.
inline double inclusion_margin(std::span<const DeviationDomain> terms, const DeviationDomain& fr) {
  for (const auto& d : terms) {
    if (!(d.at() == fr.at())) throw InvalidArgument("summands must be expressed at the FR frame");
  }
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& f : fr.facets()) {
    const double s = minkowski_support(terms, f.normal);
    if (!std::isfinite(s)) {
      throw NumericalError("unconstrained direction " + format_direction(f.normal) +
                           ": a summand is unbounded along an FR facet normal");
    }
    margin = std::min(margin, (f.offset - s) / std::abs(f.offset));
  }
  return margin;
}

inline bool contains_sum_in(std::span<const DeviationDomain> terms, const DeviationDomain& fr,
                            double rel_tol = 1e-12) {
  return inclusion_margin(terms, fr) >= -rel_tol;
}

/// FR domain: location zone of width t on the FR rectangle.
inline DeviationDomain fr_domain(const MechanismSpec& m) {
  return location_zone_domain(m.fr_tolerance, m.fr_surface);
}

/// Component domains for zone widths (t1, t2), expressed at the FR frame.
inline std::vector<DeviationDomain> stack_domains(const MechanismSpec& m, double t1, double t2) {
  std::vector<DeviationDomain> out;
  for (const auto& c : m.components) out.push_back(component_domain(c, t1, t2).transported(m.fr_surface.center));
  return out;
}

struct WorstCaseTolerances {
  double t1 = 0.0;  // location zone width
  double t2 = 0.0;  // orientation zone width
  int iterations = 0;
};

/// Largest zones (t1 = ratio * t2) whose stacked deviation domains still fit
/// in the FR domain, by bisection on t2 to a relative width of `rel_tol`.
/// The returned t2 is the feasible end of the final bracket.
inline WorstCaseTolerances wc_synthesis(const MechanismSpec& m, double rel_tol = 1e-6) {
  m.validate();
  const auto fr = fr_domain(m);
  auto fits = [&](double t2) {
    const auto terms = stack_domains(m, m.zone_ratio * t2, t2);
    return contains_sum_in(terms, fr, 0.0);
  };
  double lo = 0.0, hi = m.fr_tolerance;
  while (fits(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6 * m.fr_tolerance) throw NumericalError("worst-case synthesis: FR never constrains the stack");
  }
  int it = 0;
  while (lo == 0.0 || hi - lo > rel_tol * lo) {
    const double mid = 0.5 * (lo + hi);
    (fits(mid) ? lo : hi) = mid;
    if (++it > 200) throw NumericalError("worst-case synthesis did not converge");
  }
  return {m.zone_ratio * lo, lo, it};
}

}  // namespace itol
