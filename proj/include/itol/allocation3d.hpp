#pragma once

// Inertial tolerance synthesis for a planar stack: one dimension chain per
// torsor axis, each allocated with the feasibility-weighted rule of
// inertia1d. The chain influence of an axis is its lever arm (1 for tz), so
// every chain satisfies sum_i (arm * I_i)^2 = (t / 6)^2.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "itol/domain.hpp"
#include "itol/errors.hpp"
#include "itol/inertia1d.hpp"
#include "itol/mechanism.hpp"

namespace itol {

struct AxisTolerances {
  double tz = 0.0;  // mm
  double rx = 0.0;  // rad
  double ry = 0.0;  // rad

  double operator[](Axis a) const {
    switch (a) {
      case Axis::tz: return tz;
      case Axis::rx: return rx;
      case Axis::ry: return ry;
    }
    return 0.0;
  }
  Eigen::Vector3d vec() const { return {tz, rx, ry}; }
};

struct ToleranceSet3D {
  std::vector<std::string> names;
  std::vector<AxisTolerances> components;

  std::size_t size() const noexcept { return components.size(); }
  ToleranceSet3D scaled(double s) const {
    ToleranceSet3D out = *this;
    for (auto& c : out.components) c = {c.tz * s, c.rx * s, c.ry * s};
    return out;
  }
};

inline std::vector<double> chain(const MechanismSpec& m, Axis a) {
  m.validate();
  const auto idx = static_cast<std::size_t>(a);
  const double arm = m.arms()[idx];
  AllocationInput in{m.fr_tolerance, {}, {}};
  for (const auto& c : m.components) {
    in.influences.push_back(arm);
    in.feasibilities.push_back(c.feasibility[idx]);
  }
  return allocate_weighted(in);
}

inline std::vector<double> chain_translation(const MechanismSpec& m) { return chain(m, Axis::tz); }
inline std::vector<double> chain_rotation_x(const MechanismSpec& m) { return chain(m, Axis::rx); }
inline std::vector<double> chain_rotation_y(const MechanismSpec& m) { return chain(m, Axis::ry); }

inline ToleranceSet3D allocate(const MechanismSpec& m) {
  const auto tz = chain_translation(m), rx = chain_rotation_x(m), ry = chain_rotation_y(m);
  ToleranceSet3D out;
  for (std::size_t i = 0; i < m.components.size(); ++i) {
    out.names.push_back(m.components[i].name);
    out.components.push_back({tz[i], rx[i], ry[i]});
  }
  return out;
}

struct CombinationRatio {
  double rx = 0.0;  // I_tz / I_rx, mm/rad
  double ry = 0.0;  // I_tz / I_ry, mm/rad
};

inline std::vector<CombinationRatio> combination_ratios(const ToleranceSet3D& tols) {
  std::vector<CombinationRatio> out;
  for (const auto& c : tols.components) {
    if (!(c.tz > 0.0 && c.rx > 0.0 && c.ry > 0.0)) throw InvalidArgument("tolerances must be > 0");
    out.push_back({c.tz / c.rx, c.tz / c.ry});
  }
  return out;
}

// Homothety between the inertial and worst-case allocations. The centred
// inertial batch at Cpi = 1 has sigma = I per axis, so its 3-sigma ellipsoid
// has semi-axes 3 I. The worst-case batch puts 6 sigma across the domain, so
// its semi-axes are the domain half-widths.

inline constexpr double kReferenceHomothety[2] = {1.63, 1.95};

struct HomothetyEntry {
  std::string name;
  std::array<double, 3> inertial_semi_axis{};
  std::array<double, 3> wc_semi_axis{};
  std::array<double, 3> ratio{};
  double geometric_mean = 0.0;
  std::vector<Eigen::Vector3d> ellipsoid;     // inertial 3-sigma surface samples
  std::vector<Eigen::Vector3d> wc_ellipsoid;  // worst-case 3-sigma surface samples
  std::vector<Eigen::Vector3d> domain_vertices;
};

struct HomothetyReport {
  WorstCaseTolerances wc;
  std::vector<HomothetyEntry> components;
};

/// Points on an axis-aligned ellipsoid, on a (n_lat + 1) x n_lon grid.
inline std::vector<Eigen::Vector3d> ellipsoid_cloud(const std::array<double, 3>& semi, int n_lat = 8, int n_lon = 16) {
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i <= n_lat; ++i) {
    const double th = std::numbers::pi * i / n_lat;
    for (int j = 0; j < n_lon; ++j) {
      const double ph = 2.0 * std::numbers::pi * j / n_lon;
      pts.emplace_back(semi[0] * std::cos(th), semi[1] * std::sin(th) * std::cos(ph),
                       semi[2] * std::sin(th) * std::sin(ph));
      if (i == 0 || i == n_lat) break;
    }
  }
  return pts;
}

inline HomothetyReport compare_to_worst_case(const ToleranceSet3D& tols, const WorstCaseTolerances& wc,
                                             const MechanismSpec& m) {
  if (tols.size() != m.components.size()) throw InvalidArgument("tolerance set does not match the mechanism");
  if (!(wc.t1 > 0.0 && wc.t2 > 0.0)) throw InvalidArgument("worst-case tolerances must be > 0");
  HomothetyReport r{wc, {}};
  for (std::size_t i = 0; i < tols.size(); ++i) {
    const auto dom = component_domain(m.components[i], wc.t1, wc.t2);
    HomothetyEntry e;
    e.name = m.components[i].name;
    double log_sum = 0.0;
    for (std::size_t a = 0; a < 3; ++a) {
      const double hw = dom.half_width(static_cast<Axis>(a));
      if (!(hw > 0.0) || !std::isfinite(hw)) {
        throw NumericalError("degenerate worst-case domain for component " + e.name + " on axis " + kAxisNames[a]);
      }
      e.inertial_semi_axis[a] = 3.0 * tols.components[i][static_cast<Axis>(a)];
      e.wc_semi_axis[a] = hw;
      e.ratio[a] = e.inertial_semi_axis[a] / hw;
      log_sum += std::log(e.ratio[a]);
    }
    e.geometric_mean = std::exp(log_sum / 3.0);
    e.ellipsoid = ellipsoid_cloud(e.inertial_semi_axis);
    e.wc_ellipsoid = ellipsoid_cloud(e.wc_semi_axis);
    e.domain_vertices = dom.vertices();
    r.components.push_back(std::move(e));
  }
  return r;
}

}  // namespace itol
