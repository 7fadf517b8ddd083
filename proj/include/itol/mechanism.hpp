#pragma once

// Description of a planar stack-up mechanism: the functional requirement
// (FR), the component contact surfaces and their tolerance callouts, and the
// per-axis lever spans used by the inertial dimension chains.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "itol/errors.hpp"
#include "itol/sdt.hpp"

namespace itol {

enum class Axis : std::size_t { tz = 0, rx = 1, ry = 2 };

inline constexpr std::array<const char*, 3> kAxisNames = {"tz", "rx", "ry"};

struct ComponentSpec {
  std::string name;
  std::string surface;            // label of the toleranced surface
  SurfaceGeometry geometry;       // extents and centre in the mechanism frame
  bool orientation_zone = false;  // location zone always applies
  std::array<double, 3> feasibility{1.0, 1.0, 1.0};  // per axis (tz, rx, ry)
};

struct MechanismSpec {
  double fr_tolerance = 0.0;  // t, width of the FR location zone (mm)
  double lever_d = 0.0;       // offset of the FR from the stack axis (mm)
  double rx_lever_span = 0.0; // span whose half is the rx lever arm (mm)
  double ry_lever_span = 0.0; // span whose half is the ry lever arm (mm)
  SurfaceGeometry fr_surface; // rectangle on which the FR zone is checked
  double zone_ratio = 2.0;    // location width / orientation width (t1 / t2)
  std::vector<ComponentSpec> components;

  /// Influence of each axis on the FR deviation: 1 for tz, the lever arms
  /// (half spans) for the rotations.
  std::array<double, 3> arms() const { return {1.0, rx_lever_span / 2.0, ry_lever_span / 2.0}; }

  void validate() const {
    auto positive = [](double v, const char* key) {
      if (!(v > 0.0)) throw ConfigError(key, "must be > 0");
    };
    positive(fr_tolerance, "mechanism.fr_tolerance_mm");
    if (!(lever_d >= 0.0)) throw ConfigError("mechanism.lever_d_mm", "must be >= 0");
    positive(rx_lever_span, "levers.rx_span_mm");
    positive(ry_lever_span, "levers.ry_span_mm");
    positive(fr_surface.lx, "functional_requirement.lx_mm");
    positive(fr_surface.ly, "functional_requirement.ly_mm");
    positive(zone_ratio, "mechanism.location_to_orientation_ratio");
    if (components.empty()) throw ConfigError("component_1", "at least one component is required");
    for (const auto& c : components) {
      positive(c.geometry.lx, ("component_" + c.name + ".lx_mm").c_str());
      positive(c.geometry.ly, ("component_" + c.name + ".ly_mm").c_str());
      for (std::size_t a = 0; a < 3; ++a) {
        if (!(c.feasibility[a] > 0.0)) {
          throw ConfigError("component_" + c.name + ".feasibility_" + kAxisNames[a], "must be > 0");
        }
      }
    }
  }
};

/// The three-part lever-arm stack of the bundled case study, identical to
/// data/case-study.cfg. Components 1 and 2 carry location and orientation
/// zones on 80 x 80 planes, component 3 only a location zone on the
/// 100 x 80 plane A. The FR zone (t = 0.2 mm) is checked on a 320 x 80
/// rectangle centred on the stack axis: 320 = d + L_Ax with d = 220 mm.
inline MechanismSpec case_study() {
  MechanismSpec m;
  m.fr_tolerance = 0.2;
  m.lever_d = 220.0;
  m.rx_lever_span = 80.0;
  m.ry_lever_span = 320.0;
  m.fr_surface = SurfaceGeometry(320.0, 80.0);
  m.zone_ratio = 2.0;
  m.components = {
      {"1", "C", SurfaceGeometry(80.0, 80.0), true, {1.0, 1.0, 1.0}},
      {"2", "B", SurfaceGeometry(80.0, 80.0), true, {1.0, 1.0, 1.0}},
      {"3", "A", SurfaceGeometry(100.0, 80.0), false, {1.0, 2.0, 2.0}},
  };
  return m;
}

}  // namespace itol
