#pragma once

// JSON report trees and plot sidecars (CSV, SVG).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "itol/allocation3d.hpp"
#include "itol/domain.hpp"
#include "itol/io.hpp"
#include "itol/mechanism.hpp"
#include "itol/simulate.hpp"

namespace itol::report {

using json = nlohmann::ordered_json;

inline json vec3(const Eigen::Vector3d& v) { return json::array({v[0], v[1], v[2]}); }

inline json surface_json(const SurfaceGeometry& g) {
  return {{"lx_mm", g.lx}, {"ly_mm", g.ly}, {"center_x_mm", g.center.x}, {"center_y_mm", g.center.y}};
}

inline json mechanism_json(const MechanismSpec& m) {
  json comps = json::array();
  for (const auto& c : m.components) {
    comps.push_back({{"name", c.name},
                     {"surface", c.surface},
                     {"geometry", surface_json(c.geometry)},
                     {"orientation_zone", c.orientation_zone},
                     {"feasibility", {{"tz", c.feasibility[0]}, {"rx", c.feasibility[1]}, {"ry", c.feasibility[2]}}}});
  }
  const auto arms = m.arms();
  return {{"fr_tolerance_mm", m.fr_tolerance},
          {"lever_d_mm", m.lever_d},
          {"levers", {{"rx_span_mm", m.rx_lever_span}, {"ry_span_mm", m.ry_lever_span}}},
          {"arms", {{"tz", arms[0]}, {"rx_mm", arms[1]}, {"ry_mm", arms[2]}}},
          {"functional_requirement", surface_json(m.fr_surface)},
          {"location_to_orientation_ratio", m.zone_ratio},
          {"components", comps}};
}

inline json allocation_json(const MechanismSpec& m, const ToleranceSet3D& tols) {
  const auto ratios = combination_ratios(tols);
  json comps = json::array();
  for (std::size_t i = 0; i < tols.size(); ++i) {
    const auto& t = tols.components[i];
    comps.push_back({{"name", tols.names[i]},
                     {"I_tz_mm", t.tz},
                     {"I_rx_rad", t.rx},
                     {"I_ry_rad", t.ry},
                     {"ratio_rx_mm_per_rad", ratios[i].rx},
                     {"ratio_ry_mm_per_rad", ratios[i].ry}});
  }
  // Stacked variance of every chain, (t / 6)^2 by construction.
  const auto arms = m.arms();
  json stacked = json::object();
  for (std::size_t a = 0; a < 3; ++a) {
    double s = 0.0;
    for (const auto& t : tols.components) s += std::pow(arms[a] * t[static_cast<Axis>(a)], 2);
    stacked[kAxisNames[a]] = s;
  }
  return {{"command", "allocate"},
          {"mechanism", mechanism_json(m)},
          {"components", comps},
          {"chain_variance_mm2", stacked},
          {"budget_variance_mm2", std::pow(m.fr_tolerance / 6.0, 2)}};
}

inline json wc_json(const MechanismSpec& m, const WorstCaseTolerances& wc) {
  const auto fr = fr_domain(m);
  const auto terms = stack_domains(m, wc.t1, wc.t2);
  return {{"command", "synthesize-wc"},
          {"mechanism", mechanism_json(m)},
          {"t1_mm", wc.t1},
          {"t2_mm", wc.t2},
          {"bisection_iterations", wc.iterations},
          {"inclusion_margin", inclusion_margin(terms, fr)}};
}

inline json histogram_json(const Histogram& h) { return {{"edges_ppm", h.edges}, {"counts", h.counts}}; }

inline json scenario_json(const Scenario& s) {
  return {{"kind", to_string(s.kind)},
          {"cpi", s.cpi},
          {"assemblies", s.assemblies},
          {"repeats", s.repeats},
          {"seed", s.seed},
          {"offcentring_cap", s.offcentring_cap},
          {"cpi_mode", to_string(s.mode)}};
}

inline json sim_json(const SimReport& r, bool with_repeats = true) {
  json j = {{"scenario", scenario_json(r.scenario)},
            {"mean_ncr_ppm", r.mean_ncr},
            {"ncr_std_ppm", r.ncr_std},
            {"predicted_ncr_std_ppm", r.predicted_std},
            {"worst_ncr_ppm", r.worst_ncr},
            {"factorization", r.factorization},
            {"histogram", histogram_json(r.histogram)}};
  if (with_repeats) j["ncr_per_repeat_ppm"] = r.ncr;
  return j;
}

inline json table1_json(const std::vector<Table1Row>& rows, const std::vector<double>& cpi) {
  json out = json::array();
  for (const auto& row : rows) {
    json runs = json::array();
    for (const auto& r : row.runs) runs.push_back(sim_json(r));
    out.push_back({{"label", row.label}, {"runs", runs}});
  }
  return {{"command", "table1"}, {"cpi", cpi}, {"rows", out}};
}

inline json homothety_json(const HomothetyReport& r) {
  json comps = json::array();
  for (const auto& e : r.components) {
    comps.push_back({{"name", e.name},
                     {"inertial_semi_axis", e.inertial_semi_axis},
                     {"wc_semi_axis", e.wc_semi_axis},
                     {"ratio", e.ratio},
                     {"geometric_mean", e.geometric_mean}});
  }
  return {{"command", "compare-wc"},
          {"definition",
           "per-axis ratio of the centred inertial 3-sigma semi-axis (3 I) to the worst-case 3-sigma semi-axis "
           "(domain half-width); axes ordered tz, rx, ry"},
          {"t1_mm", r.wc.t1},
          {"t2_mm", r.wc.t2},
          {"reference_homothety", {{"set_a", kReferenceHomothety[0]}, {"set_b", kReferenceHomothety[1]}}},
          {"components", comps}};
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string points_csv(const std::vector<Eigen::Vector3d>& pts) {
  std::vector<std::vector<double>> rows;
  for (const auto& p : pts) rows.push_back({p[0], p[1], p[2]});
  return io::csv({"tz", "rx", "ry"}, rows);
}

inline std::string histogram_csv(const Histogram& h) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    rows.push_back({h.edges[i], h.edges[i + 1], static_cast<double>(h.counts[i])});
  }
  return io::csv({"lo_ppm", "hi_ppm", "count"}, rows);
}

/// Static bar chart of a histogram.
inline std::string histogram_svg(const Histogram& h, const std::string& title) {
  const double w = 640, ht = 360, ml = 50, mb = 40, mt = 30, mr = 20;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << ht << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
    << title << "</text>\n";
  if (!h.counts.empty()) {
    const auto cmax = static_cast<double>(std::max<std::size_t>(1, *std::max_element(h.counts.begin(), h.counts.end())));
    const double pw = w - ml - mr, ph = ht - mt - mb;
    const double bw = pw / static_cast<double>(h.counts.size());
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      const double bh = ph * static_cast<double>(h.counts[i]) / cmax;
      s << "<rect x=\"" << io::fmt(ml + bw * static_cast<double>(i)) << "\" y=\"" << io::fmt(mt + ph - bh)
        << "\" width=\"" << io::fmt(bw * 0.95) << "\" height=\"" << io::fmt(bh) << "\" fill=\"steelblue\"/>\n";
    }
    s << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << w - mr << "\" y2=\"" << mt + ph
      << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << ml << "\" y=\"" << ht - 15 << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << io::fmt(h.edges.front()) << " ppm</text>\n";
    s << "<text x=\"" << w - mr << "\" y=\"" << ht - 15
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << io::fmt(h.edges.back())
      << " ppm</text>\n";
    s << "<text x=\"5\" y=\"" << mt + 10 << "\" font-family=\"sans-serif\" font-size=\"11\">" << cmax << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace itol::report
