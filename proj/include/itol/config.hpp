#pragma once

// Mechanism configuration files (INI). See docs/config.md for the schema.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "itol/errors.hpp"
#include "itol/io.hpp"
#include "itol/mechanism.hpp"

namespace itol::config {

namespace pt = boost::property_tree;

namespace detail {

inline void check_keys(const pt::ptree& sec, const std::string& name, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : sec) {
    if (!v.empty()) throw ConfigError(name + "." + k, "nested keys are not allowed");
    if (!allowed.count(k)) throw ConfigError(name + "." + k, "unknown key");
  }
}

inline const pt::ptree& section(const pt::ptree& root, const std::string& name) {
  const auto it = root.find(name);
  if (it == root.not_found()) throw ConfigError(name, "missing section");
  return it->second;
}

inline double number(const pt::ptree& sec, const std::string& sname, const std::string& key,
                     std::optional<double> fallback = std::nullopt) {
  const auto v = sec.get_optional<std::string>(key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError(sname + "." + key, "missing key");
  }
  return io::parse_double(io::trim(*v), sname + "." + key);
}

inline bool boolean(const pt::ptree& sec, const std::string& sname, const std::string& key, bool fallback) {
  const auto v = sec.get_optional<std::string>(key);
  if (!v) return fallback;
  const auto s = io::trim(*v);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(sname + "." + key, "expected true or false, got '" + s + "'");
}

inline SurfaceGeometry surface(const pt::ptree& sec, const std::string& sname) {
  const double lx = number(sec, sname, "lx_mm"), ly = number(sec, sname, "ly_mm");
  if (!(lx > 0.0)) throw ConfigError(sname + ".lx_mm", "must be > 0");
  if (!(ly > 0.0)) throw ConfigError(sname + ".ly_mm", "must be > 0");
  return SurfaceGeometry(lx, ly, {number(sec, sname, "center_x_mm", 0.0), number(sec, sname, "center_y_mm", 0.0)});
}

}  // namespace detail

inline MechanismSpec parse(const std::string& text, const std::string& source = "config") {
  pt::ptree root;
  try {
    std::istringstream in(text);
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.line()), e.message());
  }
  using detail::number;
  std::vector<std::pair<int, std::string>> comps;
  for (const auto& [name, sec] : root) {
    if (name == "mechanism" || name == "levers" || name == "functional_requirement") continue;
    if (name.rfind("component_", 0) == 0) {
      const auto idx = name.substr(10);
      if (idx.empty() || !std::all_of(idx.begin(), idx.end(), [](unsigned char ch) { return std::isdigit(ch) != 0; }) || idx.size() > 6) {
        throw ConfigError(name, "component sections are named component_<N>");
      }
      comps.emplace_back(std::stoi(idx), name);
      continue;
    }
    throw ConfigError(name, "unknown section");
  }

  MechanismSpec m;
  const auto& mech = detail::section(root, "mechanism");
  detail::check_keys(mech, "mechanism", {"fr_tolerance_mm", "lever_d_mm", "location_to_orientation_ratio"});
  m.fr_tolerance = number(mech, "mechanism", "fr_tolerance_mm");
  m.lever_d = number(mech, "mechanism", "lever_d_mm");
  m.zone_ratio = number(mech, "mechanism", "location_to_orientation_ratio", 2.0);

  const auto& lev = detail::section(root, "levers");
  detail::check_keys(lev, "levers", {"rx_span_mm", "ry_span_mm"});
  m.rx_lever_span = number(lev, "levers", "rx_span_mm");
  m.ry_lever_span = number(lev, "levers", "ry_span_mm");

  const auto& fr = detail::section(root, "functional_requirement");
  detail::check_keys(fr, "functional_requirement", {"lx_mm", "ly_mm", "center_x_mm", "center_y_mm"});
  m.fr_surface = detail::surface(fr, "functional_requirement");

  std::sort(comps.begin(), comps.end());
  for (std::size_t i = 1; i < comps.size(); ++i) {
    if (comps[i].first == comps[i - 1].first) throw ConfigError(comps[i].second, "duplicate component number");
  }
  for (const auto& [idx, name] : comps) {
    const auto& sec = root.get_child(pt::ptree::path_type(name, '\0'));
    detail::check_keys(sec, name,
                       {"surface", "lx_mm", "ly_mm", "center_x_mm", "center_y_mm", "orientation_zone", "feasibility_tz",
                        "feasibility_rx", "feasibility_ry"});
    ComponentSpec c;
    c.name = std::to_string(idx);
    c.surface = io::trim(sec.get<std::string>("surface", ""));
    c.geometry = detail::surface(sec, name);
    c.orientation_zone = detail::boolean(sec, name, "orientation_zone", false);
    for (std::size_t a = 0; a < 3; ++a) {
      const std::string key = std::string("feasibility_") + kAxisNames[a];
      c.feasibility[a] = number(sec, name, key, 1.0);
      if (!(c.feasibility[a] > 0.0)) throw ConfigError(name + "." + key, "must be > 0");
    }
    m.components.push_back(std::move(c));
  }
  if (m.components.empty()) throw ConfigError("component_1", "at least one component section is required");
  if (!(m.fr_tolerance > 0.0)) throw ConfigError("mechanism.fr_tolerance_mm", "must be > 0");
  m.validate();
  return m;
}

inline MechanismSpec load(const std::filesystem::path& path) {
  return parse(io::read_file(path), path.string());
}

}  // namespace itol::config
