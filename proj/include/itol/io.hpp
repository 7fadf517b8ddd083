#pragma once

// File plumbing: atomic writes, round-trip number formatting, deviation and
// torsor CSV readers.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Core>

#include "itol/errors.hpp"
#include "itol/modal_plane.hpp"
#include "itol/sdt.hpp"

namespace itol::io {

namespace fs = std::filesystem;

/// Shortest decimal text that parses back to the same double.
inline std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Writes `content` to a sibling temp file then renames it over `path`, so
/// readers never see a partial file.
inline void atomic_write(const fs::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename onto " + path.string());
  }
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto p = line.find(',', start);
    out.push_back(trim(line.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start)));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end || !std::isfinite(v)) {
    throw ConfigError(where, "not a finite number: '" + s + "'");
  }
  return v;
}

/// Rows of a CSV with the exact header `header`; blank lines are skipped.
inline std::vector<std::vector<double>> read_numeric_csv(const fs::path& path, const std::vector<std::string>& header) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool seen_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (!seen_header) {
      if (cells != header) {
        std::string want;
        for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
        throw ConfigError(where, "expected header '" + want + "'");
      }
      seen_header = true;
      continue;
    }
    if (cells.size() != header.size()) {
      throw ConfigError(where, "expected " + std::to_string(header.size()) + " columns");
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c, where));
    rows.push_back(std::move(row));
  }
  if (!seen_header) throw ConfigError(path.string(), "empty file");
  return rows;
}

struct DeviationPoint {
  Point2 p;
  double dev = 0.0;
};

inline std::vector<DeviationPoint> read_deviation_points(const fs::path& path) {
  std::vector<DeviationPoint> pts;
  for (const auto& r : read_numeric_csv(path, {"x", "y", "dev"})) pts.push_back({{r[0], r[1]}, r[2]});
  if (pts.empty()) throw ConfigError(path.string(), "no data rows");
  return pts;
}

inline constexpr double kSnap = 1e-9;  // mm

/// Centred mesh spanned by the distinct coordinates of a point set.
inline PlaneMesh infer_mesh(const std::vector<DeviationPoint>& pts) {
  auto distinct = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v)
      if (out.empty() || x - out.back() > kSnap) out.push_back(x);
    return out;
  };
  std::vector<double> xs, ys;
  for (const auto& d : pts) {
    xs.push_back(d.p.x);
    ys.push_back(d.p.y);
  }
  const auto ux = distinct(xs), uy = distinct(ys);
  if (ux.size() < 2 || uy.size() < 2) throw ConfigError("x,y", "deviation grid needs at least 2 distinct x and y values");
  if (std::abs(ux.front() + ux.back()) > kSnap || std::abs(uy.front() + uy.back()) > kSnap) {
    throw ConfigError("x,y", "deviation grid must be centred on the plane origin");
  }
  return build_mesh(ux.back() - ux.front(), uy.back() - uy.front(), ux.size(), uy.size());
}

/// Field on `mesh` from CSV points, matched to nodes within the snap
/// tolerance. Every node must appear exactly once.
inline DeviationField match_to_mesh(const std::vector<DeviationPoint>& pts, const PlaneMesh& mesh,
                                    const std::string& source) {
  if (pts.size() != mesh.size()) {
    throw ConfigError(source, std::to_string(pts.size()) + " rows for " + std::to_string(mesh.size()) + " mesh nodes");
  }
  const double dx = mesh.dx(), dy = mesh.dy();
  Eigen::VectorXd v(static_cast<Eigen::Index>(mesh.size()));
  std::vector<bool> seen(mesh.size(), false);
  for (const auto& d : pts) {
    const double fi = (d.p.x + mesh.lx / 2) / dx, fj = (d.p.y + mesh.ly / 2) / dy;
    const auto i = static_cast<long long>(std::llround(fi)), j = static_cast<long long>(std::llround(fj));
    const bool in_grid = i >= 0 && j >= 0 && i < static_cast<long long>(mesh.nx) && j < static_cast<long long>(mesh.ny);
    const std::size_t k = in_grid ? static_cast<std::size_t>(j) * mesh.nx + static_cast<std::size_t>(i) : 0;
    if (!in_grid || std::abs(mesh.nodes[k].x - d.p.x) > kSnap || std::abs(mesh.nodes[k].y - d.p.y) > kSnap) {
      throw ConfigError(source, "point (" + fmt(d.p.x) + ", " + fmt(d.p.y) + ") is not a mesh node");
    }
    if (seen[k]) throw ConfigError(source, "duplicate node (" + fmt(d.p.x) + ", " + fmt(d.p.y) + ")");
    seen[k] = true;
    v[static_cast<Eigen::Index>(k)] = d.dev;
  }
  return DeviationField(std::move(v));
}

inline DeviationField read_deviation_csv(const fs::path& path, const PlaneMesh& mesh) {
  return match_to_mesh(read_deviation_points(path), mesh, path.string());
}

/// Torsor samples with header `tz,rx,ry`, all expressed at `at`.
inline std::vector<Torsor> read_torsor_csv(const fs::path& path, Point2 at) {
  std::vector<Torsor> out;
  for (const auto& r : read_numeric_csv(path, {"tz", "rx", "ry"})) out.push_back({r[0], r[1], r[2], at});
  return out;
}

/// CSV text with a header row and numeric rows.
inline std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string s;
  for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
  s += '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + fmt(r[i]);
    s += '\n';
  }
  return s;
}

inline std::string deviation_csv(const PlaneMesh& mesh, const Eigen::VectorXd& values) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < mesh.size(); ++k) {
    rows.push_back({mesh.nodes[k].x, mesh.nodes[k].y, values[static_cast<Eigen::Index>(k)]});
  }
  return csv({"x", "y", "dev"}, rows);
}

}  // namespace itol::io
