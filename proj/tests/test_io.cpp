#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "itol/config.hpp"
#include "itol/io.hpp"
#include "itol/modal_plane.hpp"
#include "itol/report.hpp"

using namespace itol;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "itol_test_io";
  fs::create_directories(dir);
  return dir / name;
}

const char* kConfig = R"(
[mechanism]
fr_tolerance_mm = 0.2
lever_d_mm = 220
[levers]
rx_span_mm = 80
ry_span_mm = 320
[functional_requirement]
lx_mm = 320
ly_mm = 80
[component_2]
surface = B
lx_mm = 80
ly_mm = 80
orientation_zone = true
[component_1]
surface = C
lx_mm = 80
ly_mm = 80
orientation_zone = true
[component_3]
surface = A
lx_mm = 100
ly_mm = 80
feasibility_rx = 2
feasibility_ry = 2
)";

std::string expect_config_error(const std::string& text) {
  try {
    (void)config::parse(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<no error>";
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto p = s.find(from);
  if (p != std::string::npos) s.replace(p, from.size(), to);
  return s;
}

}  // namespace

TEST(Config, ParsesTheCaseStudy) {
  const auto m = config::parse(kConfig);
  const auto ref = case_study();
  EXPECT_EQ(m.fr_tolerance, ref.fr_tolerance);
  EXPECT_EQ(m.lever_d, ref.lever_d);
  EXPECT_EQ(m.arms(), ref.arms());
  ASSERT_EQ(m.components.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(m.components[i].name, ref.components[i].name);
    EXPECT_EQ(m.components[i].surface, ref.components[i].surface);
    EXPECT_EQ(m.components[i].geometry.lx, ref.components[i].geometry.lx);
    EXPECT_EQ(m.components[i].orientation_zone, ref.components[i].orientation_zone);
    EXPECT_EQ(m.components[i].feasibility, ref.components[i].feasibility);
  }
}

TEST(Config, BundledFileEqualsBuiltInCaseStudy) {
  const auto m = config::load(fs::path(ITOL_SOURCE_DIR) / "data" / "case-study.cfg");
  const auto ref = case_study();
  EXPECT_EQ(m.fr_surface.lx, ref.fr_surface.lx);
  EXPECT_EQ(m.fr_surface.ly, ref.fr_surface.ly);
  ASSERT_EQ(m.components.size(), ref.components.size());
  for (std::size_t i = 0; i < m.components.size(); ++i) {
    EXPECT_EQ(m.components[i].feasibility, ref.components[i].feasibility);
    EXPECT_EQ(m.components[i].geometry.lx, ref.components[i].geometry.lx);
  }
}

TEST(Config, ErrorsNameTheOffendingKey) {
  const std::string base = kConfig;
  EXPECT_EQ(expect_config_error(replace(base, "fr_tolerance_mm = 0.2", "fr_tolerance_mm = abc")),
            "mechanism.fr_tolerance_mm");
  EXPECT_EQ(expect_config_error(replace(base, "fr_tolerance_mm = 0.2", "fr_tolerance_mm = -1")),
            "mechanism.fr_tolerance_mm");
  EXPECT_EQ(expect_config_error(replace(base, "rx_span_mm = 80\n", "")), "levers.rx_span_mm");
  EXPECT_EQ(expect_config_error(replace(base, "feasibility_rx = 2", "feasibility_rx = 0")),
            "component_3.feasibility_rx");
  EXPECT_EQ(expect_config_error(replace(base, "feasibility_rx = 2", "feasability_rx = 2")),
            "component_3.feasability_rx");
  EXPECT_EQ(expect_config_error(replace(base, "orientation_zone = true", "orientation_zone = maybe")),
            "component_2.orientation_zone");
  EXPECT_EQ(expect_config_error(replace(base, "[levers]", "[lever]")), "lever");
  EXPECT_EQ(expect_config_error("[mechanism\nfr_tolerance_mm = 1\n"), "config:1");
}

TEST(Csv, NumberFormattingRoundTrips) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double v = u(rng) * std::pow(10.0, 20 * u(rng));
    EXPECT_EQ(io::parse_double(io::fmt(v), "x"), v);
  }
}

TEST(Csv, DeviationFieldMatchedByCoordinates) {
  const auto mesh = build_mesh(100, 80, 5, 3);
  Eigen::VectorXd v(15);
  for (int i = 0; i < 15; ++i) v[i] = 0.001 * i;
  // Reverse the row order and jitter the coordinates below the snap tolerance.
  std::string text = "x,y,dev\n";
  for (int k = 14; k >= 0; --k) {
    const auto& p = mesh.nodes[static_cast<std::size_t>(k)];
    text += io::fmt(p.x + 3e-10) + "," + io::fmt(p.y - 2e-10) + "," + io::fmt(v[k]) + "\n";
  }
  const auto path = scratch("field.csv");
  io::atomic_write(path, text);
  const auto f = io::read_deviation_csv(path, mesh);
  EXPECT_EQ(f.values, v);
  const auto inferred = io::infer_mesh(io::read_deviation_points(path));
  EXPECT_EQ(inferred.nx, 5u);
  EXPECT_EQ(inferred.ny, 3u);
  EXPECT_NEAR(inferred.lx, 100.0, 1e-9);
}

TEST(Csv, DeviationErrors) {
  const auto mesh = build_mesh(100, 80, 2, 2);
  const auto path = scratch("bad.csv");
  io::atomic_write(path, "x,y,z\n");
  EXPECT_THROW(io::read_deviation_csv(path, mesh), ConfigError);
  io::atomic_write(path, "x,y,dev\n-50,-40,0\n50,-40,0\n-50,40,0\n50,41,0\n");
  EXPECT_THROW(io::read_deviation_csv(path, mesh), ConfigError);
  io::atomic_write(path, "x,y,dev\n-50,-40,0\n50,-40,0\n-50,40,0\n-50,40,0\n");
  EXPECT_THROW(io::read_deviation_csv(path, mesh), ConfigError);
  io::atomic_write(path, "x,y,dev\n-50,-40,0\n50,-40,0\n-50,40,nan\n50,40,0\n");
  EXPECT_THROW(io::read_deviation_csv(path, mesh), ConfigError);
  EXPECT_THROW(io::read_deviation_csv(scratch("missing.csv"), mesh), IoError);
}

TEST(Files, AtomicWriteLeavesNoTemporary) {
  const auto path = scratch("sub/dir/out.json");
  io::atomic_write(path, "{}\n");
  EXPECT_EQ(io::read_file(path), "{}\n");
  EXPECT_FALSE(fs::exists(fs::path(path.string() + ".tmp")));
  io::atomic_write(path, "[1]\n");
  EXPECT_EQ(io::read_file(path), "[1]\n");
}

TEST(Report, JsonNumbersRoundTrip) {
  const auto m = case_study();
  const auto tols = allocate(m);
  const auto text = report::dump(report::allocation_json(m, tols));
  const auto j = report::json::parse(text);
  for (std::size_t i = 0; i < tols.size(); ++i) {
    const auto& c = j["components"][i];
    EXPECT_EQ(c["I_tz_mm"].get<double>(), tols.components[i].tz);
    EXPECT_EQ(c["I_rx_rad"].get<double>(), tols.components[i].rx);
    EXPECT_EQ(c["I_ry_rad"].get<double>(), tols.components[i].ry);
  }
  const double budget = j["budget_variance_mm2"].get<double>();
  for (const char* a : {"tz", "rx", "ry"}) {
    EXPECT_NEAR(j["chain_variance_mm2"][a].get<double>(), budget, 1e-12 * budget);
  }
}

TEST(Report, HistogramSidecars) {
  Histogram h;
  h.edges = {0, 1, 2};
  h.counts = {3, 4};
  EXPECT_EQ(report::histogram_csv(h), "lo_ppm,hi_ppm,count\n0,1,3\n1,2,4\n");
  const auto svg = report::histogram_svg(h, "t");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}
