// itol: inertial tolerancing command line.
//
// Exit codes: 0 success, 2 configuration/schema error, 3 numerical failure,
// 4 I/O error.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "itol/allocation3d.hpp"
#include "itol/batch3d.hpp"
#include "itol/config.hpp"
#include "itol/domain.hpp"
#include "itol/io.hpp"
#include "itol/modal_plane.hpp"
#include "itol/report.hpp"
#include "itol/simulate.hpp"

namespace fs = std::filesystem;
using itol::report::json;

namespace {

struct Outputs {
  std::map<std::string, std::string> files;  // relative name -> content

  void write(const fs::path& dir) const {
    for (const auto& [name, content] : files) itol::io::atomic_write(dir / name, content);
  }
};

std::size_t count_arg(double v, const std::string& name) {
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e15) {
    throw itol::ConfigError("--" + name, "must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

struct MeshArgs {
  double lx = 0.0, ly = 0.0;
  std::size_t nx = 0, ny = 0;
  std::size_t modes = 10;

  void add(CLI::App* c) {
    c->add_option("--lx", lx, "plane extent along x (mm); inferred from the CSV when omitted");
    c->add_option("--ly", ly, "plane extent along y (mm)");
    c->add_option("--nx", nx, "node count along x");
    c->add_option("--ny", ny, "node count along y");
    c->add_option("--modes", modes, "basis size m (>= 3)")->capture_default_str();
  }

  itol::PlaneMesh mesh(const std::vector<itol::io::DeviationPoint>& first) const {
    if (lx > 0.0 || ly > 0.0 || nx > 0 || ny > 0) {
      if (!(lx > 0.0 && ly > 0.0 && nx >= 2 && ny >= 2)) {
        throw itol::ConfigError("--lx/--ly/--nx/--ny", "give all four mesh options or none");
      }
      return itol::build_mesh(lx, ly, nx, ny);
    }
    return itol::io::infer_mesh(first);
  }
};

std::vector<itol::DeviationField> read_fields(const std::vector<std::string>& paths, const MeshArgs& ma,
                                              itol::PlaneMesh& mesh) {
  std::vector<std::vector<itol::io::DeviationPoint>> pts;
  for (const auto& p : paths) pts.push_back(itol::io::read_deviation_points(p));
  mesh = ma.mesh(pts.front());
  std::vector<itol::DeviationField> out;
  for (std::size_t i = 0; i < paths.size(); ++i) out.push_back(itol::io::match_to_mesh(pts[i], mesh, paths[i]));
  return out;
}

json basis_json(const itol::ModalBasis& b) {
  json modes = json::array();
  for (std::size_t j = 0; j < b.size(); ++j) {
    const auto& in = b.info()[j];
    modes.push_back({{"index", j + 1},
                     {"kind", itol::to_string(in.kind)},
                     {"order_x", in.order_x},
                     {"order_y", in.order_y},
                     {"wavenumber2_per_mm2", in.wavenumber2}});
  }
  const auto& m = b.mesh();
  return {{"mesh", {{"lx_mm", m.lx}, {"ly_mm", m.ly}, {"nx", m.nx}, {"ny", m.ny}}},
          {"gram_condition", b.gram_condition()},
          {"modes", modes}};
}

// ------------------------------------------------------------------ commands

Outputs cmd_allocate(const std::string& cfg) {
  const auto m = itol::config::load(cfg);
  const auto tols = itol::allocate(m);
  const auto j = itol::report::allocation_json(m, tols);
  const auto ratios = itol::combination_ratios(tols);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < tols.size(); ++i) {
    const auto& t = tols.components[i];
    rows.push_back({static_cast<double>(i + 1), t.tz, t.rx, t.ry, ratios[i].rx, ratios[i].ry});
  }
  for (std::size_t i = 0; i < tols.size(); ++i) {
    const auto& t = tols.components[i];
    std::cout << "component " << tols.names[i] << ": I_tz=" << itol::io::fmt(t.tz) << " mm I_rx=" << itol::io::fmt(t.rx)
              << " rad I_ry=" << itol::io::fmt(t.ry) << " rad ratios " << itol::io::fmt(ratios[i].rx) << " / "
              << itol::io::fmt(ratios[i].ry) << "\n";
  }
  return {{{"report.json", itol::report::dump(j)},
           {"tolerances.csv",
            itol::io::csv({"component", "I_tz_mm", "I_rx_rad", "I_ry_rad", "ratio_rx", "ratio_ry"}, rows)}}};
}

Outputs cmd_synthesize_wc(const std::string& cfg, double rel_tol) {
  const auto m = itol::config::load(cfg);
  const auto wc = itol::wc_synthesis(m, rel_tol);
  std::cout << "t1=" << itol::io::fmt(wc.t1) << " mm t2=" << itol::io::fmt(wc.t2) << " mm\n";
  return {{{"report.json", itol::report::dump(itol::report::wc_json(m, wc))}}};
}

Outputs cmd_characterize(const std::vector<std::string>& csvs, const MeshArgs& ma) {
  itol::PlaneMesh mesh;
  const auto fields = read_fields(csvs, ma, mesh);
  const auto basis = itol::build_basis(mesh, ma.modes);
  json items = json::array();
  std::vector<std::vector<double>> rows;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    const auto sig = itol::signature(basis, fields[f]);
    const auto r = itol::residues(basis, fields[f]);
    json rho = json::array();
    for (std::size_t m = 3; m <= basis.size(); ++m) {
      const auto v = itol::residue_ratio(basis, fields[f], m);
      rho.push_back(v ? json(*v) : json(nullptr));
      rows.push_back({static_cast<double>(f + 1), static_cast<double>(m), r[m - 1], v ? *v : std::nan("")});
    }
    const auto t = itol::rigid_to_sdt(sig.coeffs[0], sig.coeffs[1], sig.coeffs[2], mesh, {0.0, 0.0});
    items.push_back({{"file", csvs[f]},
                     {"coefficients_mm", std::vector<double>(sig.coeffs.data(), sig.coeffs.data() + sig.coeffs.size())},
                     {"residue_mm", sig.residue},
                     {"residues_mm", r},
                     {"rho", rho},
                     {"rho_undefined", !itol::residue_ratio(basis, fields[f], basis.size()).has_value()},
                     {"torsor_at_center", {{"tz_mm", t.tz}, {"rx_rad", t.rx}, {"ry_rad", t.ry}}}});
  }
  json j = {{"command", "characterize"}, {"basis", basis_json(basis)}, {"fields", items}};
  std::cout << "characterized " << fields.size() << " field(s) on " << basis.size() << " modes\n";
  return {{{"report.json", itol::report::dump(j)},
           {"residues.csv", itol::io::csv({"field", "m_used", "residue_mm", "rho"}, rows)}}};
}

Outputs cmd_batch_stats(const std::vector<std::string>& csvs, const std::string& torsor_csv, const MeshArgs& ma) {
  json j = {{"command", "batch-stats"}};
  Outputs out;
  if (!csvs.empty()) {
    if (csvs.size() < 2) throw itol::ConfigError("csv", "batch statistics need at least 2 deviation files");
    itol::PlaneMesh mesh;
    const auto fields = read_fields(csvs, ma, mesh);
    const auto basis = itol::build_basis(mesh, ma.modes);
    std::vector<itol::ModalSignature> sigs;
    std::vector<itol::Torsor> ts;
    for (const auto& f : fields) {
      sigs.push_back(itol::signature(basis, f));
      const auto& c = sigs.back().coeffs;
      ts.push_back(itol::rigid_to_sdt(c[0], c[1], c[2], mesh, {0.0, 0.0}));
    }
    const auto sb = itol::empirical_batch(std::span<const itol::ModalSignature>(sigs));
    const auto mean = itol::mean_shape(basis, sb);
    const auto var = itol::cov_shape(basis, sb);
    const auto tb = itol::empirical_batch(std::span<const itol::Torsor>(ts));
    const auto corners = itol::corner_inertias(tb, mesh.geometry());
    j["basis"] = basis_json(basis);
    j["samples"] = fields.size();
    j["surface_inertia_mm"] = itol::surface_inertia(mean.values, var);
    j["rigid_torsor_batch"] = {{"mean", itol::report::vec3(tb.mean)},
                               {"cov", {itol::report::vec3(tb.cov.row(0)), itol::report::vec3(tb.cov.row(1)),
                                        itol::report::vec3(tb.cov.row(2))}}};
    j["corner_inertias_mm"] = corners;
    j["adjusted_inertia_mm"] = itol::adjusted_inertia(tb, mesh.geometry());
    out.files["mean_shape.csv"] = itol::io::deviation_csv(mesh, mean.values);
    out.files["sigma_shape.csv"] = itol::io::deviation_csv(mesh, var.cwiseSqrt());
  }
  if (!torsor_csv.empty()) {
    if (!(ma.lx > 0.0 && ma.ly > 0.0)) throw itol::ConfigError("--lx/--ly", "required with --torsors");
    const itol::SurfaceGeometry g(ma.lx, ma.ly);
    const auto ts = itol::io::read_torsor_csv(torsor_csv, g.center);
    const auto tb = itol::empirical_batch(std::span<const itol::Torsor>(ts));
    j["torsor_batch"] = {{"file", torsor_csv},
                         {"samples", ts.size()},
                         {"mean", itol::report::vec3(tb.mean)},
                         {"corner_inertias_mm", itol::corner_inertias(tb, g)},
                         {"corner_surface_inertia_mm", itol::corner_surface_inertia(tb, g)},
                         {"adjusted_inertia_mm", itol::adjusted_inertia(tb, g)}};
  }
  if (csvs.empty() && torsor_csv.empty()) throw itol::ConfigError("csv", "give deviation files or --torsors");
  out.files["report.json"] = itol::report::dump(j);
  std::cout << "batch statistics written\n";
  return out;
}

struct SimArgs {
  std::string scenario = "centred-matched";
  std::string mode = "axis-wise";
  std::vector<double> cpi;
  double draws = 1e6;
  double repeats = 2000;
  std::uint64_t seed = 0;
  double cap = 1.0 / 3.0;
  std::size_t workers = 0;
  bool svg = false;
};

void add_sim_args(CLI::App* c, SimArgs& a, bool table) {
  c->add_option("--cpi", a.cpi, table ? "comma-separated cpi list" : "component capability index")->delimiter(',');
  c->add_option("--draws", a.draws, "assemblies per repeat")->capture_default_str();
  c->add_option("--repeats", a.repeats, "independent repeats")->capture_default_str();
  c->add_option("--seed", a.seed, "64-bit seed")->capture_default_str();
  c->add_option("--mode", a.mode, "cpi interpretation: axis-wise | corner-chain")->capture_default_str();
  c->add_option("--workers", a.workers, "worker threads (0 = hardware concurrency)");
  c->add_flag("--svg", a.svg, "also render histogram SVGs");
  if (!table) {
    c->add_option("--scenario", a.scenario, "centred-matched | centred-random-sd | off-centred-random")
        ->capture_default_str();
    c->add_option("--cap", a.cap, "off-centring cap, fraction of the batch inertia")->capture_default_str();
  }
}

Outputs cmd_simulate(const std::string& cfg, const SimArgs& a) {
  const auto m = itol::config::load(cfg);
  const auto tols = itol::allocate(m);
  itol::Scenario sc;
  try {
    sc.kind = itol::parse_scenario(a.scenario);
    sc.mode = itol::parse_cpi_mode(a.mode);
  } catch (const itol::InvalidArgument& e) {
    throw itol::ConfigError("--scenario/--mode", e.what());
  }
  if (a.cpi.size() > 1) throw itol::ConfigError("--cpi", "simulate takes a single value; use table1 for a list");
  sc.cpi = a.cpi.empty() ? 1.0 : a.cpi.front();
  sc.assemblies = count_arg(a.draws, "draws");
  sc.repeats = count_arg(a.repeats, "repeats");
  sc.seed = a.seed;
  sc.offcentring_cap = a.cap;
  const auto r = itol::estimate_ncr(sc, m, tols, a.workers);
  json j = {{"command", "simulate"}, {"report", itol::report::sim_json(r)}};
  std::cout << "mean NCR " << itol::io::fmt(r.mean_ncr) << " ppm, worst " << itol::io::fmt(r.worst_ncr) << " ppm\n";
  Outputs out{{{"report.json", itol::report::dump(j)}, {"histogram.csv", itol::report::histogram_csv(r.histogram)}}};
  if (a.svg) out.files["histogram.svg"] = itol::report::histogram_svg(r.histogram, std::string("NCR per repeat, ") +
                                                                                        itol::to_string(sc.kind));
  return out;
}

Outputs cmd_table1(const std::string& cfg, const SimArgs& a) {
  const auto m = itol::config::load(cfg);
  const auto tols = itol::allocate(m);
  itol::Table1Options opt;
  if (!a.cpi.empty()) opt.cpi = a.cpi;
  for (double c : opt.cpi)
    if (!(c > 0.0)) throw itol::ConfigError("--cpi", "values must be > 0");
  opt.assemblies = count_arg(a.draws, "draws");
  opt.repeats = count_arg(a.repeats, "repeats");
  opt.seed = a.seed;
  try {
    opt.mode = itol::parse_cpi_mode(a.mode);
  } catch (const itol::InvalidArgument& e) {
    throw itol::ConfigError("--mode", e.what());
  }
  opt.workers = a.workers;
  const auto rows = itol::run_table1(m, tols, opt);
  Outputs out{{{"report.json", itol::report::dump(itol::report::table1_json(rows, opt.cpi))}}};
  std::vector<std::vector<double>> summary;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::cout << rows[i].label << ":";
    for (std::size_t k = 0; k < rows[i].runs.size(); ++k) {
      const auto& r = rows[i].runs[k];
      std::cout << " " << itol::io::fmt(r.mean_ncr) << "/" << itol::io::fmt(r.worst_ncr);
      summary.push_back({static_cast<double>(i), opt.cpi[k], r.mean_ncr, r.ncr_std, r.worst_ncr});
      const std::string stem = "histogram_row" + std::to_string(i) + "_cpi" + std::to_string(k);
      out.files[stem + ".csv"] = itol::report::histogram_csv(r.histogram);
      if (a.svg) out.files[stem + ".svg"] = itol::report::histogram_svg(r.histogram, rows[i].label);
    }
    std::cout << "  (mean/worst ppm)\n";
  }
  out.files["table1.csv"] = itol::io::csv({"row", "cpi", "mean_ncr_ppm", "ncr_std_ppm", "worst_ncr_ppm"}, summary);
  return out;
}

Outputs cmd_compare_wc(const std::string& cfg) {
  const auto m = itol::config::load(cfg);
  const auto tols = itol::allocate(m);
  const auto wc = itol::wc_synthesis(m);
  const auto r = itol::compare_to_worst_case(tols, wc, m);
  Outputs out{{{"report.json", itol::report::dump(itol::report::homothety_json(r))}}};
  for (const auto& e : r.components) {
    out.files["ellipsoid_" + e.name + ".csv"] = itol::report::points_csv(e.ellipsoid);
    out.files["wc_ellipsoid_" + e.name + ".csv"] = itol::report::points_csv(e.wc_ellipsoid);
    out.files["domain_" + e.name + ".csv"] = itol::report::points_csv(e.domain_vertices);
    std::cout << "component " << e.name << ": ratios " << itol::io::fmt(e.ratio[0]) << " " << itol::io::fmt(e.ratio[1])
              << " " << itol::io::fmt(e.ratio[2]) << " geometric mean " << itol::io::fmt(e.geometric_mean) << "\n";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inertial tolerancing: allocation, worst-case synthesis, modal characterisation, Monte Carlo NCR"};
  app.require_subcommand(1);
  std::string out_dir = "out";
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  std::string cfg;
  std::vector<std::string> csvs;
  std::string torsors;
  double rel_tol = 1e-6;
  MeshArgs mesh_args;
  SimArgs sim_args;

  auto* alloc = app.add_subcommand("allocate", "inertial tolerances per component and axis");
  alloc->add_option("config", cfg, "mechanism config")->required();
  auto* wc = app.add_subcommand("synthesize-wc", "worst-case location/orientation zone widths");
  wc->add_option("config", cfg, "mechanism config")->required();
  wc->add_option("--rel-tol", rel_tol, "bisection relative tolerance")->capture_default_str();
  auto* ch = app.add_subcommand("characterize", "modal signatures of deviation CSVs");
  ch->add_option("csv", csvs, "deviation files (x,y,dev)")->required();
  mesh_args.add(ch);
  auto* bs = app.add_subcommand("batch-stats", "mean/sigma shapes and batch inertias");
  bs->add_option("csv", csvs, "deviation files (x,y,dev)");
  bs->add_option("--torsors", torsors, "torsor samples (tz,rx,ry) at the plane centre");
  mesh_args.add(bs);
  auto* sim = app.add_subcommand("simulate", "Monte Carlo NCR of one scenario");
  sim->add_option("config", cfg, "mechanism config")->required();
  add_sim_args(sim, sim_args, false);
  auto* t1 = app.add_subcommand("table1", "NCR table over scenarios and cpi values");
  t1->add_option("config", cfg, "mechanism config")->required();
  add_sim_args(t1, sim_args, true);
  auto* cmp = app.add_subcommand("compare-wc", "homothety between inertial and worst-case allocations");
  cmp->add_option("config", cfg, "mechanism config")->required();
  for (auto* sub : {alloc, wc, ch, bs, sim, t1, cmp}) {
    sub->add_option("--out", out_dir, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    Outputs out;
    if (*alloc) out = cmd_allocate(cfg);
    else if (*wc) out = cmd_synthesize_wc(cfg, rel_tol);
    else if (*ch) out = cmd_characterize(csvs, mesh_args);
    else if (*bs) out = cmd_batch_stats(csvs, torsors, mesh_args);
    else if (*sim) out = cmd_simulate(cfg, sim_args);
    else if (*t1) out = cmd_table1(cfg, sim_args);
    else if (*cmp) out = cmd_compare_wc(cfg);
    out.write(out_dir);
    return 0;
  } catch (const itol::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const itol::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const itol::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const itol::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  }
}
