#pragma once

// Monte Carlo verification of an inertial allocation.
//
// Each repeat draws one random configuration of the component batches
// (mean and covariance of every component torsor, per scenario), propagates
// it through the linear assembly to the FR frame, then draws `assemblies`
// resultant torsors from the resulting multinormal and counts those outside
// the FR domain.
//
// Work is split into (repeat, chunk) tasks. Every task owns an RNG stream
// seeded from (seed, repeat, chunk), and per-task counts are integers, so
// results do not depend on the number of workers.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "itol/allocation3d.hpp"
#include "itol/batch3d.hpp"
#include "itol/domain.hpp"
#include "itol/errors.hpp"
#include "itol/inertia1d.hpp"
#include "itol/mechanism.hpp"
#include "itol/sdt.hpp"

namespace itol {

enum class ScenarioKind { centred_matched, centred_random_sd, off_centred_random };
enum class CpiMode { axis_wise, corner_chain };

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::centred_matched: return "centred-matched";
    case ScenarioKind::centred_random_sd: return "centred-random-sd";
    case ScenarioKind::off_centred_random: return "off-centred-random";
  }
  return "?";
}

inline const char* to_string(CpiMode m) { return m == CpiMode::axis_wise ? "axis-wise" : "corner-chain"; }

inline ScenarioKind parse_scenario(const std::string& s) {
  if (s == "centred-matched") return ScenarioKind::centred_matched;
  if (s == "centred-random-sd") return ScenarioKind::centred_random_sd;
  if (s == "off-centred-random") return ScenarioKind::off_centred_random;
  throw InvalidArgument("unknown scenario '" + s + "'");
}

inline CpiMode parse_cpi_mode(const std::string& s) {
  if (s == "axis-wise") return CpiMode::axis_wise;
  if (s == "corner-chain") return CpiMode::corner_chain;
  throw InvalidArgument("unknown cpi mode '" + s + "'");
}

struct Scenario {
  ScenarioKind kind = ScenarioKind::centred_matched;
  double cpi = 1.0;
  std::size_t assemblies = 1'000'000;
  std::size_t repeats = 2000;
  std::uint64_t seed = 0;
  double offcentring_cap = 1.0 / 3.0;  // fraction of the batch inertia I / cpi
  CpiMode mode = CpiMode::axis_wise;

  void validate() const {
    if (!(cpi > 0.0) || !std::isfinite(cpi)) throw InvalidArgument("cpi must be > 0");
    if (!(offcentring_cap > 0.0 && offcentring_cap <= 1.0)) throw InvalidArgument("off-centring cap must lie in (0, 1]");
    if (assemblies < 1) throw InvalidArgument("assemblies must be >= 1");
    if (repeats < 1) throw InvalidArgument("repeats must be >= 1");
  }
};

// ---------------------------------------------------------------- RNG streams

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Stream seed for (seed, repeat, chunk).
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t repeat, std::uint64_t chunk) {
  return splitmix64(splitmix64(splitmix64(seed) ^ repeat) ^ chunk);
}

inline constexpr std::uint64_t kConfigChunk = ~std::uint64_t{0};  // stream of the batch parameters

using Rng = std::mt19937_64;

// ------------------------------------------------------- component parameters

/// Random correlation matrix: Dirichlet(1, 1, 1) eigenvalue split of a
/// trace-3 matrix under a Haar-random rotation, rescaled to unit diagonal.
inline Eigen::Matrix3d random_correlation(Rng& rng) {
  std::exponential_distribution<double> ex(1.0);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::Vector3d w(ex(rng), ex(rng), ex(rng));
  w *= 3.0 / w.sum();
  Eigen::Matrix3d g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = nd(rng);
  const Eigen::HouseholderQR<Eigen::Matrix3d> qr(g);
  Eigen::Matrix3d q = qr.householderQ();
  for (int i = 0; i < 3; ++i)
    if (qr.matrixQR()(i, i) < 0.0) q.col(i) *= -1.0;
  const Eigen::Matrix3d s = q * w.asDiagonal() * q.transpose();
  const Eigen::Vector3d d = s.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::Matrix3d c = d.asDiagonal() * s * d.asDiagonal();
  c.diagonal().setOnes();
  return c;
}

/// Batch parameters (mu, Sigma) of one component, at its surface centre.
/// `target` holds the per-axis batch inertias the scenario must meet.
inline TorsorBatch sample_component(const AxisTolerances& target, const Scenario& sc, Point2 at, Rng& rng) {
  sc.validate();
  TorsorBatch b;
  b.at = at;
  const Eigen::Vector3d inert = target.vec();
  switch (sc.kind) {
    case ScenarioKind::centred_matched:
      b.cov = inert.cwiseAbs2().asDiagonal();
      break;
    case ScenarioKind::centred_random_sd:
      b.cov = inert.asDiagonal() * random_correlation(rng) * inert.asDiagonal();
      break;
    case ScenarioKind::off_centred_random: {
      std::uniform_real_distribution<double> u(0.0, sc.offcentring_cap);
      Eigen::Vector3d sd;
      for (int a = 0; a < 3; ++a) {
        b.mean[a] = u(rng) * inert[a];
        const double var = inert[a] * inert[a] - b.mean[a] * b.mean[a];
        if (var < 0.0) throw NumericalError("off-centring leaves a negative variance");
        sd[a] = std::sqrt(var);
      }
      b.cov = sd.cwiseAbs2().asDiagonal();
      break;
    }
  }
  return b;
}

/// Per-axis batch inertia targets I_axis / cpi.
inline AxisTolerances axis_targets(const AxisTolerances& tol, double cpi) {
  return {tol.tz / cpi, tol.rx / cpi, tol.ry / cpi};
}

/// Parameters of every component for one repeat. In corner-chain mode each
/// component is rescaled so its largest FR-corner inertia equals I_cc / cpi
/// with I_cc^2 = sum_axis (arm * I_axis)^2 / 3.
inline std::vector<TorsorBatch> sample_configuration(const MechanismSpec& m, const ToleranceSet3D& tols,
                                                     const Scenario& sc, Rng& rng) {
  if (tols.size() != m.components.size()) throw InvalidArgument("tolerance set does not match the mechanism");
  const auto arms = m.arms();
  std::vector<TorsorBatch> out;
  for (std::size_t i = 0; i < tols.size(); ++i) {
    const auto& tol = tols.components[i];
    const Point2 at = m.components[i].geometry.center;
    if (sc.mode == CpiMode::axis_wise) {
      out.push_back(sample_component(axis_targets(tol, sc.cpi), sc, at, rng));
      continue;
    }
    TorsorBatch b = sample_component(tol, sc, at, rng);
    double icc2 = 0.0;
    for (std::size_t a = 0; a < 3; ++a) icc2 += std::pow(arms[a] * tol[static_cast<Axis>(a)], 2);
    const double target = std::sqrt(icc2 / 3.0) / sc.cpi;
    const double adj = adjusted_inertia(transported(b, m.fr_surface.center), m.fr_surface);
    const double s = target / adj;
    b.mean *= s;
    b.cov *= s * s;
    out.push_back(b);
  }
  return out;
}

// ------------------------------------------------------------------ assembly

/// Resultant torsor at the FR frame: sum of the component torsors transported
/// there.
inline Torsor assemble(std::span<const Torsor> parts, Point2 fr_frame) {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& t : parts) sum += transport_matrix(t.at, fr_frame) * t.vec();
  return Torsor::from_vec(sum, fr_frame);
}

/// Distribution of the resultant for independent component batches.
inline TorsorBatch assemble(std::span<const TorsorBatch> parts, Point2 fr_frame) {
  TorsorBatch r;
  r.at = fr_frame;
  for (const auto& b : parts) {
    const Eigen::Matrix3d m = transport_matrix(b.at, fr_frame);
    r.mean += m * b.mean;
    r.cov += m * b.cov * m.transpose();
  }
  return r;
}

inline bool conform(const Torsor& resultant, const DeviationDomain& fr) {
  if (!(resultant.at == fr.at())) throw InvalidArgument("resultant must be expressed at the FR frame");
  const Eigen::Vector3d x = resultant.vec();
  for (const auto& f : fr.facets()) {
    if (f.normal.dot(x) > f.offset) return false;
  }
  return true;
}

/// Spectral square root L (L L^T = Sigma), tolerant of rank deficiency.
inline Eigen::Matrix3d spectral_factor(const Eigen::Matrix3d& cov) {
  const Eigen::Matrix3d c = checked_psd(cov);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(c);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

inline constexpr const char* kFactorization = "spectral (symmetric eigendecomposition, clipped eigenvalues)";

/// `n` torsors drawn from the batch: x = mu + L z with z standard normal.
inline std::vector<Torsor> sample_torsors(const TorsorBatch& b, std::size_t n, Rng& rng) {
  const Eigen::Matrix3d l = spectral_factor(b.cov);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<Torsor> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double z0 = nd(rng), z1 = nd(rng), z2 = nd(rng);
    out.push_back(Torsor::from_vec(b.mean + l * Eigen::Vector3d(z0, z1, z2), b.at));
  }
  return out;
}

/// Draws `n` torsors from the batch and counts those outside `fr`.
inline std::size_t count_nonconforming(const TorsorBatch& b, const DeviationDomain& fr, std::size_t n, Rng& rng) {
  if (!(b.at == fr.at())) throw InvalidArgument("batch must be expressed at the FR frame");
  const Eigen::Matrix3d l = spectral_factor(b.cov);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<Eigen::Vector3d> normals;
  std::vector<double> offsets;
  for (const auto& f : fr.facets()) {
    // Fold the mean into the offsets and the factor into the normals.
    normals.push_back(l.transpose() * f.normal);
    offsets.push_back(f.offset - f.normal.dot(b.mean));
  }
  std::size_t bad = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double z0 = nd(rng), z1 = nd(rng), z2 = nd(rng);
    for (std::size_t j = 0; j < normals.size(); ++j) {
      const auto& a = normals[j];
      if (a[0] * z0 + a[1] * z1 + a[2] * z2 > offsets[j]) {
        ++bad;
        break;
      }
    }
  }
  return bad;
}

/// Reference path: draw every component torsor, assemble, test. Same
/// distribution as sampling the propagated resultant.
inline std::size_t count_nonconforming_componentwise(std::span<const TorsorBatch> parts, const DeviationDomain& fr,
                                                     std::size_t n, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<Eigen::Matrix3d> ls;
  for (const auto& b : parts) ls.push_back(spectral_factor(b.cov));
  std::vector<Torsor> ts(parts.size());
  std::size_t bad = 0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const Eigen::Vector3d z(nd(rng), nd(rng), nd(rng));
      ts[i] = Torsor::from_vec(parts[i].mean + ls[i] * z, parts[i].at);
    }
    if (!conform(assemble(ts, fr.at()), fr)) ++bad;
  }
  return bad;
}

// ----------------------------------------------------------------- reports

struct Histogram {
  std::vector<double> edges;  // size = counts.size() + 1
  std::vector<std::size_t> counts;
};

inline Histogram make_histogram(std::span<const double> values, std::size_t bins = 20) {
  Histogram h;
  if (values.empty() || bins == 0) return h;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double w = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(lo + w * static_cast<double>(i));
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double v : values) {
    auto i = static_cast<std::size_t>((v - lo) / w);
    ++h.counts[std::min(i, bins - 1)];
  }
  return h;
}

struct SimReport {
  Scenario scenario;
  std::vector<double> ncr;  // per repeat, ppm
  double mean_ncr = 0.0;
  double ncr_std = 0.0;        // observed std across repeats
  double predicted_std = 0.0;  // binomial std at mean_ncr and the draw count
  double worst_ncr = 0.0;
  std::string factorization = kFactorization;
  Histogram histogram;
};

inline std::size_t default_workers() {
  const auto n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

inline constexpr std::size_t kChunk = 1u << 16;

inline SimReport estimate_ncr(const Scenario& sc, const MechanismSpec& m, const ToleranceSet3D& tols,
                              std::size_t workers = 0) {
  sc.validate();
  m.validate();
  const auto fr = fr_domain(m);
  const std::size_t chunks = (sc.assemblies + kChunk - 1) / kChunk;

  std::vector<TorsorBatch> resultant(sc.repeats);
  for (std::size_t r = 0; r < sc.repeats; ++r) {
    Rng rng(stream_seed(sc.seed, r, kConfigChunk));
    const auto parts = sample_configuration(m, tols, sc, rng);
    resultant[r] = assemble(parts, fr.at());
  }

  std::vector<std::size_t> bad(sc.repeats * chunks, 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    try {
      for (std::size_t task = next++; task < bad.size() && !failed; task = next++) {
        const std::size_t r = task / chunks, c = task % chunks;
        const std::size_t n = std::min(kChunk, sc.assemblies - c * kChunk);
        Rng rng(stream_seed(sc.seed, r, c));
        bad[task] = count_nonconforming(resultant[r], fr, n, rng);
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  const std::size_t nw = std::max<std::size_t>(1, std::min(workers == 0 ? default_workers() : workers, bad.size()));
  if (nw == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < nw; ++i) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  SimReport rep;
  rep.scenario = sc;
  for (std::size_t r = 0; r < sc.repeats; ++r) {
    std::size_t total = 0;
    for (std::size_t c = 0; c < chunks; ++c) total += bad[r * chunks + c];
    rep.ncr.push_back(kPpm * static_cast<double>(total) / static_cast<double>(sc.assemblies));
  }
  double sum = 0.0;
  for (double v : rep.ncr) sum += v;
  rep.mean_ncr = sum / static_cast<double>(rep.ncr.size());
  double ss = 0.0;
  for (double v : rep.ncr) ss += (v - rep.mean_ncr) * (v - rep.mean_ncr);
  rep.ncr_std = rep.ncr.size() > 1 ? std::sqrt(ss / static_cast<double>(rep.ncr.size() - 1)) : 0.0;
  rep.predicted_std = sc.assemblies > 1 ? ncr_std(rep.mean_ncr, sc.assemblies) : 0.0;
  rep.worst_ncr = *std::max_element(rep.ncr.begin(), rep.ncr.end());
  rep.histogram = make_histogram(rep.ncr);
  return rep;
}

// ------------------------------------------------------------------ table 1

struct Table1Row {
  std::string label;
  ScenarioKind kind;
  double cap;
  std::vector<SimReport> runs;  // one per cpi
};

struct Table1Options {
  std::vector<double> cpi{1.0, 1.16, 1.33, 1.5};
  std::size_t assemblies = 1'000'000;
  std::size_t repeats = 2000;
  std::uint64_t seed = 0;
  CpiMode mode = CpiMode::axis_wise;
  std::size_t workers = 0;
};

/// Rows: centred-matched, centred-random-sd, off-centred with cap 1/3 and
/// with cap 1. Every (row, cpi) run gets its own seed derived from `seed`.
inline std::vector<Table1Row> run_table1(const MechanismSpec& m, const ToleranceSet3D& tols,
                                         const Table1Options& opt) {
  if (opt.cpi.empty()) throw InvalidArgument("cpi list is empty");
  std::vector<Table1Row> rows = {
      {"centred-matched", ScenarioKind::centred_matched, 1.0 / 3.0, {}},
      {"centred-random-sd", ScenarioKind::centred_random_sd, 1.0 / 3.0, {}},
      {"off-centred-random cap=1/3", ScenarioKind::off_centred_random, 1.0 / 3.0, {}},
      {"off-centred-random cap=1", ScenarioKind::off_centred_random, 1.0, {}},
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < opt.cpi.size(); ++j) {
      Scenario sc;
      sc.kind = rows[i].kind;
      sc.cpi = opt.cpi[j];
      sc.assemblies = opt.assemblies;
      sc.repeats = opt.repeats;
      sc.seed = stream_seed(opt.seed, i, j);
      sc.offcentring_cap = rows[i].cap;
      sc.mode = opt.mode;
      rows[i].runs.push_back(estimate_ncr(sc, m, tols, opt.workers));
    }
  }
  return rows;
}

// ------------------------------------------------------------- 1D stack-up

/// NCR (ppm, two-sided) of a 1D chain of independent Gaussian batches,
/// resultant = sum of the components, checked against [-R0/2, R0/2].
inline double simulate_chain_1d(std::span<const Batch1D> parts, double fr_interval, std::size_t draws,
                                std::uint64_t seed) {
  if (!(fr_interval > 0.0)) throw InvalidArgument("FR interval must be > 0");
  if (draws < 1) throw InvalidArgument("draws must be >= 1");
  double mu = 0.0, var = 0.0;
  for (const auto& b : parts) {
    mu += b.mean;
    var += b.std * b.std;
  }
  const double sd = std::sqrt(var);
  Rng rng(stream_seed(seed, 0, 0));
  std::normal_distribution<double> nd(0.0, 1.0);
  std::size_t bad = 0;
  for (std::size_t k = 0; k < draws; ++k) {
    if (std::abs(mu + sd * nd(rng)) > fr_interval / 2) ++bad;
  }
  return kPpm * static_cast<double>(bad) / static_cast<double>(draws);
}

}  // namespace itol
