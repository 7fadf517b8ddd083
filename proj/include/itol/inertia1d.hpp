#pragma once

// One-dimensional inertial tolerancing.
//
// A production batch is summarised by its offset from target (mean) and its
// standard deviation. Its inertia sqrt(mean^2 + std^2) is the quadratic
// distance of the batch to the target; a batch is accepted against an
// inertial tolerance I0 when its capability Cpi = I0 / I is at least the
// required value. All lengths are in mm, rates in parts per million.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "itol/errors.hpp"
#include "itol/normal.hpp"

namespace itol {

inline constexpr double kPpm = 1.0e6;

struct Batch1D {
  double mean = 0.0;  // signed offset from target
  double std = 0.0;   // >= 0

  Batch1D() = default;
  Batch1D(double mean_, double std_) : mean(mean_), std(std_) {
    if (!(std_ >= 0.0)) throw InvalidArgument("Batch1D: std must be >= 0");
  }
};

class InertialTolerance {
 public:
  explicit InertialTolerance(double value) : value_(value) {
    if (!(value > 0.0)) throw InvalidArgument("InertialTolerance must be > 0");
  }
  double value() const noexcept { return value_; }

 private:
  double value_;
};

struct AllocationInput {
  double fr_interval = 0.0;          // R0, width of the functional interval
  std::vector<double> influences;    // alpha_i, nonzero
  std::vector<double> feasibilities; // beta_i, > 0
};

inline double inertia(const Batch1D& b) { return std::hypot(b.mean, b.std); }

/// Inertial capability I0 / I. An empty optional means the batch sits exactly
/// on target with no dispersion: its capability is unbounded.
inline std::optional<double> cpi(const Batch1D& b, InertialTolerance tol) {
  const double i = inertia(b);
  if (i == 0.0) return std::nullopt;
  return tol.value() / i;
}

namespace detail {
inline double admissible_inertia(InertialTolerance tol, double cpi_req) {
  if (!(cpi_req > 0.0)) throw InvalidArgument("required Cpi must be > 0");
  return tol.value() / cpi_req;
}
}  // namespace detail

/// Largest |mean| a batch with the given std may have and still reach cpi_req.
inline double max_mean(InertialTolerance tol, double cpi_req, double given_std) {
  const double limit = detail::admissible_inertia(tol, cpi_req);
  if (given_std < 0.0) throw InvalidArgument("given std must be >= 0");
  if (given_std > limit) {
    throw InvalidArgument("no admissible batch: std exceeds I0/Cpi");
  }
  return std::sqrt((limit - given_std) * (limit + given_std));
}

/// Largest std a batch with the given offset may have and still reach cpi_req.
inline double max_std(InertialTolerance tol, double cpi_req, double given_mean) {
  const double limit = detail::admissible_inertia(tol, cpi_req);
  const double m = std::abs(given_mean);
  if (m > limit) {
    throw InvalidArgument("no admissible batch: mean exceeds I0/Cpi");
  }
  return std::sqrt((limit - m) * (limit + m));
}

/// Uniform allocation over n independent centred components: the stacked
/// resultant then has 6 sigma = R0.
inline double allocate_uniform(double fr_interval, std::size_t n) {
  if (!(fr_interval > 0.0)) throw InvalidArgument("FR interval must be > 0");
  if (n == 0) throw InvalidArgument("component count must be >= 1");
  return fr_interval / (6.0 * std::sqrt(static_cast<double>(n)));
}

/// Feasibility-weighted allocation: I_i = beta_i * R0 / (6 sqrt(sum (alpha_j beta_j)^2)).
/// Tolerances are proportional to the feasibilities, and the stacked variance
/// sum (alpha_i I_i)^2 equals (R0 / 6)^2.
inline std::vector<double> allocate_weighted(const AllocationInput& in) {
  const auto n = in.influences.size();
  if (n == 0 || in.feasibilities.size() != n) {
    throw InvalidArgument("allocation: influences and feasibilities must share a length >= 1");
  }
  if (!(in.fr_interval > 0.0)) throw InvalidArgument("FR interval must be > 0");
  double norm2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (in.influences[i] == 0.0) throw InvalidArgument("allocation: influence coefficients must be nonzero");
    if (!(in.feasibilities[i] > 0.0)) throw InvalidArgument("allocation: feasibilities must be > 0");
    const double w = in.influences[i] * in.feasibilities[i];
    norm2 += w * w;
  }
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) throw InvalidArgument("allocation: degenerate weights");
  const double scale = in.fr_interval / (6.0 * std::sqrt(norm2));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = in.feasibilities[i] * scale;
  return out;
}

/// Component Cpi that guarantees a resultant Cpk over an n-component chain,
/// even when every component sits at its worst admissible positive offset.
///
/// With each component on the boundary mean^2 + std^2 = (I0/Cpi)^2 and
/// I0 = R/(6 sqrt n), the resultant's distance to the upper limit in units of
/// its std is (3 Cpi - sqrt(n) sin t) / cos t, minimised at sqrt(9 Cpi^2 - n).
/// Setting that minimum to 3 Cpk gives Cpi = sqrt(Cpk^2 + n/9).
inline double cpi_for_cpk(double cpk_fr, std::size_t n) {
  if (!(cpk_fr > 0.0)) throw InvalidArgument("Cpk must be > 0");
  if (n == 0) throw InvalidArgument("component count must be >= 1");
  return std::sqrt(cpk_fr * cpk_fr + static_cast<double>(n) / 9.0);
}

/// Cpk of a Gaussian resultant whose one-sided tail beyond the nearest limit
/// holds `ncr_ppm` parts per million: Cpk = z / 3 with Phi(-z) = NCR.
inline double cpk_from_ncr(double ncr_ppm) {
  if (!(ncr_ppm > 0.0 && ncr_ppm < kPpm)) {
    throw InvalidArgument("NCR must lie in (0, 1e6) ppm");
  }
  return -normal::quantile(ncr_ppm / kPpm) / 3.0;
}

inline double ncr_from_cpk(double cpk) {
  return normal::upper_tail(3.0 * cpk) * kPpm;
}

/// Standard deviation of an NCR estimate from `draws` Bernoulli trials.
inline double ncr_std(double ncr_ppm, std::size_t draws) {
  if (draws < 2) throw InvalidArgument("ncr_std needs at least 2 draws");
  if (ncr_ppm < 0.0 || ncr_ppm > kPpm) throw InvalidArgument("NCR must lie in [0, 1e6] ppm");
  return std::sqrt(ncr_ppm * (kPpm - ncr_ppm) / static_cast<double>(draws - 1));
}

}  // namespace itol
