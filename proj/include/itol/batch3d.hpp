#pragma once

// Batch statistics of modal signatures and torsors.
//
// Point inertia at a node is sqrt(mean^2 + variance); the surface batch
// inertia is the quadratic mean of the point inertias. Because the modal
// reconstruction is linear, the mean shape is B * mean(c) and the node
// covariance is B * cov(c) * B^T, so the surface inertia can be computed
// from signature statistics alone.
//
// The adjusted inertia keeps the worst point instead of the quadratic mean.
// Without form deviation the displacement field is affine, so the worst
// point is one of the four corners, where I_c^2 = (a . mu)^2 + a^T Sigma a
// with a = (1, y_c, -x_c).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "itol/errors.hpp"
#include "itol/modal_plane.hpp"
#include "itol/sdt.hpp"

namespace itol {

struct SignatureBatch {
  Eigen::VectorXd mean;  // mm
  Eigen::MatrixXd cov;   // mm^2
};

struct TorsorBatch {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  Point2 at{};
};

/// Symmetrised copy of a covariance with tiny negative eigenvalues (down to
/// -1e-12 * trace) clipped to zero. More negative spectra are rejected.
template <class Derived>
auto checked_psd(const Eigen::MatrixBase<Derived>& cov) {
  using Mat = typename Derived::PlainObject;
  if (cov.rows() != cov.cols()) throw InvalidArgument("covariance must be square");
  const Mat sym = 0.5 * (cov + cov.transpose());
  const Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  const auto& ev = es.eigenvalues();
  const double trace = std::max(sym.trace(), 0.0);
  if (ev.minCoeff() < -1e-12 * trace || (trace == 0.0 && ev.minCoeff() < 0.0)) {
    throw NumericalError("covariance is not positive semidefinite (min eigenvalue " +
                         std::to_string(ev.minCoeff()) + ")");
  }
  if (ev.minCoeff() >= 0.0) return sym;
  const auto clipped = ev.cwiseMax(0.0);
  return Mat(es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose());
}

/// Sample mean and unbiased (n - 1) covariance of row-wise samples.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> sample_moments(const Eigen::MatrixXd& samples) {
  const auto n = samples.rows();
  if (n < 2) throw InvalidArgument("at least 2 samples are required");
  const Eigen::VectorXd mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centred = samples.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(n - 1);
  return {mean, cov};
}

inline SignatureBatch empirical_batch(std::span<const ModalSignature> sigs) {
  if (sigs.size() < 2) throw InvalidArgument("at least 2 signatures are required");
  const auto m = sigs.front().coeffs.size();
  Eigen::MatrixXd s(static_cast<Eigen::Index>(sigs.size()), m);
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    if (sigs[i].coeffs.size() != m) throw InvalidArgument("signatures differ in length");
    s.row(static_cast<Eigen::Index>(i)) = sigs[i].coeffs.transpose();
  }
  auto [mean, cov] = sample_moments(s);
  return {std::move(mean), std::move(cov)};
}

inline TorsorBatch empirical_batch(std::span<const Torsor> ts) {
  if (ts.size() < 2) throw InvalidArgument("at least 2 torsors are required");
  Eigen::MatrixXd s(static_cast<Eigen::Index>(ts.size()), 3);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ts[i].at == ts.front().at)) throw InvalidArgument("torsors must share an expression point");
    s.row(static_cast<Eigen::Index>(i)) = ts[i].vec().transpose();
  }
  const auto [mean, cov] = sample_moments(s);
  return {mean, cov, ts.front().at};
}

inline void check_batch(const ModalBasis& basis, const SignatureBatch& b) {
  const auto m = static_cast<Eigen::Index>(basis.size());
  if (b.mean.size() != m || b.cov.rows() != m || b.cov.cols() != m) {
    throw InvalidArgument("signature batch dimension does not match the basis");
  }
}

/// Mean deviation of every node, B * mean(c).
inline DeviationField mean_shape(const ModalBasis& basis, const SignatureBatch& b) {
  check_batch(basis, b);
  return DeviationField(basis.modes() * b.mean);
}

/// Node variances, diag(B * cov(c) * B^T).
inline Eigen::VectorXd cov_shape(const ModalBasis& basis, const SignatureBatch& b) {
  check_batch(basis, b);
  const Eigen::MatrixXd cov = checked_psd(b.cov);
  const Eigen::MatrixXd& B = basis.modes();
  return (B * cov).cwiseProduct(B).rowwise().sum().cwiseMax(0.0);
}

/// Quadratic mean of the point inertias sqrt(mean_j^2 + var_j).
inline double surface_inertia(const Eigen::VectorXd& mean_field, const Eigen::VectorXd& variance_field) {
  if (mean_field.size() != variance_field.size() || mean_field.size() == 0) {
    throw InvalidArgument("mean and variance fields must be non-empty and aligned");
  }
  if ((variance_field.array() < 0.0).any()) throw InvalidArgument("variances must be >= 0");
  return std::sqrt((mean_field.squaredNorm() + variance_field.sum()) / static_cast<double>(mean_field.size()));
}

inline TorsorBatch transported(const TorsorBatch& b, Point2 to) {
  const Eigen::Matrix3d m = transport_matrix(b.at, to);
  return {m * b.mean, m * b.cov * m.transpose(), to};
}

/// Inertia of the normal deviation at a point of the plane.
inline double point_inertia(const TorsorBatch& b, Point2 p) {
  const Eigen::RowVector3d a = influence_row(b.at, p);
  const double mu = a * b.mean;
  const double var = std::max(0.0, static_cast<double>(a * b.cov * a.transpose()));
  return std::sqrt(mu * mu + var);
}

/// Corner inertias, ordered as SurfaceGeometry::corners().
inline std::array<double, 4> corner_inertias(const TorsorBatch& b, const SurfaceGeometry& g) {
  const TorsorBatch checked{b.mean, checked_psd(b.cov), b.at};
  std::array<double, 4> out{};
  const auto cs = g.corners();
  for (std::size_t i = 0; i < 4; ++i) out[i] = point_inertia(checked, cs[i]);
  return out;
}

inline double adjusted_inertia(const TorsorBatch& b, const SurfaceGeometry& g) {
  const auto c = corner_inertias(b, g);
  return *std::max_element(c.begin(), c.end());
}

/// Surface inertia restricted to the four corners (their quadratic mean).
inline double corner_surface_inertia(const TorsorBatch& b, const SurfaceGeometry& g) {
  double s = 0.0;
  for (double i : corner_inertias(b, g)) s += i * i;
  return std::sqrt(s / 4.0);
}

}  // namespace itol
