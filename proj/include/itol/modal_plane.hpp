#pragma once

// Modal characterisation of normal deviations over a meshed rectangular plane.
//
// A ModalBasis holds unit-amplitude ("metric") deviation shapes sampled at the
// mesh nodes: the three rigid modes (translation, rotation about x, rotation
// about y) followed by form modes. Form modes are separable products of
// free-free Euler-Bernoulli beam eigenfunctions in x and y, ordered by
// ascending wavenumber (kx^2 + ky^2). The first form mode is the twist x*y;
// doubly symmetric products give domed shapes and higher orders undulations.
//
// A measured field D is characterised by its least-squares coefficients c
// (the dual-basis projection c = (B^T B)^-1 B^T D) and the residue
// |D - B c|.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "itol/errors.hpp"
#include "itol/sdt.hpp"

namespace itol {

struct PlaneMesh {
  double lx = 0.0;
  double ly = 0.0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<Point2> nodes;  // row-major: y outer, x inner

  std::size_t size() const noexcept { return nodes.size(); }
  double dx() const { return lx / static_cast<double>(nx - 1); }
  double dy() const { return ly / static_cast<double>(ny - 1); }
  bool contains(Point2 p, double tol = 1e-9) const {
    return std::abs(p.x) <= lx / 2 + tol && std::abs(p.y) <= ly / 2 + tol;
  }
  SurfaceGeometry geometry() const { return SurfaceGeometry(lx, ly); }
};

/// Uniform grid centred on the plane centre O.
inline PlaneMesh build_mesh(double lx, double ly, std::size_t nx, std::size_t ny) {
  if (!(lx > 0.0 && ly > 0.0)) throw InvalidArgument("mesh extents must be > 0");
  if (nx < 2 || ny < 2) throw InvalidArgument("mesh needs at least 2 nodes per direction");
  PlaneMesh m{lx, ly, nx, ny, {}};
  m.nodes.reserve(nx * ny);
  // Mirror the upper half so coordinates are exactly symmetric about O.
  auto axis = [](double len, std::size_t n) {
    std::vector<double> c(n);
    for (std::size_t i = n / 2; i < n; ++i) {
      c[i] = 2 * i + 1 == n ? 0.0 : len * (static_cast<double>(i) / static_cast<double>(n - 1) - 0.5);
      c[n - 1 - i] = -c[i];
    }
    return c;
  };
  const auto xs = axis(lx, nx), ys = axis(ly, ny);
  for (double y : ys) {
    for (double x : xs) m.nodes.push_back({x, y});
  }
  return m;
}

struct DeviationField {
  Eigen::VectorXd values;  // signed normal deviation per node, mm

  DeviationField() = default;
  explicit DeviationField(Eigen::VectorXd v) : values(std::move(v)) {}
  std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
};

enum class ModeKind { rigid_translation, rigid_rotation_x, rigid_rotation_y, form };

inline const char* to_string(ModeKind k) {
  switch (k) {
    case ModeKind::rigid_translation: return "rigid-translation";
    case ModeKind::rigid_rotation_x: return "rigid-rotation-x";
    case ModeKind::rigid_rotation_y: return "rigid-rotation-y";
    case ModeKind::form: return "form";
  }
  return "?";
}

namespace beam {

/// n-th positive root of cos(l) cosh(l) = 1 (n >= 1): 4.7300, 7.8532, ...
inline double free_free_root(int n) {
  const double centre = (n + 0.5) * std::numbers::pi;
  double lo = centre - 0.5, hi = centre + 0.5;
  auto f = [](double l) { return std::cos(l) - 1.0 / std::cosh(l); };
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * centre; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Free-free beam shape of order p on [-len/2, len/2], not normalised.
/// Orders 0 and 1 are the rigid shapes 1 and 2x/len; order p >= 2 is the
/// (p-1)-th elastic eigenfunction. The hyperbolic part is evaluated in a
/// form that avoids the cosh - sinh cancellation at high order.
inline double shape(int p, double x, double len) {
  if (p == 0) return 1.0;
  if (p == 1) return 2.0 * x / len;
  const double lam = free_free_root(p - 1);
  const double u = lam * (x / len + 0.5);
  const double em = std::exp(-lam);
  const double denom = std::sinh(lam) - std::sin(lam);
  const double sigma = (std::cosh(lam) - std::cos(lam)) / denom;
  // e^u (1 - sigma) / 2, with 1 - sigma = (cos l - sin l - e^-l) / denom and
  // e^u / denom = 2 e^(u - l) / (1 - e^-2l - 2 sin(l) e^-l).
  const double grow = (std::cos(lam) - std::sin(lam) - em) * std::exp(u - lam) /
                      (1.0 - em * em - 2.0 * std::sin(lam) * em);
  const double hyper = grow + 0.5 * std::exp(-u) * (1.0 + sigma);
  return std::cos(u) - sigma * std::sin(u) + hyper;
}

inline double wavenumber(int p, double len) { return p < 2 ? 0.0 : free_free_root(p - 1) / len; }

}  // namespace beam

struct ModeInfo {
  ModeKind kind = ModeKind::form;
  int order_x = 0;  // beam order along x
  int order_y = 0;  // beam order along y
  double wavenumber2 = 0.0;
};

class ModalBasis {
 public:
  ModalBasis(PlaneMesh mesh, Eigen::MatrixXd modes, std::vector<ModeInfo> info)
      : mesh_(std::move(mesh)), modes_(std::move(modes)), info_(std::move(info)), qr_(modes_) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(modes_);
    const auto& s = svd.singularValues();
    const double ratio = s(0) / s(s.size() - 1);
    gram_condition_ = ratio * ratio;
  }

  const PlaneMesh& mesh() const noexcept { return mesh_; }
  const Eigen::MatrixXd& modes() const noexcept { return modes_; }
  const std::vector<ModeInfo>& info() const noexcept { return info_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(modes_.cols()); }
  std::size_t nodes() const noexcept { return static_cast<std::size_t>(modes_.rows()); }
  /// Condition number of the Gram matrix B^T B.
  double gram_condition() const noexcept { return gram_condition_; }
  const Eigen::HouseholderQR<Eigen::MatrixXd>& qr() const noexcept { return qr_; }

 private:
  PlaneMesh mesh_;
  Eigen::MatrixXd modes_;
  std::vector<ModeInfo> info_;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
  double gram_condition_ = 0.0;
};

/// Throws naming the first column of `b` that is (numerically) a linear
/// combination of the columns before it.
inline void check_rank(const Eigen::MatrixXd& b, const std::vector<ModeInfo>& info) {
  for (Eigen::Index j = 1; j < b.cols(); ++j) {
    const auto prev = b.leftCols(j);
    const Eigen::VectorXd col = b.col(j);
    const Eigen::VectorXd proj = prev * prev.colPivHouseholderQr().solve(col);
    if ((col - proj).norm() <= 1e-8 * col.norm()) {
      const auto& mi = info[static_cast<std::size_t>(j)];
      throw NumericalError("mode " + std::to_string(j + 1) + " (beam orders " + std::to_string(mi.order_x) + "," +
                           std::to_string(mi.order_y) + ") is linearly dependent on lower modes for this mesh");
    }
  }
}

/// Build an m-mode basis: 3 rigid modes then m - 3 form modes.
inline ModalBasis build_basis(const PlaneMesh& mesh, std::size_t m) {
  const std::size_t k = mesh.size();
  if (m < 3 || m > k) throw InvalidArgument("basis size must satisfy 3 <= m <= node count");

  std::vector<ModeInfo> info = {{ModeKind::rigid_translation, 0, 0, 0.0},
                                {ModeKind::rigid_rotation_x, 0, 1, 0.0},
                                {ModeKind::rigid_rotation_y, 1, 0, 0.0}};

  // Form candidates: every beam-order pair representable on the grid.
  std::vector<ModeInfo> cand;
  for (int p = 0; p < static_cast<int>(mesh.nx); ++p) {
    for (int q = 0; q < static_cast<int>(mesh.ny); ++q) {
      if (p + q <= 1) continue;
      const double kx = beam::wavenumber(p, mesh.lx), ky = beam::wavenumber(q, mesh.ly);
      cand.push_back({ModeKind::form, p, q, kx * kx + ky * ky});
    }
  }
  std::sort(cand.begin(), cand.end(), [&](const ModeInfo& a, const ModeInfo& b) {
    const double akx = beam::wavenumber(a.order_x, mesh.lx), bkx = beam::wavenumber(b.order_x, mesh.lx);
    const double aky = beam::wavenumber(a.order_y, mesh.ly), bky = beam::wavenumber(b.order_y, mesh.ly);
    return std::tie(a.wavenumber2, akx, aky, a.order_x, a.order_y) <
           std::tie(b.wavenumber2, bkx, bky, b.order_x, b.order_y);
  });
  info.insert(info.end(), cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(m - 3));

  Eigen::MatrixXd b(k, m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& mi = info[j];
    for (std::size_t n = 0; n < k; ++n) {
      const auto& p = mesh.nodes[n];
      b(n, j) = beam::shape(mi.order_x, p.x, mesh.lx) * beam::shape(mi.order_y, p.y, mesh.ly);
    }
    const double peak = b.col(j).cwiseAbs().maxCoeff();
    if (!(peak > 0.0)) {
      throw NumericalError("mode " + std::to_string(j + 1) + " vanishes on this mesh");
    }
    b.col(j) /= peak;
  }

  check_rank(b, info);
  return ModalBasis(mesh, std::move(b), std::move(info));
}

struct ModalSignature {
  Eigen::VectorXd coeffs;  // mm
  double residue = 0.0;    // mm
};

inline void check_field(const ModalBasis& basis, const DeviationField& d) {
  if (d.size() != basis.nodes()) {
    throw InvalidArgument("deviation field has " + std::to_string(d.size()) + " values, mesh has " +
                          std::to_string(basis.nodes()) + " nodes");
  }
}

inline ModalSignature signature(const ModalBasis& basis, const DeviationField& d) {
  check_field(basis, d);
  ModalSignature s;
  s.coeffs = basis.qr().solve(d.values);
  s.residue = (d.values - basis.modes() * s.coeffs).norm();
  return s;
}

inline DeviationField reconstruct(const ModalBasis& basis, const Eigen::VectorXd& coeffs) {
  if (static_cast<std::size_t>(coeffs.size()) != basis.size()) {
    throw InvalidArgument("coefficient count does not match the basis size");
  }
  return DeviationField(basis.modes() * coeffs);
}

/// Residues r(j) of the least-squares fit with the first j modes, j = 1..m
/// (entry j - 1). Nested fits share the Householder factorisation: r(j) is
/// the norm of the trailing part of Q^T D.
inline std::vector<double> residues(const ModalBasis& basis, const DeviationField& d) {
  check_field(basis, d);
  const Eigen::VectorXd qtd = basis.qr().householderQ().adjoint() * d.values;
  const auto k = qtd.size();
  std::vector<double> r(basis.size());
  for (std::size_t j = 1; j <= basis.size(); ++j) {
    const auto tail = k - static_cast<Eigen::Index>(j);
    r[j - 1] = qtd.tail(tail).norm();
  }
  return r;
}

/// rho = r(m_used) / r(m). Empty when the full basis reproduces the field
/// exactly (r(m) = 0), where the ratio is undefined.
inline std::optional<double> residue_ratio(const ModalBasis& basis, const DeviationField& d,
                                           std::size_t m_used) {
  if (m_used < 3 || m_used > basis.size()) {
    throw InvalidArgument("m_used must satisfy 3 <= m_used <= basis size");
  }
  const auto r = residues(basis, d);
  const double ref = r.back();
  if (!(ref > 1e-12 * d.values.norm())) return std::nullopt;
  return r[m_used - 1] / ref;
}

/// Rigid modal coefficients (c1, c2, c3) to the torsor at `at`. At the
/// centre O: tz = c1, rx = 2 c2 / ly, ry = -2 c3 / lx (mode 3 is x/(lx/2),
/// and w = tz + rx y - ry x).
inline Torsor rigid_to_sdt(double c1, double c2, double c3, const PlaneMesh& mesh, Point2 at) {
  if (!mesh.contains(at)) throw InvalidArgument("expression point lies outside the plane");
  const Torsor at_o{c1, 2.0 * c2 / mesh.ly, -2.0 * c3 / mesh.lx, {0.0, 0.0}};
  return transport(at_o, at);
}

inline std::array<double, 3> sdt_to_rigid(const Torsor& t, const PlaneMesh& mesh) {
  if (!mesh.contains(t.at)) throw InvalidArgument("expression point lies outside the plane");
  const Torsor o = transport(t, {0.0, 0.0});
  return {o.tz, o.rx * mesh.ly / 2.0, -o.ry * mesh.lx / 2.0};
}

}  // namespace itol
