#include <cmath>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "itol/modal_plane.hpp"
#include "itol/sdt.hpp"

using namespace itol;

namespace {

// Least-squares oracle through the normal equations (B^T B) c = B^T D.
Eigen::VectorXd normal_equations(const Eigen::MatrixXd& b, const Eigen::VectorXd& d) {
  return (b.transpose() * b).ldlt().solve(b.transpose() * d);
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

}  // namespace

TEST(Mesh, Examples) {
  const auto m = build_mesh(100, 80, 2, 2);
  ASSERT_EQ(m.size(), 4u);
  for (const auto& p : m.nodes) {
    EXPECT_DOUBLE_EQ(std::abs(p.x), 50.0);
    EXPECT_DOUBLE_EQ(std::abs(p.y), 40.0);
  }
  const auto m3 = build_mesh(100, 80, 3, 3);
  ASSERT_EQ(m3.size(), 9u);
  EXPECT_EQ(m3.nodes[4], (Point2{0.0, 0.0}));
  const auto m11 = build_mesh(80, 80, 11, 11);
  ASSERT_EQ(m11.size(), 121u);
  EXPECT_DOUBLE_EQ(m11.nodes.front().x, -40.0);
  EXPECT_DOUBLE_EQ(m11.nodes.back().y, 40.0);
  // Row-major, y outer.
  EXPECT_DOUBLE_EQ(m11.nodes[1].y, m11.nodes[0].y);
  EXPECT_GT(m11.nodes[1].x, m11.nodes[0].x);
  EXPECT_THROW(build_mesh(0, 80, 3, 3), InvalidArgument);
  EXPECT_THROW(build_mesh(10, 80, 1, 3), InvalidArgument);
}

TEST(Mesh, SymmetricAboutCentre) {
  const auto m = build_mesh(100, 80, 8, 5);
  for (std::size_t k = 0; k < m.size(); ++k) {
    const auto& a = m.nodes[k];
    const auto& b = m.nodes[m.size() - 1 - k];
    EXPECT_EQ(a.x, -b.x);
    EXPECT_EQ(a.y, -b.y);
  }
}

TEST(Beam, FreeFreeRoots) {
  EXPECT_NEAR(beam::free_free_root(1), 4.730040744862704, 1e-12);
  EXPECT_NEAR(beam::free_free_root(2), 7.853204624095838, 1e-12);
  EXPECT_NEAR(beam::free_free_root(3), 10.995607838001671, 1e-12);
  for (int n = 1; n < 30; ++n) {
    const double l = beam::free_free_root(n);
    EXPECT_NEAR(std::cos(l) * std::cosh(l), 1.0, 1e-9 * std::cosh(l)) << n;
  }
}

TEST(Beam, ShapesAreFreeFreeEigenfunctions) {
  // Free ends: second and third derivatives vanish; interior: w'''' = k^4 w.
  const double len = 80.0, h = 0.2;
  for (int p = 2; p < 8; ++p) {
    const double k = beam::wavenumber(p, len);
    auto w = [&](double x) { return beam::shape(p, x, len); };
    const double x0 = 7.3;
    const double d4 = (w(x0 + 2 * h) - 4 * w(x0 + h) + 6 * w(x0) - 4 * w(x0 - h) + w(x0 - 2 * h)) / std::pow(h, 4);
    EXPECT_NEAR(d4, std::pow(k, 4) * w(x0), 2e-3 * std::pow(k, 4)) << p;
    const double e = len / 2;
    const double d2 = (w(e) - 2 * w(e - h) + w(e - 2 * h)) / (h * h);
    EXPECT_NEAR(d2, 0.0, 5e-2 * k * k) << p;
  }
}

TEST(Basis, RigidColumnsMatchClosedForms) {
  for (auto [nx, ny] : {std::pair<std::size_t, std::size_t>{11, 11}, {7, 5}, {2, 2}}) {
    const auto mesh = build_mesh(100, 80, nx, ny);
    const auto b = build_basis(mesh, std::min<std::size_t>(mesh.size(), 10));
    for (std::size_t n = 0; n < mesh.size(); ++n) {
      const auto& p = mesh.nodes[n];
      const auto i = static_cast<Eigen::Index>(n);
      EXPECT_DOUBLE_EQ(b.modes()(i, 0), 1.0);
      EXPECT_NEAR(b.modes()(i, 1), p.y / 40.0, 1e-15);
      EXPECT_NEAR(b.modes()(i, 2), p.x / 50.0, 1e-15);
    }
  }
}

TEST(Basis, UnitRotationShapeAtEdges) {
  const auto mesh = build_mesh(100, 80, 11, 9);
  const auto b = build_basis(mesh, 12);
  for (std::size_t n = 0; n < mesh.size(); ++n) {
    const auto& p = mesh.nodes[n];
    if (p.y != 0.0) continue;
    if (p.x == 50.0) {
      EXPECT_DOUBLE_EQ(b.modes()(static_cast<Eigen::Index>(n), 2), 1.0);
    } else if (p.x == -50.0) {
      EXPECT_DOUBLE_EQ(b.modes()(static_cast<Eigen::Index>(n), 2), -1.0);
    }
  }
}

TEST(Basis, MaxNormalisedAndOrdered) {
  const auto mesh = build_mesh(80, 80, 11, 11);
  const auto b = build_basis(mesh, 20);
  ASSERT_EQ(b.size(), 20u);
  for (Eigen::Index j = 0; j < 20; ++j) EXPECT_NEAR(b.modes().col(j).cwiseAbs().maxCoeff(), 1.0, 1e-15);
  for (std::size_t j = 4; j < 20; ++j) EXPECT_LE(b.info()[j - 1].wavenumber2, b.info()[j].wavenumber2 + 1e-18);
  EXPECT_EQ(b.info()[3].kind, ModeKind::form);
  EXPECT_EQ(b.info()[3].order_x, 1);  // twist first
  EXPECT_EQ(b.info()[3].order_y, 1);
  EXPECT_TRUE(std::isfinite(b.gram_condition()));
  EXPECT_GE(b.gram_condition(), 1.0);
  // Oracle: condition number from the Gram matrix eigenvalues.
  const Eigen::MatrixXd g = b.modes().transpose() * b.modes();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  EXPECT_NEAR(b.gram_condition(), es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff(),
              1e-8 * b.gram_condition());
}

TEST(Basis, Errors) {
  const auto mesh = build_mesh(80, 80, 3, 3);
  EXPECT_THROW(build_basis(mesh, 2), InvalidArgument);
  EXPECT_THROW(build_basis(mesh, 10), InvalidArgument);
  EXPECT_NO_THROW(build_basis(mesh, 9));
}

TEST(Basis, RankCheckNamesTheDuplicateMode) {
  const auto mesh = build_mesh(80, 80, 4, 4);
  const auto b = build_basis(mesh, 6);
  Eigen::MatrixXd dup(b.nodes(), 7);
  dup.leftCols(6) = b.modes();
  dup.col(6) = 0.5 * b.modes().col(4) - 2.0 * b.modes().col(1);
  auto info = b.info();
  info.push_back(info[4]);
  try {
    check_rank(dup, info);
    FAIL() << "expected a rank error";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("mode 7"), std::string::npos) << e.what();
  }
}

TEST(Signature, ReproducesBasisElements) {
  const auto mesh = build_mesh(100, 80, 11, 9);
  const auto b = build_basis(mesh, 15);
  const auto s = signature(b, DeviationField(0.01 * b.modes().col(0)));
  EXPECT_NEAR(s.coeffs[0], 0.01, 1e-15);
  for (Eigen::Index j = 1; j < 15; ++j) EXPECT_NEAR(s.coeffs[j], 0.0, 1e-15);
  EXPECT_LT(s.residue, 1e-15);
  const auto s2 = signature(b, DeviationField(0.02 * b.modes().col(1) + 0.005 * b.modes().col(5)));
  EXPECT_NEAR(s2.coeffs[1], 0.02, 1e-14);
  EXPECT_NEAR(s2.coeffs[5], 0.005, 1e-14);
  EXPECT_NEAR(s2.coeffs[0], 0.0, 1e-14);
}

TEST(Signature, MatchesNormalEquationsOracle) {
  std::mt19937_64 rng(1);
  const auto mesh = build_mesh(80, 80, 11, 11);
  const auto b = build_basis(mesh, 20);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd d = random_vector(rng, 121, 0.01);
    const auto s = signature(b, DeviationField(d));
    const Eigen::VectorXd c = normal_equations(b.modes(), d);
    EXPECT_LT((s.coeffs - c).norm(), 1e-9 * c.norm());
    EXPECT_NEAR(s.residue, (d - b.modes() * c).norm(), 1e-12 * d.norm());
  }
}

TEST(Signature, LeastSquaresOptimality) {
  std::mt19937_64 rng(2);
  const auto mesh = build_mesh(80, 80, 9, 9);
  const auto b = build_basis(mesh, 12);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd d = random_vector(rng, 81, 0.01);
    const auto s = signature(b, DeviationField(d));
    for (double delta : {1e-6, 1e-3}) {
      for (Eigen::Index j = 0; j < 12; ++j) {
        for (double sign : {-1.0, 1.0}) {
          Eigen::VectorXd c = s.coeffs;
          c[j] += sign * delta;
          EXPECT_GT((d - b.modes() * c).norm(), s.residue);
        }
      }
    }
  }
}

TEST(Signature, OrthogonalNoiseGivesItsNormAsResidue) {
  std::mt19937_64 rng(3);
  const auto mesh = build_mesh(80, 80, 11, 11);
  const auto b = build_basis(mesh, 20);
  const Eigen::VectorXd c = random_vector(rng, 20, 0.01);
  Eigen::VectorXd noise = random_vector(rng, 121);
  noise -= b.modes() * normal_equations(b.modes(), noise);
  const double eps = 3e-4;
  noise *= eps / noise.norm();
  const auto s = signature(b, DeviationField(b.modes() * c + noise));
  EXPECT_NEAR(s.residue, eps, 1e-12);
  EXPECT_LT((s.coeffs - c).norm(), 1e-12);
}

TEST(Signature, ZeroResidueIffInSpan) {
  std::mt19937_64 rng(4);
  const auto mesh = build_mesh(80, 80, 7, 7);
  const auto b = build_basis(mesh, 10);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd in = b.modes() * random_vector(rng, 10);
    EXPECT_LE(signature(b, DeviationField(in)).residue, 1e-10 * in.norm());
    const Eigen::VectorXd out = random_vector(rng, 49);
    EXPECT_GT(signature(b, DeviationField(out)).residue, 1e-10 * out.norm());
  }
  EXPECT_THROW(signature(b, DeviationField(Eigen::VectorXd::Zero(48))), InvalidArgument);
}

TEST(Reconstruct, ExamplesAndRoundTrip) {
  std::mt19937_64 rng(5);
  const auto mesh = build_mesh(100, 80, 9, 7);
  const auto b = build_basis(mesh, 14);
  EXPECT_EQ(reconstruct(b, Eigen::VectorXd::Zero(14)).values.norm(), 0.0);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(14);
  e1[0] = 1.0;
  EXPECT_TRUE(reconstruct(b, e1).values.isOnes());
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd c = random_vector(rng, 14);
    EXPECT_LT((signature(b, reconstruct(b, c)).coeffs - c).norm(), 1e-12 * c.norm());
  }
  EXPECT_THROW(reconstruct(b, Eigen::VectorXd::Zero(13)), InvalidArgument);
}

TEST(Residues, NestedFitsMatchSubBasisOracle) {
  std::mt19937_64 rng(6);
  const auto mesh = build_mesh(80, 80, 9, 9);
  const auto b = build_basis(mesh, 15);
  const Eigen::VectorXd d = random_vector(rng, 81, 0.01);
  const auto r = residues(b, DeviationField(d));
  ASSERT_EQ(r.size(), 15u);
  for (std::size_t j = 1; j <= 15; ++j) {
    const Eigen::MatrixXd sub = b.modes().leftCols(static_cast<Eigen::Index>(j));
    const double oracle = (d - sub * normal_equations(sub, d)).norm();
    EXPECT_NEAR(r[j - 1], oracle, 1e-12 * d.norm()) << j;
  }
}

TEST(ResidueRatio, PropertiesOverRandomFields) {
  std::mt19937_64 rng(7);
  const auto mesh = build_mesh(80, 80, 9, 9);
  const auto b = build_basis(mesh, 16);
  for (int trial = 0; trial < 100; ++trial) {
    const DeviationField d(random_vector(rng, 81, 0.01));
    EXPECT_NEAR(*residue_ratio(b, d, 16), 1.0, 1e-15);
    double prev = 1e300;
    for (std::size_t m = 3; m <= 16; ++m) {
      const double rho = *residue_ratio(b, d, m);
      EXPECT_GE(rho, 1.0 - 1e-15);
      EXPECT_LE(rho, prev * (1 + 1e-15));
      prev = rho;
    }
  }
}

TEST(ResidueRatio, UndefinedForSpannedField) {
  const auto mesh = build_mesh(80, 80, 9, 9);
  const auto b = build_basis(mesh, 10);
  const DeviationField d(b.modes().col(3));
  EXPECT_FALSE(residue_ratio(b, d, 3).has_value());
  EXPECT_GT(residues(b, d)[2], 0.1);
  EXPECT_THROW((void)residue_ratio(b, d, 2), InvalidArgument);
  EXPECT_THROW((void)residue_ratio(b, d, 11), InvalidArgument);
}

TEST(RigidSdt, Examples) {
  const auto mesh = build_mesh(100, 80, 5, 5);
  const auto t = rigid_to_sdt(0.01, 0.0, 0.0, mesh, {0.0, 0.0});
  EXPECT_DOUBLE_EQ(t.tz, 0.01);
  EXPECT_DOUBLE_EQ(t.rx, 0.0);
  EXPECT_DOUBLE_EQ(t.ry, 0.0);
  EXPECT_DOUBLE_EQ(rigid_to_sdt(0.0, 0.02, 0.0, mesh, {0.0, 0.0}).rx, 5e-4);
  EXPECT_THROW(rigid_to_sdt(0, 0, 0, mesh, {60.0, 0.0}), InvalidArgument);
}

TEST(RigidSdt, FieldLevelEqualityAtCorner) {
  // The torsor expressed at a corner describes the same plane motion as the
  // rigid modal reconstruction.
  const auto mesh = build_mesh(100, 80, 5, 5);
  const auto b = build_basis(mesh, 3);
  const Eigen::Vector3d c(0.003, -0.004, 0.01);
  const auto field = reconstruct(b, c);
  const Point2 a{50.0, 40.0};
  const auto t = rigid_to_sdt(c[0], c[1], c[2], mesh, a);
  EXPECT_EQ(t.at, a);
  for (std::size_t n = 0; n < mesh.size(); ++n) {
    EXPECT_NEAR(t.displacement(mesh.nodes[n]), field.values[static_cast<Eigen::Index>(n)], 1e-15);
  }
}

TEST(RigidSdt, RoundTripRandom) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ux(-50.0, 50.0), uy(-40.0, 40.0), v(-1e-2, 1e-2);
  const auto mesh = build_mesh(100, 80, 3, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    const Torsor t{v(rng), v(rng) / 40, v(rng) / 50, {ux(rng), uy(rng)}};
    const auto c = sdt_to_rigid(t, mesh);
    const auto back = rigid_to_sdt(c[0], c[1], c[2], mesh, t.at);
    EXPECT_NEAR(back.tz, t.tz, 1e-12 * 0.01 + 1e-16);
    EXPECT_NEAR(back.rx, t.rx, 1e-12 * std::abs(t.rx) + 1e-18);
    EXPECT_NEAR(back.ry, t.ry, 1e-12 * std::abs(t.ry) + 1e-18);
  }
}

TEST(RigidSdt, CornerNodesMatchTransportFormula) {
  const auto mesh = build_mesh(100, 80, 6, 4);
  const auto b = build_basis(mesh, 3);
  const Eigen::Vector3d c(-0.002, 0.006, 0.004);
  const auto field = reconstruct(b, c);
  const auto w = corner_deviations(rigid_to_sdt(c[0], c[1], c[2], mesh, {0.0, 0.0}), mesh.geometry());
  const std::array<std::size_t, 4> corner_nodes = {0, mesh.nx - 1, mesh.size() - mesh.nx, mesh.size() - 1};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(w[i], field.values[static_cast<Eigen::Index>(corner_nodes[i])], 1e-15);
  }
}
