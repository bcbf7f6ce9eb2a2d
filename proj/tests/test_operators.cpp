#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "dpcg/operators.hpp"

using namespace dpcg;

namespace {

const auto D = BoundaryTag::Dirichlet;
const auto C = BoundaryTag::Contact;

DoublePhaseFlux make_flux(double p, double q, double mu, std::size_t n, double eps = 0.0) {
  return {p, q, std::vector<double>(n, mu), eps};
}

}  // namespace

TEST(Flux, Examples) {
  EXPECT_EQ(flux(0, {0.0, 0.0}, make_flux(3.0, 2.5, 1.0, 1)), (Point{0.0, 0.0}));
  const Point xi{0.7, -1.3};
  const Point id = flux(0, xi, make_flux(2.0, 3.0, 0.0, 1));
  EXPECT_EQ(id, xi);
  const Point f = flux(0, {2.0, 0.0}, make_flux(3.0, 2.0, 1.0, 1));
  EXPECT_NEAR(f[0], 6.0, 1e-14);
  EXPECT_EQ(f[1], 0.0);
}

TEST(Flux, JacobianExamples) {
  EXPECT_TRUE(flux_jacobian(0, {0.3, 0.4}, make_flux(2.0, 3.0, 0.0, 1)).isApprox(Matrix2::Identity()));
  const double eps = 0.01;
  const Matrix2 j = flux_jacobian(0, {0.0, 0.0}, make_flux(3.5, 3.0, 0.0, 1, eps));
  EXPECT_TRUE(j.isApprox(std::pow(eps, 1.5) * Matrix2::Identity(), 1e-14));
}

TEST(Flux, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 eng(17);
  std::normal_distribution<double> n;
  for (const double p : {1.5, 2.0, 3.5}) {
    const auto f = make_flux(p, p + 0.7, 0.6, 1, 1e-8);
    for (int t = 0; t < 20; ++t) {
      const Point xi{n(eng), n(eng)};
      const Matrix2 j = flux_jacobian(0, xi, f);
      const double h = 1e-6;
      Matrix2 fd;
      for (int c = 0; c < 2; ++c) {
        Point a = xi, b = xi;
        a[c] += h;
        b[c] -= h;
        const Point fa = flux(0, a, f), fb = flux(0, b, f);
        fd(0, c) = (fa[0] - fb[0]) / (2 * h);
        fd(1, c) = (fa[1] - fb[1]) / (2 * h);
      }
      EXPECT_LT((j - fd).norm() / j.norm(), 1e-5) << "p " << p;
    }
  }
}

TEST(Flux, OddAndMonotone) {
  std::mt19937_64 eng(5);
  std::normal_distribution<double> n;
  const CompetingPair pair{make_flux(2.5, 3.0, 0.5, 1, 1e-8), make_flux(1.5, 2.0, 0.2, 1, 1e-8), -0.5};
  for (int t = 0; t < 100; ++t) {
    const Point a{n(eng), n(eng)}, b{n(eng), n(eng)};
    const Point fa = pair.flux(0, a), fb = pair.flux(0, b);
    const Point fna = pair.flux(0, {-a[0], -a[1]});
    EXPECT_NEAR(fna[0], -fa[0], 1e-14 * (1 + std::abs(fa[0])));
    EXPECT_NEAR(fna[1], -fa[1], 1e-14 * (1 + std::abs(fa[1])));
    EXPECT_GE((fa[0] - fb[0]) * (a[0] - b[0]) + (fa[1] - fb[1]) * (a[1] - b[1]), -1e-12);
  }
}

TEST(Operator, HatPairings) {
  const FESpace s(std::make_shared<const Mesh>(make_interval(0.0, 1.0, 2, D, C)));
  const std::size_t nq = s.domain_points().size();
  Vector u = Vector::Zero(static_cast<Eigen::Index>(s.dof_count()));
  u[s.dof_of_vertex(1)] = 1.0;
  const Vector zero = Vector::Zero(u.size());
  const CompetingPair plain{make_flux(2.0, 3.0, 0.0, nq), make_flux(1.5, 2.0, 0.0, nq), 0.0};
  const CompetingPair competing{make_flux(2.0, 3.0, 0.0, nq), make_flux(1.5, 2.0, 0.0, nq), 1.0};
  const auto n = u.size();
  EXPECT_NEAR(assemble_residual_D(u, zero, plain, plain, s).head(n).dot(u), 4.0, 1e-14);
  EXPECT_NEAR(assemble_residual_D(u, zero, competing, plain, s).head(n).dot(u), 4.0 - std::pow(2.0, 1.5), 1e-14);
  EXPECT_EQ(assemble_residual_D(zero, zero, competing, competing, s).norm(), 0.0);
}

TEST(Operator, StiffnessAndDefiniteness) {
  const FESpace s(std::make_shared<const Mesh>(make_interval(0.0, 1.0, 4, D, C)));
  const std::size_t nq = s.domain_points().size();
  const CompetingPair plain{make_flux(2.0, 3.0, 0.0, nq), make_flux(1.5, 2.0, 0.0, nq), 0.0};
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(s.dof_count()));
  const Eigen::MatrixXd k = Eigen::MatrixXd(assemble_jacobian_D(zero, zero, plain, plain, s));
  const double h = 0.25;
  EXPECT_NEAR(k(0, 0), 2.0 / h, 1e-12);
  EXPECT_NEAR(k(0, 1), -1.0 / h, 1e-12);
  EXPECT_NEAR(k(4, 5), -1.0 / h, 1e-12);
  EXPECT_EQ(k(0, 4), 0.0);  // uncoupled blocks

  const CompetingPair weighted{make_flux(3.0, 3.5, 0.5, nq, 1e-3), make_flux(1.5, 2.0, 0.0, nq, 1e-3), 0.0};
  const Eigen::MatrixXd w = Eigen::MatrixXd(assemble_jacobian_D(zero, zero, weighted, weighted, s));
  EXPECT_TRUE(w.isApprox(w.transpose()));
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(w).eigenvalues().minCoeff(), 0.0);
}

TEST(Operator, JacobianMatchesFiniteDifferences2D) {
  const FESpace s(std::make_shared<const Mesh>(make_rectangle(0.0, 1.0, 0.0, 1.0, 3, 3)));
  const std::size_t nq = s.domain_points().size();
  const CompetingPair pu{make_flux(2.4, 2.9, 0.3, nq, 1e-8), make_flux(1.6, 2.2, 0.1, nq, 1e-8), 0.3};
  const CompetingPair pv{make_flux(1.8, 2.5, 0.2, nq, 1e-8), make_flux(1.3, 1.9, 0.1, nq, 1e-8), -0.7};
  std::mt19937_64 eng(2);
  std::normal_distribution<double> n;
  const auto m = static_cast<Eigen::Index>(s.dof_count());
  Vector u(m), v(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    u[i] = n(eng);
    v[i] = n(eng);
  }
  const Eigen::MatrixXd j = Eigen::MatrixXd(assemble_jacobian_D(u, v, pu, pv, s));
  Eigen::MatrixXd fd(2 * m, 2 * m);
  const double h = 1e-6;
  for (Eigen::Index c = 0; c < 2 * m; ++c) {
    Vector ua = u, ub = u, va = v, vb = v;
    if (c < m) {
      ua[c] += h;
      ub[c] -= h;
    } else {
      va[c - m] += h;
      vb[c - m] -= h;
    }
    fd.col(c) = (assemble_residual_D(ua, va, pu, pv, s) - assemble_residual_D(ub, vb, pu, pv, s)) / (2 * h);
  }
  EXPECT_LT((j - fd).norm() / j.norm(), 1e-5);
}

TEST(Operator, MonotoneWhenCoefficientsNonpositive) {
  const FESpace s(std::make_shared<const Mesh>(make_rectangle(0.0, 1.0, 0.0, 1.0, 3, 3)));
  const std::size_t nq = s.domain_points().size();
  const CompetingPair pu{make_flux(2.4, 2.9, 0.3, nq, 1e-8), make_flux(1.6, 2.2, 0.1, nq, 1e-8), -0.4};
  const CompetingPair pv{make_flux(1.8, 2.5, 0.2, nq, 1e-8), make_flux(1.3, 1.9, 0.1, nq, 1e-8), -1.0};
  std::mt19937_64 eng(5);
  std::normal_distribution<double> n;
  const auto m = static_cast<Eigen::Index>(s.dof_count());
  auto draw = [&] {
    Vector x(m);
    for (Eigen::Index i = 0; i < m; ++i) x[i] = n(eng);
    return x;
  };
  for (int t = 0; t < 50; ++t) {
    const Vector u = draw(), v = draw(), w = draw(), x = draw();
    const Vector d = assemble_residual_D(u, v, pu, pv, s) - assemble_residual_D(w, x, pu, pv, s);
    Vector diff(2 * m);
    diff << u - w, v - x;
    EXPECT_GE(d.dot(diff), -1e-12 * d.norm() * diff.norm());
  }
}
