#pragma once

#include <Eigen/Core>
#include <Eigen/Sparse>
#include <cmath>
#include <span>
#include <vector>

#include "dpcg/error.hpp"
#include "dpcg/fe_space.hpp"

namespace dpcg {

using Matrix2 = Eigen::Matrix2d;

/// Regularized double-phase flux (|xi|^2+eps^2)^{(p-2)/2} xi + mu (|xi|^2+eps^2)^{(q-2)/2} xi,
/// with mu sampled at domain quadrature points (empty = zero).
struct DoublePhaseFlux {
  double p = 2.0;
  double q = 2.0;
  std::vector<double> mu;
  double epsilon_reg = 0.0;

  [[nodiscard]] double weight(std::size_t k) const { return mu.empty() ? 0.0 : mu[k]; }
};

namespace detail {

/// (s)^{(r-2)/2} with s = |xi|^2 + eps^2; 0 at s = 0 for r > 2, undefined-as-zero otherwise.
inline double power_factor(double s, double r) {
  if (r == 2.0) return 1.0;
  if (s == 0.0) return 0.0;
  return std::pow(s, 0.5 * (r - 2.0));
}

}  // namespace detail

/// Flux at domain quadrature point k for gradient xi.
inline Point flux(std::size_t k, const Point& xi, const DoublePhaseFlux& f) {
  const double s = dot(xi, xi) + f.epsilon_reg * f.epsilon_reg;
  double c = detail::power_factor(s, f.p);
  const double m = f.weight(k);
  if (m != 0.0) c += m * detail::power_factor(s, f.q);
  return {c * xi[0], c * xi[1]};
}

/// Exact derivative of flux() with respect to xi.
inline Matrix2 flux_jacobian(std::size_t k, const Point& xi, const DoublePhaseFlux& f) {
  const double s = dot(xi, xi) + f.epsilon_reg * f.epsilon_reg;
  Eigen::Vector2d x(xi[0], xi[1]);
  Matrix2 j = Matrix2::Zero();
  auto add = [&](double r, double weight) {
    if (r == 2.0) {
      j += weight * Matrix2::Identity();
      return;
    }
    if (s == 0.0) return;
    j += weight * (std::pow(s, 0.5 * (r - 2.0)) * Matrix2::Identity() +
                   (r - 2.0) * std::pow(s, 0.5 * (r - 4.0)) * (x * x.transpose()));
  };
  add(f.p, 1.0);
  const double m = f.weight(k);
  if (m != 0.0) add(f.q, m);
  return j;
}

/// primary - coefficient * secondary.
struct CompetingPair {
  DoublePhaseFlux primary;
  DoublePhaseFlux secondary;
  double coefficient = 0.0;

  [[nodiscard]] Point flux(std::size_t k, const Point& xi) const {
    const Point a = dpcg::flux(k, xi, primary);
    if (coefficient == 0.0) return a;
    const Point b = dpcg::flux(k, xi, secondary);
    return {a[0] - coefficient * b[0], a[1] - coefficient * b[1]};
  }

  [[nodiscard]] Matrix2 jacobian(std::size_t k, const Point& xi) const {
    Matrix2 j = flux_jacobian(k, xi, primary);
    if (coefficient != 0.0) j -= coefficient * flux_jacobian(k, xi, secondary);
    return j;
  }
};

/// Weak form of one competing operator: component k is int a(grad w) . grad phi_k
/// over the free dofs of the space.
inline Vector assemble_operator(std::span<const double> full, const CompetingPair& pair, const FESpace& space) {
  const Mesh& m = space.mesh();
  const auto grads = gradient_at_quadrature(full, space);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(space.dof_count()));
  const auto& pts = space.domain_points();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Point a = pair.flux(k, grads[k]);
    const auto& bg = space.basis_gradients(pts[k].cell);
    const Cell& cell = m.cells()[pts[k].cell];
    for (std::size_t i = 0; i < m.vertices_per_cell(); ++i) {
      const auto d = space.dof_of_vertex(cell[i]);
      if (d >= 0) out[d] += pts[k].weight * dot(a, bg[i]);
    }
  }
  return out;
}

/// Galerkin matrix of the flux derivative for one competing operator.
inline SparseMatrix assemble_operator_jacobian(std::span<const double> full, const CompetingPair& pair,
                                               const FESpace& space, Eigen::Index offset = 0,
                                               std::vector<Eigen::Triplet<double>>* sink = nullptr) {
  const Mesh& m = space.mesh();
  const auto grads = gradient_at_quadrature(full, space);
  std::vector<Eigen::Triplet<double>> local;
  auto& triplets = sink ? *sink : local;
  const auto& pts = space.domain_points();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Matrix2 j = pair.jacobian(k, grads[k]);
    const auto& bg = space.basis_gradients(pts[k].cell);
    const Cell& cell = m.cells()[pts[k].cell];
    for (std::size_t a = 0; a < m.vertices_per_cell(); ++a) {
      const auto da = space.dof_of_vertex(cell[a]);
      if (da < 0) continue;
      for (std::size_t b = 0; b < m.vertices_per_cell(); ++b) {
        const auto db = space.dof_of_vertex(cell[b]);
        if (db < 0) continue;
        const Eigen::Vector2d gb(bg[b][0], bg[b][1]);
        const Eigen::Vector2d jg = j * gb;
        triplets.emplace_back(offset + da, offset + db, pts[k].weight * (jg[0] * bg[a][0] + jg[1] * bg[a][1]));
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(space.dof_count());
  SparseMatrix out(n, n);
  if (!sink) out.setFromTriplets(local.begin(), local.end());
  return out;
}

/// D(u, v) as a dual vector [D1 u; D2 v] on the free dofs of both unknowns.
inline Vector assemble_residual_D(const Vector& u, const Vector& v, const CompetingPair& pair_u,
                                  const CompetingPair& pair_v, const FESpace& space) {
  const auto n = static_cast<Eigen::Index>(space.dof_count());
  Vector out(2 * n);
  out.head(n) = assemble_operator(space.expand(u), pair_u, space);
  out.tail(n) = assemble_operator(space.expand(v), pair_v, space);
  return out;
}

/// Derivative of assemble_residual_D; block-diagonal since D is uncoupled.
inline SparseMatrix assemble_jacobian_D(const Vector& u, const Vector& v, const CompetingPair& pair_u,
                                        const CompetingPair& pair_v, const FESpace& space) {
  const auto n = static_cast<Eigen::Index>(space.dof_count());
  std::vector<Eigen::Triplet<double>> triplets;
  assemble_operator_jacobian(space.expand(u), pair_u, space, 0, &triplets);
  assemble_operator_jacobian(space.expand(v), pair_v, space, n, &triplets);
  SparseMatrix out(2 * n, 2 * n);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

/// Default regularization length: 1e-8 times the domain diameter.
inline double default_epsilon_reg(const Mesh& mesh) { return 1e-8 * mesh.diameter(); }

/// Builds the u- and v-pairs for given exponents, weight samples and coefficients.
inline CompetingPair make_pair(double p_primary, double q_primary, std::vector<double> mu_primary,
                               double p_secondary, double q_secondary, std::vector<double> mu_secondary,
                               double coefficient, double epsilon_reg) {
  return CompetingPair{DoublePhaseFlux{p_primary, q_primary, std::move(mu_primary), epsilon_reg},
                       DoublePhaseFlux{p_secondary, q_secondary, std::move(mu_secondary), epsilon_reg},
                       coefficient};
}

}  // namespace dpcg
