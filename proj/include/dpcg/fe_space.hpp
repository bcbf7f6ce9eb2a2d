#pragma once

#include <Eigen/Core>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "dpcg/error.hpp"
#include "dpcg/mesh.hpp"
#include "dpcg/quadrature.hpp"

namespace dpcg {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using ScalarField = std::function<double(const Point&)>;

/// Domain quadrature point with the P1 shape values of its cell.
struct DomainPoint {
  Point x{};
  double weight = 0.0;
  std::size_t cell = 0;
  std::array<double, 3> shape{};
};

/// Quadrature point on a contact facet.
struct ContactPoint {
  Point x{};
  double weight = 0.0;
  std::size_t facet = 0;
  std::array<std::size_t, 2> vertices{};
  std::array<double, 2> shape{};
};

/// Continuous P1 space on a mesh with the Dirichlet vertices eliminated.
///
/// "Full" nodal vectors have one entry per mesh vertex (constrained entries
/// are zero for members of the space); "reduced" vectors hold the free dofs.
class FESpace {
 public:
  explicit FESpace(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
    if (!mesh_) throw InvalidInput("FESpace needs a mesh");
    build_dofs();
    build_gradients();
    build_domain_points();
    build_contact_points();
  }

  [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
  [[nodiscard]] const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  [[nodiscard]] int dim() const { return mesh_->dim(); }
  [[nodiscard]] std::size_t dof_count() const { return free_.size(); }
  [[nodiscard]] std::size_t node_count() const { return mesh_->num_vertices(); }
  [[nodiscard]] std::span<const std::size_t> free_dofs() const { return free_; }
  /// Reduced index of a vertex, or -1 when it lies on the Dirichlet part.
  [[nodiscard]] std::ptrdiff_t dof_of_vertex(std::size_t v) const { return dof_of_vertex_[v]; }
  [[nodiscard]] bool is_constrained(std::size_t v) const { return dof_of_vertex_[v] < 0; }

  [[nodiscard]] std::size_t points_per_cell() const { return points_per_cell_; }
  [[nodiscard]] std::size_t points_per_facet() const { return points_per_facet_; }
  [[nodiscard]] const std::vector<DomainPoint>& domain_points() const { return domain_points_; }
  [[nodiscard]] const std::vector<ContactPoint>& contact_points() const { return contact_points_; }
  /// Index of the first contact point on facet f, or -1 if f is not a contact facet.
  [[nodiscard]] std::ptrdiff_t first_contact_point(std::size_t f) const { return first_contact_point_[f]; }
  /// Constant P1 basis gradients on cell c, one per local vertex.
  [[nodiscard]] const std::array<Point, 3>& basis_gradients(std::size_t c) const { return gradients_[c]; }

  [[nodiscard]] std::vector<double> expand(const Vector& reduced) const {
    if (static_cast<std::size_t>(reduced.size()) != free_.size())
      throw InvalidInput("reduced vector size does not match the space");
    std::vector<double> full(node_count(), 0.0);
    for (std::size_t k = 0; k < free_.size(); ++k) full[free_[k]] = reduced[static_cast<Eigen::Index>(k)];
    return full;
  }

  [[nodiscard]] Vector restrict_to_free(std::span<const double> full) const {
    check_full(full);
    Vector reduced(static_cast<Eigen::Index>(free_.size()));
    for (std::size_t k = 0; k < free_.size(); ++k) reduced[static_cast<Eigen::Index>(k)] = full[free_[k]];
    return reduced;
  }

  void check_full(std::span<const double> full) const {
    if (full.size() != node_count()) throw InvalidInput("nodal vector size does not match the mesh");
  }

 private:
  void build_dofs() {
    const Mesh& m = *mesh_;
    std::vector<char> constrained(m.num_vertices(), 0);
    for (const Facet& f : m.facets())
      if (f.tag == BoundaryTag::Dirichlet) constrained[f.vertices[0]] = constrained[f.vertices[1]] = 1;
    dof_of_vertex_.assign(m.num_vertices(), -1);
    for (std::size_t v = 0; v < m.num_vertices(); ++v) {
      if (constrained[v]) continue;
      dof_of_vertex_[v] = static_cast<std::ptrdiff_t>(free_.size());
      free_.push_back(v);
    }
  }

  void build_gradients() {
    const Mesh& m = *mesh_;
    gradients_.resize(m.num_cells());
    for (std::size_t c = 0; c < m.num_cells(); ++c) {
      const Cell& cell = m.cells()[c];
      const Point& a = m.vertices()[cell[0]];
      const Point& b = m.vertices()[cell[1]];
      if (m.dim() == 1) {
        const double inv = 1.0 / (b[0] - a[0]);
        gradients_[c] = {Point{-inv, 0.0}, Point{inv, 0.0}, Point{0.0, 0.0}};
      } else {
        const Point& d = m.vertices()[cell[2]];
        const double j00 = b[0] - a[0], j01 = d[0] - a[0];
        const double j10 = b[1] - a[1], j11 = d[1] - a[1];
        const double det = j00 * j11 - j01 * j10;
        // Rows of J^{-T} applied to reference gradients (-1,-1), (1,0), (0,1).
        const Point g1{j11 / det, -j01 / det};
        const Point g2{-j10 / det, j00 / det};
        gradients_[c] = {Point{-g1[0] - g2[0], -g1[1] - g2[1]}, g1, g2};
      }
    }
  }

  void build_domain_points() {
    const Mesh& m = *mesh_;
    const QuadratureRule& rule =
        m.dim() == 1 ? quadrature::segment_gauss2() : quadrature::triangle_edge_midpoint();
    points_per_cell_ = rule.size();
    domain_points_.reserve(m.num_cells() * rule.size());
    for (std::size_t c = 0; c < m.num_cells(); ++c) {
      const Cell& cell = m.cells()[c];
      const double vol = m.cell_measure(c);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        DomainPoint p;
        p.cell = c;
        p.weight = rule.weights[q] * vol;
        p.shape = rule.barycentric[q];
        if (m.dim() == 1) p.shape[2] = 0.0;
        for (std::size_t i = 0; i < m.vertices_per_cell(); ++i) {
          const Point& v = m.vertices()[cell[i]];
          p.x[0] += p.shape[i] * v[0];
          p.x[1] += p.shape[i] * v[1];
        }
        domain_points_.push_back(p);
      }
    }
  }

  void build_contact_points() {
    const Mesh& m = *mesh_;
    first_contact_point_.assign(m.facets().size(), -1);
    points_per_facet_ = m.dim() == 1 ? 1 : quadrature::segment_gauss2().size();
    for (std::size_t f = 0; f < m.facets().size(); ++f) {
      const Facet& facet = m.facets()[f];
      if (facet.tag != BoundaryTag::Contact) continue;
      first_contact_point_[f] = static_cast<std::ptrdiff_t>(contact_points_.size());
      if (m.dim() == 1) {
        // Counting measure at the endpoint.
        ContactPoint p;
        p.facet = f;
        p.vertices = facet.vertices;
        p.x = m.vertices()[facet.vertices[0]];
        p.weight = 1.0;
        p.shape = {1.0, 0.0};
        contact_points_.push_back(p);
        continue;
      }
      const QuadratureRule& rule = quadrature::segment_gauss2();
      const double len = m.facet_measure(f);
      const Point& a = m.vertices()[facet.vertices[0]];
      const Point& b = m.vertices()[facet.vertices[1]];
      for (std::size_t q = 0; q < rule.size(); ++q) {
        ContactPoint p;
        p.facet = f;
        p.vertices = facet.vertices;
        p.shape = {rule.barycentric[q][0], rule.barycentric[q][1]};
        p.weight = rule.weights[q] * len;
        p.x = {p.shape[0] * a[0] + p.shape[1] * b[0], p.shape[0] * a[1] + p.shape[1] * b[1]};
        contact_points_.push_back(p);
      }
    }
  }

  std::shared_ptr<const Mesh> mesh_;
  std::vector<std::ptrdiff_t> dof_of_vertex_;
  std::vector<std::size_t> free_;
  std::vector<std::array<Point, 3>> gradients_;
  std::size_t points_per_cell_ = 0;
  std::size_t points_per_facet_ = 0;
  std::vector<DomainPoint> domain_points_;
  std::vector<ContactPoint> contact_points_;
  std::vector<std::ptrdiff_t> first_contact_point_;
};

inline double norm(const Point& x) { return std::hypot(x[0], x[1]); }
inline double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }

inline double integrate_domain(std::span<const double> f, const FESpace& space) {
  const auto& pts = space.domain_points();
  if (f.size() != pts.size()) throw InvalidInput("integrand does not match the domain quadrature layout");
  double sum = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) sum += pts[i].weight * f[i];
  return sum;
}

/// Integral over the contact part of the boundary.
inline double integrate_boundary2(std::span<const double> f, const FESpace& space) {
  const auto& pts = space.contact_points();
  if (f.size() != pts.size()) throw InvalidInput("integrand does not match the contact quadrature layout");
  double sum = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) sum += pts[i].weight * f[i];
  return sum;
}

inline std::vector<double> domain_weights(const FESpace& space) {
  std::vector<double> w;
  w.reserve(space.domain_points().size());
  for (const auto& p : space.domain_points()) w.push_back(p.weight);
  return w;
}

inline std::vector<double> contact_weights(const FESpace& space) {
  std::vector<double> w;
  w.reserve(space.contact_points().size());
  for (const auto& p : space.contact_points()) w.push_back(p.weight);
  return w;
}

/// Values of a nodal field at the domain quadrature points.
inline std::vector<double> values_at_quadrature(std::span<const double> nodal, const FESpace& space) {
  space.check_full(nodal);
  const Mesh& m = space.mesh();
  std::vector<double> out;
  out.reserve(space.domain_points().size());
  for (const auto& p : space.domain_points()) {
    const Cell& cell = m.cells()[p.cell];
    double s = 0.0;
    for (std::size_t i = 0; i < m.vertices_per_cell(); ++i) s += p.shape[i] * nodal[cell[i]];
    out.push_back(s);
  }
  return out;
}

/// Values of a nodal field at the contact quadrature points.
inline std::vector<double> contact_values(std::span<const double> nodal, const FESpace& space) {
  space.check_full(nodal);
  std::vector<double> out;
  out.reserve(space.contact_points().size());
  for (const auto& p : space.contact_points())
    out.push_back(p.shape[0] * nodal[p.vertices[0]] + p.shape[1] * nodal[p.vertices[1]]);
  return out;
}

/// Piecewise-constant gradient, one vector per cell.
inline std::vector<Point> cell_gradients(std::span<const double> nodal, const FESpace& space) {
  space.check_full(nodal);
  const Mesh& m = space.mesh();
  std::vector<Point> out(m.num_cells(), Point{0.0, 0.0});
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto& g = space.basis_gradients(c);
    for (std::size_t i = 0; i < m.vertices_per_cell(); ++i) {
      const double value = nodal[m.cells()[c][i]];
      out[c][0] += value * g[i][0];
      out[c][1] += value * g[i][1];
    }
  }
  return out;
}

/// Gradient of the P1 interpolant at each domain quadrature point.
inline std::vector<Point> gradient_at_quadrature(std::span<const double> nodal, const FESpace& space) {
  const auto per_cell = cell_gradients(nodal, space);
  std::vector<Point> out;
  out.reserve(space.domain_points().size());
  for (const auto& p : space.domain_points()) out.push_back(per_cell[p.cell]);
  return out;
}

/// Nodal interpolant of f (all vertices, constraints not applied).
inline std::vector<double> interpolate(const ScalarField& f, const FESpace& space) {
  std::vector<double> out;
  out.reserve(space.node_count());
  for (const Point& v : space.mesh().vertices()) out.push_back(f(v));
  return out;
}

inline std::vector<double> sample_domain(const ScalarField& f, const FESpace& space) {
  std::vector<double> out;
  out.reserve(space.domain_points().size());
  for (const auto& p : space.domain_points()) out.push_back(f(p.x));
  return out;
}

inline std::vector<double> sample_contact(const ScalarField& f, const FESpace& space) {
  std::vector<double> out;
  out.reserve(space.contact_points().size());
  for (const auto& p : space.contact_points()) out.push_back(f(p.x));
  return out;
}

/// L2 distance between a nodal field and a function, with a high-order rule.
inline double l2_error(std::span<const double> nodal, const FESpace& space, const ScalarField& exact) {
  space.check_full(nodal);
  const Mesh& m = space.mesh();
  const QuadratureRule& rule =
      m.dim() == 1 ? quadrature::segment_gauss5() : quadrature::triangle_seven_point();
  double sum = 0.0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const Cell& cell = m.cells()[c];
    const double vol = m.cell_measure(c);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      Point x{0.0, 0.0};
      double uh = 0.0;
      for (std::size_t i = 0; i < m.vertices_per_cell(); ++i) {
        const double lam = rule.barycentric[q][i];
        x[0] += lam * m.vertices()[cell[i]][0];
        x[1] += lam * m.vertices()[cell[i]][1];
        uh += lam * nodal[cell[i]];
      }
      const double e = uh - exact(x);
      sum += rule.weights[q] * vol * e * e;
    }
  }
  return std::sqrt(sum);
}

/// P1 Laplace stiffness matrix on the free dofs (SPD since the Dirichlet part is nonempty).
inline SparseMatrix laplace_stiffness(const FESpace& space) {
  const Mesh& m = space.mesh();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(m.num_cells() * 9);
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto& g = space.basis_gradients(c);
    const double vol = m.cell_measure(c);
    for (std::size_t i = 0; i < m.vertices_per_cell(); ++i) {
      const auto di = space.dof_of_vertex(m.cells()[c][i]);
      if (di < 0) continue;
      for (std::size_t j = 0; j < m.vertices_per_cell(); ++j) {
        const auto dj = space.dof_of_vertex(m.cells()[c][j]);
        if (dj < 0) continue;
        triplets.emplace_back(di, dj, vol * dot(g[i], g[j]));
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(space.dof_count());
  SparseMatrix k(n, n);
  k.setFromTriplets(triplets.begin(), triplets.end());
  return k;
}

/// Nodal interpolation from a mesh onto its uniform refinement (exact for P1 fields).
inline std::vector<double> prolongate(std::span<const double> coarse, const FESpace& from, const FESpace& to) {
  const Mesh& cm = from.mesh();
  const Mesh& fm = to.mesh();
  if (fm.level() != cm.level() + 1 || fm.coarse_vertex_count() != cm.num_vertices() || fm.dim() != cm.dim())
    throw InvalidInput("prolongate: target space is not the refinement of the source space");
  for (std::size_t v = 0; v < cm.num_vertices(); ++v)
    if (fm.vertices()[v] != cm.vertices()[v])
      throw InvalidInput("prolongate: target space is not the refinement of the source space");
  from.check_full(coarse);
  std::vector<double> fine(fm.num_vertices());
  std::copy(coarse.begin(), coarse.end(), fine.begin());
  const std::size_t offset = fm.coarse_vertex_count();
  const auto& parents = fm.midpoint_parents();
  for (std::size_t i = 0; i < parents.size(); ++i)
    fine[offset + i] = 0.5 * (coarse[parents[i][0]] + coarse[parents[i][1]]);
  return fine;
}

/// Nested P1 spaces obtained by uniform refinement of a base mesh.
class GalerkinHierarchy {
 public:
  GalerkinHierarchy(const Mesh& base, std::size_t levels) {
    if (levels == 0) throw InvalidInput("hierarchy needs at least one level");
    auto mesh = std::make_shared<const Mesh>(base);
    spaces_.push_back(std::make_shared<const FESpace>(mesh));
    for (std::size_t n = 1; n < levels; ++n) {
      mesh = std::make_shared<const Mesh>(refine(*mesh));
      spaces_.push_back(std::make_shared<const FESpace>(mesh));
    }
  }

  [[nodiscard]] std::size_t size() const { return spaces_.size(); }
  [[nodiscard]] const FESpace& space(std::size_t level) const { return *spaces_.at(level); }
  [[nodiscard]] const FESpace& finest() const { return *spaces_.back(); }

  /// Prolongate a full nodal vector from level `from` to level `to` >= from.
  [[nodiscard]] std::vector<double> prolongate(std::span<const double> field, std::size_t from,
                                               std::size_t to) const {
    if (to < from || to >= size()) throw InvalidInput("prolongate: bad level range");
    std::vector<double> out(field.begin(), field.end());
    for (std::size_t n = from; n < to; ++n) out = dpcg::prolongate(out, space(n), space(n + 1));
    return out;
  }

  /// Transpose of prolongate: maps a dual (load) vector from level `from` down to level `to`.
  [[nodiscard]] std::vector<double> restrict_dual(std::span<const double> dual, std::size_t from,
                                                  std::size_t to) const {
    if (to > from || from >= size()) throw InvalidInput("restrict_dual: bad level range");
    space(from).check_full(dual);
    std::vector<double> out(dual.begin(), dual.end());
    for (std::size_t n = from; n > to; --n) {
      const Mesh& fm = space(n).mesh();
      std::vector<double> coarse(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(fm.coarse_vertex_count()));
      const std::size_t offset = fm.coarse_vertex_count();
      const auto& parents = fm.midpoint_parents();
      for (std::size_t i = 0; i < parents.size(); ++i) {
        coarse[parents[i][0]] += 0.5 * out[offset + i];
        coarse[parents[i][1]] += 0.5 * out[offset + i];
      }
      out = std::move(coarse);
    }
    return out;
  }

  /// Cell of level `ancestor_level` containing cell `cell` of level `level`.
  [[nodiscard]] std::size_t ancestor_cell(std::size_t level, std::size_t cell, std::size_t ancestor_level) const {
    const std::size_t bits = space(0).dim() == 1 ? 1 : 2;
    return cell >> (bits * (level - ancestor_level));
  }

  /// Facet of level `ancestor_level` containing facet `facet` of level `level`.
  [[nodiscard]] std::size_t ancestor_facet(std::size_t level, std::size_t facet, std::size_t ancestor_level) const {
    if (space(0).dim() == 1) return facet;
    return facet >> (level - ancestor_level);
  }

 private:
  std::vector<std::shared_ptr<const FESpace>> spaces_;
};

}  // namespace dpcg
