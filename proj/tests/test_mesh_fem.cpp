#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dpcg/fe_space.hpp"
#include "dpcg/mesh.hpp"

using namespace dpcg;

namespace {

const auto D = BoundaryTag::Dirichlet;
const auto C = BoundaryTag::Contact;

std::shared_ptr<const Mesh> shared(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

Mesh single_triangle() {
  return Mesh(2, {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {{0, 1, 2}},
              {{{0, 1}, D}, {{1, 2}, C}, {{2, 0}, D}});
}

}  // namespace

TEST(Mesh, RefineCounts) {
  const Mesh m = refine(make_interval(0.0, 1.0, 2, D, C));
  EXPECT_EQ(m.num_cells(), 4U);
  EXPECT_EQ(m.num_vertices(), 5U);
  EXPECT_EQ(m.level(), 1);

  const Mesh t = refine(single_triangle());
  EXPECT_EQ(t.num_cells(), 4U);
  EXPECT_EQ(t.num_vertices(), 6U);
  EXPECT_EQ(t.facets().size(), 6U);
  EXPECT_NEAR(t.measure(), 0.5, 1e-15);
  EXPECT_EQ(t.count_facets(C), 2U);
}

TEST(Mesh, RefinementKeepsTagsAndCoarseVertices) {
  const Mesh base = make_rectangle(0.0, 2.0, 0.0, 1.0, 2, 1);
  const Mesh fine = refine(base);
  for (std::size_t v = 0; v < base.num_vertices(); ++v) EXPECT_EQ(fine.vertices()[v], base.vertices()[v]);
  EXPECT_EQ(fine.count_facets(C), 2 * base.count_facets(C));
  EXPECT_EQ(fine.count_facets(D), 2 * base.count_facets(D));
  EXPECT_NEAR(fine.measure(), 2.0, 1e-14);
}

TEST(Mesh, RejectsBrokenInput) {
  EXPECT_THROW(make_interval(0.0, 1.0, 2, D, D), InvalidInput);  // empty contact part
  EXPECT_THROW(make_interval(0.0, 1.0, 2, C, C), InvalidInput);  // empty Dirichlet part
  EXPECT_THROW(Mesh(2, {{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}, {}), InvalidInput);  // degenerate cell
  // Missing tag on one boundary edge.
  EXPECT_THROW(Mesh(2, {{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {{{0, 1}, D}, {{1, 2}, C}}), InvalidInput);
  EXPECT_THROW(parse_boundary_tag("NEUMANN"), InvalidInput);
}

TEST(Mesh, TextRoundTrip) {
  const Mesh m = refine(make_rectangle(0.0, 1.0, 0.0, 1.0, 2, 2));
  std::istringstream in(write_mesh_text(m));
  const Mesh back = read_mesh_text(in);
  EXPECT_EQ(back.vertices(), m.vertices());
  EXPECT_EQ(back.cells(), m.cells());
  ASSERT_EQ(back.facets().size(), m.facets().size());
  for (std::size_t f = 0; f < m.facets().size(); ++f) {
    EXPECT_EQ(back.facets()[f].vertices, m.facets()[f].vertices);
    EXPECT_EQ(back.facets()[f].tag, m.facets()[f].tag);
  }
  std::istringstream one_d("# comment\nDIMENSION 1\nVERTICES 3\n0\n0.5\n1\n\nCELLS 2\n0 1\n1 2\nFACETS 2\n0 DIRICHLET\n2 CONTACT\n");
  const Mesh m1 = read_mesh_text(one_d);
  EXPECT_EQ(m1.num_cells(), 2U);
  std::istringstream bad("DIMENSION 1\nVERTICES 2\n0\n");
  EXPECT_THROW(read_mesh_text(bad), InvalidInput);
}

TEST(FESpace, Integrals) {
  const FESpace s1(shared(make_interval(0.0, 1.0, 4, D, C)));
  const std::vector<double> ones(s1.domain_points().size(), 1.0);
  EXPECT_NEAR(integrate_domain(ones, s1), 1.0, 1e-15);
  const std::vector<double> cones(s1.contact_points().size(), 1.0);
  EXPECT_EQ(integrate_boundary2(cones, s1), 1.0);  // counting measure at x = 1

  RectangleTags tags;
  tags.top = D;
  tags.left = D;
  tags.bottom = D;
  tags.right = C;
  const FESpace s2(shared(make_rectangle(0.0, 1.0, 0.0, 1.0, 3, 3, tags)));
  const std::vector<double> ones2(s2.contact_points().size(), 1.0);
  EXPECT_NEAR(integrate_boundary2(ones2, s2), 1.0, 1e-15);  // one unit edge

  // Exact for z on (0,1) squared: the two-point Gauss rule integrates cubics.
  const auto zz = sample_domain([](const Point& z) { return z[0] * z[0]; }, s1);
  EXPECT_NEAR(integrate_domain(zz, s1), 1.0 / 3.0, 1e-15);
}

TEST(FESpace, Gradients) {
  const FESpace s(shared(make_interval(0.0, 1.0, 2, D, C)));
  std::vector<double> hat(s.node_count(), 0.0);
  hat[1] = 1.0;
  const auto g = cell_gradients(hat, s);
  EXPECT_NEAR(g[0][0], 2.0, 1e-15);
  EXPECT_NEAR(g[1][0], -2.0, 1e-15);

  const FESpace t(shared(refine(make_rectangle(0.0, 1.0, 0.0, 2.0, 2, 2))));
  const auto lin = interpolate([](const Point& z) { return z[0]; }, t);
  for (const Point& gr : cell_gradients(lin, t)) {
    EXPECT_NEAR(gr[0], 1.0, 1e-13);
    EXPECT_NEAR(gr[1], 0.0, 1e-13);
  }
  const std::vector<double> constant(t.node_count(), 3.0);
  for (const Point& gr : cell_gradients(constant, t)) EXPECT_NEAR(norm(gr), 0.0, 1e-13);
}

TEST(FESpace, PartitionOfUnityAndDofs) {
  const FESpace t(shared(make_rectangle(0.0, 1.0, 0.0, 1.0, 3, 2)));
  for (const auto& p : t.domain_points()) EXPECT_NEAR(p.shape[0] + p.shape[1] + p.shape[2], 1.0, 1e-15);
  for (const auto& p : t.contact_points()) EXPECT_NEAR(p.shape[0] + p.shape[1], 1.0, 1e-15);
  // Left and bottom edges are Dirichlet: 3*2 free vertices remain of 4*3.
  EXPECT_EQ(t.dof_count(), 6U);
  Vector r = Vector::LinSpaced(6, 1.0, 6.0);
  const auto full = t.expand(r);
  EXPECT_TRUE(t.restrict_to_free(full).isApprox(r));
  EXPECT_THROW((void)t.expand(Vector::Zero(5)), InvalidInput);
}

TEST(FESpace, ProlongationReproducesLinears) {
  const GalerkinHierarchy h(make_rectangle(0.0, 1.0, 0.0, 1.0, 2, 2), 3);
  auto f = [](const Point& z) { return 2.0 * z[0] - 0.5 * z[1]; };
  const auto coarse = interpolate(f, h.space(0));
  const auto fine = h.prolongate(coarse, 0, 2);
  const auto exact = interpolate(f, h.space(2));
  for (std::size_t i = 0; i < fine.size(); ++i) EXPECT_NEAR(fine[i], exact[i], 1e-14);

  const std::vector<double> zero(h.space(0).node_count(), 0.0);
  for (double x : h.prolongate(zero, 0, 1)) EXPECT_EQ(x, 0.0);
  EXPECT_THROW((void)dpcg::prolongate(coarse, h.space(1), h.space(2)), InvalidInput);
}

TEST(FESpace, RestrictDualIsTransposeOfProlongation) {
  const GalerkinHierarchy h(make_interval(0.0, 1.0, 3, D, C), 3);
  std::mt19937_64 eng(3);
  std::normal_distribution<double> n;
  std::vector<double> coarse(h.space(0).node_count()), dual(h.space(2).node_count());
  for (double& x : coarse) x = n(eng);
  for (double& x : dual) x = n(eng);
  const auto pc = h.prolongate(coarse, 0, 2);
  const auto rd = h.restrict_dual(dual, 2, 0);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < pc.size(); ++i) lhs += pc[i] * dual[i];
  for (std::size_t i = 0; i < rd.size(); ++i) rhs += coarse[i] * rd[i];
  EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(FESpace, InterpolationErrorDecreases) {
  auto f = [](const Point& z) { return std::sin(3.0 * z[0]) * std::cos(2.0 * z[1]); };
  const GalerkinHierarchy h(make_rectangle(0.0, 1.0, 0.0, 1.0, 2, 2), 5);
  double prev = 0.0;
  for (std::size_t l = 0; l < h.size(); ++l) {
    const double e = l2_error(interpolate(f, h.space(l)), h.space(l), f);
    if (l > 0) {
      EXPECT_GT(prev / e, 3.0);
    }
    prev = e;
  }
}

TEST(FESpace, AncestorLookup) {
  const GalerkinHierarchy h(make_rectangle(0.0, 1.0, 0.0, 1.0, 2, 2), 3);
  // Every fine cell centroid lies in its ancestor cell.
  const Mesh& fine = h.space(2).mesh();
  const Mesh& coarse = h.space(0).mesh();
  for (std::size_t c = 0; c < fine.num_cells(); ++c) {
    Point centroid{0.0, 0.0};
    for (std::size_t i = 0; i < 3; ++i)
      for (int k = 0; k < 2; ++k) centroid[k] += fine.vertices()[fine.cells()[c][i]][k] / 3.0;
    const auto& a = coarse.cells()[h.ancestor_cell(2, c, 0)];
    const Point& p0 = coarse.vertices()[a[0]];
    const Point& p1 = coarse.vertices()[a[1]];
    const Point& p2 = coarse.vertices()[a[2]];
    auto cross = [](const Point& o, const Point& x, const Point& y) {
      return (x[0] - o[0]) * (y[1] - o[1]) - (x[1] - o[1]) * (y[0] - o[0]);
    };
    const double s0 = cross(p0, p1, centroid), s1 = cross(p1, p2, centroid), s2 = cross(p2, p0, centroid);
    EXPECT_TRUE((s0 >= 0 && s1 >= 0 && s2 >= 0) || (s0 <= 0 && s1 <= 0 && s2 <= 0)) << c;
  }
}

TEST(FESpace, LaplaceStiffness) {
  const FESpace s(shared(make_interval(0.0, 1.0, 4, D, C)));
  const SparseMatrix k = laplace_stiffness(s);
  EXPECT_NEAR(k.coeff(0, 0), 8.0, 1e-13);
  EXPECT_NEAR(k.coeff(0, 1), -4.0, 1e-13);
  EXPECT_NEAR(k.coeff(3, 3), 4.0, 1e-13);  // contact end: one cell
}
