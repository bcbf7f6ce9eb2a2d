#include <gtest/gtest.h>

#include <cmath>

#include "dpcg/multifunction.hpp"

using namespace dpcg;

namespace {

const auto D = BoundaryTag::Dirichlet;
const auto C = BoundaryTag::Contact;

FESpace unit_interval(std::size_t cells) {
  return FESpace(std::make_shared<const Mesh>(make_interval(0.0, 1.0, cells, D, C)));
}

IntervalMultifunction constant(double lo, double hi) {
  return {[lo](const PointArgs&) { return lo; }, [hi](const PointArgs&) { return hi; }};
}

ExponentConfig config_1d(double p1 = 2.0, double p3 = 2.0) {
  ExponentConfig c;
  c.dim = 1;
  c.p = {p1, 1.5, p3, 1.5};
  c.q = {3.0, 2.5, 3.0, 2.5};
  return c;
}

GrowthCertificate standard_growth(double p_star) {
  GrowthCertificate g;
  g.critical = CriticalSet{p_star, p_star, p_star, p_star};
  g.theta = {0.1, 0.1, 0.1, 0.1};
  return g;
}

}  // namespace

TEST(Interval, Evaluation) {
  const Interval a = evaluate_interval(constant(-1.0, 1.0), {});
  EXPECT_EQ(a.lo, -1.0);
  EXPECT_EQ(a.hi, 1.0);
  const auto single = IntervalMultifunction::single([](const PointArgs& x) { return 2.0 * x.r1; });
  PointArgs args;
  args.r1 = 1.5;
  const Interval s = evaluate_interval(single, args);
  EXPECT_EQ(s.lo, 3.0);
  EXPECT_EQ(s.hi, 3.0);
  const IntervalMultifunction shifted{[](const PointArgs& x) { return x.r1 - 1.0; },
                                      [](const PointArgs& x) { return x.r1 + 1.0; }};
  args.r1 = 2.0;
  const Interval t = evaluate_interval(shifted, args);
  EXPECT_EQ(t.lo, 1.0);
  EXPECT_EQ(t.hi, 3.0);
  EXPECT_THROW((void)evaluate_interval(constant(1.0, -1.0), {}), CertificateViolation);
  EXPECT_THROW((void)evaluate_interval(constant(0.0, INFINITY), {}), CertificateViolation);
}

TEST(Interval, Selection) {
  const Interval i{-1.0, 1.0};
  EXPECT_EQ(select(i, SelectionStrategy::Nearest, 2.0), 1.0);
  EXPECT_EQ(select(i, SelectionStrategy::Nearest, 0.3), 0.3);
  EXPECT_EQ(select({1.0, 3.0}, SelectionStrategy::Midpoint), 2.0);
  // Nonexpansive projection.
  for (double a = -3.0; a <= 3.0; a += 0.37)
    for (double b = -3.0; b <= 3.0; b += 0.41)
      EXPECT_LE(std::abs(select(i, SelectionStrategy::Nearest, a) - select(i, SelectionStrategy::Nearest, b)),
                std::abs(a - b) + 1e-15);
}

TEST(Superposition, ZeroMapsGiveZeroLoads) {
  const FESpace s = unit_interval(4);
  const std::vector<double> u(s.node_count(), 0.5), v(s.node_count(), -0.25);
  const SelectionBundle b = superpose(ReactionSet{}, u, v, s, SelectionStrategy::Midpoint);
  EXPECT_TRUE(b.all_members);
  EXPECT_EQ(selection_dual(b, s).norm(), 0.0);
}

TEST(Superposition, HatLoad) {
  const FESpace s = unit_interval(2);
  ReactionSet maps;
  maps.h1 = IntervalMultifunction::single([](const PointArgs&) { return 1.0; });
  const std::vector<double> zero(s.node_count(), 0.0);
  const SelectionBundle b = superpose(maps, zero, zero, s, SelectionStrategy::Midpoint);
  const Vector load = domain_load(b.eta1, s);
  EXPECT_NEAR(load[s.dof_of_vertex(1)], 0.5, 1e-15);
  EXPECT_NEAR(load[s.dof_of_vertex(2)], 0.25, 1e-15);
}

TEST(Superposition, ExactMembershipAndNearest) {
  const FESpace s(std::make_shared<const Mesh>(make_rectangle(0.0, 1.0, 0.0, 1.0, 3, 3)));
  ReactionSet maps;
  maps.h1 = {[](const PointArgs& a) { return std::sin(a.r1) - 0.1 * a.n1; },
             [](const PointArgs& a) { return std::sin(a.r1) + 0.3 + a.n2; }};
  maps.g2 = {[](const PointArgs& a) { return a.z[0] - 1.0; }, [](const PointArgs& a) { return a.z[0] + a.r2; }};
  const auto u = interpolate([](const Point& z) { return 3.0 * z[0] * z[1]; }, s);
  const auto v = interpolate([](const Point& z) { return z[0] + z[1]; }, s);
  const SelectionBundle mid = superpose(maps, u, v, s, SelectionStrategy::Midpoint);
  EXPECT_TRUE(mid.all_members);
  EXPECT_EQ(mid.member_count, mid.total_count);
  SelectionBundle far = mid;
  for (double& x : far.eta1) x += 100.0;
  const SelectionBundle near = superpose(maps, u, v, s, SelectionStrategy::Nearest, &far);
  EXPECT_TRUE(near.all_members);
  for (std::size_t k = 0; k < near.eta1.size(); ++k) EXPECT_EQ(near.eta1[k], near.eta1_set[k].hi);
}

TEST(Growth, ZeroMultifunctionPasses) {
  const FESpace s = unit_interval(4);
  const auto r = validate_growth(ReactionSet{}, standard_growth(6.0), config_1d(), s, 2000, 1);
  EXPECT_TRUE(r.passed);
  EXPECT_FALSE(r.violation.has_value());
  const auto z = validate_sign(ReactionSet{}, SignCertificate{0.1, 0.1, 0.1, 0.1, 0.1, 0.1, {}}, config_1d(), s, 2000, 1);
  EXPECT_TRUE(z.passed);
}

TEST(Growth, QuadraticBeatsLinearClaim) {
  const FESpace s = unit_interval(4);
  ReactionSet maps;
  maps.h1 = IntervalMultifunction::single([](const PointArgs& a) { return a.r1 * a.r1; });
  // p1* = 2 makes the r1 term linear; sigma and theta shrink the cross terms.
  GrowthCertificate g = standard_growth(2.0);
  g.sigma = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
  g.theta = {0.2, 0.2, 0.2, 0.2};
  const auto r = validate_growth(maps, g, config_1d(), s, 10000, 3);
  EXPECT_FALSE(r.passed);
  ASSERT_TRUE(r.violation.has_value());
  EXPECT_EQ(r.violation->map, "h1");
  EXPECT_GT(std::abs(r.violation->args.r1), 1.0);
  EXPECT_GT(r.violation->value, r.violation->bound);
}

TEST(Growth, BalanceArithmetic) {
  const FESpace s = unit_interval(2);
  GrowthCertificate g = standard_growth(6.0);
  g.sigma = {2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0};
  g.theta = {0.5, 0.5, 0.5, 0.5};
  const auto r = validate_growth(ReactionSet{}, g, config_1d(), s, 10, 0);
  ASSERT_FALSE(r.checks.empty());
  EXPECT_EQ(r.checks[0].name, "sigma1/p1* + sigma2/p3* <= 1/(p1*)'");
  EXPECT_NEAR(r.checks[0].lhs, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.checks[0].rhs, 5.0 / 6.0, 1e-15);
  EXPECT_TRUE(r.checks[0].passed);
  EXPECT_TRUE(r.passed);

  g.sigma[0] = 3.0;  // 1/2 + 1/3 = 5/6 still on the boundary
  EXPECT_TRUE(validate_growth(ReactionSet{}, g, config_1d(), s, 10, 0).passed);
  g.sigma[0] = 3.1;
  EXPECT_FALSE(validate_growth(ReactionSet{}, g, config_1d(), s, 10, 0).passed);
}

TEST(Growth, StrongModeKappaRange) {
  const FESpace s = unit_interval(2);
  GrowthCertificate g = standard_growth(6.0);
  g.mode = GrowthMode::Strong;
  g.sigma = {0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
  g.theta = {0.1, 0.1, 0.1, 0.1};
  g.kappa = {2.0, 2.0, 2.0, 2.0};
  EXPECT_TRUE(validate_growth(ReactionSet{}, g, config_1d(), s, 10, 0).passed);
  g.kappa[1] = 1.0;
  EXPECT_FALSE(validate_growth(ReactionSet{}, g, config_1d(), s, 10, 0).passed);
  g.kappa[1] = 6.0;
  EXPECT_FALSE(validate_growth(ReactionSet{}, g, config_1d(), s, 10, 0).passed);
}

TEST(Growth, OneDimensionNeedsCriticalOverride) {
  const FESpace s = unit_interval(2);
  EXPECT_THROW((void)validate_growth(ReactionSet{}, GrowthCertificate{}, config_1d(), s, 10, 0), InvalidInput);
}

TEST(Sign, Examples) {
  const FESpace s = unit_interval(4);
  const ExponentConfig cfg = config_1d(2.0, 2.0);

  ReactionSet bounded;
  bounded.h1 = constant(-1.0, 1.0);
  SignCertificate c1;
  c1.m3 = 1.0;
  c1.bounds[0] = [](const Point&) { return 1.0; };
  EXPECT_TRUE(validate_sign(bounded, c1, cfg, s, 10000, 4).passed);

  ReactionSet linear;
  linear.g2 = IntervalMultifunction::single([](const PointArgs& a) { return a.r2; });
  SignCertificate c2;
  c2.m10 = 1.0;
  EXPECT_TRUE(validate_sign(linear, c2, cfg, s, 10000, 5).passed);

  ReactionSet cubic;
  cubic.h1 = IntervalMultifunction::single([](const PointArgs& a) { return a.r1 * a.r1 * a.r1; });
  SignCertificate c3;
  c3.m3 = 1.0;
  const auto r = validate_sign(cubic, c3, cfg, s, 10000, 6);
  EXPECT_FALSE(r.passed);
  ASSERT_TRUE(r.violation.has_value());
  EXPECT_EQ(r.violation->map, "h1");
  EXPECT_GT(std::abs(r.violation->args.r1), 1.0);
}

TEST(Sign, NegativeConstantsRejected) {
  const FESpace s = unit_interval(2);
  SignCertificate c;
  c.m6 = -0.1;
  EXPECT_FALSE(validate_sign(ReactionSet{}, c, config_1d(), s, 10, 0).passed);
}

TEST(Coercivity, ConditionExamples) {
  CoercivityCertificate c;
  c.lambda = {0.63662, 1.0, 0.63662, 1.0};
  c.safety_factor = 1.0;
  auto r = validate_coercivity_condition(c);
  EXPECT_EQ(r.margin[0], 1.0);
  EXPECT_EQ(r.margin[1], 1.0);
  EXPECT_TRUE(r.passed);

  c.sign.m4 = c.sign.m6 = 0.5;
  r = validate_coercivity_condition(c);
  EXPECT_EQ(r.lhs[0], 1.0);
  EXPECT_FALSE(r.passed);

  c.sign = SignCertificate{0.1, 0.1, 0.1, 0.1, 0.1, 0.1, {}};
  r = validate_coercivity_condition(c);
  // 0.2 + 0.2*0.63662 + 0.2*1 = 0.527324, quoted as 0.52732.
  const double hand = 0.2 + 0.2 * 0.63662 + 0.2 * 1.0;
  EXPECT_NEAR(r.lhs[0], hand, 1e-12);
  EXPECT_NEAR(r.margin[0], 1.0 - hand, 1e-12);
  EXPECT_NEAR(r.lhs[0], 0.52732, 5e-6);
  EXPECT_TRUE(r.passed);

  c.safety_factor = 1.1;
  EXPECT_NEAR(validate_coercivity_condition(c).lhs[0], 0.2 + 1.1 * (0.2 * 0.63662 + 0.2), 1e-12);

  c.lambda[0] = 0.0;
  EXPECT_THROW((void)validate_coercivity_condition(c), InvalidInput);
}

TEST(Coercivity, YoungConstantMatchesClosedForm) {
  for (const auto& [r, s, eps] : {std::tuple{1.5, 2.0, 0.5}, {1.2, 3.0, 0.1}, {2.0, 4.0, 1.0}, {1.1, 1.3, 0.05}}) {
    const double t = std::pow(r / (eps * s), 1.0 / (s - r));
    const double expected = std::pow(t, r) * (1.0 - r / s);
    EXPECT_NEAR(young_constant(r, s, eps), expected, 1e-12 * std::max(1.0, expected)) << r << " " << s << " " << eps;
  }
  EXPECT_THROW((void)young_constant(2.0, 1.5, 0.5), InvalidInput);
  EXPECT_THROW((void)young_constant(1.5, 2.0, 0.0), InvalidInput);
}

TEST(Coercivity, BoundExamples) {
  CoercivityCertificate c;
  c.lambda = {0.63662, 1.0, 0.63662, 1.0};
  CoercivityData d;
  d.p = {2.0, 1.5, 2.0, 1.5};
  d.q = {3.0, 2.5, 3.0, 2.5};
  d.domain_measure = 1.0;
  auto b = coercivity_bound(c, d);
  EXPECT_EQ(b.A, 1.0);
  EXPECT_EQ(b.B, 1.0);
  EXPECT_EQ(b.C2, 0.0);

  c.sign = SignCertificate{0.1, 0.1, 0.1, 0.1, 0.1, 0.1, {}};
  c.safety_factor = 1.0;
  const double a_small = coercivity_bound(c, d).A;
  c.epsilon = 10.0;
  EXPECT_EQ(coercivity_bound(c, d).A, a_small);
  EXPECT_NEAR(a_small, 1.0 - (0.2 + 0.2 * 0.63662 + 0.2 * 1.0), 1e-12);
  EXPECT_NEAR(a_small, 0.47268, 5e-6);

  // A strictly decreasing in epsilon once alpha != 0; C1 <= 0.
  c.alpha = 0.25;
  double prev = 2.0;
  for (const double eps : {0.1, 0.2, 0.4, 0.8}) {
    c.epsilon = eps;
    const auto bb = coercivity_bound(c, d);
    EXPECT_LT(bb.A, prev);
    EXPECT_LE(bb.C1, 0.0);
    prev = bb.A;
  }
  d.delta_l1 = {1.0, 2.0, 0.5, 0.25};
  const auto with_delta = coercivity_bound(c, d);
  EXPECT_NEAR(with_delta.C2, with_delta.C1 - 3.75, 1e-14);
  c.epsilon = 0.0;
  EXPECT_THROW((void)coercivity_bound(c, d), InvalidInput);
}
