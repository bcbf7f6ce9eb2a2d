#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dpcg/error.hpp"
#include "dpcg/fe_space.hpp"
#include "dpcg/modular.hpp"

namespace dpcg {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] bool contains(double x) const { return lo <= x && x <= hi; }
  [[nodiscard]] double midpoint() const { return 0.5 * (lo + hi); }
};

/// Arguments of a reaction h(z, r1, r2, |grad u|, |grad v|); boundary maps ignore n1, n2.
struct PointArgs {
  Point z{};
  double r1 = 0.0;
  double r2 = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;
};

using BoundFunction = std::function<double(const PointArgs&)>;

/// Interval-valued map given by its lower and upper endpoint functions.
struct IntervalMultifunction {
  BoundFunction lower;
  BoundFunction upper;

  static IntervalMultifunction zero() {
    return {[](const PointArgs&) { return 0.0; }, [](const PointArgs&) { return 0.0; }};
  }
  static IntervalMultifunction single(BoundFunction f) { return {f, f}; }
};

inline Interval evaluate_interval(const IntervalMultifunction& h, const PointArgs& args) {
  const Interval out{h.lower(args), h.upper(args)};
  if (!std::isfinite(out.lo) || !std::isfinite(out.hi))
    throw CertificateViolation("multifunction value is not finite at z = (" + std::to_string(args.z[0]) + ", " +
                               std::to_string(args.z[1]) + ")");
  if (out.lo > out.hi)
    throw CertificateViolation("multifunction has lower > upper at z = (" + std::to_string(args.z[0]) + ", " +
                               std::to_string(args.z[1]) + ")");
  return out;
}

enum class SelectionStrategy { Midpoint, Nearest };

/// Midpoint, or the metric projection of `previous` onto the interval.
inline double select(const Interval& interval, SelectionStrategy strategy, double previous = 0.0) {
  if (strategy == SelectionStrategy::Midpoint) return interval.midpoint();
  return std::clamp(previous, interval.lo, interval.hi);
}

/// h1, h2 act on the domain, g1, g2 on the contact part.
struct ReactionSet {
  IntervalMultifunction h1 = IntervalMultifunction::zero();
  IntervalMultifunction h2 = IntervalMultifunction::zero();
  IntervalMultifunction g1 = IntervalMultifunction::zero();
  IntervalMultifunction g2 = IntervalMultifunction::zero();
};

/// Selections at quadrature points and their intervals.
struct SelectionBundle {
  std::vector<double> eta1, eta2;  ///< domain points
  std::vector<double> xi1, xi2;    ///< contact points
  std::vector<Interval> eta1_set, eta2_set, xi1_set, xi2_set;
  bool all_members = true;
  std::size_t member_count = 0;
  std::size_t total_count = 0;

  /// Largest change of any selection value relative to another bundle.
  [[nodiscard]] double drift(const SelectionBundle& other) const {
    double d = 0.0;
    auto upd = [&](const std::vector<double>& a, const std::vector<double>& b) {
      for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    };
    upd(eta1, other.eta1);
    upd(eta2, other.eta2);
    upd(xi1, other.xi1);
    upd(xi2, other.xi2);
    return d;
  }
};

/// Arguments at the domain quadrature points for the state (u, v).
inline std::vector<PointArgs> domain_args(std::span<const double> u, std::span<const double> v, const FESpace& space) {
  const auto uq = values_at_quadrature(u, space);
  const auto vq = values_at_quadrature(v, space);
  const auto gu = gradient_at_quadrature(u, space);
  const auto gv = gradient_at_quadrature(v, space);
  std::vector<PointArgs> out(uq.size());
  for (std::size_t k = 0; k < uq.size(); ++k)
    out[k] = {space.domain_points()[k].x, uq[k], vq[k], norm(gu[k]), norm(gv[k])};
  return out;
}

inline std::vector<PointArgs> contact_args(std::span<const double> u, std::span<const double> v, const FESpace& space) {
  const auto uc = contact_values(u, space);
  const auto vc = contact_values(v, space);
  std::vector<PointArgs> out(uc.size());
  for (std::size_t k = 0; k < uc.size(); ++k) out[k] = {space.contact_points()[k].x, uc[k], vc[k], 0.0, 0.0};
  return out;
}

/// Pointwise selections from S_h and S_g at the state (u, v) (full nodal vectors).
/// With Nearest, `previous` supplies the points to project; without it the midpoint is used.
inline SelectionBundle superpose(const ReactionSet& maps, std::span<const double> u, std::span<const double> v,
                                 const FESpace& space, SelectionStrategy strategy,
                                 const SelectionBundle* previous = nullptr) {
  SelectionBundle b;
  const auto dargs = domain_args(u, v, space);
  const auto cargs = contact_args(u, v, space);
  auto fill = [&](const IntervalMultifunction& h, const std::vector<PointArgs>& args, std::vector<double>& sel,
                  std::vector<Interval>& sets, const std::vector<double>* prev) {
    sel.resize(args.size());
    sets.resize(args.size());
    for (std::size_t k = 0; k < args.size(); ++k) {
      sets[k] = evaluate_interval(h, args[k]);
      sel[k] = (prev && strategy == SelectionStrategy::Nearest) ? select(sets[k], strategy, (*prev)[k])
                                                                 : sets[k].midpoint();
      const bool member = sets[k].contains(sel[k]);
      b.member_count += member ? 1 : 0;
      b.all_members = b.all_members && member;
      ++b.total_count;
    }
  };
  fill(maps.h1, dargs, b.eta1, b.eta1_set, previous ? &previous->eta1 : nullptr);
  fill(maps.h2, dargs, b.eta2, b.eta2_set, previous ? &previous->eta2 : nullptr);
  fill(maps.g1, cargs, b.xi1, b.xi1_set, previous ? &previous->xi1 : nullptr);
  fill(maps.g2, cargs, b.xi2, b.xi2_set, previous ? &previous->xi2 : nullptr);
  return b;
}

/// Bundle from stored selection values; intervals and membership are evaluated at (u, v).
inline SelectionBundle rebuild_selections(const ReactionSet& maps, std::span<const double> u,
                                          std::span<const double> v, const FESpace& space, std::vector<double> eta1,
                                          std::vector<double> eta2, std::vector<double> xi1, std::vector<double> xi2) {
  SelectionBundle b;
  const auto dargs = domain_args(u, v, space);
  const auto cargs = contact_args(u, v, space);
  if (eta1.size() != dargs.size() || eta2.size() != dargs.size() || xi1.size() != cargs.size() ||
      xi2.size() != cargs.size())
    throw InvalidInput("stored selections do not match the quadrature layout");
  auto fill = [&](const IntervalMultifunction& h, const std::vector<PointArgs>& args, const std::vector<double>& sel,
                  std::vector<Interval>& sets) {
    sets.resize(args.size());
    for (std::size_t k = 0; k < args.size(); ++k) {
      sets[k] = evaluate_interval(h, args[k]);
      const bool member = sets[k].contains(sel[k]);
      b.member_count += member ? 1 : 0;
      b.all_members = b.all_members && member;
      ++b.total_count;
    }
  };
  fill(maps.h1, dargs, eta1, b.eta1_set);
  fill(maps.h2, dargs, eta2, b.eta2_set);
  fill(maps.g1, cargs, xi1, b.xi1_set);
  fill(maps.g2, cargs, xi2, b.xi2_set);
  b.eta1 = std::move(eta1);
  b.eta2 = std::move(eta2);
  b.xi1 = std::move(xi1);
  b.xi2 = std::move(xi2);
  return b;
}

/// Load vector int eta phi_k over the free dofs.
inline Vector domain_load(std::span<const double> eta, const FESpace& space) {
  const Mesh& m = space.mesh();
  const auto& pts = space.domain_points();
  if (eta.size() != pts.size()) throw InvalidInput("domain load: sample layout mismatch");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(space.dof_count()));
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Cell& cell = m.cells()[pts[k].cell];
    for (std::size_t i = 0; i < m.vertices_per_cell(); ++i) {
      const auto d = space.dof_of_vertex(cell[i]);
      if (d >= 0) out[d] += pts[k].weight * eta[k] * pts[k].shape[i];
    }
  }
  return out;
}

/// Load vector int_{contact} xi phi_k over the free dofs.
inline Vector boundary_load(std::span<const double> xi, const FESpace& space) {
  const auto& pts = space.contact_points();
  if (xi.size() != pts.size()) throw InvalidInput("boundary load: sample layout mismatch");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(space.dof_count()));
  for (std::size_t k = 0; k < pts.size(); ++k) {
    for (std::size_t i = 0; i < 2; ++i) {
      const auto d = space.dof_of_vertex(pts[k].vertices[i]);
      if (d >= 0) out[d] += pts[k].weight * xi[k] * pts[k].shape[i];
    }
  }
  return out;
}

/// Dual vector (xi1 - eta1, xi2 - eta2) on the free dofs of (u, v).
inline Vector selection_dual(const SelectionBundle& b, const FESpace& space) {
  const auto n = static_cast<Eigen::Index>(space.dof_count());
  Vector out(2 * n);
  out.head(n) = boundary_load(b.xi1, space) - domain_load(b.eta1, space);
  out.tail(n) = boundary_load(b.xi2, space) - domain_load(b.eta2, space);
  return out;
}

// ---------------------------------------------------------------------------
// Certificates and validators

/// p1*, p3*, p1_*, p3_*.
struct CriticalSet {
  double p1_star = 0.0;
  double p3_star = 0.0;
  double p1_lower_star = 0.0;
  double p3_lower_star = 0.0;
};

/// Computes the critical exponents from the configuration, or takes the override.
/// In 1D (or when p >= N) the override is mandatory.
inline CriticalSet resolve_critical(const ExponentConfig& cfg, const std::optional<CriticalSet>& override_set) {
  if (override_set) return *override_set;
  if (cfg.dim < 2) throw InvalidInput("critical exponents must be supplied for one-dimensional problems");
  try {
    const auto c1 = critical_exponents(cfg.p[0], cfg.dim);
    const auto c3 = critical_exponents(cfg.p[2], cfg.dim);
    return {c1.star, c3.star, c1.lower_star, c3.lower_star};
  } catch (const DomainError& e) {
    throw InvalidInput(std::string("critical exponents must be supplied: ") + e.what());
  }
}

inline double conjugate(double r) { return r / (r - 1.0); }

enum class GrowthMode { Standard, Strong };

struct GrowthCertificate {
  GrowthMode mode = GrowthMode::Standard;
  /// m1, m2, m7, m8 (Standard) or d1, d2, d3, d4 (Strong).
  std::array<double, 4> constants{1.0, 1.0, 1.0, 1.0};
  std::array<double, 8> sigma{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  std::array<double, 4> theta{1.0, 1.0, 1.0, 1.0};
  std::array<double, 4> kappa{2.0, 2.0, 2.0, 2.0};
  /// delta1, delta2, delta5, delta6 (Standard) or pi1..pi4 (Strong); empty = zero.
  std::array<ScalarField, 4> bounds{};
  std::optional<CriticalSet> critical;
};

struct SignCertificate {
  double m3 = 0.0, m4 = 0.0, m5 = 0.0, m6 = 0.0, m9 = 0.0, m10 = 0.0;
  /// delta3, delta4 (domain), delta7, delta8 (contact); empty = zero.
  std::array<ScalarField, 4> bounds{};
};

/// One inequality evaluated by a validator.
struct CheckResult {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool passed = true;
  bool informational = false;  ///< reported but not part of the verdict
};

struct SampleViolation {
  std::string map;  ///< "h1", "h2", "g1", "g2"
  std::size_t sample = 0;
  PointArgs args;
  double value = 0.0;
  double bound = 0.0;
  std::string detail;
};

struct ValidationReport {
  bool passed = true;
  std::vector<CheckResult> checks;
  std::optional<SampleViolation> violation;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

inline double log_uniform_magnitude(std::mt19937_64& eng) { return std::pow(10.0, -3.0 + 6.0 * uniform01(eng)); }

inline double pw(double x, double e) { return std::pow(std::abs(x), e); }

inline double field_or_zero(const ScalarField& f, const Point& z) { return f ? f(z) : 0.0; }

/// Random sample: z from the given quadrature points, r's signed log-uniform, n's log-uniform.
inline PointArgs draw_args(std::mt19937_64& eng, std::span<const Point> points) {
  PointArgs a;
  const auto idx = static_cast<std::size_t>(uniform01(eng) * static_cast<double>(points.size()));
  a.z = points[std::min(idx, points.size() - 1)];
  auto signed_mag = [&] {
    const double m = log_uniform_magnitude(eng);
    return (eng() & 1U) ? -m : m;
  };
  a.r1 = signed_mag();
  a.r2 = signed_mag();
  a.n1 = log_uniform_magnitude(eng);
  a.n2 = log_uniform_magnitude(eng);
  return a;
}

inline bool within(double value, double bound) {
  const double slack = 1e-12 * std::max(1.0, std::abs(bound));
  return value <= bound + slack;
}

inline std::vector<Point> domain_sites(const FESpace& space) {
  std::vector<Point> out;
  for (const auto& p : space.domain_points()) out.push_back(p.x);
  return out;
}

inline std::vector<Point> contact_sites(const FESpace& space) {
  std::vector<Point> out;
  for (const auto& p : space.contact_points()) out.push_back(p.x);
  return out;
}

inline void add_check(ValidationReport& r, std::string name, double lhs, double rhs, bool informational = false) {
  CheckResult c{std::move(name), lhs, rhs, lhs <= rhs + 1e-14 * std::max(1.0, std::abs(rhs)), informational};
  if (!c.passed && !informational) r.passed = false;
  r.checks.push_back(std::move(c));
}

/// Strict lhs < rhs, no slack.
inline void add_strict_check(ValidationReport& r, std::string name, double lhs, double rhs) {
  CheckResult c{std::move(name), lhs, rhs, lhs < rhs, false};
  if (!c.passed) r.passed = false;
  r.checks.push_back(std::move(c));
}

}  // namespace detail

/// Right-hand sides of the growth bounds for h1, h2 (domain) and g1, g2 (contact).
struct GrowthBounds {
  const GrowthCertificate& cert;
  const ExponentConfig& cfg;
  CriticalSet crit;

  [[nodiscard]] double h(int i, const PointArgs& a) const {
    using detail::pw;
    const double p1 = cfg.p[0], p3 = cfg.p[2];
    const double s_a = cert.sigma[i == 1 ? 0 : 2], s_b = cert.sigma[i == 1 ? 1 : 3];
    const double t_a = cert.theta[i == 1 ? 0 : 2], t_b = cert.theta[i == 1 ? 1 : 3];
    const double bound = detail::field_or_zero(cert.bounds[i == 1 ? 0 : 1], a.z);
    const double c = cert.constants[i == 1 ? 0 : 1];
    double sum = 0.0;
    if (cert.mode == GrowthMode::Standard) {
      const double e = conjugate(i == 1 ? crit.p1_star : crit.p3_star);
      sum = (i == 1 ? pw(a.r1, crit.p1_star - 1.0) : pw(a.r1, crit.p1_star / e)) +
            (i == 1 ? pw(a.r2, crit.p3_star / e) : pw(a.r2, crit.p3_star - 1.0)) + pw(a.r1, s_a) * pw(a.r2, s_b) +
            pw(a.n1, p1 / e) + pw(a.n2, p3 / e) + pw(a.n1, t_a) * pw(a.n2, t_b);
    } else {
      const double e = conjugate(cert.kappa[i == 1 ? 0 : 1]);
      sum = pw(a.r1, crit.p1_star / e) + pw(a.r2, crit.p3_star / e) + pw(a.r1, s_a) * pw(a.r2, s_b) +
            pw(a.n1, p1 / e) + pw(a.n2, p3 / e) + pw(a.n1, t_a) * pw(a.n2, t_b);
    }
    return c * sum + bound;
  }

  [[nodiscard]] double g(int i, const PointArgs& a) const {
    using detail::pw;
    const double s_a = cert.sigma[i == 1 ? 4 : 6], s_b = cert.sigma[i == 1 ? 5 : 7];
    const double bound = detail::field_or_zero(cert.bounds[i == 1 ? 2 : 3], a.z);
    const double c = cert.constants[i == 1 ? 2 : 3];
    double sum = 0.0;
    if (cert.mode == GrowthMode::Standard) {
      const double e = conjugate(i == 1 ? crit.p1_lower_star : crit.p3_lower_star);
      sum = (i == 1 ? pw(a.r1, crit.p1_lower_star - 1.0) : pw(a.r1, crit.p1_lower_star / e)) +
            (i == 1 ? pw(a.r2, crit.p3_lower_star / e) : pw(a.r2, crit.p3_lower_star - 1.0)) +
            pw(a.r1, s_a) * pw(a.r2, s_b);
    } else {
      const double e = conjugate(cert.kappa[i == 1 ? 2 : 3]);
      sum = pw(a.r1, crit.p1_lower_star / e) + pw(a.r2, crit.p3_lower_star / e) + pw(a.r1, s_a) * pw(a.r2, s_b);
    }
    return c * sum + bound;
  }
};

/// Exponent-balance inequalities; θ-inequalities also in the p3 variant (informational).
inline void check_growth_balance(const GrowthCertificate& cert, const ExponentConfig& cfg, const CriticalSet& crit,
                                 ValidationReport& report) {
  const auto& s = cert.sigma;
  const auto& t = cert.theta;
  const double p1 = cfg.p[0], p2 = cfg.p[1], p3 = cfg.p[2];
  for (int i = 0; i < 4; ++i)
    if (!(cert.constants[static_cast<std::size_t>(i)] > 0.0))
      detail::add_check(report, "growth constant " + std::to_string(i + 1) + " > 0", 0.0, -1.0);
  if (cert.mode == GrowthMode::Standard) {
    const double a1 = 1.0 / conjugate(crit.p1_star), a3 = 1.0 / conjugate(crit.p3_star);
    const double b1 = 1.0 / conjugate(crit.p1_lower_star), b3 = 1.0 / conjugate(crit.p3_lower_star);
    detail::add_check(report, "sigma1/p1* + sigma2/p3* <= 1/(p1*)'", s[0] / crit.p1_star + s[1] / crit.p3_star, a1);
    detail::add_check(report, "sigma3/p1* + sigma4/p3* <= 1/(p3*)'", s[2] / crit.p1_star + s[3] / crit.p3_star, a3);
    detail::add_check(report, "theta1/p1 + theta2/p2 <= 1/(p1*)'", t[0] / p1 + t[1] / p2, a1);
    detail::add_check(report, "theta3/p1 + theta4/p2 <= 1/(p3*)'", t[2] / p1 + t[3] / p2, a3);
    detail::add_check(report, "theta1/p1 + theta2/p3 <= 1/(p1*)' (p3 variant)", t[0] / p1 + t[1] / p3, a1, true);
    detail::add_check(report, "theta3/p1 + theta4/p3 <= 1/(p3*)' (p3 variant)", t[2] / p1 + t[3] / p3, a3, true);
    detail::add_check(report, "sigma5/p1_* + sigma6/p3_* <= 1/(p1_*)'",
                      s[4] / crit.p1_lower_star + s[5] / crit.p3_lower_star, b1);
    detail::add_check(report, "sigma7/p1_* + sigma8/p3_* <= 1/(p3_*)'",
                      s[6] / crit.p1_lower_star + s[7] / crit.p3_lower_star, b3);
  } else {
    const auto& k = cert.kappa;
    const std::array<double, 4> upper{crit.p1_star, crit.p3_star, crit.p1_lower_star, crit.p3_lower_star};
    for (std::size_t i = 0; i < 4; ++i) {
      const std::string n = "kappa" + std::to_string(i + 1);
      detail::add_strict_check(report, "1 < " + n, 1.0, k[i]);
      detail::add_strict_check(report, n + " < critical exponent", k[i], upper[i]);
    }
    const std::array<double, 4> inv{1.0 / conjugate(k[0]), 1.0 / conjugate(k[1]), 1.0 / conjugate(k[2]),
                                    1.0 / conjugate(k[3])};
    detail::add_check(report, "sigma1/kappa1 + sigma2/kappa2 <= 1/kappa1'", s[0] / k[0] + s[1] / k[1], inv[0]);
    detail::add_check(report, "sigma3/kappa1 + sigma4/kappa2 <= 1/kappa2'", s[2] / k[0] + s[3] / k[1], inv[1]);
    detail::add_check(report, "theta1/p1 + theta2/p2 <= 1/kappa1'", t[0] / p1 + t[1] / p2, inv[0]);
    detail::add_check(report, "theta3/p1 + theta4/p2 <= 1/kappa2'", t[2] / p1 + t[3] / p2, inv[1]);
    detail::add_check(report, "theta1/p1 + theta2/p3 <= 1/kappa1' (p3 variant)", t[0] / p1 + t[1] / p3, inv[0], true);
    detail::add_check(report, "theta3/p1 + theta4/p3 <= 1/kappa2' (p3 variant)", t[2] / p1 + t[3] / p3, inv[1], true);
    detail::add_check(report, "sigma5/kappa3 + sigma6/kappa4 <= 1/kappa3'", s[4] / k[2] + s[5] / k[3], inv[2]);
    detail::add_check(report, "sigma7/kappa3 + sigma8/kappa4 <= 1/kappa4'", s[6] / k[2] + s[7] / k[3], inv[3]);
  }
}

/// Growth hypotheses: balance inequalities, then sampled bounds on max(|lower|, |upper|).
inline ValidationReport validate_growth(const ReactionSet& maps, const GrowthCertificate& cert,
                                        const ExponentConfig& cfg, const FESpace& space, std::size_t samples,
                                        std::uint64_t seed) {
  if (samples == 0) throw InvalidInput("validate_growth: samples must be >= 1");
  ValidationReport report;
  report.samples = samples;
  report.seed = seed;
  const CriticalSet crit = resolve_critical(cfg, cert.critical);
  check_growth_balance(cert, cfg, crit, report);
  const GrowthBounds bounds{cert, cfg, crit};
  const auto dsites = detail::domain_sites(space);
  const auto csites = detail::contact_sites(space);
  std::mt19937_64 eng(seed);
  for (std::size_t i = 0; i < samples; ++i) {
    const PointArgs da = detail::draw_args(eng, dsites);
    PointArgs ca = detail::draw_args(eng, csites);
    ca.n1 = ca.n2 = 0.0;
    auto test = [&](const char* name, const IntervalMultifunction& h, const PointArgs& a, double bound) {
      const Interval iv = evaluate_interval(h, a);
      const double value = std::max(std::abs(iv.lo), std::abs(iv.hi));
      if (!detail::within(value, bound)) {
        report.violation = SampleViolation{name, i, a, value, bound, "max(|lower|,|upper|) exceeds the growth bound"};
        report.passed = false;
        return false;
      }
      return true;
    };
    if (!test("h1", maps.h1, da, bounds.h(1, da)) || !test("h2", maps.h2, da, bounds.h(2, da)) ||
        !test("g1", maps.g1, ca, bounds.g(1, ca)) || !test("g2", maps.g2, ca, bounds.g(2, ca)))
      break;
  }
  return report;
}

/// Sign hypotheses: eta r <= RHS for eta in {lower, upper, midpoint}. For the
/// boundary maps both xi r and -xi r are tested, the latter being the direction
/// the coercivity estimate needs.
inline ValidationReport validate_sign(const ReactionSet& maps, const SignCertificate& cert, const ExponentConfig& cfg,
                                      const FESpace& space, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw InvalidInput("validate_sign: samples must be >= 1");
  ValidationReport report;
  report.samples = samples;
  report.seed = seed;
  const std::array<std::pair<const char*, double>, 6> constants{
      {{"m3", cert.m3}, {"m4", cert.m4}, {"m5", cert.m5}, {"m6", cert.m6}, {"m9", cert.m9}, {"m10", cert.m10}}};
  for (const auto& [name, value] : constants)
    detail::add_check(report, std::string(name) + " >= 0", -value, 0.0);

  const double p1 = cfg.p[0], p3 = cfg.p[2];
  using detail::pw;
  const auto dsites = detail::domain_sites(space);
  const auto csites = detail::contact_sites(space);
  for (const Point& z : dsites)
    for (int j = 0; j < 2; ++j)
      if (detail::field_or_zero(cert.bounds[static_cast<std::size_t>(j)], z) < 0.0) {
        detail::add_check(report, std::string(j == 0 ? "delta3" : "delta4") + " >= 0 at quadrature points",
                          -detail::field_or_zero(cert.bounds[static_cast<std::size_t>(j)], z), 0.0);
        j = 2;
      }
  for (const Point& z : csites)
    for (int j = 2; j < 4; ++j)
      if (detail::field_or_zero(cert.bounds[static_cast<std::size_t>(j)], z) < 0.0) {
        detail::add_check(report, std::string(j == 2 ? "delta7" : "delta8") + " >= 0 at quadrature points",
                          -detail::field_or_zero(cert.bounds[static_cast<std::size_t>(j)], z), 0.0);
        j = 4;
      }

  std::mt19937_64 eng(seed);
  for (std::size_t i = 0; i < samples && report.passed; ++i) {
    const PointArgs da = detail::draw_args(eng, dsites);
    PointArgs ca = detail::draw_args(eng, csites);
    ca.n1 = ca.n2 = 0.0;
    const double state_d = pw(da.r1, p1) + pw(da.r2, p3);
    const double grad_d = pw(da.n1, p1) + pw(da.n2, p3);
    const double state_c = pw(ca.r1, p1) + pw(ca.r2, p3);
    auto test = [&](const char* name, const IntervalMultifunction& h, const PointArgs& a, double r, double rhs,
                    bool both_signs) {
      const Interval iv = evaluate_interval(h, a);
      for (const double eta : {iv.lo, iv.hi, iv.midpoint()}) {
        for (const double sgn : {1.0, -1.0}) {
          if (sgn < 0.0 && !both_signs) continue;
          const double value = sgn * eta * r;
          if (!detail::within(value, rhs)) {
            report.violation = SampleViolation{name, i, a, value, rhs,
                                               sgn > 0 ? "selection * state exceeds the sign bound"
                                                       : "-(selection * state) exceeds the sign bound"};
            report.passed = false;
            return false;
          }
        }
      }
      return true;
    };
    const double d3 = detail::field_or_zero(cert.bounds[0], da.z);
    const double d4 = detail::field_or_zero(cert.bounds[1], da.z);
    const double d7 = detail::field_or_zero(cert.bounds[2], ca.z);
    const double d8 = detail::field_or_zero(cert.bounds[3], ca.z);
    if (!test("h1", maps.h1, da, da.r1, cert.m3 * state_d + cert.m4 * grad_d + d3, false) ||
        !test("h2", maps.h2, da, da.r2, cert.m5 * state_d + cert.m6 * grad_d + d4, false) ||
        !test("g1", maps.g1, ca, ca.r1, cert.m9 * state_c + d7, true) ||
        !test("g2", maps.g2, ca, ca.r2, cert.m10 * state_c + d8, true))
      break;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Coercivity

struct CoercivityCertificate {
  std::array<double, 4> lambda{};
  SignCertificate sign;
  double alpha = 0.0;
  double beta = 0.0;
  double epsilon = 0.5;
  double safety_factor = 1.1;
};

struct CoercivityCondition {
  std::array<double, 2> lhs{};
  std::array<double, 2> margin{};  ///< 1 - lhs
  bool passed = false;
};

/// m4 + m6 + (m3 + m5) s lambda_{2j-1} + (m9 + m10) s lambda_{2j} < 1 for j = 1, 2.
inline CoercivityCondition validate_coercivity_condition(const CoercivityCertificate& c) {
  for (const double l : c.lambda)
    if (!(l > 0.0)) throw InvalidInput("coercivity condition needs positive embedding constants");
  const auto& s = c.sign;
  CoercivityCondition out;
  for (std::size_t j = 0; j < 2; ++j) {
    out.lhs[j] = s.m4 + s.m6 + (s.m3 + s.m5) * c.safety_factor * c.lambda[2 * j] +
                 (s.m9 + s.m10) * c.safety_factor * c.lambda[2 * j + 1];
    out.margin[j] = 1.0 - out.lhs[j];
  }
  out.passed = out.lhs[0] < 1.0 && out.lhs[1] < 1.0;
  return out;
}

/// max over t >= 0 of t^r - eps t^s for 1 <= r < s, by golden-section search.
inline double young_constant(double r, double s, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("Young parameter must be positive");
  if (!(r < s)) throw InvalidInput("young_constant needs r < s");
  auto f = [&](double t) { return std::pow(t, r) - eps * std::pow(t, s); };
  // f < 0 beyond t0 = eps^{-1/(s-r)}; the maximizer lies in (0, t0).
  double a = 0.0, b = std::pow(eps, -1.0 / (s - r));
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * b; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return std::max(0.0, std::max(f1, f2));
}

/// Inputs beyond the certificate needed for C1 and C2.
struct CoercivityData {
  std::array<double, 4> p{};
  std::array<double, 4> q{};
  double domain_measure = 0.0;
  double mu2_l1 = 0.0;  ///< ||mu2||_1
  double mu4_l1 = 0.0;  ///< ||mu4||_1
  std::array<double, 4> delta_l1{};  ///< ||delta3||_1, ||delta4||_1, ||delta7||_{L1(contact)}, ||delta8||
};

struct CoercivityBound {
  double A = 0.0;
  double B = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
};

/// A(eps), B(eps), C2(eps) of the coercivity estimate with c(eps) = eps and
/// pointwise Young constants K(r, s) = max_t (t^r - eps t^s).
inline CoercivityBound coercivity_bound(const CoercivityCertificate& c, const CoercivityData& d) {
  if (!(c.epsilon > 0.0)) throw InvalidInput("coercivity_bound: epsilon must be positive");
  const auto& s = c.sign;
  const double sf = c.safety_factor;
  CoercivityBound out;
  out.A = 1.0 - s.m4 - s.m6 - (s.m3 + s.m5) * sf * c.lambda[0] - (s.m9 + s.m10) * sf * c.lambda[1] -
          std::abs(c.alpha) * c.epsilon;
  out.B = 1.0 - s.m4 - s.m6 - (s.m3 + s.m5) * sf * c.lambda[2] - (s.m9 + s.m10) * sf * c.lambda[3] -
          std::abs(c.beta) * c.epsilon;
  double c1 = 0.0;
  if (c.alpha != 0.0)
    c1 -= std::abs(c.alpha) * (d.domain_measure * young_constant(d.p[1], d.p[0], c.epsilon) +
                               d.mu2_l1 * young_constant(d.q[1], d.q[0], c.epsilon));
  if (c.beta != 0.0)
    c1 -= std::abs(c.beta) * (d.domain_measure * young_constant(d.p[3], d.p[2], c.epsilon) +
                              d.mu4_l1 * young_constant(d.q[3], d.q[2], c.epsilon));
  out.C1 = c1;
  out.C2 = c1 - d.delta_l1[0] - d.delta_l1[1] - d.delta_l1[2] - d.delta_l1[3];
  return out;
}

}  // namespace dpcg
