#pragma once

#include <Eigen/SparseCholesky>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpcg/error.hpp"
#include "dpcg/fe_space.hpp"

namespace dpcg {

/// Exponents p1..p4, q1..q4 and weights mu1..mu4 of the two competing pairs.
/// Index i stores p_{i+1}; an empty weight stands for the zero function.
struct ExponentConfig {
  int dim = 1;
  std::array<double, 4> p{2.0, 2.0, 2.0, 2.0};
  std::array<double, 4> q{2.0, 2.0, 2.0, 2.0};
  std::array<ScalarField, 4> mu{};

  /// Throws InvalidInput unless every exponent exceeds 1 and
  /// p1 > p2, q1 > q2, p3 > p4, q3 > q4.
  void validate_ordering() const {
    for (int i = 0; i < 4; ++i) {
      if (!(p[i] > 1.0) || !std::isfinite(p[i]))
        throw InvalidInput("exponent p" + std::to_string(i + 1) + " must be a finite number > 1");
      if (!(q[i] > 1.0) || !std::isfinite(q[i]))
        throw InvalidInput("exponent q" + std::to_string(i + 1) + " must be a finite number > 1");
    }
    for (int j = 0; j < 2; ++j) {
      const std::string a = std::to_string(2 * j + 1), b = std::to_string(2 * j + 2);
      if (!(p[2 * j] > p[2 * j + 1])) throw InvalidInput("exponent ordering requires p" + a + " > p" + b);
      if (!(q[2 * j] > q[2 * j + 1])) throw InvalidInput("exponent ordering requires q" + a + " > q" + b);
    }
  }

  /// Exponents outside (1, N); only meaningful for N >= 2 and reported, not thrown.
  [[nodiscard]] std::vector<std::string> range_violations() const {
    std::vector<std::string> out;
    if (dim < 2) return out;
    const double n = dim;
    for (int i = 0; i < 4; ++i) {
      if (!(p[i] < n)) out.push_back("p" + std::to_string(i + 1) + " >= N");
      if (!(q[i] < n)) out.push_back("q" + std::to_string(i + 1) + " >= N");
    }
    return out;
  }

  [[nodiscard]] std::vector<double> mu_samples(int i, const FESpace& space) const {
    if (!mu[static_cast<std::size_t>(i)]) return std::vector<double>(space.domain_points().size(), 0.0);
    return sample_domain(mu[static_cast<std::size_t>(i)], space);
  }

  /// Checks mu_{2j-1} >= mu_{2j} >= 0 (finite) at every domain quadrature point.
  void validate_weights(const FESpace& space) const {
    std::array<std::vector<double>, 4> s;
    for (int i = 0; i < 4; ++i) s[static_cast<std::size_t>(i)] = mu_samples(i, space);
    const auto& pts = space.domain_points();
    for (std::size_t k = 0; k < pts.size(); ++k) {
      for (int i = 0; i < 4; ++i) {
        const double v = s[static_cast<std::size_t>(i)][k];
        if (!std::isfinite(v) || v < 0.0)
          throw InvalidInput("weight mu" + std::to_string(i + 1) + " is negative or non-finite at (" +
                             std::to_string(pts[k].x[0]) + ", " + std::to_string(pts[k].x[1]) + ")");
      }
      if (s[0][k] < s[1][k]) throw InvalidInput("weights violate mu1 >= mu2");
      if (s[2][k] < s[3][k]) throw InvalidInput("weights violate mu3 >= mu4");
    }
  }
};

/// One double-phase modular G(z, s) = |s|^p + mu(z) |s|^q, with mu sampled at
/// the domain quadrature points (empty = zero).
struct ModularFunction {
  double p = 2.0;
  double q = 2.0;
  std::vector<double> mu;

  [[nodiscard]] double weight(std::size_t k) const { return mu.empty() ? 0.0 : mu[k]; }
  [[nodiscard]] double operator()(std::size_t k, double s) const {
    const double a = std::abs(s);
    const double m = weight(k);
    return std::pow(a, p) + (m != 0.0 ? m * std::pow(a, q) : 0.0);
  }
};

/// Quadrature value of sum_k weights[k] * G(k, w[k]).
inline double modular_integral(std::span<const double> w, const ModularFunction& g, std::span<const double> weights) {
  if (w.size() != weights.size()) throw InvalidInput("modular_integral: sample count does not match the weights");
  if (!g.mu.empty() && g.mu.size() != w.size())
    throw InvalidInput("modular_integral: weight samples do not match the field samples");
  double sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (!std::isfinite(w[k])) throw InvalidInput("modular_integral: non-finite sample value");
    sum += weights[k] * g(k, w[k]);
  }
  return sum;
}

inline double modular_integral(std::span<const double> w, const ModularFunction& g, const FESpace& space) {
  return modular_integral(w, g, domain_weights(space));
}

/// Luxemburg norm inf{zeta > 0 : modular(w / zeta) <= 1}.
///
/// With M = max |w| the modular at zeta = t M is a t^-p + b t^-q, where a and b
/// are the two phase integrals of w / M, so the bisection runs on a scalar.
inline double luxemburg_norm(std::span<const double> w, const ModularFunction& g, std::span<const double> weights,
                             double tol = 1e-12) {
  if (!(tol > 0.0)) throw InvalidInput("luxemburg_norm: tolerance must be positive");
  if (w.size() != weights.size()) throw InvalidInput("modular_integral: sample count does not match the weights");
  if (!g.mu.empty() && g.mu.size() != w.size())
    throw InvalidInput("modular_integral: weight samples do not match the field samples");
  double big = 0.0;
  for (const double x : w) {
    if (!std::isfinite(x)) throw InvalidInput("modular_integral: non-finite sample value");
    big = std::max(big, std::abs(x));
  }
  if (big == 0.0) return 0.0;
  double a = 0.0, b = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double x = std::abs(w[k]) / big;
    a += weights[k] * std::pow(x, g.p);
    const double m = g.weight(k);
    if (m != 0.0) b += weights[k] * m * std::pow(x, g.q);
  }
  if (a + b == 0.0) return 0.0;
  auto modular_at = [&](double t) { return a * std::pow(t, -g.p) + (b != 0.0 ? b * std::pow(t, -g.q) : 0.0); };
  double lo = 1.0, hi = 1.0;
  while (modular_at(hi) >= 1.0) hi *= 2.0;
  while (modular_at(lo) <= 1.0) lo *= 0.5;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (modular_at(mid) > 1.0) lo = mid;
    else hi = mid;
    if (hi - lo <= tol * hi) break;
  }
  return 0.5 * (lo + hi) * big;
}

inline double luxemburg_norm(std::span<const double> w, const ModularFunction& g, const FESpace& space,
                             double tol = 1e-12) {
  return luxemburg_norm(w, g, domain_weights(space), tol);
}

/// Discrete L^r norm (sum_k weights[k] |w[k]|^r)^{1/r}.
inline double lebesgue_norm(std::span<const double> w, double r, std::span<const double> weights) {
  double sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) sum += weights[k] * std::pow(std::abs(w[k]), r);
  return std::pow(sum, 1.0 / r);
}

struct CriticalExponents {
  double star = 0.0;        ///< N p / (N - p)
  double lower_star = 0.0;  ///< (N - 1) p / (N - p)
};

inline CriticalExponents critical_exponents(double p, int n) {
  if (n < 1) throw InvalidInput("critical_exponents: dimension must be positive");
  if (!(p >= 1.0)) throw InvalidInput("critical_exponents: exponent must be >= 1");
  if (p >= n) throw DomainError("critical_exponents: p >= N, the critical exponent is undefined");
  const double d = n - p;
  return {n * p / d, (n - 1) * p / d};
}

/// Magnitudes |grad w| at the domain quadrature points.
inline std::vector<double> gradient_magnitudes(std::span<const double> nodal, const FESpace& space) {
  std::vector<double> out;
  for (const Point& g : gradient_at_quadrature(nodal, space)) out.push_back(norm(g));
  return out;
}

/// ||w||_U-type norm: Luxemburg norm of |grad w| for the modular g.
inline double gradient_luxemburg_norm(std::span<const double> nodal, const ModularFunction& g, const FESpace& space,
                                      double tol = 1e-12) {
  return luxemburg_norm(gradient_magnitudes(nodal, space), g, space, tol);
}

/// The four embeddings bounded by lambda1..lambda4.
enum class EmbeddingKind {
  DomainU,  ///< ||u||_{p1} <= lambda1 ||u||_U
  TraceU,   ///< ||u||_{L^{p1}(contact)} <= lambda2 ||u||_U
  DomainV,  ///< ||v||_{p3} <= lambda3 ||v||_V
  TraceV,   ///< ||v||_{L^{p4}(contact)} <= lambda4 ||v||_V
};

inline const char* to_string(EmbeddingKind kind) {
  switch (kind) {
    case EmbeddingKind::DomainU: return "lambda1";
    case EmbeddingKind::TraceU: return "lambda2";
    case EmbeddingKind::DomainV: return "lambda3";
    case EmbeddingKind::TraceV: return "lambda4";
  }
  return "?";
}

struct EmbeddingOptions {
  int iterations = 200;
  std::uint64_t seed = 0;
  int random_restarts = 3;
  double luxemburg_tol = 1e-13;
  /// Replaces the Lebesgue exponent of the numerator (e.g. p3 instead of p4 for lambda4).
  std::optional<double> lebesgue_exponent;
  /// Additional starting field on the free dofs (e.g. a prolonged coarse maximizer).
  std::optional<Vector> warm_start;
};

struct EmbeddingEstimate {
  double value = 0.0;
  std::size_t dofs = 0;
  int iterations = 0;
  bool warning = false;  ///< no restart improved on its starting value
  Vector maximizer;      ///< free-dof values of the best field, scaled to unit denominator
};

namespace detail {

/// Ratio ||u||_{L^r(domain or contact)} / ||grad u||_G and its gradient on the free dofs.
class EmbeddingRatio {
 public:
  EmbeddingRatio(const FESpace& space, bool trace, double r, ModularFunction g, double tol)
      : space_(space), trace_(trace), r_(r), g_(std::move(g)), tol_(tol), weights_(domain_weights(space)) {
    if (trace_) {
      if (space.contact_points().empty()) throw InvalidInput("trace embedding needs a nonempty contact part");
      trace_weights_ = contact_weights(space);
    }
  }

  [[nodiscard]] double value(const Vector& x) const {
    const auto full = space_.expand(x);
    const double den = gradient_luxemburg_norm(full, g_, space_, tol_);
    if (den == 0.0) return 0.0;
    return numerator(full) / den;
  }

  /// Gradient of log(ratio) with respect to the free dofs.
  [[nodiscard]] Vector log_gradient(const Vector& x) const {
    const auto full = space_.expand(x);
    const Mesh& m = space_.mesh();
    const auto n_dofs = static_cast<Eigen::Index>(space_.dof_count());
    Vector grad = Vector::Zero(n_dofs);

    // Numerator: d log N = N^{-r} * int |u|^{r-2} u phi_k.
    const double num = numerator(full);
    if (num == 0.0) return grad;
    const double scale_n = std::pow(num, -r_);
    if (trace_) {
      const auto vals = contact_values(full, space_);
      const auto& pts = space_.contact_points();
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const double c = scale_n * pts[k].weight * signed_power(vals[k], r_ - 1.0);
        for (int i = 0; i < 2; ++i) {
          const auto d = space_.dof_of_vertex(pts[k].vertices[static_cast<std::size_t>(i)]);
          if (d >= 0) grad[d] += c * pts[k].shape[static_cast<std::size_t>(i)];
        }
      }
    } else {
      const auto vals = values_at_quadrature(full, space_);
      const auto& pts = space_.domain_points();
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const double c = scale_n * pts[k].weight * signed_power(vals[k], r_ - 1.0);
        const Cell& cell = m.cells()[pts[k].cell];
        for (std::size_t i = 0; i < m.vertices_per_cell(); ++i) {
          const auto d = space_.dof_of_vertex(cell[i]);
          if (d >= 0) grad[d] += c * pts[k].shape[i];
        }
      }
    }

    // Denominator: zeta solves F(u, zeta) = 1, d log zeta = -F_u / (zeta F_zeta).
    const double zeta = gradient_luxemburg_norm(full, g_, space_, tol_);
    const auto grads = gradient_at_quadrature(full, space_);
    const auto& pts = space_.domain_points();
    double f_zeta = 0.0;
    Vector f_u = Vector::Zero(n_dofs);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const double t = norm(grads[k]) / zeta;
      if (t == 0.0) continue;
      const double mu = g_.weight(k);
      const double pt = std::pow(t, g_.p);
      const double qt = mu != 0.0 ? mu * std::pow(t, g_.q) : 0.0;
      f_zeta -= pts[k].weight * (g_.p * pt + g_.q * qt) / zeta;
      // d/d(grad u) of G(|grad u| / zeta) = (p t^{p-2} + mu q t^{q-2}) grad u / zeta^2
      const double coef = pts[k].weight * (g_.p * pt + g_.q * qt) / (t * t) / (zeta * zeta);
      const auto& bg = space_.basis_gradients(pts[k].cell);
      const Cell& cell = m.cells()[pts[k].cell];
      for (std::size_t i = 0; i < m.vertices_per_cell(); ++i) {
        const auto d = space_.dof_of_vertex(cell[i]);
        if (d >= 0) f_u[d] += coef * dot(grads[k], bg[i]);
      }
    }
    grad += f_u / (zeta * f_zeta);
    return grad;
  }

 private:
  static double signed_power(double x, double e) { return std::copysign(std::pow(std::abs(x), e), x); }

  [[nodiscard]] double numerator(std::span<const double> full) const {
    if (trace_) return lebesgue_norm(contact_values(full, space_), r_, trace_weights_);
    return lebesgue_norm(values_at_quadrature(full, space_), r_, weights_);
  }

  const FESpace& space_;
  bool trace_;
  double r_;
  ModularFunction g_;
  double tol_;
  std::vector<double> weights_;
  std::vector<double> trace_weights_;
};

}  // namespace detail

/// Lower estimate of an embedding constant: the maximum over the discrete
/// space of the norm ratio, found by Sobolev-preconditioned gradient ascent
/// with Armijo backtracking from several starting fields.
inline EmbeddingEstimate estimate_embedding_constant(const FESpace& space, EmbeddingKind kind,
                                                     const ExponentConfig& cfg, const EmbeddingOptions& opt = {}) {
  if (space.dof_count() == 0) throw InvalidInput("embedding estimate needs at least one free dof");
  const bool u_side = kind == EmbeddingKind::DomainU || kind == EmbeddingKind::TraceU;
  const bool trace = kind == EmbeddingKind::TraceU || kind == EmbeddingKind::TraceV;
  const int gi = u_side ? 0 : 2;
  double r = cfg.p[static_cast<std::size_t>(gi)];
  if (kind == EmbeddingKind::TraceV) r = cfg.p[3];
  if (opt.lebesgue_exponent) r = *opt.lebesgue_exponent;
  ModularFunction g{cfg.p[static_cast<std::size_t>(gi)], cfg.q[static_cast<std::size_t>(gi)], cfg.mu_samples(gi, space)};
  const detail::EmbeddingRatio ratio(space, trace, r, g, opt.luxemburg_tol);

  const SparseMatrix k = laplace_stiffness(space);
  Eigen::SimplicialLDLT<SparseMatrix> solver(k);
  if (solver.info() != Eigen::Success) throw InvalidInput("stiffness matrix is singular");

  const auto n = static_cast<Eigen::Index>(space.dof_count());
  std::vector<Vector> starts;
  starts.push_back(Vector::Ones(n));
  std::mt19937_64 eng(opt.seed);
  for (int s = 0; s < opt.random_restarts; ++s) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = 2.0 * (static_cast<double>(eng() >> 11) * 0x1.0p-53) - 1.0;
    starts.push_back(x);
  }
  if (opt.warm_start) {
    if (opt.warm_start->size() != n) throw InvalidInput("warm start does not match the space");
    starts.push_back(*opt.warm_start);
  }

  EmbeddingEstimate best;
  best.dofs = space.dof_count();
  best.value = -1.0;
  bool any_improved = false;
  for (Vector x : starts) {
    double value = ratio.value(x);
    if (value == 0.0) continue;
    const double initial = value;
    int it = 0;
    for (; it < opt.iterations; ++it) {
      const Vector grad = ratio.log_gradient(x);
      Vector dir = solver.solve(grad);
      const double slope = grad.dot(dir);
      if (!(slope > 0.0)) break;
      // Scale so a unit step is comparable to the field itself.
      double t = x.norm() / std::max(dir.norm(), std::numeric_limits<double>::min());
      bool accepted = false;
      for (int b = 0; b < 40; ++b) {
        const Vector trial = x + t * dir;
        const double tv = ratio.value(trial);
        if (tv > value && std::log(tv / value) >= 1e-4 * t * slope) {
          x = trial;
          accepted = tv > value * (1.0 + 1e-15);
          value = tv;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) break;
      // Normalize to unit denominator to keep the iterates well scaled.
      const double den = gradient_luxemburg_norm(space.expand(x), g, space, opt.luxemburg_tol);
      x /= den;
    }
    best.iterations += it;
    if (value > initial) any_improved = true;
    if (value > best.value) {
      best.value = value;
      best.maximizer = x / gradient_luxemburg_norm(space.expand(x), g, space, opt.luxemburg_tol);
    }
  }
  if (best.value <= 0.0) throw InvalidInput("embedding estimate: every starting field vanished");
  best.warning = !any_improved;
  return best;
}

/// lambda1..lambda4 (and the p3 variant of lambda4) on the finest space of a
/// hierarchy, each level warm-started from the prolonged coarser maximizer.
struct EmbeddingConstants {
  std::array<double, 4> lambda{};
  double lambda4_p3 = 0.0;
  std::size_t dofs = 0;
  bool warning = false;
  /// Per-level values, lambda1..lambda4 then the p3 variant.
  std::vector<std::array<double, 5>> per_level;
  std::vector<std::size_t> level_dofs;
};

inline EmbeddingConstants estimate_embedding_constants(const GalerkinHierarchy& hierarchy, const ExponentConfig& cfg,
                                                       const EmbeddingOptions& base = {}) {
  EmbeddingConstants out;
  const std::array<EmbeddingKind, 5> kinds{EmbeddingKind::DomainU, EmbeddingKind::TraceU, EmbeddingKind::DomainV,
                                           EmbeddingKind::TraceV, EmbeddingKind::TraceV};
  std::array<std::optional<std::vector<double>>, 5> previous{};
  for (std::size_t level = 0; level < hierarchy.size(); ++level) {
    const FESpace& space = hierarchy.space(level);
    std::array<double, 5> row{};
    for (std::size_t j = 0; j < kinds.size(); ++j) {
      EmbeddingOptions opt = base;
      opt.seed = base.seed + 1000003ULL * level + 7919ULL * j;
      if (j == 4) opt.lebesgue_exponent = cfg.p[2];
      if (previous[j]) opt.warm_start = space.restrict_to_free(hierarchy.prolongate(*previous[j], level - 1, level));
      const auto est = estimate_embedding_constant(space, kinds[j], cfg, opt);
      row[j] = est.value;
      previous[j] = space.expand(est.maximizer);
      if (level + 1 == hierarchy.size()) out.warning = out.warning || est.warning;
    }
    out.per_level.push_back(row);
    out.level_dofs.push_back(space.dof_count());
  }
  const auto& last = out.per_level.back();
  out.lambda = {last[0], last[1], last[2], last[3]};
  out.lambda4_p3 = last[4];
  out.dofs = hierarchy.finest().dof_count();
  return out;
}

}  // namespace dpcg
