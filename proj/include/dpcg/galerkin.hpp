#pragma once

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dpcg/error.hpp"
#include "dpcg/fe_space.hpp"
#include "dpcg/modular.hpp"
#include "dpcg/multifunction.hpp"
#include "dpcg/operators.hpp"

namespace dpcg {

struct SolverConfig {
  double newton_tol = 1e-10;
  int max_newton = 50;
  int max_outer = 200;
  double damping = 0.5;  ///< backtracking factor
  int homotopy_steps = 4;
  std::optional<double> epsilon_reg;   ///< default: 1e-8 * domain diameter
  std::optional<double> trust_radius;  ///< max-norm cap on a Newton step
  int max_backtracks = 30;

  void validate() const {
    if (!(newton_tol > 0.0)) throw InvalidInput("newton_tol must be positive");
    if (max_newton < 1 || max_outer < 1) throw InvalidInput("iteration caps must be positive");
    if (!(damping > 0.0 && damping < 1.0)) throw InvalidInput("damping must lie in (0, 1)");
    if (homotopy_steps < 1) throw InvalidInput("homotopy_steps must be >= 1");
    if (epsilon_reg && !(*epsilon_reg >= 0.0)) throw InvalidInput("epsilon_reg must be >= 0");
    if (trust_radius && !(*trust_radius > 0.0)) throw InvalidInput("trust_radius must be positive");
    if (max_backtracks < 1) throw InvalidInput("max_backtracks must be positive");
  }
};

struct InclusionProblem {
  ExponentConfig exponents;
  double alpha = 0.0;
  double beta = 0.0;
  ReactionSet reactions;
  bool certificates_validated = false;
  bool certificates_waived = false;
  std::shared_ptr<const GalerkinHierarchy> hierarchy;
};

enum class LevelStatus { Converged, NewtonStagnation, SelectionCycling };

inline const char* to_string(LevelStatus s) {
  switch (s) {
    case LevelStatus::Converged: return "converged";
    case LevelStatus::NewtonStagnation: return "newton-stagnation";
    case LevelStatus::SelectionCycling: return "selection-cycling";
  }
  return "?";
}

/// Solution of one level: full nodal vectors and the final selections.
struct LevelSolution {
  std::size_t level = 0;
  std::vector<double> u, v;
  SelectionBundle selections;
  double residual = 0.0;  ///< dual norm over this level's test space
  int newton_iters = 0;
  int outer_iters = 0;
  LevelStatus status = LevelStatus::Converged;
  std::string diagnostic;
};

/// Operators and linear-algebra helpers bound to one level.
class LevelContext {
 public:
  LevelContext(const InclusionProblem& problem, std::size_t level, double epsilon_reg, double alpha_scale = 1.0)
      : space_(problem.hierarchy->space(level)), stiffness_(laplace_stiffness(space_)) {
    const auto& c = problem.exponents;
    std::array<std::vector<double>, 4> mu;
    for (int i = 0; i < 4; ++i) mu[static_cast<std::size_t>(i)] = c.mu_samples(i, space_);
    pair_u_ = make_pair(c.p[0], c.q[0], mu[0], c.p[1], c.q[1], mu[1], alpha_scale * problem.alpha, epsilon_reg);
    pair_v_ = make_pair(c.p[2], c.q[2], mu[2], c.p[3], c.q[3], mu[3], alpha_scale * problem.beta, epsilon_reg);
    ldlt_.compute(stiffness_);
    if (ldlt_.info() != Eigen::Success) throw InvalidInput("stiffness factorization failed");
  }

  [[nodiscard]] const FESpace& space() const { return space_; }
  [[nodiscard]] const CompetingPair& pair_u() const { return pair_u_; }
  [[nodiscard]] const CompetingPair& pair_v() const { return pair_v_; }
  void set_scale(double alpha, double beta) {
    pair_u_.coefficient = alpha;
    pair_v_.coefficient = beta;
  }

  [[nodiscard]] Eigen::Index n() const { return static_cast<Eigen::Index>(space_.dof_count()); }

  [[nodiscard]] Vector operator_residual(const Vector& x) const {
    return assemble_residual_D(x.head(n()), x.tail(n()), pair_u_, pair_v_, space_);
  }
  [[nodiscard]] SparseMatrix jacobian(const Vector& x) const {
    return assemble_jacobian_D(x.head(n()), x.tail(n()), pair_u_, pair_v_, space_);
  }

  /// sqrt(r_u' K^{-1} r_u + r_v' K^{-1} r_v): the dual norm for the H1-seminorm.
  [[nodiscard]] double dual_norm(const Vector& r) const {
    if (n() == 0) return 0.0;
    const Vector a = ldlt_.solve(r.head(n()));
    const Vector b = ldlt_.solve(r.tail(n()));
    return std::sqrt(std::max(0.0, r.head(n()).dot(a) + r.tail(n()).dot(b)));
  }

  [[nodiscard]] Vector stack(const std::vector<double>& u, const std::vector<double>& v) const {
    Vector x(2 * n());
    x.head(n()) = space_.restrict_to_free(u);
    x.tail(n()) = space_.restrict_to_free(v);
    return x;
  }
  [[nodiscard]] std::vector<double> u_full(const Vector& x) const { return space_.expand(x.head(n())); }
  [[nodiscard]] std::vector<double> v_full(const Vector& x) const { return space_.expand(x.tail(n())); }

 private:
  const FESpace& space_;
  SparseMatrix stiffness_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  CompetingPair pair_u_;
  CompetingPair pair_v_;
};

namespace detail {

struct NewtonResult {
  Vector x;
  int iterations = 0;
  bool ok = true;
  std::string diagnostic;
};

/// Damped Newton for D(x) + load = 0 with the load frozen.
inline NewtonResult frozen_newton(const LevelContext& ctx, Vector x, const Vector& load, const SolverConfig& cfg) {
  NewtonResult out;
  const double target = 0.1 * cfg.newton_tol;
  Vector f = ctx.operator_residual(x) + load;
  double fnorm = f.norm();
  for (int it = 0; it < cfg.max_newton; ++it) {
    if (ctx.dual_norm(f) <= target) break;
    const SparseMatrix j = ctx.jacobian(x);
    Eigen::SparseLU<SparseMatrix> lu;
    lu.analyzePattern(j);
    lu.factorize(j);
    if (lu.info() != Eigen::Success) {
      out.ok = ctx.dual_norm(f) <= cfg.newton_tol;
      if (!out.ok) out.diagnostic = "singular Newton matrix";
      break;
    }
    Vector dx = lu.solve(-f);
    if (!dx.allFinite()) {
      out.ok = ctx.dual_norm(f) <= cfg.newton_tol;
      if (!out.ok) out.diagnostic = "non-finite Newton step";
      break;
    }
    if (cfg.trust_radius) {
      const double m = dx.lpNorm<Eigen::Infinity>();
      if (m > *cfg.trust_radius) dx *= *cfg.trust_radius / m;
    }
    ++out.iterations;
    double t = 1.0;
    bool accepted = false;
    for (int b = 0; b < cfg.max_backtracks; ++b) {
      const Vector trial = x + t * dx;
      const Vector ft = ctx.operator_residual(trial) + load;
      const double tn = ft.norm();
      if (std::isfinite(tn) && tn <= (1.0 - 1e-4 * t) * fnorm) {
        x = trial;
        f = ft;
        fnorm = tn;
        accepted = true;
        break;
      }
      t *= cfg.damping;
    }
    if (!accepted) {
      out.ok = ctx.dual_norm(f) <= cfg.newton_tol;
      if (!out.ok) out.diagnostic = "no residual decrease after " + std::to_string(cfg.max_backtracks) + " backtracks";
      break;
    }
  }
  if (out.ok && ctx.dual_norm(f) > cfg.newton_tol) {
    out.ok = false;
    out.diagnostic = "Newton iteration cap reached";
  }
  out.x = std::move(x);
  return out;
}

}  // namespace detail

/// Solves 0 in D(u,v) + S_g(u,v) - S_h(u,v) on one level: outer fixed point on
/// the selections, inner damped Newton, homotopy in (alpha, beta).
inline LevelSolution solve_level(const InclusionProblem& problem, std::size_t level, const SolverConfig& cfg,
                                 const std::optional<std::pair<std::vector<double>, std::vector<double>>>& warm = {}) {
  if (!problem.hierarchy) throw InvalidInput("problem has no hierarchy");
  if (level >= problem.hierarchy->size()) throw InvalidInput("level exceeds the hierarchy");
  if (!problem.certificates_validated && !problem.certificates_waived)
    throw InvalidInput("certificates must be validated or explicitly waived before solving");
  cfg.validate();
  const FESpace& space = problem.hierarchy->space(level);
  const double eps = cfg.epsilon_reg.value_or(default_epsilon_reg(space.mesh()));
  LevelContext ctx(problem, level, eps);

  LevelSolution sol;
  sol.level = level;
  Vector x = Vector::Zero(2 * ctx.n());
  if (warm) x = ctx.stack(warm->first, warm->second);

  const bool competing = problem.alpha != 0.0 || problem.beta != 0.0;
  const int stages = competing ? cfg.homotopy_steps : 1;
  SelectionBundle sel = superpose(problem.reactions, ctx.u_full(x), ctx.v_full(x), space, SelectionStrategy::Midpoint);
  bool converged = false;
  double residual = 0.0;
  for (int stage = 1; stage <= stages; ++stage) {
    const double s = static_cast<double>(stage) / stages;
    ctx.set_scale(s * problem.alpha, s * problem.beta);
    converged = false;
    for (int outer = 0; outer < cfg.max_outer; ++outer) {
      ++sol.outer_iters;
      const Vector load = selection_dual(sel, space);
      auto nr = detail::frozen_newton(ctx, x, load, cfg);
      sol.newton_iters += nr.iterations;
      x = std::move(nr.x);
      if (!nr.ok) {
        sol.status = LevelStatus::NewtonStagnation;
        sol.diagnostic = "homotopy stage " + std::to_string(stage) + ": " + nr.diagnostic;
        break;
      }
      SelectionBundle next =
          superpose(problem.reactions, ctx.u_full(x), ctx.v_full(x), space, SelectionStrategy::Nearest, &sel);
      const double drift = next.drift(sel);
      sel = std::move(next);
      residual = ctx.dual_norm(ctx.operator_residual(x) + selection_dual(sel, space));
      if (residual + drift < cfg.newton_tol) {
        converged = true;
        break;
      }
    }
    if (sol.status != LevelStatus::Converged) break;
    if (!converged) {
      sol.status = LevelStatus::SelectionCycling;
      sol.diagnostic = "homotopy stage " + std::to_string(stage) + ": selections did not settle after " +
                       std::to_string(cfg.max_outer) + " outer iterations";
      break;
    }
  }
  sol.u = ctx.u_full(x);
  sol.v = ctx.v_full(x);
  sol.selections = std::move(sel);
  sol.residual = ctx.dual_norm(ctx.operator_residual(x) + selection_dual(sol.selections, space));
  return sol;
}

// ---------------------------------------------------------------------------
// Trace and verification

struct TraceEntry {
  std::size_t level = 0;
  std::size_t dofs = 0;
  double rho = 0.0;        ///< residual dual norm against the level-0 test space
  double pi = 0.0;         ///< <D + xi - eta, (u_n - u_ref, v_n - v_ref)>
  double pi_prime = 0.0;   ///< <D, (u_n - u_ref, v_n - v_ref)>
  double nodal_diff = 0.0; ///< max |u_n - P u_{n-1}|, |v_n - P v_{n-1}|; 0 at level 0
  double own_residual = 0.0;
  int newton_iters = 0;
  int outer_iters = 0;
  LevelStatus status = LevelStatus::Converged;
  std::string diagnostic;
};

struct GalerkinTrace {
  std::vector<LevelSolution> solutions;
  std::vector<TraceEntry> entries;

  [[nodiscard]] bool complete(std::size_t levels) const {
    if (entries.size() != levels) return false;
    return std::all_of(entries.begin(), entries.end(),
                       [](const TraceEntry& e) { return e.status == LevelStatus::Converged; });
  }
};

namespace detail {

/// Selections of a coarse level carried to the quadrature points of the finest
/// level: take the value at the nearest coarse point in the ancestor cell (or
/// facet), then project onto the fine interval at the prolonged state.
inline SelectionBundle extend_selections(const InclusionProblem& problem, const LevelSolution& sol,
                                         std::span<const double> u_fine, std::span<const double> v_fine) {
  const auto& h = *problem.hierarchy;
  const std::size_t fine = h.size() - 1;
  const FESpace& cs = h.space(sol.level);
  const FESpace& fs = h.finest();
  SelectionBundle prev;
  const auto& fd = fs.domain_points();
  const auto& cd = cs.domain_points();
  prev.eta1.resize(fd.size());
  prev.eta2.resize(fd.size());
  for (std::size_t k = 0; k < fd.size(); ++k) {
    const std::size_t cell = h.ancestor_cell(fine, fd[k].cell, sol.level);
    const std::size_t first = cell * cs.points_per_cell();
    std::size_t best = first;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = first; j < first + cs.points_per_cell(); ++j) {
      const double d = std::hypot(cd[j].x[0] - fd[k].x[0], cd[j].x[1] - fd[k].x[1]);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    prev.eta1[k] = sol.selections.eta1[best];
    prev.eta2[k] = sol.selections.eta2[best];
  }
  const auto& fc = fs.contact_points();
  const auto& cc = cs.contact_points();
  prev.xi1.resize(fc.size());
  prev.xi2.resize(fc.size());
  for (std::size_t k = 0; k < fc.size(); ++k) {
    const std::size_t facet = h.ancestor_facet(fine, fc[k].facet, sol.level);
    const auto first = static_cast<std::size_t>(cs.first_contact_point(facet));
    std::size_t best = first;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = first; j < first + cs.points_per_facet(); ++j) {
      const double d = std::hypot(cc[j].x[0] - fc[k].x[0], cc[j].x[1] - fc[k].x[1]);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    prev.xi1[k] = sol.selections.xi1[best];
    prev.xi2[k] = sol.selections.xi2[best];
  }
  return superpose(problem.reactions, u_fine, v_fine, fs, SelectionStrategy::Nearest, &prev);
}

}  // namespace detail

/// Recomputes rho_n, pi_n, pi'_n and nodal differences from stored level solutions.
inline GalerkinTrace evaluate_trace(const InclusionProblem& problem, std::vector<LevelSolution> solutions,
                                    double epsilon_reg_override = -1.0) {
  const auto& h = *problem.hierarchy;
  GalerkinTrace trace;
  if (solutions.empty()) return trace;
  auto eps_for = [&](std::size_t level) {
    return epsilon_reg_override >= 0.0 ? epsilon_reg_override : default_epsilon_reg(h.space(level).mesh());
  };
  const LevelContext coarse(problem, 0, eps_for(0));
  const std::size_t last = solutions.size() - 1;
  const std::size_t finest = h.size() - 1;
  const LevelContext fine_ctx(problem, finest, eps_for(finest));
  const FESpace& fs = h.finest();

  // Reference: the last solved level, prolonged to the finest space.
  const auto u_ref = h.prolongate(solutions[last].u, solutions[last].level, finest);
  const auto v_ref = h.prolongate(solutions[last].v, solutions[last].level, finest);

  for (std::size_t i = 0; i < solutions.size(); ++i) {
    const LevelSolution& s = solutions[i];
    TraceEntry e;
    e.level = s.level;
    e.dofs = 2 * h.space(s.level).dof_count();
    e.newton_iters = s.newton_iters;
    e.outer_iters = s.outer_iters;
    e.status = s.status;
    e.diagnostic = s.diagnostic;

    const LevelContext ctx(problem, s.level, eps_for(s.level));
    const Vector x = ctx.stack(s.u, s.v);
    const Vector r = ctx.operator_residual(x) + selection_dual(s.selections, ctx.space());
    e.own_residual = ctx.dual_norm(r);

    // Fixed coarse test set.
    const auto ru = h.restrict_dual(ctx.space().expand(r.head(ctx.n())), s.level, 0);
    const auto rv = h.restrict_dual(ctx.space().expand(r.tail(ctx.n())), s.level, 0);
    Vector r0(2 * coarse.n());
    r0.head(coarse.n()) = coarse.space().restrict_to_free(ru);
    r0.tail(coarse.n()) = coarse.space().restrict_to_free(rv);
    e.rho = coarse.dual_norm(r0);

    // Pairings on the finest space against the reference.
    const auto uf = h.prolongate(s.u, s.level, finest);
    const auto vf = h.prolongate(s.v, s.level, finest);
    std::vector<double> du(uf.size()), dv(vf.size());
    for (std::size_t k = 0; k < uf.size(); ++k) {
      du[k] = uf[k] - u_ref[k];
      dv[k] = vf[k] - v_ref[k];
    }
    const Vector xf = fine_ctx.stack(uf, vf);
    const Vector diff = fine_ctx.stack(du, dv);
    const Vector d_op = fine_ctx.operator_residual(xf);
    const SelectionBundle ext = detail::extend_selections(problem, s, uf, vf);
    e.pi_prime = d_op.dot(diff);
    e.pi = (d_op + selection_dual(ext, fs)).dot(diff);

    if (i > 0) {
      const auto pu = h.prolongate(solutions[i - 1].u, solutions[i - 1].level, s.level);
      const auto pv = h.prolongate(solutions[i - 1].v, solutions[i - 1].level, s.level);
      double d = 0.0;
      for (std::size_t k = 0; k < pu.size(); ++k)
        d = std::max({d, std::abs(s.u[k] - pu[k]), std::abs(s.v[k] - pv[k])});
      e.nodal_diff = d;
    }
    trace.entries.push_back(std::move(e));
  }
  trace.solutions = std::move(solutions);
  return trace;
}

/// Solves every level with prolonged warm starts and evaluates the trace.
/// Stops after the first failed level; the trace keeps that level.
inline GalerkinTrace run_hierarchy(const InclusionProblem& problem, const SolverConfig& cfg) {
  if (!problem.hierarchy) throw InvalidInput("problem has no hierarchy");
  if (problem.hierarchy->size() < 3) throw InvalidInput("run_hierarchy needs at least 3 levels");
  std::vector<LevelSolution> solutions;
  for (std::size_t level = 0; level < problem.hierarchy->size(); ++level) {
    std::optional<std::pair<std::vector<double>, std::vector<double>>> warm;
    if (level > 0) {
      const auto& prev = solutions.back();
      warm.emplace(problem.hierarchy->prolongate(prev.u, level - 1, level),
                   problem.hierarchy->prolongate(prev.v, level - 1, level));
    }
    solutions.push_back(solve_level(problem, level, cfg, warm));
    if (solutions.back().status != LevelStatus::Converged) break;
  }
  return evaluate_trace(problem, std::move(solutions), cfg.epsilon_reg.value_or(-1.0));
}

struct SolutionCertificate {
  bool generalized = false;
  bool strongly_generalized = false;
  bool weak = false;
  double tol = 0.0;
  std::vector<double> rho, pi, pi_prime, nodal_diff;
  std::size_t member_count = 0;
  std::size_t total_count = 0;
  bool all_members = false;
  double weak_residual = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> reasons;  ///< why a flag is false
};

/// Discrete surrogates of the generalized-solution definition.
inline SolutionCertificate verify_generalized(const GalerkinTrace& trace, double tol, std::size_t expected_levels = 0) {
  if (trace.entries.size() < 3) throw InvalidInput("verification needs at least 3 completed levels");
  SolutionCertificate c;
  c.tol = tol;
  for (const auto& e : trace.entries) {
    c.rho.push_back(e.rho);
    c.pi.push_back(e.pi);
    c.pi_prime.push_back(e.pi_prime);
    c.nodal_diff.push_back(e.nodal_diff);
  }
  c.all_members = true;
  for (const auto& s : trace.solutions) {
    c.member_count += s.selections.member_count;
    c.total_count += s.selections.total_count;
    c.all_members = c.all_members && s.selections.all_members;
  }
  bool ok = true;
  const std::size_t n = trace.entries.size();
  for (const auto& e : trace.entries)
    if (e.status != LevelStatus::Converged) {
      ok = false;
      c.reasons.push_back("level " + std::to_string(e.level) + " failed: " + e.diagnostic);
    }
  if (expected_levels != 0 && n != expected_levels) {
    ok = false;
    c.reasons.push_back("trace has " + std::to_string(n) + " of " + std::to_string(expected_levels) + " levels");
  }
  for (std::size_t i = 2; i < n; ++i)
    if (c.nodal_diff[i] > c.nodal_diff[i - 1] + tol) {
      ok = false;
      c.reasons.push_back("nodal differences increase at level " + std::to_string(i));
      break;
    }
  if (!(c.rho[n - 1] <= tol)) {
    ok = false;
    c.reasons.push_back("final residual dual norm exceeds tolerance");
  }
  for (std::size_t i = n - 2; i < n; ++i)
    if (c.rho[i] > c.rho[i - 1] + tol) {
      ok = false;
      c.reasons.push_back("residual dual norm increases over the last three levels");
      break;
    }
  if (!(std::abs(c.pi[n - 1]) <= tol)) {
    ok = false;
    c.reasons.push_back("final pairing exceeds tolerance");
  }
  if (!c.all_members) {
    ok = false;
    c.reasons.push_back("a selection lies outside its interval");
  }
  c.generalized = ok;
  return c;
}

/// Adds the strong pairing condition; never true unless generalized holds.
inline void verify_strong(SolutionCertificate& c) {
  const double last = c.pi_prime.empty() ? std::numeric_limits<double>::infinity() : c.pi_prime.back();
  const bool cond = std::abs(last) <= c.tol;
  if (!cond) c.reasons.push_back("final operator pairing exceeds tolerance");
  c.strongly_generalized = c.generalized && cond;
}

inline constexpr const char* kNotBothNegative = "competing coefficients not both negative";

/// Weak-solution check on the finest solved level; gated on max(alpha, beta) < 0.
inline void verify_weak_solution(const InclusionProblem& problem, const GalerkinTrace& trace, SolutionCertificate& c) {
  c.weak = false;
  if (!(std::max(problem.alpha, problem.beta) < 0.0)) {
    c.reasons.emplace_back(kNotBothNegative);
    return;
  }
  if (trace.entries.empty()) return;
  c.weak_residual = trace.entries.back().own_residual;
  const bool members = trace.solutions.back().selections.all_members;
  bool ok = true;
  if (!(c.weak_residual <= c.tol)) {
    ok = false;
    c.reasons.push_back("finest residual dual norm exceeds tolerance");
  }
  if (!members) {
    ok = false;
    c.reasons.push_back("finest selections are not all interval members");
  }
  if (ok && !c.strongly_generalized) c.reasons.push_back("weak flag requires the strongly generalized flag");
  c.weak = ok && c.strongly_generalized;
}

inline SolutionCertificate certify(const InclusionProblem& problem, const GalerkinTrace& trace, double tol) {
  SolutionCertificate c = verify_generalized(trace, tol, problem.hierarchy->size());
  verify_strong(c);
  verify_weak_solution(problem, trace, c);
  return c;
}

// ---------------------------------------------------------------------------
// Coercivity pairing

struct PairingCheck {
  double pairing = 0.0;  ///< <D(u,v) + xi - eta, (u, v)>
  double bound = 0.0;    ///< A min(|u|^p1, |u|^q1) + B min(|v|^p3, |v|^q3) + C2
  double norm_u = 0.0;   ///< ||u||_U
  double norm_v = 0.0;   ///< ||v||_V
};

/// Evaluates both sides of the coercivity estimate at a state, with midpoint selections.
inline PairingCheck coercivity_pairing(const InclusionProblem& problem, const LevelContext& ctx,
                                       const std::vector<double>& u, const std::vector<double>& v,
                                       const CoercivityBound& bound) {
  const FESpace& space = ctx.space();
  const auto& c = problem.exponents;
  const SelectionBundle sel = superpose(problem.reactions, u, v, space, SelectionStrategy::Midpoint);
  const Vector x = ctx.stack(u, v);
  PairingCheck out;
  out.pairing = (ctx.operator_residual(x) + selection_dual(sel, space)).dot(x);
  out.norm_u = gradient_luxemburg_norm(u, ModularFunction{c.p[0], c.q[0], c.mu_samples(0, space)}, space);
  out.norm_v = gradient_luxemburg_norm(v, ModularFunction{c.p[2], c.q[2], c.mu_samples(2, space)}, space);
  out.bound = bound.A * std::min(std::pow(out.norm_u, c.p[0]), std::pow(out.norm_u, c.q[0])) +
              bound.B * std::min(std::pow(out.norm_v, c.p[2]), std::pow(out.norm_v, c.q[2])) + bound.C2;
  return out;
}

}  // namespace dpcg
