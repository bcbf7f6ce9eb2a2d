#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dpcg/error.hpp"
#include "dpcg/expression.hpp"
#include "dpcg/galerkin.hpp"
#include "dpcg/modular.hpp"
#include "dpcg/multifunction.hpp"
#include "dpcg/problem.hpp"

namespace dpcg::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kGeneralized = 0,
  kInputError = 1,
  kCertificateFailed = 2,
  kValidatorRejected = 3,
  kSolverFailure = 4,
};

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Validation stage

struct ValidationOutcome {
  bool passed = true;
  std::vector<std::string> failures;
  std::optional<ValidationReport> growth;
  std::optional<ValidationReport> sign;
  EmbeddingConstants constants;
  CoercivityCertificate coercivity;
  CoercivityCondition condition;
  CoercivityBound bound;
  CoercivityData data;
  std::vector<std::string> range_violations;
};

inline double l1_domain(const ScalarField& f, const FESpace& space) {
  if (!f) return 0.0;
  auto s = sample_domain(f, space);
  for (double& x : s) x = std::abs(x);
  return integrate_domain(s, space);
}

inline double l1_contact(const ScalarField& f, const FESpace& space) {
  if (!f) return 0.0;
  auto s = sample_contact(f, space);
  for (double& x : s) x = std::abs(x);
  return integrate_boundary2(s, space);
}

/// Embedding constants over the hierarchy.
inline EmbeddingConstants compute_constants(const ProblemSpec& spec, const GalerkinHierarchy& h) {
  EmbeddingOptions opt;
  opt.iterations = spec.settings.embedding_iters;
  opt.seed = spec.settings.seed + 2;
  return estimate_embedding_constants(h, spec.exponents, opt);
}

/// Runs every validator: exponent ranges, weights, growth, sign, coercivity.
inline ValidationOutcome run_validation(const ProblemSpec& spec, const GalerkinHierarchy& h) {
  ValidationOutcome out;
  const FESpace& fine = h.finest();
  spec.exponents.validate_weights(fine);
  out.range_violations = spec.exponents.range_violations();
  for (const auto& v : out.range_violations) out.failures.push_back("exponent range: " + v);

  if (spec.growth) {
    out.growth = validate_growth(spec.reactions, *spec.growth, spec.exponents, fine, spec.settings.samples,
                                 spec.settings.seed);
    if (!out.growth->passed) out.failures.emplace_back("growth certificate rejected");
  } else {
    out.failures.emplace_back("growth certificate missing");
  }
  if (spec.sign) {
    out.sign = validate_sign(spec.reactions, *spec.sign, spec.exponents, fine, spec.settings.samples,
                             spec.settings.seed + 1);
    if (!out.sign->passed) out.failures.emplace_back("sign certificate rejected");
  } else {
    out.failures.emplace_back("sign certificate missing");
  }

  out.constants = compute_constants(spec, h);
  out.coercivity.lambda = out.constants.lambda;
  out.coercivity.sign = spec.sign.value_or(SignCertificate{});
  out.coercivity.alpha = spec.alpha;
  out.coercivity.beta = spec.beta;
  out.coercivity.epsilon = spec.coercivity_epsilon;
  out.coercivity.safety_factor = spec.safety_factor;
  out.condition = validate_coercivity_condition(out.coercivity);
  if (!out.condition.passed) out.failures.emplace_back("coercivity condition fails");

  out.data.p = spec.exponents.p;
  out.data.q = spec.exponents.q;
  out.data.domain_measure = fine.mesh().measure();
  out.data.mu2_l1 = l1_domain(spec.exponents.mu[1], fine);
  out.data.mu4_l1 = l1_domain(spec.exponents.mu[3], fine);
  if (spec.sign) {
    out.data.delta_l1 = {l1_domain(spec.sign->bounds[0], fine), l1_domain(spec.sign->bounds[1], fine),
                         l1_contact(spec.sign->bounds[2], fine), l1_contact(spec.sign->bounds[3], fine)};
  }
  out.bound = coercivity_bound(out.coercivity, out.data);
  out.passed = out.failures.empty();
  return out;
}

// ---------------------------------------------------------------------------
// JSON rendering

inline Json to_json(const PointArgs& a) {
  return Json{{"z1", a.z[0]}, {"z2", a.z[1]}, {"r1", a.r1}, {"r2", a.r2}, {"n1", a.n1}, {"n2", a.n2}};
}

inline Json to_json(const ValidationReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back(
        {{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"passed", c.passed}, {"informational", c.informational}});
  Json j{{"passed", r.passed}, {"samples", r.samples}, {"seed", r.seed}, {"checks", checks}};
  if (r.violation) {
    const auto& v = *r.violation;
    j["violation"] = {{"map", v.map},     {"sample", v.sample}, {"point", to_json(v.args)},
                      {"value", v.value}, {"bound", v.bound},   {"detail", v.detail}};
  } else {
    j["violation"] = nullptr;
  }
  return j;
}

inline Json constants_json(const EmbeddingConstants& c, double safety_factor) {
  Json levels = Json::array();
  for (std::size_t i = 0; i < c.per_level.size(); ++i) {
    const auto& r = c.per_level[i];
    levels.push_back({{"level", i},
                      {"dofs", c.level_dofs[i]},
                      {"lambda1", r[0]},
                      {"lambda2", r[1]},
                      {"lambda3", r[2]},
                      {"lambda4", r[3]},
                      {"lambda4_p3", r[4]}});
  }
  return Json{{"lambda1", c.lambda[0]},
              {"lambda2", c.lambda[1]},
              {"lambda3", c.lambda[2]},
              {"lambda4", c.lambda[3]},
              {"lambda4_p3", c.lambda4_p3},
              {"dofs", c.dofs},
              {"safety_factor", safety_factor},
              {"lower_estimates", true},
              {"warning", c.warning},
              {"levels", levels}};
}

inline Json validation_json(const ProblemSpec& spec, const ValidationOutcome& v, bool waived) {
  Json j;
  j["passed"] = v.passed;
  j["waived"] = waived;
  j["failures"] = v.failures;
  j["exponent_range_violations"] = v.range_violations;
  j["growth"] = v.growth ? to_json(*v.growth) : Json(nullptr);
  j["sign"] = v.sign ? to_json(*v.sign) : Json(nullptr);
  j["coercivity_condition"] = {{"lhs", v.condition.lhs},
                               {"margin", v.condition.margin},
                               {"passed", v.condition.passed},
                               {"safety_factor", spec.safety_factor},
                               {"heuristic", true}};
  j["coercivity_bound"] = {{"epsilon", spec.coercivity_epsilon},
                           {"A", v.bound.A},
                           {"B", v.bound.B},
                           {"C1", v.bound.C1},
                           {"C2", v.bound.C2},
                           {"domain_measure", v.data.domain_measure},
                           {"mu2_l1", v.data.mu2_l1},
                           {"mu4_l1", v.data.mu4_l1},
                           {"delta_l1", v.data.delta_l1}};
  return j;
}

inline Json inputs_json(const ProblemSpec& spec) {
  Json j;
  j["exponents"] = spec.raw.at("exponents");
  j["coefficients"] = spec.raw.contains("coefficients") ? spec.raw.at("coefficients") : Json::object();
  j["certificates"] = spec.raw.contains("certificates") ? spec.raw.at("certificates") : Json::object();
  return j;
}

/// A-priori bound A min(..) + B min(..) + C2 at every solved level.
inline Json a_priori_json(const ProblemSpec& spec, const InclusionProblem& problem, const GalerkinTrace& trace,
                          const CoercivityBound& bound) {
  Json out = Json::array();
  const auto& c = spec.exponents;
  for (const auto& s : trace.solutions) {
    const FESpace& space = problem.hierarchy->space(s.level);
    const double nu = gradient_luxemburg_norm(s.u, ModularFunction{c.p[0], c.q[0], c.mu_samples(0, space)}, space);
    const double nv = gradient_luxemburg_norm(s.v, ModularFunction{c.p[2], c.q[2], c.mu_samples(2, space)}, space);
    const double value = bound.A * std::min(std::pow(nu, c.p[0]), std::pow(nu, c.q[0])) +
                         bound.B * std::min(std::pow(nv, c.p[2]), std::pow(nv, c.q[2])) + bound.C2;
    out.push_back({{"level", s.level}, {"norm_u", nu}, {"norm_v", nv}, {"value", value}});
  }
  return out;
}

inline Json solution_json(const SolutionCertificate& c) {
  return Json{{"generalized", c.generalized},
              {"strongly_generalized", c.strongly_generalized},
              {"weak", c.weak},
              {"tol", c.tol},
              {"rho", c.rho},
              {"pi", c.pi},
              {"pi_prime", c.pi_prime},
              {"nodal_diff", c.nodal_diff},
              {"membership", {{"members", c.member_count}, {"total", c.total_count}, {"all", c.all_members}}},
              {"weak_residual", std::isnan(c.weak_residual) ? Json(nullptr) : Json(c.weak_residual)},
              {"reasons", c.reasons}};
}

// ---------------------------------------------------------------------------
// Trace and solution files

inline std::string trace_csv(const GalerkinTrace& trace) {
  std::ostringstream os;
  os << "level,dofs,rho_n,pi_n,pi_prime_n,newton_iters,outer_iters\n";
  for (const auto& e : trace.entries)
    os << e.level << ',' << e.dofs << ',' << format_double(e.rho) << ',' << format_double(e.pi) << ','
       << format_double(e.pi_prime) << ',' << e.newton_iters << ',' << e.outer_iters << '\n';
  return os.str();
}

inline std::string solution_text(const LevelSolution& s, const FESpace& space) {
  std::ostringstream os;
  os << "# nodal values and selections of one level\n";
  os << "LEVEL " << s.level << '\n';
  os << "STATUS " << to_string(s.status) << '\n';
  os << "DIAGNOSTIC " << (s.diagnostic.empty() ? "-" : s.diagnostic) << '\n';
  os << "NODES " << s.u.size() << '\n';
  for (std::size_t k = 0; k < s.u.size(); ++k) {
    const Point& x = space.mesh().vertices()[k];
    os << format_double(x[0]) << ' ' << format_double(x[1]) << ' ' << format_double(s.u[k]) << ' '
       << format_double(s.v[k]) << '\n';
  }
  os << "DOMAIN_POINTS " << s.selections.eta1.size() << '\n';
  for (std::size_t k = 0; k < s.selections.eta1.size(); ++k)
    os << format_double(s.selections.eta1[k]) << ' ' << format_double(s.selections.eta2[k]) << '\n';
  os << "CONTACT_POINTS " << s.selections.xi1.size() << '\n';
  for (std::size_t k = 0; k < s.selections.xi1.size(); ++k)
    os << format_double(s.selections.xi1[k]) << ' ' << format_double(s.selections.xi2[k]) << '\n';
  return os.str();
}

struct TraceRow {
  std::size_t level = 0;
  std::size_t dofs = 0;
  double rho = 0.0, pi = 0.0, pi_prime = 0.0;
  int newton_iters = 0, outer_iters = 0;
};

inline std::vector<TraceRow> read_trace_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "level,dofs,rho_n,pi_n,pi_prime_n,newton_iters,outer_iters")
    throw InvalidInput(path.string() + ": unexpected header");
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<std::string> f;
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw InvalidInput(path.string() + ": malformed row '" + line + "'");
    try {
      rows.push_back({std::stoul(f[0]), std::stoul(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4]),
                      std::stoi(f[5]), std::stoi(f[6])});
    } catch (const std::exception&) {
      throw InvalidInput(path.string() + ": malformed row '" + line + "'");
    }
  }
  return rows;
}

/// Reads a solution file; selection sets and membership are recomputed at the stored state.
inline LevelSolution read_solution(const fs::path& path, const FESpace& space, const ReactionSet& maps) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path.string());
  LevelSolution s;
  std::string line;
  auto next = [&]() -> std::string {
    while (std::getline(in, line))
      if (!line.empty() && line[0] != '#') return line;
    throw InvalidInput(path.string() + ": unexpected end of file");
  };
  auto keyword = [&](const std::string& key) {
    const std::string l = next();
    if (l.rfind(key + " ", 0) != 0) throw InvalidInput(path.string() + ": expected " + key);
    return l.substr(key.size() + 1);
  };
  auto count = [&](const std::string& key, std::size_t expected) {
    const auto n = std::stoul(keyword(key));
    if (n != expected) throw InvalidInput(path.string() + ": " + key + " count does not match the space");
    return n;
  };
  s.level = std::stoul(keyword("LEVEL"));
  const std::string status = keyword("STATUS");
  if (status == "converged") s.status = LevelStatus::Converged;
  else if (status == "newton-stagnation") s.status = LevelStatus::NewtonStagnation;
  else if (status == "selection-cycling") s.status = LevelStatus::SelectionCycling;
  else throw InvalidInput(path.string() + ": unknown status " + status);
  s.diagnostic = keyword("DIAGNOSTIC");
  if (s.diagnostic == "-") s.diagnostic.clear();
  const auto nodes = count("NODES", space.node_count());
  s.u.resize(nodes);
  s.v.resize(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    std::istringstream ls(next());
    double x = 0, y = 0;
    if (!(ls >> x >> y >> s.u[k] >> s.v[k])) throw InvalidInput(path.string() + ": malformed node line");
  }
  std::vector<double> eta1, eta2, xi1, xi2;
  const auto nd = count("DOMAIN_POINTS", space.domain_points().size());
  for (std::size_t k = 0; k < nd; ++k) {
    std::istringstream ls(next());
    double a = 0, b = 0;
    if (!(ls >> a >> b)) throw InvalidInput(path.string() + ": malformed selection line");
    eta1.push_back(a);
    eta2.push_back(b);
  }
  const auto nc = count("CONTACT_POINTS", space.contact_points().size());
  for (std::size_t k = 0; k < nc; ++k) {
    std::istringstream ls(next());
    double a = 0, b = 0;
    if (!(ls >> a >> b)) throw InvalidInput(path.string() + ": malformed selection line");
    xi1.push_back(a);
    xi2.push_back(b);
  }
  s.selections = rebuild_selections(maps, s.u, s.v, space, eta1, eta2, xi1, xi2);
  return s;
}

// ---------------------------------------------------------------------------
// Subcommands

struct Options {
  std::string command;
  fs::path problem;
  fs::path out;
  bool waive = false;
  std::optional<std::size_t> levels;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> trace_dir;
};

inline void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
}

inline InclusionProblem make_problem(const ProblemSpec& spec, std::shared_ptr<const GalerkinHierarchy> h,
                                     bool validated, bool waived) {
  InclusionProblem p;
  p.exponents = spec.exponents;
  p.alpha = spec.alpha;
  p.beta = spec.beta;
  p.reactions = spec.reactions;
  p.certificates_validated = validated;
  p.certificates_waived = waived;
  p.hierarchy = std::move(h);
  return p;
}

inline std::string report_text(const ProblemSpec& spec, const ValidationOutcome& v, const GalerkinTrace* trace,
                               const SolutionCertificate* cert, int exit_code, bool waived) {
  std::ostringstream os;
  os << "dpcg report\n===========\n\n";
  os << "alpha = " << format_double(spec.alpha) << ", beta = " << format_double(spec.beta) << "\n";
  os << "exponents p = (" << spec.exponents.p[0] << ", " << spec.exponents.p[1] << ", " << spec.exponents.p[2]
     << ", " << spec.exponents.p[3] << "), q = (" << spec.exponents.q[0] << ", " << spec.exponents.q[1] << ", "
     << spec.exponents.q[2] << ", " << spec.exponents.q[3] << ")\n\n";
  os << "Validation: " << (v.passed ? "passed" : "FAILED") << (waived ? " (waived)" : "") << "\n";
  for (const auto& f : v.failures) os << "  - " << f << "\n";
  if (v.growth && v.growth->violation) {
    const auto& x = *v.growth->violation;
    os << "  growth violation in " << x.map << " at sample " << x.sample << ": value " << format_double(x.value)
       << " > bound " << format_double(x.bound) << " (z=(" << x.args.z[0] << ", " << x.args.z[1]
       << "), r1=" << x.args.r1 << ", r2=" << x.args.r2 << ", n1=" << x.args.n1 << ", n2=" << x.args.n2 << ")\n";
  }
  if (v.sign && v.sign->violation) {
    const auto& x = *v.sign->violation;
    os << "  sign violation in " << x.map << " at sample " << x.sample << ": value " << format_double(x.value)
       << " > bound " << format_double(x.bound) << "\n";
  }
  os << "\nEmbedding constants (lower estimates on " << v.constants.dofs << " dofs):\n";
  for (int i = 0; i < 4; ++i) os << "  lambda" << i + 1 << " = " << format_double(v.constants.lambda[i]) << "\n";
  os << "  lambda4 (p3 variant) = " << format_double(v.constants.lambda4_p3) << "\n";
  os << "\nCoercivity condition (safety factor " << spec.safety_factor << "):\n";
  for (int j = 0; j < 2; ++j)
    os << "  j=" << j + 1 << ": lhs = " << format_double(v.condition.lhs[j])
       << ", margin = " << format_double(v.condition.margin[j]) << "\n";
  os << "  A = " << format_double(v.bound.A) << ", B = " << format_double(v.bound.B)
     << ", C2 = " << format_double(v.bound.C2) << " (epsilon = " << spec.coercivity_epsilon << ")\n";
  if (trace) {
    os << "\nLevels:\n";
    for (const auto& e : trace->entries)
      os << "  level " << e.level << ": dofs " << e.dofs << ", rho " << format_double(e.rho) << ", pi "
         << format_double(e.pi) << ", pi' " << format_double(e.pi_prime) << ", " << to_string(e.status) << "\n";
  }
  if (cert) {
    os << "\nCertificate: generalized=" << cert->generalized << " strongly_generalized=" << cert->strongly_generalized
       << " weak=" << cert->weak << " (tol " << cert->tol << ")\n";
    for (const auto& r : cert->reasons) os << "  - " << r << "\n";
  }
  os << "\nExit code: " << exit_code << "\n";
  return os.str();
}

inline Json certificate_json(const ProblemSpec& spec, const ValidationOutcome& v, bool waived,
                             const SolutionCertificate* cert, const Json& a_priori) {
  Json j;
  j["inputs"] = inputs_json(spec);
  j["validation"] = validation_json(spec, v, waived);
  j["constants"] = constants_json(v.constants, spec.safety_factor);
  j["a_priori"] = a_priori;
  j["solution"] = cert ? solution_json(*cert) : Json(nullptr);
  return j;
}

/// Runs the pipeline for one subcommand. Output files go to opts.out.
inline int run(const Options& opts, std::ostream& out, std::ostream& err) {
  try {
    ProblemSpec spec = load_problem(opts.problem);
    if (opts.levels) spec.settings.levels = *opts.levels;
    if (opts.seed) spec.settings.seed = *opts.seed;
    fs::create_directories(opts.out);
    const auto hierarchy = std::make_shared<const GalerkinHierarchy>(*spec.base_mesh, spec.settings.levels);

    if (opts.command == "constants") {
      const auto c = compute_constants(spec, *hierarchy);
      write_file(opts.out / "constants.json", constants_json(c, spec.safety_factor).dump(2) + "\n");
      for (int i = 0; i < 4; ++i)
        out << "lambda" << i + 1 << " = " << format_double(c.lambda[i]) << "  (dofs " << c.dofs << ")\n";
      out << "lambda4_p3 = " << format_double(c.lambda4_p3) << "  (dofs " << c.dofs << ")\n";
      return kGeneralized;
    }

    const ValidationOutcome v = run_validation(spec, *hierarchy);
    if (opts.command == "validate") {
      write_file(opts.out / "validation.json", validation_json(spec, v, opts.waive).dump(2) + "\n");
      out << "validation " << (v.passed ? "passed" : "failed") << "\n";
      for (const auto& f : v.failures) out << "  " << f << "\n";
      if (v.growth && v.growth->violation) {
        const auto& x = *v.growth->violation;
        out << "  growth violation: " << x.map << " at z=(" << x.args.z[0] << ", " << x.args.z[1]
            << ") r1=" << x.args.r1 << " r2=" << x.args.r2 << " n1=" << x.args.n1 << " n2=" << x.args.n2
            << " value=" << format_double(x.value) << " bound=" << format_double(x.bound) << "\n";
      }
      if (v.sign && v.sign->violation) {
        const auto& x = *v.sign->violation;
        out << "  sign violation: " << x.map << " at z=(" << x.args.z[0] << ", " << x.args.z[1]
            << ") r1=" << x.args.r1 << " r2=" << x.args.r2 << " value=" << format_double(x.value)
            << " bound=" << format_double(x.bound) << "\n";
      }
      return v.passed ? kGeneralized : kValidatorRejected;
    }

    if (opts.command != "solve" && opts.command != "verify") throw InvalidInput("unknown subcommand " + opts.command);

    if (!v.passed && !opts.waive) {
      write_file(opts.out / "certificate.json", certificate_json(spec, v, false, nullptr, Json::array()).dump(2) + "\n");
      write_file(opts.out / "report.txt", report_text(spec, v, nullptr, nullptr, kValidatorRejected, false));
      err << "certificates rejected:";
      for (const auto& f : v.failures) err << " [" << f << "]";
      err << "\n";
      return kValidatorRejected;
    }
    const InclusionProblem problem = make_problem(spec, hierarchy, v.passed, opts.waive);

    GalerkinTrace trace;
    if (opts.command == "solve") {
      trace = run_hierarchy(problem, spec.settings.solver);
      write_file(opts.out / "trace.csv", trace_csv(trace));
      for (const auto& s : trace.solutions)
        write_file(opts.out / ("solution_" + std::to_string(s.level) + ".txt"),
                   solution_text(s, hierarchy->space(s.level)));
    } else {
      const fs::path dir = opts.trace_dir.value_or(opts.out);
      const auto rows = read_trace_csv(dir / "trace.csv");
      std::vector<LevelSolution> solutions;
      for (const auto& r : rows) {
        if (r.level >= hierarchy->size()) throw InvalidInput("trace level exceeds the hierarchy");
        LevelSolution s = read_solution(dir / ("solution_" + std::to_string(r.level) + ".txt"),
                                        hierarchy->space(r.level), spec.reactions);
        s.newton_iters = r.newton_iters;
        s.outer_iters = r.outer_iters;
        solutions.push_back(std::move(s));
      }
      trace = evaluate_trace(problem, std::move(solutions), spec.settings.solver.epsilon_reg.value_or(-1.0));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& e = trace.entries[i];
        if (e.rho != rows[i].rho || e.pi != rows[i].pi || e.pi_prime != rows[i].pi_prime || e.dofs != rows[i].dofs)
          err << "warning: recomputed trace differs from the stored row for level " << rows[i].level << "\n";
      }
    }

    const bool failed = !trace.complete(hierarchy->size());
    std::optional<SolutionCertificate> cert;
    if (trace.entries.size() >= 3) cert = certify(problem, trace, spec.settings.verify_tol);
    int code = kGeneralized;
    if (failed) code = kSolverFailure;
    else if (!cert || !cert->generalized) code = kCertificateFailed;
    if (opts.command == "verify" && code == kSolverFailure) code = kCertificateFailed;

    const Json apriori = a_priori_json(spec, problem, trace, v.bound);
    write_file(opts.out / "certificate.json",
               certificate_json(spec, v, opts.waive, cert ? &*cert : nullptr, apriori).dump(2) + "\n");
    write_file(opts.out / "report.txt", report_text(spec, v, &trace, cert ? &*cert : nullptr, code, opts.waive));
    if (cert)
      out << "generalized=" << cert->generalized << " strongly_generalized=" << cert->strongly_generalized
          << " weak=" << cert->weak << "\n";
    for (const auto& e : trace.entries)
      if (e.status != LevelStatus::Converged) err << "level " << e.level << " failed: " << e.diagnostic << "\n";
    return code;
  } catch (const InvalidInput& e) {
    err << "input error: " << e.what() << "\n";
  } catch (const expr::EvaluationError& e) {
    err << "expression error: " << e.what() << "\n";
  } catch (const CertificateViolation& e) {
    err << "certificate violation: " << e.what() << "\n";
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
  } catch (const fs::filesystem_error& e) {
    err << "file error: " << e.what() << "\n";
  }
  return kInputError;
}

/// Command-line entry point.
inline int main(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Galerkin solver and certificate checker for double-phase differential inclusion systems", "dpcg"};
  app.require_subcommand(1);
  Options opts;
  std::size_t levels = 0;
  std::uint64_t seed = 0;
  std::string trace_dir;
  for (const char* name : {"validate", "constants", "solve", "verify"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("problem", opts.problem, "problem description (JSON)")->required();
    sub->add_option("--out", opts.out, "output directory")->required();
    sub->add_flag("--waive-certificates", opts.waive, "proceed even if validators reject the certificates");
    sub->add_option("--levels", levels, "number of hierarchy levels")->check(CLI::Range(std::size_t{1}, std::size_t{12}));
    sub->add_option("--seed", seed, "random seed");
    if (std::string(name) == "verify")
      sub->add_option("--trace-dir", trace_dir, "directory holding trace.csv and solution files (default: --out)");
    sub->callback([&opts, sub, name, &levels, &seed, &trace_dir] {
      opts.command = name;
      if (sub->count("--levels")) opts.levels = levels;
      if (sub->count("--seed")) opts.seed = seed;
      if (!trace_dir.empty()) opts.trace_dir = trace_dir;
    });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kInputError;
  }
  return run(opts, out, err);
}

}  // namespace dpcg::cli
