#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dpcg/error.hpp"
#include "dpcg/expression.hpp"
#include "dpcg/galerkin.hpp"
#include "dpcg/mesh.hpp"
#include "dpcg/modular.hpp"
#include "dpcg/multifunction.hpp"

namespace dpcg {

using Json = nlohmann::json;

/// Solver and pipeline settings from the "solver" block.
struct RunSettings {
  SolverConfig solver;
  std::size_t levels = 4;
  std::uint64_t seed = 0;
  std::size_t samples = 10000;
  int embedding_iters = 200;
  double verify_tol = 1e-6;
};

/// A parsed problem description.
struct ProblemSpec {
  Json raw;
  std::optional<Mesh> base_mesh;
  ExponentConfig exponents;
  double alpha = 0.0;
  double beta = 0.0;
  ReactionSet reactions;
  std::optional<GrowthCertificate> growth;
  std::optional<SignCertificate> sign;
  double coercivity_epsilon = 0.5;
  double safety_factor = 1.1;
  RunSettings settings;
};

namespace detail {

inline const unsigned kZVars = (1U << static_cast<unsigned>(expr::Variable::z1)) |
                               (1U << static_cast<unsigned>(expr::Variable::z2));
inline const unsigned kBoundaryVars = kZVars | (1U << static_cast<unsigned>(expr::Variable::r1)) |
                                      (1U << static_cast<unsigned>(expr::Variable::r2));
inline const unsigned kAllVars = (1U << expr::variable_count) - 1U;

inline const Json& require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw InvalidInput(where + ": expected a JSON object");
  return j;
}

inline void expect_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require_object(j, where);
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw InvalidInput(where + ": unknown key '" + item.key() + "'");
  }
}

inline const Json& member(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw InvalidInput(where + ": missing key '" + key + "'");
  return j.at(key);
}

inline double number(const Json& j, const char* key, const std::string& where) {
  const Json& v = member(j, key, where);
  if (!v.is_number()) throw InvalidInput(where + "." + key + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InvalidInput(where + "." + key + ": not finite");
  return d;
}

inline double number_or(const Json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

inline std::int64_t integer(const Json& j, const char* key, const std::string& where) {
  const Json& v = member(j, key, where);
  if (!v.is_number_integer()) throw InvalidInput(where + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

inline std::size_t count_or(const Json& j, const char* key, std::size_t fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto v = integer(j, key, where);
  if (v < 1) throw InvalidInput(where + "." + key + ": must be >= 1");
  return static_cast<std::size_t>(v);
}

/// An expression given as a string or a bare number, restricted to `allowed` variables.
inline expr::Expression expression(const Json& v, unsigned allowed, const std::string& where) {
  std::string text;
  if (v.is_string()) text = v.get<std::string>();
  else if (v.is_number()) text = expr::detail::format_literal(v.get<double>());
  else throw InvalidInput(where + ": expected an expression string or a number");
  try {
    expr::Expression e = expr::parse(text);
    const unsigned extra = e.free_variables() & ~allowed;
    if (extra != 0) {
      for (std::size_t i = 0; i < expr::variable_count; ++i)
        if ((extra >> i) & 1U)
          throw InvalidInput(where + ": variable '" + std::string(expr::variable_names[i]) + "' is not allowed here");
    }
    return e;
  } catch (const expr::ParseError& err) {
    throw InvalidInput(where + ": " + err.what());
  }
}

inline ScalarField field(const expr::Expression& e) {
  return [e](const Point& z) {
    expr::Bindings b;
    b.set(expr::Variable::z1, z[0]).set(expr::Variable::z2, z[1]);
    return e.evaluate(b);
  };
}

inline ScalarField optional_field(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) return {};
  return field(expression(j.at(key), kZVars, where + "." + key));
}

inline BoundFunction bound(const expr::Expression& e) {
  return [e](const PointArgs& a) {
    expr::Bindings b;
    b.set(expr::Variable::z1, a.z[0])
        .set(expr::Variable::z2, a.z[1])
        .set(expr::Variable::r1, a.r1)
        .set(expr::Variable::r2, a.r2)
        .set(expr::Variable::n1, a.n1)
        .set(expr::Variable::n2, a.n2);
    return e.evaluate(b);
  };
}

/// {"lower": e, "upper": e} or {"value": e} (single-valued).
inline IntervalMultifunction multifunction(const Json& j, unsigned allowed, const std::string& where) {
  if (j.contains("value")) {
    expect_keys(j, {"value"}, where);
    return IntervalMultifunction::single(bound(expression(j.at("value"), allowed, where + ".value")));
  }
  expect_keys(j, {"lower", "upper"}, where);
  return {bound(expression(member(j, "lower", where), allowed, where + ".lower")),
          bound(expression(member(j, "upper", where), allowed, where + ".upper"))};
}

inline BoundaryTag tag(const Json& j, const char* key, BoundaryTag fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw InvalidInput(where + "." + key + ": expected DIRICHLET or CONTACT");
  return parse_boundary_tag(j.at(key).get<std::string>());
}

inline Mesh parse_domain(const Json& d, const std::filesystem::path& base_dir) {
  const std::string w = "domain";
  expect_keys(d, {"dim", "interval", "rectangle", "mesh", "mesh_file", "boundary"}, w);
  const auto dim = integer(d, "dim", w);
  if (dim != 1 && dim != 2) throw InvalidInput("domain.dim must be 1 or 2");
  const int sources = static_cast<int>(d.contains("interval")) + static_cast<int>(d.contains("rectangle")) +
                      static_cast<int>(d.contains("mesh")) + static_cast<int>(d.contains("mesh_file"));
  if (sources != 1) throw InvalidInput("domain: give exactly one of interval, rectangle, mesh, mesh_file");
  const Json empty = Json::object();
  const Json& b = d.contains("boundary") ? d.at("boundary") : empty;
  if (d.contains("interval")) {
    if (dim != 1) throw InvalidInput("domain.interval requires dim 1");
    expect_keys(b, {"left", "right"}, "domain.boundary");
    const Json& iv = d.at("interval");
    expect_keys(iv, {"a", "b", "cells"}, "domain.interval");
    const auto cells = integer(iv, "cells", "domain.interval");
    if (cells < 1) throw InvalidInput("domain.interval.cells must be >= 1");
    return make_interval(number(iv, "a", "domain.interval"), number(iv, "b", "domain.interval"),
                         static_cast<std::size_t>(cells), tag(b, "left", BoundaryTag::Dirichlet, "domain.boundary"),
                         tag(b, "right", BoundaryTag::Contact, "domain.boundary"));
  }
  if (d.contains("rectangle")) {
    if (dim != 2) throw InvalidInput("domain.rectangle requires dim 2");
    expect_keys(b, {"left", "right", "bottom", "top"}, "domain.boundary");
    const Json& r = d.at("rectangle");
    const std::string rw = "domain.rectangle";
    expect_keys(r, {"x0", "x1", "y0", "y1", "nx", "ny"}, rw);
    const auto nx = integer(r, "nx", rw), ny = integer(r, "ny", rw);
    if (nx < 1 || ny < 1) throw InvalidInput("domain.rectangle: nx and ny must be >= 1");
    RectangleTags tags;
    tags.left = tag(b, "left", tags.left, "domain.boundary");
    tags.right = tag(b, "right", tags.right, "domain.boundary");
    tags.bottom = tag(b, "bottom", tags.bottom, "domain.boundary");
    tags.top = tag(b, "top", tags.top, "domain.boundary");
    return make_rectangle(number(r, "x0", rw), number(r, "x1", rw), number(r, "y0", rw), number(r, "y1", rw),
                          static_cast<std::size_t>(nx), static_cast<std::size_t>(ny), tags);
  }
  if (!b.empty()) throw InvalidInput("domain.boundary: tags of a mesh are given in its FACETS section");
  std::istringstream text;
  if (d.contains("mesh")) {
    if (!d.at("mesh").is_string()) throw InvalidInput("domain.mesh: expected the mesh text as a string");
    text.str(d.at("mesh").get<std::string>());
  } else {
    if (!d.at("mesh_file").is_string()) throw InvalidInput("domain.mesh_file: expected a path");
    const std::filesystem::path p = base_dir / d.at("mesh_file").get<std::string>();
    std::ifstream in(p);
    if (!in) throw InvalidInput("cannot read mesh file " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    text.str(os.str());
  }
  Mesh mesh = read_mesh_text(text);
  if (mesh.dim() != dim) throw InvalidInput("domain.dim does not match the mesh");
  return mesh;
}

inline GrowthCertificate parse_growth(const Json& g) {
  const std::string w = "certificates.growth";
  require_object(g, w);
  GrowthCertificate c;
  const std::string mode = g.contains("mode") && g.at("mode").is_string() ? g.at("mode").get<std::string>() : "";
  if (mode == "STANDARD") {
    c.mode = GrowthMode::Standard;
    expect_keys(g, {"mode", "m1", "m2", "m7", "m8", "sigma", "theta", "delta1", "delta2", "delta5", "delta6",
                    "critical"}, w);
    c.constants = {number(g, "m1", w), number(g, "m2", w), number(g, "m7", w), number(g, "m8", w)};
    c.bounds = {optional_field(g, "delta1", w), optional_field(g, "delta2", w), optional_field(g, "delta5", w),
                optional_field(g, "delta6", w)};
  } else if (mode == "STRONG") {
    c.mode = GrowthMode::Strong;
    expect_keys(g, {"mode", "d1", "d2", "d3", "d4", "sigma", "theta", "kappa", "pi1", "pi2", "pi3", "pi4",
                    "critical"}, w);
    c.constants = {number(g, "d1", w), number(g, "d2", w), number(g, "d3", w), number(g, "d4", w)};
    c.bounds = {optional_field(g, "pi1", w), optional_field(g, "pi2", w), optional_field(g, "pi3", w),
                optional_field(g, "pi4", w)};
  } else {
    throw InvalidInput(w + ".mode must be STANDARD or STRONG");
  }
  auto array = [&](const char* key, auto& out) {
    const Json& a = member(g, key, w);
    if (!a.is_array() || a.size() != out.size())
      throw InvalidInput(w + "." + key + ": expected an array of " + std::to_string(out.size()) + " numbers");
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!a[i].is_number()) throw InvalidInput(w + "." + key + ": expected numbers");
      out[i] = a[i].get<double>();
      if (!(out[i] > 0.0)) throw InvalidInput(w + "." + key + ": exponents must be positive");
    }
  };
  array("sigma", c.sigma);
  array("theta", c.theta);
  if (c.mode == GrowthMode::Strong) array("kappa", c.kappa);
  if (g.contains("critical")) {
    const Json& cr = g.at("critical");
    const std::string cw = w + ".critical";
    expect_keys(cr, {"p1_star", "p3_star", "p1_lower_star", "p3_lower_star"}, cw);
    CriticalSet s{number(cr, "p1_star", cw), number(cr, "p3_star", cw), number(cr, "p1_lower_star", cw),
                  number(cr, "p3_lower_star", cw)};
    for (const double v : {s.p1_star, s.p3_star, s.p1_lower_star, s.p3_lower_star})
      if (!(v > 1.0)) throw InvalidInput(cw + ": critical exponents must exceed 1");
    c.critical = s;
  }
  return c;
}

inline SignCertificate parse_sign(const Json& s) {
  const std::string w = "certificates.sign";
  expect_keys(s, {"m3", "m4", "m5", "m6", "m9", "m10", "delta3", "delta4", "delta7", "delta8"}, w);
  SignCertificate c;
  c.m3 = number(s, "m3", w);
  c.m4 = number(s, "m4", w);
  c.m5 = number(s, "m5", w);
  c.m6 = number(s, "m6", w);
  c.m9 = number(s, "m9", w);
  c.m10 = number(s, "m10", w);
  c.bounds = {optional_field(s, "delta3", w), optional_field(s, "delta4", w), optional_field(s, "delta7", w),
              optional_field(s, "delta8", w)};
  return c;
}

inline RunSettings parse_solver(const Json& s) {
  const std::string w = "solver";
  expect_keys(s, {"newton_tol", "max_newton", "max_outer", "damping", "homotopy_steps", "levels", "seed",
                  "epsilon_reg", "trust_radius", "samples", "embedding_iters", "verify_tol"}, w);
  RunSettings r;
  r.solver.newton_tol = number_or(s, "newton_tol", r.solver.newton_tol, w);
  r.solver.max_newton = static_cast<int>(count_or(s, "max_newton", static_cast<std::size_t>(r.solver.max_newton), w));
  r.solver.max_outer = static_cast<int>(count_or(s, "max_outer", static_cast<std::size_t>(r.solver.max_outer), w));
  r.solver.damping = number_or(s, "damping", r.solver.damping, w);
  r.solver.homotopy_steps =
      static_cast<int>(count_or(s, "homotopy_steps", static_cast<std::size_t>(r.solver.homotopy_steps), w));
  if (s.contains("epsilon_reg")) r.solver.epsilon_reg = number(s, "epsilon_reg", w);
  if (s.contains("trust_radius")) r.solver.trust_radius = number(s, "trust_radius", w);
  r.levels = count_or(s, "levels", r.levels, w);
  if (s.contains("seed")) {
    const auto seed = integer(s, "seed", w);
    if (seed < 0) throw InvalidInput("solver.seed must be nonnegative");
    r.seed = static_cast<std::uint64_t>(seed);
  }
  r.samples = count_or(s, "samples", r.samples, w);
  r.embedding_iters = static_cast<int>(count_or(s, "embedding_iters", static_cast<std::size_t>(r.embedding_iters), w));
  r.verify_tol = number_or(s, "verify_tol", r.verify_tol, w);
  if (!(r.verify_tol > 0.0)) throw InvalidInput("solver.verify_tol must be positive");
  r.solver.validate();
  return r;
}

}  // namespace detail

/// Parses and schema-checks a problem document. Relative mesh paths resolve against base_dir.
inline ProblemSpec parse_problem(const Json& doc, const std::filesystem::path& base_dir = {}) {
  using namespace detail;
  expect_keys(doc, {"domain", "exponents", "weights", "coefficients", "reactions", "boundary_maps", "certificates",
                    "solver"}, "problem");
  ProblemSpec spec;
  spec.raw = doc;
  spec.base_mesh = parse_domain(member(doc, "domain", "problem"), base_dir);
  spec.exponents.dim = spec.base_mesh->dim();

  const Json& ex = member(doc, "exponents", "problem");
  expect_keys(ex, {"p1", "p2", "p3", "p4", "q1", "q2", "q3", "q4"}, "exponents");
  for (int i = 0; i < 4; ++i) {
    const std::string pk = "p" + std::to_string(i + 1), qk = "q" + std::to_string(i + 1);
    spec.exponents.p[static_cast<std::size_t>(i)] = number(ex, pk.c_str(), "exponents");
    spec.exponents.q[static_cast<std::size_t>(i)] = number(ex, qk.c_str(), "exponents");
  }
  spec.exponents.validate_ordering();

  if (doc.contains("weights")) {
    const Json& wt = doc.at("weights");
    expect_keys(wt, {"mu1", "mu2", "mu3", "mu4"}, "weights");
    for (int i = 0; i < 4; ++i) {
      const std::string k = "mu" + std::to_string(i + 1);
      spec.exponents.mu[static_cast<std::size_t>(i)] = optional_field(wt, k.c_str(), "weights");
    }
  }

  if (doc.contains("coefficients")) {
    const Json& c = doc.at("coefficients");
    expect_keys(c, {"alpha", "beta"}, "coefficients");
    spec.alpha = number_or(c, "alpha", 0.0, "coefficients");
    spec.beta = number_or(c, "beta", 0.0, "coefficients");
  }

  if (doc.contains("reactions")) {
    const Json& r = doc.at("reactions");
    expect_keys(r, {"h1", "h2"}, "reactions");
    if (r.contains("h1")) spec.reactions.h1 = multifunction(r.at("h1"), kAllVars, "reactions.h1");
    if (r.contains("h2")) spec.reactions.h2 = multifunction(r.at("h2"), kAllVars, "reactions.h2");
  }
  if (doc.contains("boundary_maps")) {
    const Json& g = doc.at("boundary_maps");
    expect_keys(g, {"g1", "g2"}, "boundary_maps");
    if (g.contains("g1")) spec.reactions.g1 = multifunction(g.at("g1"), kBoundaryVars, "boundary_maps.g1");
    if (g.contains("g2")) spec.reactions.g2 = multifunction(g.at("g2"), kBoundaryVars, "boundary_maps.g2");
  }

  if (doc.contains("certificates")) {
    const Json& c = doc.at("certificates");
    expect_keys(c, {"growth", "sign", "coercivity"}, "certificates");
    if (c.contains("growth")) spec.growth = parse_growth(c.at("growth"));
    if (c.contains("sign")) spec.sign = parse_sign(c.at("sign"));
    if (c.contains("coercivity")) {
      const Json& k = c.at("coercivity");
      expect_keys(k, {"epsilon", "safety_factor"}, "certificates.coercivity");
      spec.coercivity_epsilon = number_or(k, "epsilon", spec.coercivity_epsilon, "certificates.coercivity");
      spec.safety_factor = number_or(k, "safety_factor", spec.safety_factor, "certificates.coercivity");
      if (!(spec.coercivity_epsilon > 0.0)) throw InvalidInput("certificates.coercivity.epsilon must be positive");
      if (!(spec.safety_factor > 0.0)) throw InvalidInput("certificates.coercivity.safety_factor must be positive");
    }
  }

  spec.settings = doc.contains("solver") ? parse_solver(doc.at("solver")) : RunSettings{};
  return spec;
}

inline ProblemSpec load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read problem file " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidInput("problem file is not valid JSON: " + std::string(e.what()));
  }
  return parse_problem(doc, path.parent_path());
}

}  // namespace dpcg
