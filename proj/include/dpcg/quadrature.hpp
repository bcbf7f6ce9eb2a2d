#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace dpcg {

/// Quadrature on a reference simplex in barycentric coordinates. Weights sum
/// to one and are scaled by the cell (or facet) measure at assembly time.
struct QuadratureRule {
  std::vector<std::array<double, 3>> barycentric;
  std::vector<double> weights;
  int degree = 0;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
};

namespace quadrature {

/// Two-point Gauss rule on a segment, exact for cubics.
inline const QuadratureRule& segment_gauss2() {
  static const QuadratureRule rule = [] {
    const double s = 0.5 / std::sqrt(3.0);
    return QuadratureRule{{{0.5 + s, 0.5 - s, 0.0}, {0.5 - s, 0.5 + s, 0.0}}, {0.5, 0.5}, 3};
  }();
  return rule;
}

/// Five-point Gauss rule on a segment (degree 9); used for error norms.
inline const QuadratureRule& segment_gauss5() {
  static const QuadratureRule rule = [] {
    const std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                  0.9061798459386640};
    const std::array<double, 5> w{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                  0.2369268850561891, 0.2369268850561891};
    QuadratureRule r;
    r.degree = 9;
    for (std::size_t i = 0; i < 5; ++i) {
      const double t = 0.5 * (1.0 + x[i]);
      r.barycentric.push_back({1.0 - t, t, 0.0});
      r.weights.push_back(0.5 * w[i]);
    }
    return r;
  }();
  return rule;
}

/// Edge-midpoint rule on a triangle, exact for quadratics.
inline const QuadratureRule& triangle_edge_midpoint() {
  static const QuadratureRule rule{
      {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}}, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 2};
  return rule;
}

/// Seven-point symmetric rule on a triangle (degree 5); used for error norms.
inline const QuadratureRule& triangle_seven_point() {
  static const QuadratureRule rule = [] {
    QuadratureRule r;
    r.degree = 5;
    r.barycentric.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(0.225);
    const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
    for (const auto& [a, b, w] : {std::array{a1, b1, w1}, std::array{a2, b2, w2}}) {
      r.barycentric.push_back({a, b, b});
      r.barycentric.push_back({b, a, b});
      r.barycentric.push_back({b, b, a});
      r.weights.insert(r.weights.end(), {w, w, w});
    }
    return r;
  }();
  return rule;
}

}  // namespace quadrature
}  // namespace dpcg
