#pragma once

#include <array>
#include <cmath>

namespace geotherm {

/// Gauss rules on the reference cell [0,1]^2 and the reference edge [0,1].
/// The 3-point 1-D rule is exact up to degree 5, so the tensor cell rule
/// integrates every Q1*Q1*Q1-type integrand appearing in the forms exactly.
struct QuadratureRule {
  static constexpr int n_edge = 3;
  static constexpr int n_cell = 9;

  std::array<double, n_edge> edge_x{};
  std::array<double, n_edge> edge_w{};
  std::array<double, n_cell> cell_x{};
  std::array<double, n_cell> cell_y{};
  std::array<double, n_cell> cell_w{};

  QuadratureRule() {
    const double a = 0.5 * (1.0 - std::sqrt(3.0 / 5.0));
    const double b = 0.5;
    const double c = 0.5 * (1.0 + std::sqrt(3.0 / 5.0));
    edge_x = {a, b, c};
    edge_w = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    int q = 0;
    for (int j = 0; j < n_edge; ++j)
      for (int i = 0; i < n_edge; ++i, ++q) {
        cell_x[q] = edge_x[i];
        cell_y[q] = edge_x[j];
        cell_w[q] = edge_w[i] * edge_w[j];
      }
  }
};

inline const QuadratureRule& quadrature() {
  static const QuadratureRule rule;
  return rule;
}

}  // namespace geotherm
