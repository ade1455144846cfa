#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "fsi/error.hpp"

namespace fsi {

/// Points and weights on a reference domain: [0,1] for Dim == 1, the unit
/// right triangle {x, y >= 0, x + y <= 1} for Dim == 2.
template <int Dim>
struct QuadratureRule {
  std::vector<std::array<double, Dim>> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const noexcept { return weights.size(); }

  static constexpr double reference_measure() noexcept {
    return Dim == 1 ? 1.0 : 0.5;
  }
};

using IntervalRule = QuadratureRule<1>;
using TriangleRule = QuadratureRule<2>;

inline constexpr int kMaxIntervalDegree = 63;
inline constexpr int kMaxTriangleDegree = 30;

/// n-point Gauss-Legendre rule mapped to [0,1] (exact to degree 2n-1).
inline IntervalRule gauss_legendre(int n) {
  if (n < 1 || n > 32) {
    throw CapabilityError("gauss_legendre: unsupported point count " +
                          std::to_string(n));
  }
  IntervalRule rule;
  rule.degree = 2 * n - 1;
  rule.points.resize(n);
  rule.weights.resize(n);
  // P_n(x) and P_n'(x) by the three-term recurrence.
  const auto legendre = [n](double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    return std::array<double, 2>{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [pn, dpn] = legendre(x);
      const double dx = pn / dpn;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x)[1];
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Ascending order on [0,1].
    rule.points[n - 1 - i] = {0.5 * (x + 1.0)};
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

inline IntervalRule interval_quadrature(int degree) {
  if (degree < 0 || degree > kMaxIntervalDegree) {
    throw CapabilityError("interval_quadrature: unsupported degree " +
                          std::to_string(degree));
  }
  return gauss_legendre(degree / 2 + 1);
}

namespace detail {

inline TriangleRule collapsed_gauss(int degree) {
  // Duffy map (u, v) -> (u, (1-u) v) with Jacobian (1-u): the pulled-back
  // integrand has degree degree+1 in u and degree in v.
  const int n = (degree + 3) / 2;
  const IntervalRule g = gauss_legendre(n);
  TriangleRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    const double u = g.points[i][0];
    for (int j = 0; j < n; ++j) {
      const double v = g.points[j][0];
      rule.points.push_back({u, (1.0 - u) * v});
      rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - u));
    }
  }
  return rule;
}

}  // namespace detail

/// Triangle rule exact for polynomials of total degree <= `degree`.
/// Degrees up to 2 and 5 use the classical 3-point midpoint and 7-point Radon
/// rules; higher degrees use a collapsed Gauss product rule.
inline TriangleRule triangle_quadrature(int degree) {
  if (degree < 0 || degree > kMaxTriangleDegree) {
    throw CapabilityError("triangle_quadrature: unsupported degree " +
                          std::to_string(degree));
  }
  TriangleRule rule;
  if (degree <= 1) {
    rule.degree = 1;
    rule.points = {{1.0 / 3.0, 1.0 / 3.0}};
    rule.weights = {0.5};
    return rule;
  }
  if (degree == 2) {
    rule.degree = 2;
    rule.points = {{0.5, 0.0}, {0.5, 0.5}, {0.0, 0.5}};
    rule.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    return rule;
  }
  if (degree <= 5) {
    const double r15 = std::sqrt(15.0);
    const double a1 = (6.0 - r15) / 21.0;
    const double b1 = (9.0 + 2.0 * r15) / 21.0;
    const double a2 = (6.0 + r15) / 21.0;
    const double b2 = (9.0 - 2.0 * r15) / 21.0;
    const double w1 = (155.0 - r15) / 2400.0;
    const double w2 = (155.0 + r15) / 2400.0;
    rule.degree = 5;
    rule.points = {{1.0 / 3.0, 1.0 / 3.0}, {a1, a1}, {b1, a1}, {a1, b1},
                   {a2, a2},               {b2, a2}, {a2, b2}};
    rule.weights = {9.0 / 80.0, w1, w1, w1, w2, w2, w2};
    return rule;
  }
  return detail::collapsed_gauss(degree);
}

}  // namespace fsi
