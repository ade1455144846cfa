#pragma once

#include <array>
#include <cassert>
#include <cmath>

#include <Eigen/Dense>

#include "fsi/error.hpp"

namespace fsi {

using Point2 = std::array<double, 2>;

// ---------------------------------------------------------------------------
// Triangle Lagrange bases on the reference triangle (0,0), (1,0), (0,1).
//
// Local node order for P2: three vertices, then the midpoints of edges
// (0,1), (1,2), (2,0).
// ---------------------------------------------------------------------------

namespace detail {
inline void assert_in_reference_triangle([[maybe_unused]] const Point2& xi) {
  assert(xi[0] >= -1e-12 && xi[1] >= -1e-12 && xi[0] + xi[1] <= 1.0 + 1e-12 &&
         "point outside reference triangle");
}
}  // namespace detail

inline std::array<double, 3> p1_shape(const Point2& xi) {
  detail::assert_in_reference_triangle(xi);
  return {1.0 - xi[0] - xi[1], xi[0], xi[1]};
}

inline std::array<Point2, 3> p1_grad(const Point2& xi) {
  detail::assert_in_reference_triangle(xi);
  return {Point2{-1.0, -1.0}, Point2{1.0, 0.0}, Point2{0.0, 1.0}};
}

inline std::array<double, 6> p2_shape(const Point2& xi) {
  const auto l = p1_shape(xi);
  return {l[0] * (2.0 * l[0] - 1.0),
          l[1] * (2.0 * l[1] - 1.0),
          l[2] * (2.0 * l[2] - 1.0),
          4.0 * l[0] * l[1],
          4.0 * l[1] * l[2],
          4.0 * l[2] * l[0]};
}

inline std::array<Point2, 6> p2_grad(const Point2& xi) {
  const auto l = p1_shape(xi);
  const auto g = p1_grad(xi);
  std::array<Point2, 6> out{};
  for (int d = 0; d < 2; ++d) {
    out[0][d] = (4.0 * l[0] - 1.0) * g[0][d];
    out[1][d] = (4.0 * l[1] - 1.0) * g[1][d];
    out[2][d] = (4.0 * l[2] - 1.0) * g[2][d];
    out[3][d] = 4.0 * (g[0][d] * l[1] + l[0] * g[1][d]);
    out[4][d] = 4.0 * (g[1][d] * l[2] + l[1] * g[2][d]);
    out[5][d] = 4.0 * (g[2][d] * l[0] + l[2] * g[0][d]);
  }
  return out;
}

/// Reference coordinates of the six P2 nodes.
inline constexpr std::array<Point2, 6> kP2ReferenceNodes = {
    Point2{0.0, 0.0}, Point2{1.0, 0.0}, Point2{0.0, 1.0},
    Point2{0.5, 0.0}, Point2{0.5, 0.5}, Point2{0.0, 0.5}};

/// Affine map x = v0 + J xi of a straight-sided triangle.
class AffineTriangle {
public:
  AffineTriangle(const Point2& v0, const Point2& v1, const Point2& v2)
      : origin_(v0) {
    jac_ << v1[0] - v0[0], v2[0] - v0[0], v1[1] - v0[1], v2[1] - v0[1];
    det_ = jac_.determinant();
    if (!(det_ > 0.0)) {
      throw InvalidMeshError("AffineTriangle: non-positive orientation");
    }
    inv_t_ = jac_.inverse().transpose();
  }

  double det() const noexcept { return det_; }
  double area() const noexcept { return 0.5 * det_; }

  Point2 map(const Point2& xi) const noexcept {
    return {origin_[0] + jac_(0, 0) * xi[0] + jac_(0, 1) * xi[1],
            origin_[1] + jac_(1, 0) * xi[0] + jac_(1, 1) * xi[1]};
  }

  /// Physical gradient from a reference gradient.
  Point2 push_forward(const Point2& g) const noexcept {
    return {inv_t_(0, 0) * g[0] + inv_t_(0, 1) * g[1],
            inv_t_(1, 0) * g[0] + inv_t_(1, 1) * g[1]};
  }

private:
  Point2 origin_;
  Eigen::Matrix2d jac_;
  Eigen::Matrix2d inv_t_;
  double det_ = 0.0;
};

// ---------------------------------------------------------------------------
// Quintic Hermite element on [0,1].
//
// Degrees of freedom, in local order:
//   0: w(0)  1: w(1)  2: w(1/3)  3: w(2/3)  4: w'(0)  5: w'(1)
// On a physical element of length ell the derivative DOFs carry the physical
// derivative, so the corresponding reference basis functions are multiplied
// by ell.
// ---------------------------------------------------------------------------

class HermiteQuintic {
public:
  static constexpr int kDofs = 6;
  static constexpr std::array<double, 4> kValueNodes = {0.0, 1.0, 1.0 / 3.0,
                                                        2.0 / 3.0};
  using Coeffs = Eigen::Matrix<double, 6, 6>;

  /// Row i holds the monomial coefficients (t^0 .. t^5) of basis function i.
  static const Coeffs& coefficients() {
    static const Coeffs table = build();
    return table;
  }

  /// Values (order 0), first (1), second (2) or third (3) reference
  /// derivatives of all six basis functions at t.
  static std::array<double, 6> eval(double t, int order = 0) {
    const Coeffs& c = coefficients();
    std::array<double, 6> out{};
    for (int i = 0; i < kDofs; ++i) {
      double acc = 0.0;
      for (int k = 5; k >= order; --k) {
        acc = acc * t + falling(k, order) * c(i, k);
      }
      out[i] = acc;
    }
    return out;
  }

  /// d^order/dx^order of the physical basis on an element of length ell,
  /// evaluated at reference coordinate t.
  static std::array<double, 6> eval_physical(double t, double ell,
                                             int order = 0) {
    auto v = eval(t, order);
    const double s = std::pow(ell, -order);
    for (int i = 0; i < kDofs; ++i) v[i] *= s;
    v[4] *= ell;
    v[5] *= ell;
    return v;
  }

  /// Apply the six DOF functionals to a function given by its value and
  /// first derivative evaluators on [0,1].
  template <typename F, typename DF>
  static std::array<double, 6> dofs_of(F&& f, DF&& df) {
    return {f(0.0), f(1.0), f(1.0 / 3.0), f(2.0 / 3.0), df(0.0), df(1.0)};
  }

private:
  static double falling(int k, int order) {
    double r = 1.0;
    for (int j = 0; j < order; ++j) r *= (k - j);
    return r;
  }

  static Coeffs build() {
    // V(j, k) = L_j(t^k); the coefficient rows C satisfy V C^T = I.
    Coeffs v = Coeffs::Zero();
    for (int k = 0; k < 6; ++k) {
      for (int j = 0; j < 4; ++j) v(j, k) = std::pow(kValueNodes[j], k);
      v(4, k) = k == 1 ? 1.0 : 0.0;
      v(5, k) = static_cast<double>(k);
    }
    Eigen::FullPivLU<Coeffs> lu(v);
    assert(lu.isInvertible() && "Hermite DOF system is singular");
    return lu.inverse().transpose();
  }
};

}  // namespace fsi
