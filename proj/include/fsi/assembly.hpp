#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <utility>

#include <Eigen/Dense>

#include "fsi/basis.hpp"
#include "fsi/error.hpp"
#include "fsi/fields.hpp"
#include "fsi/mesh.hpp"
#include "fsi/quadrature.hpp"
#include "fsi/sparse.hpp"

namespace fsi {

using Mat66 = Eigen::Matrix<double, 6, 6>;
using Mat33 = Eigen::Matrix<double, 3, 3>;
using Mat36 = Eigen::Matrix<double, 3, 6>;

/// Quadrature degrees used throughout assembly and error evaluation.
inline constexpr int kBilinearDegree = 5;
inline constexpr int kLoadDegree = 10;
inline constexpr int kPlateDegree = 15;

// ---------------------------------------------------------------------------
// Element kernels (physical element, affine pullback)
// ---------------------------------------------------------------------------

inline Mat66 p2_mass_element(const AffineTriangle& geo) {
  static const TriangleRule rule = triangle_quadrature(kBilinearDegree);
  Mat66 m = Mat66::Zero();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto phi = p2_shape(rule.points[q]);
    const double w = rule.weights[q] * geo.det();
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) m(i, j) += w * phi[i] * phi[j];
  }
  return m;
}

inline Mat66 p2_stiffness_element(const AffineTriangle& geo) {
  static const TriangleRule rule = triangle_quadrature(2);
  Mat66 k = Mat66::Zero();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto ref = p2_grad(rule.points[q]);
    std::array<Point2, 6> g{};
    for (int i = 0; i < 6; ++i) g[i] = geo.push_forward(ref[i]);
    const double w = rule.weights[q] * geo.det();
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        k(i, j) += w * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
  }
  return k;
}

inline Mat33 p1_mass_element(const AffineTriangle& geo) {
  static const TriangleRule rule = triangle_quadrature(2);
  Mat33 m = Mat33::Zero();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto psi = p1_shape(rule.points[q]);
    const double w = rule.weights[q] * geo.det();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) += w * psi[i] * psi[j];
  }
  return m;
}

/// Local divergence blocks: bx(i, j) = -(d/dx phi_j, psi_i), same for y.
inline std::pair<Mat36, Mat36> divergence_element(const AffineTriangle& geo) {
  static const TriangleRule rule = triangle_quadrature(2);
  Mat36 bx = Mat36::Zero();
  Mat36 by = Mat36::Zero();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto psi = p1_shape(rule.points[q]);
    const auto ref = p2_grad(rule.points[q]);
    const double w = rule.weights[q] * geo.det();
    for (int j = 0; j < 6; ++j) {
      const Point2 g = geo.push_forward(ref[j]);
      for (int i = 0; i < 3; ++i) {
        bx(i, j) -= w * g[0] * psi[i];
        by(i, j) -= w * g[1] * psi[i];
      }
    }
  }
  return {bx, by};
}

/// Local Oseen blocks: tx(i, j) = (u1 d/dx phi_j, phi_i), ty(i, j) =
/// (u2 d/dy phi_j, phi_i) with u given by its six local P2 coefficients.
inline std::pair<Mat66, Mat66> oseen_element(const AffineTriangle& geo,
                                             const std::array<double, 6>& u1,
                                             const std::array<double, 6>& u2) {
  static const TriangleRule rule = triangle_quadrature(kBilinearDegree);
  Mat66 tx = Mat66::Zero();
  Mat66 ty = Mat66::Zero();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto phi = p2_shape(rule.points[q]);
    const auto ref = p2_grad(rule.points[q]);
    double a1 = 0.0;
    double a2 = 0.0;
    for (int k = 0; k < 6; ++k) {
      a1 += u1[k] * phi[k];
      a2 += u2[k] * phi[k];
    }
    const double w = rule.weights[q] * geo.det();
    for (int j = 0; j < 6; ++j) {
      const Point2 g = geo.push_forward(ref[j]);
      for (int i = 0; i < 6; ++i) {
        tx(i, j) += w * a1 * g[0] * phi[i];
        ty(i, j) += w * a2 * g[1] * phi[i];
      }
    }
  }
  return {tx, ty};
}

/// (theta_j^(order), theta_i^(order)) on an element of length ell:
/// order 0 is the mass, 1 the stiffness, 2 the bending matrix.
inline Mat66 hermite_element(double ell, int order) {
  static const IntervalRule rule = interval_quadrature(kPlateDegree);
  Mat66 m = Mat66::Zero();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto th = HermiteQuintic::eval_physical(rule.points[q][0], ell, order);
    const double w = rule.weights[q] * ell;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) m(i, j) += w * th[i] * th[j];
  }
  return m;
}

/// Local Picard plate block: 1/2 (w theta_j, theta_i) with w given by its
/// six local Hermite coefficients.
inline Mat66 plate_picard_element(double ell, const std::array<double, 6>& w) {
  static const IntervalRule rule = interval_quadrature(kPlateDegree);
  Mat66 m = Mat66::Zero();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto th = HermiteQuintic::eval_physical(rule.points[q][0], ell, 0);
    double wq = 0.0;
    for (int k = 0; k < 6; ++k) wq += w[k] * th[k];
    const double c = 0.5 * rule.weights[q] * ell * wq;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) m(i, j) += c * th[i] * th[j];
  }
  return m;
}

// ---------------------------------------------------------------------------
// Global assembly
// ---------------------------------------------------------------------------

/// Refinement-constant blocks of the discrete coupled system.
struct SparseSystem {
  int num_velocity = 0;  // M
  int num_pressure = 0;  // M_p
  int num_plate = 0;     // DOF_s
  SparseMatrix mf, kf, ms, ks, s, bx, by;
  Vector ep, es;
};

/// Per-iterate Oseen blocks.
struct OseenMatrices {
  SparseMatrix tx, ty;
};

inline SparseSystem assemble_constant_matrices(const FluidMesh& fluid,
                                               const PlateMesh& plate) {
  if (fluid.p2_connectivity.size() != fluid.triangles.size() ||
      plate.hermite_dof_map.size() != plate.elements.size()) {
    throw DimensionError("assemble_constant_matrices: mesh/basis mismatch");
  }
  SparseSystem sys;
  const int m = fluid.num_p2();
  const int mp = fluid.num_p1();
  const int ds = plate.dof_count;
  sys.num_velocity = m;
  sys.num_pressure = mp;
  sys.num_plate = ds;

  TripletBuffer mf, kf, bx, by;
  const std::size_t nt = fluid.triangles.size();
  mf.reserve(36 * nt);
  kf.reserve(36 * nt);
  bx.reserve(18 * nt);
  by.reserve(18 * nt);
  sys.ep = Vector::Zero(mp);
  for (int t = 0; t < fluid.num_triangles(); ++t) {
    const AffineTriangle geo = fluid.geometry(t);
    const auto& v = fluid.p2_connectivity[t];
    const auto& pv = fluid.p1_connectivity[t];
    const Mat66 me = p2_mass_element(geo);
    const Mat66 ke = p2_stiffness_element(geo);
    const auto [bxe, bye] = divergence_element(geo);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        mf.add(v[i], v[j], me(i, j));
        kf.add(v[i], v[j], ke(i, j));
      }
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 6; ++j) {
        bx.add(pv[i], v[j], bxe(i, j));
        by.add(pv[i], v[j], bye(i, j));
      }
      sys.ep[pv[i]] += geo.area() / 3.0;  // (psi_i, 1) on this triangle
    }
  }
  sys.mf = mf.compress(m, m);
  sys.kf = kf.compress(m, m);
  sys.bx = bx.compress(mp, m);
  sys.by = by.compress(mp, m);

  TripletBuffer ms, ks, sb;
  sys.es = Vector::Zero(ds);
  static const IntervalRule rule = interval_quadrature(kPlateDegree);
  for (int e = 0; e < plate.num_elements(); ++e) {
    const double ell = plate.length(e);
    const auto& d = plate.hermite_dof_map[e];
    const Mat66 me = hermite_element(ell, 0);
    const Mat66 ke = hermite_element(ell, 1);
    const Mat66 se = hermite_element(ell, 2);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        ms.add(d[i], d[j], me(i, j));
        ks.add(d[i], d[j], ke(i, j));
        sb.add(d[i], d[j], se(i, j));
      }
    }
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto th = HermiteQuintic::eval_physical(rule.points[q][0], ell, 0);
      for (int i = 0; i < 6; ++i) sys.es[d[i]] += rule.weights[q] * ell * th[i];
    }
  }
  sys.ms = ms.compress(ds, ds);
  sys.ks = ks.compress(ds, ds);
  sys.s = sb.compress(ds, ds);
  return sys;
}

inline OseenMatrices assemble_oseen(const FluidMesh& fluid, const Vector& u1n,
                                    const Vector& u2n) {
  require_size(u1n, fluid.num_p2(), "assemble_oseen(u1)");
  require_size(u2n, fluid.num_p2(), "assemble_oseen(u2)");
  require_finite(u1n, "assemble_oseen(u1)");
  require_finite(u2n, "assemble_oseen(u2)");
  const int m = fluid.num_p2();
  TripletBuffer tx, ty;
  tx.reserve(36 * fluid.triangles.size());
  ty.reserve(36 * fluid.triangles.size());
  for (int t = 0; t < fluid.num_triangles(); ++t) {
    const auto& v = fluid.p2_connectivity[t];
    const auto [txe, tye] =
        oseen_element(fluid.geometry(t), gather(u1n, v), gather(u2n, v));
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        tx.add(v[i], v[j], txe(i, j));
        ty.add(v[i], v[j], tye(i, j));
      }
    }
  }
  return {tx.compress(m, m), ty.compress(m, m)};
}

inline SparseMatrix assemble_plate_picard(const PlateMesh& plate,
                                          const Vector& w2n) {
  require_size(w2n, plate.dof_count, "assemble_plate_picard");
  require_finite(w2n, "assemble_plate_picard");
  TripletBuffer b;
  for (int e = 0; e < plate.num_elements(); ++e) {
    const auto& d = plate.hermite_dof_map[e];
    const Mat66 be = plate_picard_element(plate.length(e), plate_local(plate, e, w2n));
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) b.add(d[i], d[j], be(i, j));
  }
  return b.compress(plate.dof_count, plate.dof_count);
}

/// Right-hand side data: fluid body force, plate forcing and w1-equation data.
struct LoadSpec {
  std::function<double(double, double)> f1, f2;
  std::function<double(double)> fp, g1;
  int fluid_degree = kLoadDegree;
  int plate_degree = kPlateDegree;
};

struct LoadVectors {
  Vector f1, f2, f3, f4;
};

inline LoadVectors assemble_loads(const FluidMesh& fluid, const PlateMesh& plate,
                                  const LoadSpec& loads) {
  LoadVectors out;
  out.f1 = Vector::Zero(fluid.num_p2());
  out.f2 = Vector::Zero(fluid.num_p2());
  out.f3 = Vector::Zero(plate.dof_count);
  out.f4 = Vector::Zero(plate.dof_count);

  const TriangleRule tri = triangle_quadrature(loads.fluid_degree);
  std::vector<std::array<double, 6>> phi(tri.size());
  for (std::size_t q = 0; q < tri.size(); ++q) phi[q] = p2_shape(tri.points[q]);
  for (int t = 0; t < fluid.num_triangles(); ++t) {
    const AffineTriangle geo = fluid.geometry(t);
    const auto& v = fluid.p2_connectivity[t];
    for (std::size_t q = 0; q < tri.size(); ++q) {
      const Point2 x = geo.map(tri.points[q]);
      const double a = loads.f1 ? loads.f1(x[0], x[1]) : 0.0;
      const double b = loads.f2 ? loads.f2(x[0], x[1]) : 0.0;
      if (!std::isfinite(a) || !std::isfinite(b)) {
        throw NumericInputError("assemble_loads: non-finite fluid forcing");
      }
      const double w = tri.weights[q] * geo.det();
      for (int i = 0; i < 6; ++i) {
        out.f1[v[i]] += w * a * phi[q][i];
        out.f2[v[i]] += w * b * phi[q][i];
      }
    }
  }

  const IntervalRule line = interval_quadrature(loads.plate_degree);
  for (int e = 0; e < plate.num_elements(); ++e) {
    const double ell = plate.length(e);
    const auto& d = plate.hermite_dof_map[e];
    for (std::size_t q = 0; q < line.size(); ++q) {
      const double t = line.points[q][0];
      const double x = plate.origin(e) + ell * t;
      const double a = loads.fp ? loads.fp(x) : 0.0;
      const double b = loads.g1 ? loads.g1(x) : 0.0;
      if (!std::isfinite(a) || !std::isfinite(b)) {
        throw NumericInputError("assemble_loads: non-finite plate forcing");
      }
      const auto th = HermiteQuintic::eval_physical(t, ell, 0);
      const double w = line.weights[q] * ell;
      for (int i = 0; i < 6; ++i) {
        out.f3[d[i]] += w * a * th[i];
        out.f4[d[i]] += w * b * th[i];
      }
    }
  }
  return out;
}

}  // namespace fsi
