#pragma once

#include <array>
#include <cmath>
#include <string>

#include "fsi/basis.hpp"
#include "fsi/error.hpp"
#include "fsi/mesh.hpp"
#include "fsi/sparse.hpp"

namespace fsi {

// Helpers for reading finite element coefficient vectors.

template <std::size_t N>
std::array<double, N> gather(const Vector& v, const std::array<int, N>& idx) {
  std::array<double, N> out{};
  for (std::size_t k = 0; k < N; ++k) out[k] = v[idx[k]];
  return out;
}

/// Local Hermite coefficients of element e, derivative DOFs included as stored
/// (physical derivatives).
inline std::array<double, 6> plate_local(const PlateMesh& plate, int e,
                                         const Vector& w) {
  return gather(w, plate.hermite_dof_map[e]);
}

/// d^order w / dx^order at reference coordinate t of element e.
inline double plate_eval_local(const PlateMesh& plate, int e, double t,
                               const Vector& w, int order = 0) {
  const auto local = plate_local(plate, e, w);
  const auto phi = HermiteQuintic::eval_physical(t, plate.length(e), order);
  double acc = 0.0;
  for (int i = 0; i < 6; ++i) acc += local[i] * phi[i];
  return acc;
}

inline double plate_eval(const PlateMesh& plate, const Vector& w, double x,
                         int order = 0) {
  const auto [e, t] = plate.locate(x);
  return plate_eval_local(plate, e, t, w, order);
}

/// Hermite interpolant of a function given with its first derivative.
template <typename F, typename DF>
Vector plate_interpolate(const PlateMesh& plate, F&& f, DF&& df) {
  Vector w = Vector::Zero(plate.dof_count);
  for (int k = 0; k < plate.lagrange_count; ++k) w[k] = f(plate.lagrange_nodes[k]);
  for (int e = 0; e < plate.num_elements(); ++e) {
    w[plate.hermite_dof_map[e][4]] = df(plate.elements[e][0]);
    w[plate.hermite_dof_map[e][5]] = df(plate.elements[e][1]);
  }
  return w;
}

/// Nodal P2 interpolant of a scalar field.
template <typename F>
Vector p2_interpolate(const FluidMesh& mesh, F&& f) {
  Vector v(mesh.num_p2());
  for (int i = 0; i < mesh.num_p2(); ++i) v[i] = f(mesh.p2_nodes[i][0], mesh.p2_nodes[i][1]);
  return v;
}

/// Nodal P1 interpolant of a scalar field.
template <typename F>
Vector p1_interpolate(const FluidMesh& mesh, F&& f) {
  Vector v(mesh.num_p1());
  for (int i = 0; i < mesh.num_p1(); ++i) v[i] = f(mesh.vertices[i][0], mesh.vertices[i][1]);
  return v;
}

inline void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw NumericInputError(std::string(what) + ": non-finite entry");
  }
}

inline void require_size(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw DimensionError(std::string(what) + ": expected length " +
                         std::to_string(n) + ", got " + std::to_string(v.size()));
  }
}

}  // namespace fsi
