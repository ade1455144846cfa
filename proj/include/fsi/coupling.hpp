#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <utility>
#include <vector>

#include "fsi/basis.hpp"
#include "fsi/error.hpp"
#include "fsi/fields.hpp"
#include "fsi/mesh.hpp"
#include "fsi/quadrature.hpp"
#include "fsi/sparse.hpp"

namespace fsi {

/// Point evaluation of the plate velocity at one plate-tagged fluid node.
struct TraceEntry {
  int fluid_node = -1;
  double x = 0.0;
  int element = -1;
  std::array<int, 6> dofs{};
  std::array<double, 6> weights{};

  double value(const Vector& w2) const {
    double acc = 0.0;
    for (int k = 0; k < 6; ++k) acc += weights[k] * w2[dofs[k]];
    return acc;
  }
};

/// Velocity trace identification u2 = w2 at the fluid nodes on the plate,
/// plus the no-slip node set S.
struct TraceConstraint {
  std::vector<TraceEntry> entries;  // ascending x
  std::vector<int> s_nodes;

  std::vector<double> values(const Vector& w2) const {
    std::vector<double> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.value(w2));
    return out;
  }
};

inline TraceConstraint build_trace_constraint(const FluidMesh& fluid,
                                              const PlateMesh& plate) {
  if (plate.num_elements() == 0) {
    throw CouplingConstructionError("build_trace_constraint: empty plate mesh");
  }
  const double lo = plate.elements.front()[0];
  const double hi = plate.elements.back()[1];
  TraceConstraint tc;
  for (int i = 0; i < fluid.num_p2(); ++i) {
    const NodeTag tag = fluid.boundary_tag[i];
    if (tag == NodeTag::S) {
      tc.s_nodes.push_back(i);
    } else if (tag == NodeTag::plate) {
      const double x = fluid.p2_nodes[i][0];
      if (x < lo - 1e-12 || x > hi + 1e-12) {
        throw CouplingConstructionError(
            "build_trace_constraint: plate node x=" + std::to_string(x) +
            " outside plate mesh");
      }
      const auto [e, t] = plate.locate(x);
      TraceEntry entry;
      entry.fluid_node = i;
      entry.x = x;
      entry.element = e;
      entry.dofs = plate.hermite_dof_map[e];
      entry.weights = HermiteQuintic::eval_physical(t, plate.length(e), 0);
      tc.entries.push_back(entry);
    }
  }
  return tc;
}

/// Integral of the P2 trace on y = 1 given the imposed nodal values (exact
/// Simpson rule per edge); the outward flux through the plate boundary.
inline double boundary_flux(const FluidMesh& fluid, const TraceConstraint& tc,
                            const Vector& w2) {
  // nodal values on the top row, corners are zero
  const int np = fluid.p2_per_side();
  std::vector<double> top(np, 0.0);
  for (const auto& e : tc.entries) {
    top[e.fluid_node - fluid.p2_index(0, np - 1)] = e.value(w2);
  }
  double flux = 0.0;
  for (int k = 0; k + 2 < np; k += 2) {
    flux += fluid.h / 6.0 * (top[k] + 4.0 * top[k + 1] + top[k + 2]);
  }
  return flux;
}

// ---------------------------------------------------------------------------
// Pressure trace on the plate
// ---------------------------------------------------------------------------

/// One P1 triangle edge lying on y = 1.
struct PressureTraceEdge {
  int triangle = -1;
  int local_edge = -1;              // edge (k, k+1 mod 3)
  std::array<double, 2> x{};        // endpoints, ascending
  std::array<int, 2> vertices{};    // global P1 indices at x[0], x[1]
  /// psi_a(x) = slope[a] * x + intercept[a] on the edge.
  std::array<double, 2> slope{};
  std::array<double, 2> intercept{};
};

struct PressureTraceIndex {
  std::vector<PressureTraceEdge> edges;  // ascending x
  int num_pressure = 0;
};

inline PressureTraceIndex build_pressure_trace_index(const FluidMesh& fluid) {
  PressureTraceIndex idx;
  idx.num_pressure = fluid.num_p1();
  const int top_row = fluid.n;
  const int nv = fluid.n + 1;
  for (int t = 0; t < fluid.num_triangles(); ++t) {
    const auto& c = fluid.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const int a = c[k];
      const int b = c[(k + 1) % 3];
      if (a / nv != top_row || b / nv != top_row) continue;
      PressureTraceEdge e;
      e.triangle = t;
      e.local_edge = k;
      int va = a;
      int vb = b;
      if (fluid.vertices[va][0] > fluid.vertices[vb][0]) std::swap(va, vb);
      e.vertices = {va, vb};
      const double x0 = fluid.vertices[va][0];
      const double x1 = fluid.vertices[vb][0];
      e.x = {x0, x1};
      const double len = x1 - x0;
      e.slope = {-1.0 / len, 1.0 / len};
      e.intercept = {x1 / len, -x0 / len};
      idx.edges.push_back(e);
    }
  }
  std::sort(idx.edges.begin(), idx.edges.end(),
            [](const auto& l, const auto& r) { return l.x[0] < r.x[0]; });
  return idx;
}

/// Entry j: integral over the plate of p_h(x, 1) * theta_j(x), computed on
/// the common refinement of pressure edges and plate elements.
inline Vector pressure_plate_load(const PressureTraceIndex& index,
                                  const Vector& p, const PlateMesh& plate) {
  require_size(p, index.num_pressure, "pressure_plate_load");
  static const IntervalRule rule = interval_quadrature(6);
  Vector out = Vector::Zero(plate.dof_count);
  int e = 0;
  for (const auto& edge : index.edges) {
    while (e + 1 < plate.num_elements() && plate.elements[e][1] <= edge.x[0]) ++e;
    for (int k = e; k < plate.num_elements(); ++k) {
      const double a = std::max(edge.x[0], plate.elements[k][0]);
      const double b = std::min(edge.x[1], plate.elements[k][1]);
      if (b <= a) {
        if (plate.elements[k][0] >= edge.x[1]) break;
        continue;
      }
      const double ell = plate.length(k);
      const auto& d = plate.hermite_dof_map[k];
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double x = a + (b - a) * rule.points[q][0];
        const double pv =
            p[edge.vertices[0]] * (edge.slope[0] * x + edge.intercept[0]) +
            p[edge.vertices[1]] * (edge.slope[1] * x + edge.intercept[1]);
        const double t = (x - plate.origin(k)) / ell;
        const auto th = HermiteQuintic::eval_physical(t, ell, 0);
        const double w = rule.weights[q] * (b - a) * pv;
        for (int i = 0; i < 6; ++i) out[d[i]] += w * th[i];
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dirichlet conditions
// ---------------------------------------------------------------------------

enum class DirichletMode { symmetric_elimination, row_replacement };

using FixedValues = std::vector<std::pair<int, double>>;

/// Replace constrained rows by identity rows with the imposed value on the
/// right-hand side. In symmetric mode the constrained columns are first moved
/// to the right-hand side and zeroed as well.
inline void apply_dirichlet(ColSparseMatrix& a, Vector& rhs,
                            const FixedValues& fixed,
                            DirichletMode mode = DirichletMode::symmetric_elimination) {
  std::map<int, double> values;
  for (const auto& [dof, v] : fixed) {
    if (dof < 0 || dof >= a.rows()) {
      throw DimensionError("apply_dirichlet: constrained index out of range");
    }
    const auto [it, inserted] = values.emplace(dof, v);
    if (!inserted && it->second != v) {
      throw ConstraintConflictError("apply_dirichlet: DOF " + std::to_string(dof) +
                                    " constrained to two different values");
    }
  }
  std::vector<char> is_fixed(a.rows(), 0);
  Vector g = Vector::Zero(a.rows());
  for (const auto& [dof, v] : values) {
    is_fixed[dof] = 1;
    g[dof] = v;
  }
  if (mode == DirichletMode::symmetric_elimination) {
    rhs -= a * g;
    a.prune([&](Eigen::Index r, Eigen::Index c, double) {
      return !is_fixed[r] && !is_fixed[c];
    });
  } else {
    a.prune([&](Eigen::Index r, Eigen::Index, double) { return !is_fixed[r]; });
  }
  TripletBuffer diag;
  for (const auto& [dof, v] : values) {
    diag.add(dof, dof, 1.0);
    rhs[dof] = v;
  }
  a += diag.compress<ColSparseMatrix>(static_cast<int>(a.rows()),
                                      static_cast<int>(a.cols()));
}

/// Overwrite constrained entries of a solution with their imposed values.
inline void impose(Vector& x, const FixedValues& fixed) {
  for (const auto& [dof, v] : fixed) x[dof] = v;
}

/// Velocity constraints in the fluid layout [u1 (M) | u2 (M) | ...]:
/// u1 = 0 on the whole boundary, u2 = 0 on S and u2 = w2 at plate nodes.
inline FixedValues velocity_constraints(const TraceConstraint& tc, int m,
                                        const Vector& w2n) {
  FixedValues fixed;
  fixed.reserve(2 * (tc.s_nodes.size() + tc.entries.size()));
  for (int node : tc.s_nodes) {
    fixed.emplace_back(node, 0.0);
    fixed.emplace_back(m + node, 0.0);
  }
  for (const auto& e : tc.entries) {
    fixed.emplace_back(e.fluid_node, 0.0);
    fixed.emplace_back(m + e.fluid_node, e.value(w2n));
  }
  return fixed;
}

/// Constrain the assembled fluid saddle-point system for the current plate
/// velocity w2n.
inline void apply_velocity_dirichlet(ColSparseMatrix& a, Vector& rhs,
                                     const TraceConstraint& tc, int m,
                                     const Vector& w2n,
                                     DirichletMode mode = DirichletMode::symmetric_elimination) {
  apply_dirichlet(a, rhs, velocity_constraints(tc, m, w2n), mode);
}

}  // namespace fsi
