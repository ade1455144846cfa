#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fsi/basis.hpp"
#include "fsi/error.hpp"

namespace fsi {

enum class NodeTag { interior, S, plate };

inline const char* to_string(NodeTag t) {
  switch (t) {
    case NodeTag::interior: return "interior";
    case NodeTag::S: return "S";
    case NodeTag::plate: return "plate";
  }
  return "?";
}

/// Structured P2/P1 triangulation of the unit square.
///
/// Both node sets are numbered lexicographically by (y, x). Each grid square
/// is split along the diagonal from its lower-left to its upper-right corner.
/// P2 connectivity lists the three vertices, then the midpoints of edges
/// (0,1), (1,2), (2,0); all triangles are counter-clockwise.
struct FluidMesh {
  int n = 0;
  double h = 0.0;
  std::vector<Point2> vertices;                 // P1 nodes
  std::vector<std::array<int, 3>> triangles;    // into vertices
  std::vector<Point2> p2_nodes;
  std::vector<std::array<int, 6>> p2_connectivity;
  std::vector<std::array<int, 3>> p1_connectivity;  // same as triangles
  std::vector<NodeTag> boundary_tag;            // per P2 node
  std::vector<int> vertex_to_p2;

  int num_p2() const noexcept { return static_cast<int>(p2_nodes.size()); }
  int num_p1() const noexcept { return static_cast<int>(vertices.size()); }
  int num_triangles() const noexcept {
    return static_cast<int>(triangles.size());
  }
  int p2_per_side() const noexcept { return 2 * n + 1; }

  /// P2 node index of grid position (i, j) on the (2n+1)^2 grid.
  int p2_index(int i, int j) const noexcept { return j * (2 * n + 1) + i; }

  AffineTriangle geometry(int t) const {
    const auto& c = triangles[t];
    return AffineTriangle(vertices[c[0]], vertices[c[1]], vertices[c[2]]);
  }
};

inline FluidMesh build_fluid_mesh(int n) {
  if (n < 2) {
    throw InvalidMeshError("build_fluid_mesh: need n >= 2, got " +
                           std::to_string(n));
  }
  FluidMesh m;
  m.n = n;
  m.h = 1.0 / n;
  const int nv = n + 1;
  const int np = 2 * n + 1;

  m.vertices.reserve(nv * nv);
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nv; ++i)
      m.vertices.push_back({static_cast<double>(i) / n,
                            static_cast<double>(j) / n});

  m.p2_nodes.reserve(np * np);
  m.boundary_tag.reserve(np * np);
  for (int j = 0; j < np; ++j) {
    for (int i = 0; i < np; ++i) {
      m.p2_nodes.push_back({static_cast<double>(i) / (2 * n),
                            static_cast<double>(j) / (2 * n)});
      const bool on_boundary = i == 0 || j == 0 || i == np - 1 || j == np - 1;
      if (!on_boundary) {
        m.boundary_tag.push_back(NodeTag::interior);
      } else if (j == np - 1 && i > 0 && i < np - 1) {
        m.boundary_tag.push_back(NodeTag::plate);
      } else {
        m.boundary_tag.push_back(NodeTag::S);
      }
    }
  }

  m.vertex_to_p2.resize(nv * nv);
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nv; ++i) m.vertex_to_p2[j * nv + i] = m.p2_index(2 * i, 2 * j);

  const auto vid = [nv](int i, int j) { return j * nv + i; };
  const auto pid = [&m](int i, int j) { return m.p2_index(i, j); };
  m.triangles.reserve(2 * n * n);
  m.p2_connectivity.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = 2 * i;
      const int b = 2 * j;
      // lower-right triangle: (i,j) (i+1,j) (i+1,j+1)
      m.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      m.p2_connectivity.push_back({pid(a, b), pid(a + 2, b), pid(a + 2, b + 2),
                                   pid(a + 1, b), pid(a + 2, b + 1),
                                   pid(a + 1, b + 1)});
      // upper-left triangle: (i,j) (i+1,j+1) (i,j+1)
      m.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
      m.p2_connectivity.push_back({pid(a, b), pid(a + 2, b + 2), pid(a, b + 2),
                                   pid(a + 1, b + 1), pid(a + 1, b + 2),
                                   pid(a, b + 1)});
    }
  }
  m.p1_connectivity = m.triangles;
  return m;
}

/// One-dimensional quintic Hermite mesh of the plate [0,1] x {1}.
///
/// Global DOF layout: Lagrange values at the M~ nodes (ascending x) first,
/// then one derivative DOF per element endpoint (ascending x).
struct PlateMesh {
  /// Per element: (left, right, interior-left, interior-right) coordinates.
  std::vector<std::array<double, 4>> elements;
  std::vector<double> lagrange_nodes;
  int lagrange_count = 0;
  int dof_count = 0;
  /// Per element: (w left, w right, w interior 1, w interior 2, w' left, w' right).
  std::vector<std::array<int, 6>> hermite_dof_map;
  /// Coincident fluid P2 node for each Lagrange node, if any.
  std::vector<std::optional<int>> fluid_trace_map;

  int num_elements() const noexcept {
    return static_cast<int>(elements.size());
  }
  double origin(int e) const noexcept { return elements[e][0]; }
  double length(int e) const noexcept {
    return elements[e][1] - elements[e][0];
  }

  /// Element containing x and the reference coordinate of x in it.
  std::pair<int, double> locate(double x) const {
    const int ne = num_elements();
    int lo = 0;
    int hi = ne - 1;
    while (lo < hi) {
      const int mid = (lo + hi + 1) / 2;
      if (elements[mid][0] <= x) lo = mid; else hi = mid - 1;
    }
    const double t = (x - origin(lo)) / length(lo);
    return {lo, std::clamp(t, 0.0, 1.0)};
  }
};

/// Build a plate mesh from an explicit, ascending list of Lagrange nodes.
/// Consecutive groups of four nodes (sharing endpoints) form one element.
inline PlateMesh build_plate_mesh_from_nodes(std::span<const double> nodes,
                                             const FluidMesh& fluid) {
  const int count = static_cast<int>(nodes.size());
  if (count < 4 || count % 3 != 1) {
    throw MeshCompatibilityError(
        "build_plate_mesh: Lagrange node count " + std::to_string(count) +
        " is not of the form 3L+1 with L >= 1");
  }
  const int ne = (count - 1) / 3;
  PlateMesh p;
  p.lagrange_nodes.assign(nodes.begin(), nodes.end());
  p.lagrange_count = count;
  p.dof_count = count + (count + 2) / 3;
  for (int e = 0; e < ne; ++e) {
    const double x0 = nodes[3 * e];
    const double x1 = nodes[3 * e + 1];
    const double x2 = nodes[3 * e + 2];
    const double x3 = nodes[3 * e + 3];
    const double ell = x3 - x0;
    if (!(ell > 0.0) || std::abs(x1 - x0 - ell / 3.0) > 1e-12 * (1.0 + ell) ||
        std::abs(x2 - x0 - 2.0 * ell / 3.0) > 1e-12 * (1.0 + ell)) {
      throw MeshCompatibilityError(
          "build_plate_mesh: element " + std::to_string(e) +
          " nodes are not equidistant");
    }
    p.elements.push_back({x0, x3, x1, x2});
    p.hermite_dof_map.push_back(
        {3 * e, 3 * e + 3, 3 * e + 1, 3 * e + 2, count + e, count + e + 1});
  }

  const int np = fluid.p2_per_side();
  const int two_n = 2 * fluid.n;
  p.fluid_trace_map.resize(count);
  for (int k = 0; k < count; ++k) {
    const double x = nodes[k];
    const long i = std::lround(x * two_n);
    if (i < 0 || i >= np) continue;
    const int node = fluid.p2_index(static_cast<int>(i), np - 1);
    if (std::abs(fluid.p2_nodes[node][0] - x) <= 1e-12) {
      p.fluid_trace_map[k] = node;
    }
  }
  return p;
}

/// Plate mesh with ceil(2n/3) equidistant elements on [0,1]; when 3 divides
/// n its Lagrange nodes are exactly the fluid P2 nodes on y = 1.
inline PlateMesh build_plate_mesh(const FluidMesh& fluid) {
  if (fluid.n < 2) {
    throw MeshCompatibilityError("build_plate_mesh: fluid mesh too coarse");
  }
  const int ne = (2 * fluid.n + 2) / 3;
  std::vector<double> nodes(3 * ne + 1);
  for (int k = 0; k <= 3 * ne; ++k) {
    nodes[k] = static_cast<double>(k) / (3 * ne);
  }
  return build_plate_mesh_from_nodes(nodes, fluid);
}

/// Value and derivative DOFs at x = 0 and x = 1.
inline std::vector<int> clamped_dofs(const PlateMesh& plate) {
  const int m = plate.lagrange_count;
  const int ne = plate.num_elements();
  return {0, m - 1, m, m + ne};
}

/// Plain-text listing: a "# nodes" block with one "index x y tag" record per
/// P2 node, then a "# triangles" block with "index n0 n1 n2 n3 n4 n5".
inline void write_mesh(std::ostream& os, const FluidMesh& m) {
  char buf[128];
  os << "# nodes " << m.num_p2() << "\n";
  for (int i = 0; i < m.num_p2(); ++i) {
    std::snprintf(buf, sizeof buf, "%d %.17g %.17g %s\n", i, m.p2_nodes[i][0],
                  m.p2_nodes[i][1], to_string(m.boundary_tag[i]));
    os << buf;
  }
  os << "# triangles " << m.num_triangles() << "\n";
  for (int t = 0; t < m.num_triangles(); ++t) {
    os << t;
    for (int k : m.p2_connectivity[t]) os << ' ' << k;
    os << "\n";
  }
}

}  // namespace fsi
