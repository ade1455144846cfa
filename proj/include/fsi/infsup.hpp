#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fsi/assembly.hpp"
#include "fsi/error.hpp"
#include "fsi/mesh.hpp"
#include "fsi/sparse.hpp"

namespace fsi {

inline constexpr int kMaxInfSupLevel = 16;

struct InfSupEntry {
  int n = 0;
  double h = 0.0;
  double beta = 0.0;
  int velocity_dofs = 0;  // free velocity unknowns
  int pressure_dofs = 0;  // mean-free pressure dimension
};

struct InfSupResult {
  std::vector<InfSupEntry> entries;

  void write_text(std::ostream& os) const {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-6s %-12s %-14s %-8s %-8s\n", "n", "h", "beta_h", "dim V",
                  "dim Q");
    os << buf;
    for (const auto& e : entries) {
      std::snprintf(buf, sizeof buf, "%-6d %-12.6g %-14.8f %-8d %-8d\n", e.n, e.h, e.beta,
                    e.velocity_dofs, e.pressure_dofs);
      os << buf;
    }
  }
};

/// Smallest generalized singular value of b against the velocity and pressure
/// Gramians: beta^2 = min eig of (B A^-1 B^T, Q) on the pressures orthogonal to
/// `mean` (no restriction when `mean` is empty).
inline double infsup_from_blocks(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const Eigen::MatrixXd& q, const Eigen::VectorXd& mean) {
  if (a.rows() == 0 || b.rows() == 0 || a.rows() != a.cols() || q.rows() != q.cols() ||
      b.cols() != a.rows() || b.rows() != q.rows() ||
      (mean.size() != 0 && mean.size() != q.rows())) {
    throw DimensionError("infsup_from_blocks: inconsistent block dimensions");
  }
  if (mean.size() != 0 && b.rows() < 2) {
    throw DimensionError("infsup_from_blocks: mean-free pressure space is empty");
  }
  const Eigen::LLT<Eigen::MatrixXd> la(a);
  if (la.info() != Eigen::Success) {
    throw SolverFailureError("infsup: velocity Gramian is not positive definite", 0, 0);
  }
  const Eigen::MatrixXd s = b * la.solve(b.transpose());

  Eigen::MatrixXd z;
  if (mean.size() == 0) {
    z = Eigen::MatrixXd::Identity(q.rows(), q.rows());
  } else {
    // orthonormal complement of the mean functional
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(mean);
    const Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(q.rows(), q.rows());
    z = full.rightCols(q.rows() - 1);
  }
  const Eigen::MatrixXd sz = z.transpose() * s * z;
  const Eigen::MatrixXd qz = z.transpose() * q * z;
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (sz + sz.transpose()), 0.5 * (qz + qz.transpose()));
  if (es.info() != Eigen::Success) {
    throw SolverFailureError("infsup: generalized eigenproblem failed", 0, 0);
  }
  return std::sqrt(std::max(0.0, es.eigenvalues()(0)));
}

/// Dense blocks of the inf-sup problem on one mesh: velocity H1-seminorm
/// Gramian on the interior nodes (both components), the divergence block on
/// those columns, the P1 mass matrix and the mean vector.
struct InfSupBlocks {
  Eigen::MatrixXd a, b, q;
  Eigen::VectorXd mean;
};

inline InfSupBlocks infsup_blocks(const FluidMesh& fluid) {
  const PlateMesh plate = build_plate_mesh(fluid);
  const SparseSystem sys = assemble_constant_matrices(fluid, plate);
  std::vector<int> interior;
  for (int i = 0; i < fluid.num_p2(); ++i) {
    const auto& x = fluid.p2_nodes[i];
    const bool on_boundary = x[0] <= 0.0 || x[0] >= 1.0 || x[1] <= 0.0 || x[1] >= 1.0;
    if (!on_boundary) interior.push_back(i);
  }
  const int ni = static_cast<int>(interior.size());
  const Eigen::MatrixXd kf(sys.kf);
  const Eigen::MatrixXd bx(sys.bx);
  const Eigen::MatrixXd by(sys.by);

  InfSupBlocks out;
  out.a = Eigen::MatrixXd::Zero(2 * ni, 2 * ni);
  out.b = Eigen::MatrixXd::Zero(fluid.num_p1(), 2 * ni);
  for (int c = 0; c < ni; ++c) {
    for (int r = 0; r < ni; ++r) {
      out.a(r, c) = out.a(ni + r, ni + c) = kf(interior[r], interior[c]);
    }
    out.b.col(c) = bx.col(interior[c]);
    out.b.col(ni + c) = by.col(interior[c]);
  }

  TripletBuffer qt;
  for (int t = 0; t < fluid.num_triangles(); ++t) {
    const auto m = p1_mass_element(fluid.geometry(t));
    const auto& v = fluid.p1_connectivity[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) qt.add(v[i], v[j], m(i, j));
  }
  out.q = Eigen::MatrixXd(qt.compress(fluid.num_p1(), fluid.num_p1()));
  out.mean = sys.ep;
  return out;
}

inline InfSupEntry compute_discrete_infsup(int n, bool mean_free = true) {
  if (n > kMaxInfSupLevel) {
    throw CapabilityError("compute_discrete_infsup: dense eigen-solve limited to n <= " +
                          std::to_string(kMaxInfSupLevel));
  }
  const FluidMesh fluid = build_fluid_mesh(n);
  const InfSupBlocks blk = infsup_blocks(fluid);
  InfSupEntry e;
  e.n = n;
  e.h = fluid.h;
  e.velocity_dofs = static_cast<int>(blk.a.rows());
  e.pressure_dofs = static_cast<int>(blk.q.rows()) - (mean_free ? 1 : 0);
  e.beta = infsup_from_blocks(blk.a, blk.b, blk.q,
                              mean_free ? blk.mean : Eigen::VectorXd());
  return e;
}

inline InfSupResult compute_discrete_infsup(const std::vector<int>& levels) {
  InfSupResult r;
  for (int n : levels) r.entries.push_back(compute_discrete_infsup(n));
  return r;
}

}  // namespace fsi
