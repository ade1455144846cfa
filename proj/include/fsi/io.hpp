#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>

#include "fsi/error.hpp"
#include "fsi/fields.hpp"
#include "fsi/mesh.hpp"
#include "fsi/solver.hpp"
#include "fsi/sparse.hpp"

namespace fsi {

namespace fs = std::filesystem;

/// Write via a sibling temporary file and rename it into place.
inline void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    body(os);
    os.flush();
    if (!os) throw Error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

inline void write_atomic(const fs::path& path, const std::string& text) {
  write_atomic(path, [&](std::ostream& os) { os << text; });
}

inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// MatrixMarket coordinate real general.
template <typename Matrix>
void write_matrix_market(std::ostream& os, const Matrix& a) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  for (int k = 0; k < a.outerSize(); ++k) {
    for (typename Matrix::InnerIterator it(a, k); it; ++it) {
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << fmt17(it.value()) << '\n';
    }
  }
}

inline void write_vector_market(std::ostream& os, const Vector& v) {
  os << "%%MatrixMarket matrix array real general\n" << v.size() << " 1\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << fmt17(v[i]) << '\n';
}

/// fluid.csv: one row per P2 node, pressure interpolated linearly from the
/// P1 vertices of the owning triangle. plate.csv: plate nodes.
inline void write_fluid_csv(std::ostream& os, const FluidMesh& mesh, const PicardState& st) {
  Vector p2p = Vector::Zero(mesh.num_p2());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& c = mesh.p2_connectivity[t];
    const auto& v = mesh.p1_connectivity[t];
    for (int k = 0; k < 3; ++k) {
      p2p[c[k]] = st.p[v[k]];
      p2p[c[3 + k]] = 0.5 * (st.p[v[k]] + st.p[v[(k + 1) % 3]]);
    }
  }
  os << "x,y,u1,u2,p\n";
  for (int i = 0; i < mesh.num_p2(); ++i) {
    os << fmt17(mesh.p2_nodes[i][0]) << ',' << fmt17(mesh.p2_nodes[i][1]) << ','
       << fmt17(st.u1[i]) << ',' << fmt17(st.u2[i]) << ',' << fmt17(p2p[i]) << '\n';
  }
}

inline void write_plate_csv(std::ostream& os, const PlateMesh& plate, const PicardState& st) {
  os << "x,w1,w2\n";
  for (int k = 0; k < plate.lagrange_count; ++k) {
    os << fmt17(plate.lagrange_nodes[k]) << ',' << fmt17(st.w1[k]) << ',' << fmt17(st.w2[k])
       << '\n';
  }
}

}  // namespace fsi
