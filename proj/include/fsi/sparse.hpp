#pragma once

#include <algorithm>
#include <vector>

#include <Eigen/Sparse>

namespace fsi {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using ColSparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;
using Triplet = Eigen::Triplet<double>;

/// COO accumulation buffer. Duplicates are summed on compression.
class TripletBuffer {
public:
  void add(int i, int j, double v) { entries_.emplace_back(i, j, v); }

  /// Append `scale * block` (or its transpose) with the given offsets.
  template <typename Matrix>
  void add_block(const Matrix& block, int row_offset, int col_offset,
                 double scale = 1.0, bool transpose = false) {
    for (int k = 0; k < block.outerSize(); ++k) {
      for (typename Matrix::InnerIterator it(block, k); it; ++it) {
        const int r = transpose ? static_cast<int>(it.col()) : static_cast<int>(it.row());
        const int c = transpose ? static_cast<int>(it.row()) : static_cast<int>(it.col());
        entries_.emplace_back(row_offset + r, col_offset + c, scale * it.value());
      }
    }
  }

  void reserve(std::size_t n) { entries_.reserve(n); }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Sort by (row, col) and compress; summation order of duplicates is the
  /// insertion order, so results do not depend on how buffers were merged.
  template <typename Matrix = SparseMatrix>
  Matrix compress(int rows, int cols) {
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const Triplet& a, const Triplet& b) {
                       return a.row() != b.row() ? a.row() < b.row()
                                                 : a.col() < b.col();
                     });
    Matrix m(rows, cols);
    m.setFromTriplets(entries_.begin(), entries_.end());
    return m;
  }

  /// Move all entries of `other` to the end of this buffer.
  void merge(TripletBuffer&& other) {
    entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
    other.entries_.clear();
  }

private:
  std::vector<Triplet> entries_;
};

template <typename Matrix>
double max_asymmetry(const Matrix& a) {
  if (a.nonZeros() == 0) return 0.0;
  const Matrix t = a.transpose();
  const Matrix d = a - t;
  const double diff = d.nonZeros() == 0 ? 0.0 : d.coeffs().cwiseAbs().maxCoeff();
  const double scale = a.coeffs().cwiseAbs().maxCoeff();
  return scale > 0.0 ? diff / scale : 0.0;
}

}  // namespace fsi
