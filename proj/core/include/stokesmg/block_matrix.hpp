#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "stokesmg/basis.hpp"

namespace stokesmg {

/// Block-sparse matrix in CSR layout over element indices with uniform
/// dense blocks.  Identical blocks are stored once (interned); on uniform
/// grids almost every interior block row repeats, which keeps the memory
/// footprint proportional to the number of distinct stencils rather than
/// the number of elements.
class BlockCsr {
public:
  BlockCsr() = default;
  BlockCsr(int block_rows, int block_cols, int brows, int bcols)
      : nrows_(block_rows), ncols_(block_cols), brows_(brows), bcols_(bcols),
        build_(block_rows) {}

  int block_rows() const { return nrows_; }
  int block_cols() const { return ncols_; }
  int brows() const { return brows_; }
  int bcols() const { return bcols_; }
  Eigen::Index rows() const { return Eigen::Index(nrows_) * brows_; }
  Eigen::Index cols() const { return Eigen::Index(ncols_) * bcols_; }

  /// Accumulate into block (i,j); only valid before finalize().
  void add_block(int i, int j, const Mat& b);

  /// Pack the builder maps into CSR storage, interning identical blocks.
  void finalize();
  bool finalized() const { return build_.empty(); }

  // CSR access (after finalize).
  const std::vector<int>& row_ptr() const { return ptr_; }
  const std::vector<int>& col_idx() const { return col_; }
  const Mat& block_at(int slot) const { return pool_[blk_[slot]]; }
  int pool_size() const { return int(pool_.size()); }

  /// Pointer to block (i,j) or nullptr when structurally zero.
  const Mat* find_block(int i, int j) const;

  /// Structurally present columns of row i.
  std::vector<int> row_cols(int i) const;

  // y = A x  /  y += alpha * A x
  void matvec(const Vec& x, Vec& y) const;
  void matvec_add(const Vec& x, Vec& y, double alpha = 1.0) const;

  /// Residual block for one row: r = b_i - sum_j A_ij x_j.
  void row_residual(int i, const Vec& x, const Vec& b, Vec& r) const;

  BlockCsr transposed() const;
  Mat to_dense() const;
  double frobenius() const;
  double max_abs_asymmetry() const;

  /// Triplet text dump: one "row col value" line per structurally stored
  /// entry (explicit zeros included), 17 significant digits.
  void dump_triplets(std::ostream& os) const;

private:
  int intern(const Mat& b);

  int nrows_ = 0, ncols_ = 0, brows_ = 0, bcols_ = 0;
  std::vector<std::map<int, Mat>> build_;
  std::vector<int> ptr_, col_, blk_;
  std::vector<Mat> pool_;
  std::unordered_map<uint64_t, std::vector<int>> intern_map_;
};

/// C = A^T diag(w) B over the element graph, where w holds one scalar per
/// block row (block-diagonal weight).  A: (e x m blocks), B: (e x k blocks),
/// C: (m x k blocks).
BlockCsr block_at_diag_b(const BlockCsr& A, const std::vector<double>& w,
                         const BlockCsr& B);

/// Row-truncated copy: keep only the listed block-row sub-indices of every
/// block (used for the Q_p -> Q_{p-1} modal truncation), scaled by `scale`.
BlockCsr select_block_rows(const BlockCsr& A, const std::vector<int>& keep,
                           double scale);

} // namespace stokesmg
