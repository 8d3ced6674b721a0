#include "stokesmg/block_matrix.hpp"

#include <cstring>
#include <ostream>
#include <stdexcept>

namespace stokesmg {

namespace {
uint64_t hash_bytes(const double* p, size_t n) {
  // FNV-1a over the raw block bytes; exact-equality compare on collision.
  uint64_t h = 1469598103934665603ull;
  const unsigned char* b = reinterpret_cast<const unsigned char*>(p);
  for (size_t i = 0; i < n * sizeof(double); ++i) {
    h ^= b[i];
    h *= 1099511628211ull;
  }
  return h;
}
} // namespace

void BlockCsr::add_block(int i, int j, const Mat& b) {
  if (build_.empty()) throw std::logic_error("BlockCsr: add_block after finalize");
  auto it = build_[i].find(j);
  if (it == build_[i].end())
    build_[i].emplace(j, b);
  else
    it->second += b;
}

int BlockCsr::intern(const Mat& b) {
  uint64_t h = hash_bytes(b.data(), size_t(b.size()));
  auto& bucket = intern_map_[h];
  for (int id : bucket) {
    const Mat& cand = pool_[id];
    if (std::memcmp(cand.data(), b.data(), size_t(b.size()) * sizeof(double)) == 0)
      return id;
  }
  pool_.push_back(b);
  bucket.push_back(int(pool_.size()) - 1);
  return int(pool_.size()) - 1;
}

void BlockCsr::finalize() {
  ptr_.assign(nrows_ + 1, 0);
  size_t total = 0;
  for (int i = 0; i < nrows_; ++i) total += build_[i].size();
  col_.reserve(total);
  blk_.reserve(total);
  for (int i = 0; i < nrows_; ++i) {
    ptr_[i] = int(col_.size());
    for (auto& [j, b] : build_[i]) {
      col_.push_back(j);
      blk_.push_back(intern(b));
    }
    build_[i].clear();
  }
  ptr_[nrows_] = int(col_.size());
  build_.clear();
  build_.shrink_to_fit();
  intern_map_.clear();
}

const Mat* BlockCsr::find_block(int i, int j) const {
  for (int s = ptr_[i]; s < ptr_[i + 1]; ++s)
    if (col_[s] == j) return &pool_[blk_[s]];
  return nullptr;
}

std::vector<int> BlockCsr::row_cols(int i) const {
  return std::vector<int>(col_.begin() + ptr_[i], col_.begin() + ptr_[i + 1]);
}

void BlockCsr::matvec(const Vec& x, Vec& y) const {
  y.setZero(rows());
  matvec_add(x, y, 1.0);
}

void BlockCsr::matvec_add(const Vec& x, Vec& y, double alpha) const {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nrows_; ++i) {
    auto yi = y.segment(Eigen::Index(i) * brows_, brows_);
    for (int s = ptr_[i]; s < ptr_[i + 1]; ++s) {
      const Mat& b = pool_[blk_[s]];
      yi.noalias() +=
          alpha * b * x.segment(Eigen::Index(col_[s]) * bcols_, bcols_);
    }
  }
}

void BlockCsr::row_residual(int i, const Vec& x, const Vec& b, Vec& r) const {
  r = b.segment(Eigen::Index(i) * brows_, brows_);
  for (int s = ptr_[i]; s < ptr_[i + 1]; ++s)
    r.noalias() -=
        pool_[blk_[s]] * x.segment(Eigen::Index(col_[s]) * bcols_, bcols_);
}

BlockCsr BlockCsr::transposed() const {
  BlockCsr T(ncols_, nrows_, bcols_, brows_);
  for (int i = 0; i < nrows_; ++i)
    for (int s = ptr_[i]; s < ptr_[i + 1]; ++s)
      T.add_block(col_[s], i, pool_[blk_[s]].transpose());
  T.finalize();
  return T;
}

Mat BlockCsr::to_dense() const {
  Mat D = Mat::Zero(rows(), cols());
  for (int i = 0; i < nrows_; ++i)
    for (int s = ptr_[i]; s < ptr_[i + 1]; ++s)
      D.block(Eigen::Index(i) * brows_, Eigen::Index(col_[s]) * bcols_, brows_,
              bcols_) = pool_[blk_[s]];
  return D;
}

double BlockCsr::frobenius() const {
  double sum = 0.0;
  for (int i = 0; i < nrows_; ++i)
    for (int s = ptr_[i]; s < ptr_[i + 1]; ++s)
      sum += pool_[blk_[s]].squaredNorm();
  return std::sqrt(sum);
}

double BlockCsr::max_abs_asymmetry() const {
  double worst = 0.0;
  for (int i = 0; i < nrows_; ++i)
    for (int s = ptr_[i]; s < ptr_[i + 1]; ++s) {
      const Mat* bt = find_block(col_[s], i);
      if (!bt) {
        worst = std::max(worst, pool_[blk_[s]].cwiseAbs().maxCoeff());
        continue;
      }
      worst = std::max(worst,
                       (pool_[blk_[s]] - bt->transpose()).cwiseAbs().maxCoeff());
    }
  return worst;
}

void BlockCsr::dump_triplets(std::ostream& os) const {
  char line[128];
  for (int i = 0; i < nrows_; ++i)
    for (int s = ptr_[i]; s < ptr_[i + 1]; ++s) {
      const Mat& b = pool_[blk_[s]];
      for (int r = 0; r < brows_; ++r)
        for (int c = 0; c < bcols_; ++c) {
          std::snprintf(line, sizeof(line), "%lld %lld %.17g\n",
                        (long long)(Eigen::Index(i) * brows_ + r),
                        (long long)(Eigen::Index(col_[s]) * bcols_ + c),
                        b(r, c));
          os << line;
        }
    }
}

BlockCsr block_at_diag_b(const BlockCsr& A, const std::vector<double>& w,
                         const BlockCsr& B) {
  if (A.block_rows() != B.block_rows() || A.brows() != B.brows())
    throw std::invalid_argument("block_at_diag_b: shape mismatch");
  BlockCsr C(A.block_cols(), B.block_cols(), A.bcols(), B.bcols());
  const auto& aptr = A.row_ptr();
  const auto& bptr = B.row_ptr();
  for (int e = 0; e < A.block_rows(); ++e) {
    double we = w.empty() ? 1.0 : w[e];
    if (we == 0.0) continue;
    for (int sa = aptr[e]; sa < aptr[e + 1]; ++sa) {
      Mat at = A.block_at(sa).transpose() * we;
      int i = A.col_idx()[sa];
      for (int sb = bptr[e]; sb < bptr[e + 1]; ++sb)
        C.add_block(i, B.col_idx()[sb], at * B.block_at(sb));
    }
  }
  C.finalize();
  return C;
}

BlockCsr select_block_rows(const BlockCsr& A, const std::vector<int>& keep,
                           double scale) {
  BlockCsr C(A.block_rows(), A.block_cols(), int(keep.size()), A.bcols());
  const auto& ptr = A.row_ptr();
  for (int i = 0; i < A.block_rows(); ++i)
    for (int s = ptr[i]; s < ptr[i + 1]; ++s) {
      const Mat& b = A.block_at(s);
      Mat sel(keep.size(), A.bcols());
      for (int r = 0; r < int(keep.size()); ++r) sel.row(r) = b.row(keep[r]);
      C.add_block(i, A.col_idx()[s], sel * scale);
    }
  C.finalize();
  return C;
}

} // namespace stokesmg
