#include "iondecoh/kernels.hpp"

#include <algorithm>
#include <stdexcept>

namespace iondecoh::kernels {

namespace {

void check_shapes(const BandedOperator& B, const Operator& M) {
  if (M.rows() != B.dim() || M.cols() != B.dim()) {
    throw std::invalid_argument("banded kernel: operand dimension mismatch");
  }
}

// out[:, j0:j1] += sign * (B * M)[:, j0:j1]
void left_range(const BandedOperator& B, const Operator& M, Eigen::Index j0, Eigen::Index j1,
                Operator& out, double sign) {
  const Eigen::Index n = B.dim();
  for (Eigen::Index j = j0; j < j1; ++j) {
    cplx* col = out.col(j).data();
    const cplx* src = M.col(j).data();
    for (const auto& band : B.bands()) {
      const Eigen::Index off = band.offset;
      const Eigen::Index lo = std::max<Eigen::Index>(0, -off);
      const Eigen::Index hi = std::min<Eigen::Index>(n, n - off);
      const cplx* v = band.values.data();
      if (sign > 0) {
        for (Eigen::Index i = lo; i < hi; ++i) col[i] += v[i] * src[i + off];
      } else {
        for (Eigen::Index i = lo; i < hi; ++i) col[i] -= v[i] * src[i + off];
      }
    }
  }
}

// out[:, j0:j1] += sign * (M * B)[:, j0:j1]
void right_range(const Operator& M, const BandedOperator& B, Eigen::Index j0, Eigen::Index j1,
                 Operator& out, double sign) {
  const Eigen::Index n = B.dim();
  for (Eigen::Index j = j0; j < j1; ++j) {
    cplx* col = out.col(j).data();
    for (const auto& band : B.bands()) {
      // out(:, j) gets B(j - off, j) * M(:, j - off).
      const Eigen::Index k = j - band.offset;
      if (k < 0 || k >= n) continue;
      const cplx w = sign * band.values[static_cast<std::size_t>(k)];
      const cplx* src = M.col(k).data();
      for (Eigen::Index i = 0; i < n; ++i) col[i] += w * src[i];
    }
  }
}

// Column chunks for the OpenMP kernels.
constexpr Eigen::Index kChunk = 16;

template <typename Body>
void for_column_chunks(Eigen::Index n, Body&& body) {
  const Eigen::Index chunks = (n + kChunk - 1) / kChunk;
#pragma omp parallel for schedule(static) if (n >= 96)
  for (Eigen::Index c = 0; c < chunks; ++c) body(c * kChunk, std::min(n, (c + 1) * kChunk));
}

}  // namespace

BandedOperator BandedOperator::from_dense(const Operator& dense, double drop_tol) {
  if (dense.rows() != dense.cols()) throw std::invalid_argument("from_dense: matrix not square");
  const Eigen::Index n = dense.rows();
  BandedOperator out(n);
  for (Eigen::Index off = -(n - 1); off <= n - 1; ++off) {
    Band band{static_cast<int>(off), std::vector<cplx>(static_cast<std::size_t>(n), 0.0)};
    bool nonzero = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index c = i + off;
      if (c < 0 || c >= n) continue;
      band.values[static_cast<std::size_t>(i)] = dense(i, c);
      if (std::abs(dense(i, c)) > drop_tol) nonzero = true;
    }
    if (nonzero) out.bands_.push_back(std::move(band));
  }
  return out;
}

BandedOperator& BandedOperator::add(const BandedOperator& other, cplx scale) {
  if (other.dim_ != dim_) throw std::invalid_argument("BandedOperator::add: dimension mismatch");
  for (const auto& b : other.bands_) {
    auto it = std::find_if(bands_.begin(), bands_.end(),
                           [&](const Band& mine) { return mine.offset == b.offset; });
    if (it == bands_.end()) {
      bands_.push_back({b.offset, std::vector<cplx>(b.values.size(), 0.0)});
      it = std::prev(bands_.end());
    }
    for (std::size_t i = 0; i < b.values.size(); ++i) it->values[i] += scale * b.values[i];
  }
  std::sort(bands_.begin(), bands_.end(),
            [](const Band& l, const Band& r) { return l.offset < r.offset; });
  return *this;
}

Operator BandedOperator::to_dense() const {
  Operator dense = Operator::Zero(dim_, dim_);
  for (const auto& band : bands_) {
    for (Eigen::Index i = 0; i < dim_; ++i) {
      const Eigen::Index c = i + band.offset;
      if (c >= 0 && c < dim_) dense(i, c) = band.values[static_cast<std::size_t>(i)];
    }
  }
  return dense;
}

namespace serial {

void left_multiply(const BandedOperator& B, const Operator& M, Operator& out) {
  check_shapes(B, M);
  out.setZero(B.dim(), B.dim());
  left_range(B, M, 0, B.dim(), out, 1.0);
}

void right_multiply(const Operator& M, const BandedOperator& B, Operator& out) {
  check_shapes(B, M);
  out.setZero(B.dim(), B.dim());
  right_range(M, B, 0, B.dim(), out, 1.0);
}

void sandwich_commutator(const BandedOperator& L, const Operator& M, const BandedOperator& R,
                         Operator& out) {
  check_shapes(L, M);
  check_shapes(R, M);
  out.setZero(L.dim(), L.dim());
  left_range(L, M, 0, L.dim(), out, 1.0);
  right_range(M, R, 0, L.dim(), out, -1.0);
}

}  // namespace serial

void left_multiply(const BandedOperator& B, const Operator& M, Operator& out) {
  check_shapes(B, M);
  out.setZero(B.dim(), B.dim());
  for_column_chunks(B.dim(), [&](Eigen::Index j0, Eigen::Index j1) { left_range(B, M, j0, j1, out, 1.0); });
}

void right_multiply(const Operator& M, const BandedOperator& B, Operator& out) {
  check_shapes(B, M);
  out.setZero(B.dim(), B.dim());
  for_column_chunks(B.dim(), [&](Eigen::Index j0, Eigen::Index j1) { right_range(M, B, j0, j1, out, 1.0); });
}

void sandwich_commutator(const BandedOperator& L, const Operator& M, const BandedOperator& R,
                         Operator& out) {
  check_shapes(L, M);
  check_shapes(R, M);
  out.setZero(L.dim(), L.dim());
  for_column_chunks(L.dim(), [&](Eigen::Index j0, Eigen::Index j1) {
    left_range(L, M, j0, j1, out, 1.0);
    right_range(M, R, j0, j1, out, -1.0);
  });
}

}  // namespace iondecoh::kernels
