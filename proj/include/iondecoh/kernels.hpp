// Banded operator products used on the master-equation hot path.
//
// Every motional operator the model needs (a^dag a, a, a^dag, X^2) is banded
// in the Fock basis, so left/right products with a dense block cost
// O(dim^2 * bands) instead of O(dim^3). The OpenMP kernels parallelize over
// columns of the dense operand; the serial versions are the reference the
// tests and the benchmark compare against.

#pragma once

#include <vector>

#include "iondecoh/fock.hpp"

namespace iondecoh::kernels {

/// Sparse-by-diagonal square matrix. band.values[i] = B(i, i + offset).
class BandedOperator {
 public:
  struct Band {
    int offset;
    std::vector<cplx> values;
  };

  explicit BandedOperator(Eigen::Index dim) : dim_(dim) {}

  /// Extracts all non-zero diagonals of `dense` (|entry| > drop_tol).
  static BandedOperator from_dense(const Operator& dense, double drop_tol = 0.0);

  Eigen::Index dim() const { return dim_; }
  const std::vector<Band>& bands() const { return bands_; }

  /// Adds `scale * other` band-wise.
  BandedOperator& add(const BandedOperator& other, cplx scale = 1.0);

  Operator to_dense() const;

 private:
  Eigen::Index dim_;
  std::vector<Band> bands_;
};

namespace serial {
/// out = B * M
void left_multiply(const BandedOperator& B, const Operator& M, Operator& out);
/// out = M * B
void right_multiply(const Operator& M, const BandedOperator& B, Operator& out);
/// out = L * M - M * R
void sandwich_commutator(const BandedOperator& L, const Operator& M, const BandedOperator& R,
                         Operator& out);
}  // namespace serial

void left_multiply(const BandedOperator& B, const Operator& M, Operator& out);
void right_multiply(const Operator& M, const BandedOperator& B, Operator& out);
void sandwich_commutator(const BandedOperator& L, const Operator& M, const BandedOperator& R,
                         Operator& out);

}  // namespace iondecoh::kernels
