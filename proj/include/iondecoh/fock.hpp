// Truncated Fock-space algebra for the ion's motional mode.

#pragma once

#include <complex>
#include <cstddef>
#include <utility>

#include <Eigen/Dense>

namespace iondecoh {

using cplx = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

/// Motional Hilbert space truncated to |0>..|dim-1>.
class FockSpace {
 public:
  explicit FockSpace(std::size_t dim);

  std::size_t dim() const { return dim_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(dim_); }

  bool operator==(const FockSpace&) const = default;

 private:
  std::size_t dim_;
};

struct Ladder {
  Operator a;
  Operator a_dagger;
};

/// Dimensionless quadratures with [X, P] = i/2, so that P^2 + X^2 = a^dag a + 1/2.
struct Quadratures {
  Operator X;
  Operator P;
};

Ladder ladder(const FockSpace& space);
Operator number_operator(const FockSpace& space);
Quadratures quadratures(const FockSpace& space);

/// Coherent state amplitudes e^{-|alpha|^2/2} alpha^n / sqrt(n!) for n < dim.
/// Amplitudes beyond the cutoff are dropped, never renormalized.
StateVector coherent_state(cplx alpha, const FockSpace& space);

StateVector fock_state(std::size_t n, const FockSpace& space);

/// <psi|phi>. Throws std::invalid_argument on dimension mismatch.
cplx overlap(const StateVector& psi, const StateVector& phi);

/// Closed-form <alpha|beta> for untruncated coherent states.
cplx coherent_overlap(cplx alpha, cplx beta);

/// Probability held in the top `tail` levels of psi.
double truncation_leakage(const StateVector& psi, std::size_t tail);

/// Tail size used for leakage diagnostics when none is configured.
std::size_t default_leakage_tail(const FockSpace& space);

/// Leakage of the coherent state |alpha> in `space`, using the default tail.
double coherent_leakage(cplx alpha, const FockSpace& space);

}  // namespace iondecoh
