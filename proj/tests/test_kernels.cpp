#include <random>

#include "doctest.h"

#include "iondecoh/fock.hpp"
#include "iondecoh/kernels.hpp"

using namespace iondecoh;
using namespace iondecoh::kernels;

namespace {

Operator random_matrix(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> d;
  Operator m(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = {d(rng), d(rng)};
  return m;
}

BandedOperator banded_hamiltonian(std::size_t dim) {
  const FockSpace space(dim);
  const auto q = quadratures(space);
  const Operator H = number_operator(space) + 0.3 * q.P + 0.7 * q.X * q.X;
  return BandedOperator::from_dense(H);
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("dense round trip keeps only the populated bands") {
    const auto B = banded_hamiltonian(10);
    CHECK(B.bands().size() == 5);  // offsets -2..2
    const FockSpace space(10);
    const auto q = quadratures(space);
    const Operator H = number_operator(space) + 0.3 * q.P + 0.7 * q.X * q.X;
    CHECK((B.to_dense() - H).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("add merges bands") {
    const FockSpace space(6);
    auto N = BandedOperator::from_dense(number_operator(space));
    const auto X = BandedOperator::from_dense(quadratures(space).X);
    N.add(X, cplx(0.0, 2.0));
    const Operator expected = number_operator(space) + cplx(0.0, 2.0) * quadratures(space).X;
    CHECK((N.to_dense() - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(N.add(BandedOperator::from_dense(number_operator(FockSpace(5)))), std::invalid_argument);
  }

  TEST_CASE("serial products match dense algebra") {
    std::mt19937_64 rng(3);
    for (const std::size_t dim : {2, 7, 33}) {
      const auto B = banded_hamiltonian(dim);
      const Operator D = B.to_dense();
      const Operator M = random_matrix(rng, static_cast<Eigen::Index>(dim));
      Operator out;
      serial::left_multiply(B, M, out);
      CHECK((out - D * M).cwiseAbs().maxCoeff() < 1e-12);
      serial::right_multiply(M, B, out);
      CHECK((out - M * D).cwiseAbs().maxCoeff() < 1e-12);
      const auto R = BandedOperator::from_dense(D.adjoint() + Operator::Identity(D.rows(), D.cols()));
      serial::sandwich_commutator(B, M, R, out);
      CHECK((out - (D * M - M * R.to_dense())).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("parallel kernels are bit-identical to the serial reference") {
    std::mt19937_64 rng(11);
    // 128 exceeds the parallel threshold, 40 stays below it.
    for (const std::size_t dim : {40, 128}) {
      const auto B = banded_hamiltonian(dim);
      const auto R = BandedOperator::from_dense(B.to_dense().adjoint());
      const Operator M = random_matrix(rng, static_cast<Eigen::Index>(dim));
      Operator s, p;
      serial::left_multiply(B, M, s);
      left_multiply(B, M, p);
      CHECK(s == p);
      serial::right_multiply(M, B, s);
      right_multiply(M, B, p);
      CHECK(s == p);
      serial::sandwich_commutator(B, M, R, s);
      sandwich_commutator(B, M, R, p);
      CHECK(s == p);
    }
  }

  TEST_CASE("shape mismatch is rejected") {
    const auto B = banded_hamiltonian(5);
    Operator out;
    CHECK_THROWS_AS(serial::left_multiply(B, Operator::Zero(4, 4), out), std::invalid_argument);
    CHECK_THROWS_AS(right_multiply(Operator::Zero(6, 6), B, out), std::invalid_argument);
  }
}
