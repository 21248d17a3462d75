#include "iondecoh/fock.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace iondecoh {

FockSpace::FockSpace(std::size_t dim) : dim_(dim) {
  if (dim < 2) {
    throw std::invalid_argument("FockSpace: dim must be >= 2, got " + std::to_string(dim));
  }
}

Ladder ladder(const FockSpace& space) {
  const Eigen::Index n = space.size();
  Operator a = Operator::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) {
    a(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Operator ad = a.adjoint();
  return {std::move(a), std::move(ad)};
}

Operator number_operator(const FockSpace& space) {
  const Eigen::Index n = space.size();
  Operator num = Operator::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) num(k, k) = static_cast<double>(k);
  return num;
}

Quadratures quadratures(const FockSpace& space) {
  const auto [a, ad] = ladder(space);
  const cplx i(0.0, 1.0);
  return {0.5 * (a + ad), 0.5 * i * (ad - a)};
}

StateVector coherent_state(cplx alpha, const FockSpace& space) {
  const Eigen::Index n = space.size();
  StateVector psi = StateVector::Zero(n);
  const double mod = std::abs(alpha);
  if (mod == 0.0) {
    psi(0) = 1.0;
    return psi;
  }
  const double log_mod = std::log(mod);
  const double phase = std::arg(alpha);
  // log(n!) accumulated term by term; stays finite for any dim.
  double log_fact = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k > 0) log_fact += std::log(static_cast<double>(k));
    const double log_amp = -0.5 * mod * mod + static_cast<double>(k) * log_mod - 0.5 * log_fact;
    psi(k) = std::polar(std::exp(log_amp), static_cast<double>(k) * phase);
  }
  return psi;
}

StateVector fock_state(std::size_t n, const FockSpace& space) {
  if (n >= space.dim()) throw std::out_of_range("fock_state: level outside truncated space");
  StateVector psi = StateVector::Zero(space.size());
  psi(static_cast<Eigen::Index>(n)) = 1.0;
  return psi;
}

cplx overlap(const StateVector& psi, const StateVector& phi) {
  if (psi.size() != phi.size()) {
    throw std::invalid_argument("overlap: states live in different Fock spaces");
  }
  return psi.dot(phi);  // Eigen's dot conjugates the left operand
}

cplx coherent_overlap(cplx alpha, cplx beta) {
  return std::exp(-0.5 * std::norm(alpha) - 0.5 * std::norm(beta) + std::conj(alpha) * beta);
}

double truncation_leakage(const StateVector& psi, std::size_t tail) {
  const auto dim = static_cast<std::size_t>(psi.size());
  if (tail >= dim) throw std::invalid_argument("truncation_leakage: tail must be < dim");
  return psi.tail(static_cast<Eigen::Index>(tail)).squaredNorm();
}

std::size_t default_leakage_tail(const FockSpace& space) {
  return std::max<std::size_t>(2, space.dim() / 8);
}

double coherent_leakage(cplx alpha, const FockSpace& space) {
  const StateVector psi = coherent_state(alpha, space);
  // Top-level weight plus whatever fell off the cutoff entirely.
  const double lost = std::max(0.0, 1.0 - psi.squaredNorm());
  return truncation_leakage(psi, default_leakage_tail(space)) + lost;
}

}  // namespace iondecoh
