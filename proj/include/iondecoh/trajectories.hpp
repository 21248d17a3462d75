// Stochastic unraveling of the engineered reservoir.
//
// Each realization evolves a pure 2 x dim state under
//
//   H(t) dt = H_0 dt + sigma X^2 dW(t),   sigma = sqrt(2 kappa),
//
// with dW a real Wiener increment. Because the noise is Hamiltonian, every
// realization is exactly unitary and the ensemble average of |psi><psi|
// obeys the master equation with dissipator -kappa [X^2, [X^2, rho]].
//
// Steps use Strang splitting e^{-i H_0 dt/2} e^{-i sigma X^2 dW} e^{-i H_0 dt/2}
// with both factors exact: X^2 is diagonalized once and e^{-i H_0 dt} is
// precomputed in the X^2 eigenbasis, so one step is a diagonal phase and one
// dense matvec per internal level.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "iondecoh/analytic.hpp"
#include "iondecoh/master.hpp"
#include "iondecoh/model.hpp"

namespace iondecoh::trajectories {

using analytic::TwoLevelState;

struct NoiseRealization {
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::vector<double> increments;

  /// Sums consecutive groups of `factor` increments: the same Brownian path
  /// sampled at factor * dt.
  NoiseRealization coarsen(std::size_t factor) const;
};

/// Independent Normal(0, dt) increments; identical for identical (seed, dt, steps).
NoiseRealization wiener(std::uint64_t seed, double dt, std::size_t steps);

/// Noise amplitude sigma whose Ito average reproduces dissipator strength kappa.
double noise_amplitude(double kappa);

class TrajectoryStepper {
 public:
  TrajectoryStepper(const SystemParams& params, double kappa, double dt);

  double dt() const { return dt_; }
  double sigma() const { return sigma_; }

  /// One Strang step in the Fock basis. Throws NumericalError if the norm
  /// moves by more than 1e-8.
  TwoLevelState step(const TwoLevelState& psi, double dW) const;

  /// e^{-i sigma X^2 dW} in the Fock basis.
  Operator noise_factor(double dW) const;

  /// Runs one realization from `psi0` (Fock basis). Interval k of the output
  /// grid spans steps_per_interval[k] increments of `noise`. `record(k, psi)`
  /// is called for k = 0..steps_per_interval.size() with psi expressed in the
  /// X^2 eigenbasis (inner products are basis independent; use to_fock for
  /// anything else). Returns the largest single-step norm change.
  template <typename Record>
  double evolve(const TwoLevelState& psi0, std::span<const double> noise,
                std::span<const std::size_t> steps_per_interval, Record&& record) const;

  StateVector to_fock(const StateVector& eigen_basis_state) const { return basis_ * eigen_basis_state; }

 private:
  void apply_noise(TwoLevelState& psi, double dW) const;
  double checked_norm(const TwoLevelState& psi, double previous) const;

  double dt_;
  double sigma_;
  Eigen::MatrixXcd basis_;       // columns: X^2 eigenvectors
  Eigen::VectorXd x2_eigen_;
  Eigen::MatrixXcd half_g_, half_e_, full_g_, full_e_;  // in the X^2 eigenbasis
};

template <typename Record>
double TrajectoryStepper::evolve(const TwoLevelState& psi0, std::span<const double> noise,
                                 std::span<const std::size_t> steps_per_interval,
                                 Record&& record) const {
  TwoLevelState psi{basis_.adjoint() * psi0.g, basis_.adjoint() * psi0.e};
  record(std::size_t{0}, psi);
  double norm = psi.norm_squared();
  double max_drift = 0.0;
  StateVector tmp;
  std::size_t cursor = 0;
  const auto apply = [&tmp](const Eigen::MatrixXcd& U, StateVector& v) {
    tmp.noalias() = U * v;
    v.swap(tmp);
  };
  if (!steps_per_interval.empty()) {
    apply(half_g_, psi.g);
    apply(half_e_, psi.e);
  }
  for (std::size_t k = 0; k < steps_per_interval.size(); ++k) {
    const std::size_t steps = steps_per_interval[k];
    for (std::size_t s = 0; s < steps; ++s) {
      apply_noise(psi, noise[cursor++]);
      const bool closes_interval = s + 1 == steps;
      apply(closes_interval ? half_g_ : full_g_, psi.g);
      apply(closes_interval ? half_e_ : full_e_, psi.e);
      const double next = checked_norm(psi, norm);
      max_drift = std::max(max_drift, std::abs(next - norm));
      norm = next;
    }
    record(k + 1, psi);
    if (k + 1 < steps_per_interval.size()) {
      apply(half_g_, psi.g);
      apply(half_e_, psi.e);
    }
  }
  return max_drift;
}

/// Convenience wrapper: builds a stepper for a single step.
TwoLevelState step_trajectory(const TwoLevelState& psi, double dW, double dt,
                              const SystemParams& params, double kappa);

struct EnsembleOptions {
  double dt = 0.02;
  /// Noise is drawn at dt / noise_substeps and summed, so runs that differ
  /// only in dt can share one Brownian path.
  std::size_t noise_substeps = 1;
  bool keep_blocks = false;
  double leakage_tol = 1e-6;
};

struct EnsembleResult {
  std::vector<double> times;
  std::vector<cplx> mean_coherence;  ///< ensemble mean of Tr_motion <g|rho|e> (lab frame)
  std::vector<double> R;             ///< |mean_coherence|
  std::vector<double> R_stderr;
  std::vector<master::InternalBlocks> mean_blocks;  ///< rotating frame, if keep_blocks
  std::size_t n_traj = 0;
  std::uint64_t base_seed = 0;
  double kappa = 0.0;
  double dt = 0.0;
  double max_norm_drift = 0.0;
  double max_leakage = 0.0;  ///< largest tail weight of the ensemble-mean state on the grid
};

/// Trajectory i uses seed base_seed + i. Output is bit-identical for any
/// thread count.
EnsembleResult run_ensemble(const SystemParams& params, double kappa, std::size_t n_traj,
                            std::span<const double> t_grid, std::uint64_t base_seed,
                            const EnsembleOptions& opts = {});

/// Single-threaded reference for run_ensemble; same arithmetic, same result.
EnsembleResult run_ensemble_serial(const SystemParams& params, double kappa, std::size_t n_traj,
                                   std::span<const double> t_grid, std::uint64_t base_seed,
                                   const EnsembleOptions& opts = {});

/// Recursive pairwise sum; result depends only on the order of `values`.
cplx pairwise_sum(std::span<const cplx> values);

}  // namespace iondecoh::trajectories
