#include "iondecoh/trajectories.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "iondecoh/errors.hpp"

namespace iondecoh::trajectories {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr double kNormStepTol = 1e-8;
// Trajectory i goes to lane i % kLanes; lanes are summed in a fixed order, so
// results do not depend on the number of threads.
constexpr std::size_t kLanes = 16;

Eigen::MatrixXcd exp_hermitian(const Operator& H, double t) {
  const Eigen::SelfAdjointEigenSolver<Operator> eig(H);
  const Eigen::VectorXcd phases = (-I * t * eig.eigenvalues().cast<cplx>()).array().exp().matrix();
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

std::vector<std::size_t> steps_per_interval(std::span<const double> t_grid, double dt) {
  std::vector<std::size_t> steps;
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    const double interval = t_grid[k] - t_grid[k - 1];
    const double ratio = interval / dt;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * std::max(1.0, ratio)) {
      throw std::invalid_argument("run_ensemble: grid spacing " + std::to_string(interval) +
                                  " is not a positive multiple of dt " + std::to_string(dt));
    }
    steps.push_back(static_cast<std::size_t>(rounded));
  }
  return steps;
}

struct LaneAccumulator {
  std::vector<master::InternalBlocks> blocks;  // only with keep_blocks
  std::vector<double> tail;                    // summed tail weight per grid time
};

struct EnsembleSetup {
  TrajectoryStepper stepper;
  TwoLevelState psi0;
  std::vector<std::size_t> steps;
  std::size_t total_steps = 0;
  std::vector<analytic::RabiAmplitudes> rabi;
  std::vector<cplx> lab_phase;
  std::size_t tail = 2;
};

EnsembleSetup make_setup(const SystemParams& params, double kappa, std::span<const double> t_grid,
                         const EnsembleOptions& opts) {
  params.validate();
  if (t_grid.size() < 2) throw std::invalid_argument("run_ensemble: need at least two grid times");
  if (t_grid.front() != 0.0) throw std::invalid_argument("run_ensemble: grid must start at t = 0");
  if (opts.noise_substeps == 0) throw std::invalid_argument("run_ensemble: noise_substeps must be >= 1");
  const FockSpace space(params.dim);
  for (const cplx a : {params.alpha_g, params.alpha_e}) {
    const double leak = coherent_leakage(a, space);
    if (leak > opts.leakage_tol) {
      throw LeakageError("run_ensemble: initial coherent state leaks " + std::to_string(leak));
    }
  }
  EnsembleSetup s{TrajectoryStepper(params, kappa, opts.dt),
                  {params.c_g * coherent_state(params.alpha_g, space),
                   params.c_e * coherent_state(params.alpha_e, space)},
                  steps_per_interval(t_grid, opts.dt),
                  0,
                  {},
                  {}};
  for (const auto n : s.steps) s.total_steps += n;
  s.tail = default_leakage_tail(space);
  for (const double t : t_grid) {
    s.rabi.push_back(analytic::rabi_amplitudes(params, t));
    s.lab_phase.push_back(std::exp(I * (params.omega_laser * t)));
  }
  return s;
}

// Runs trajectory `index`, writing lab-frame coherences to `coherence_out`
// (one per grid time) and adding rotating-frame outer products to `lane`.
double run_one(const EnsembleSetup& s, std::size_t index, std::uint64_t base_seed,
               const EnsembleOptions& opts, std::span<cplx> coherence_out, LaneAccumulator& lane) {
  const double fine_dt = opts.dt / static_cast<double>(opts.noise_substeps);
  NoiseRealization noise = wiener(base_seed + index, fine_dt, s.total_steps * opts.noise_substeps);
  if (opts.noise_substeps > 1) noise = noise.coarsen(opts.noise_substeps);

  return s.stepper.evolve(s.psi0, noise.increments, s.steps, [&](std::size_t k, const TwoLevelState& psi) {
    const auto& r = s.rabi[k];
    const cplx a1c = std::conj(r.alpha1);
    const cplx gg = psi.g.squaredNorm();
    const cplx ee = psi.e.squaredNorm();
    const cplx ge = psi.e.dot(psi.g);  // tr |g><e| = <e|g>
    const cplx eg = std::conj(ge);
    coherence_out[k] = s.lab_phase[k] * (a1c * std::conj(r.alpha2) * gg + a1c * a1c * ge +
                                         std::norm(r.alpha2) * eg + a1c * r.alpha2 * ee);
    const StateVector g = s.stepper.to_fock(psi.g);
    const StateVector e = s.stepper.to_fock(psi.e);
    lane.tail[k] += truncation_leakage(g, s.tail) + truncation_leakage(e, s.tail);
    if (opts.keep_blocks) {
      auto& b = lane.blocks[k];
      b.gg.noalias() += g * g.adjoint();
      b.ge.noalias() += g * e.adjoint();
      b.eg.noalias() += e * g.adjoint();
      b.ee.noalias() += e * e.adjoint();
    }
  });
}

LaneAccumulator empty_lane(std::span<const double> t_grid, std::size_t dim, bool keep_blocks) {
  const auto n = static_cast<Eigen::Index>(dim);
  LaneAccumulator lane;
  lane.tail.assign(t_grid.size(), 0.0);
  if (!keep_blocks) return lane;
  for (const double t : t_grid) {
    lane.blocks.push_back({Operator::Zero(n, n), Operator::Zero(n, n), Operator::Zero(n, n),
                           Operator::Zero(n, n), t});
  }
  return lane;
}

EnsembleResult reduce(std::span<const double> t_grid, std::size_t n_traj, std::uint64_t base_seed,
                      double kappa, const EnsembleOptions& opts, const std::vector<cplx>& coherence,
                      std::vector<LaneAccumulator>& lanes, double max_drift) {
  EnsembleResult out;
  out.times.assign(t_grid.begin(), t_grid.end());
  out.n_traj = n_traj;
  out.base_seed = base_seed;
  out.kappa = kappa;
  out.dt = opts.dt;
  out.max_norm_drift = max_drift;
  const std::size_t n_t = t_grid.size();
  const double n = static_cast<double>(n_traj);
  std::vector<cplx> column(n_traj);
  std::vector<cplx> dev(n_traj);
  for (std::size_t k = 0; k < n_t; ++k) {
    for (std::size_t i = 0; i < n_traj; ++i) column[i] = coherence[i * n_t + k];
    const cplx mean = pairwise_sum(column) / n;
    out.mean_coherence.push_back(mean);
    out.R.push_back(std::abs(mean));
    // Delta method: spread of the per-trajectory values along the mean's direction.
    double stderr_k = 0.0;
    if (n_traj > 1) {
      const cplx dir = std::abs(mean) > 0.0 ? std::conj(mean) / std::abs(mean) : cplx(1.0);
      for (std::size_t i = 0; i < n_traj; ++i) {
        const double x = ((column[i] - mean) * dir).real();
        dev[i] = x * x;
      }
      stderr_k = std::sqrt(pairwise_sum(dev).real() / (n - 1.0) / n);
    }
    out.R_stderr.push_back(stderr_k);
    double tail = 0.0;
    for (const auto& lane : lanes) tail += lane.tail[k];
    out.max_leakage = std::max(out.max_leakage, tail / n);
  }
  if (opts.keep_blocks) {
    // Pairwise over lanes.
    for (std::size_t width = 1; width < lanes.size(); width *= 2) {
      for (std::size_t l = 0; l + width < lanes.size(); l += 2 * width) {
        for (std::size_t k = 0; k < n_t; ++k) {
          lanes[l].blocks[k].gg += lanes[l + width].blocks[k].gg;
          lanes[l].blocks[k].ge += lanes[l + width].blocks[k].ge;
          lanes[l].blocks[k].eg += lanes[l + width].blocks[k].eg;
          lanes[l].blocks[k].ee += lanes[l + width].blocks[k].ee;
        }
      }
    }
    out.mean_blocks = std::move(lanes.front().blocks);
    for (auto& b : out.mean_blocks) {
      b.gg /= n;
      b.ge /= n;
      b.eg /= n;
      b.ee /= n;
    }
  }
  return out;
}

template <bool Parallel>
EnsembleResult run_ensemble_impl(const SystemParams& params, double kappa, std::size_t n_traj,
                                 std::span<const double> t_grid, std::uint64_t base_seed,
                                 const EnsembleOptions& opts) {
  if (n_traj == 0) throw std::invalid_argument("run_ensemble: n_traj must be >= 1");
  const EnsembleSetup setup = make_setup(params, kappa, t_grid, opts);
  const std::size_t n_t = t_grid.size();
  std::vector<cplx> coherence(n_traj * n_t);
  const std::size_t n_lanes = std::min(kLanes, n_traj);
  std::vector<LaneAccumulator> lanes;
  for (std::size_t l = 0; l < n_lanes; ++l) lanes.push_back(empty_lane(t_grid, params.dim, opts.keep_blocks));
  std::vector<double> lane_drift(n_lanes, 0.0);
  std::vector<std::string> lane_error(n_lanes);

  const auto run_lane = [&](std::size_t l) {
    try {
      for (std::size_t i = l; i < n_traj; i += n_lanes) {
        const double drift =
            run_one(setup, i, base_seed, opts, std::span<cplx>(coherence).subspan(i * n_t, n_t),
                    lanes[l]);
        lane_drift[l] = std::max(lane_drift[l], drift);
      }
    } catch (const std::exception& e) {
      lane_error[l] = e.what();
    }
  };

  if constexpr (Parallel) {
    const auto lanes_signed = static_cast<long>(n_lanes);
#pragma omp parallel for schedule(dynamic, 1)
    for (long l = 0; l < lanes_signed; ++l) run_lane(static_cast<std::size_t>(l));
  } else {
    for (std::size_t l = 0; l < n_lanes; ++l) run_lane(l);
  }
  for (const auto& e : lane_error) {
    if (!e.empty()) throw NumericalError(e);
  }
  double max_drift = 0.0;
  for (const double d : lane_drift) max_drift = std::max(max_drift, d);
  return reduce(t_grid, n_traj, base_seed, kappa, opts, coherence, lanes, max_drift);
}

}  // namespace

NoiseRealization NoiseRealization::coarsen(std::size_t factor) const {
  if (factor == 0) throw std::invalid_argument("coarsen: factor must be >= 1");
  NoiseRealization out{seed, dt * static_cast<double>(factor), {}};
  out.increments.reserve(increments.size() / factor);
  for (std::size_t i = 0; i + factor <= increments.size(); i += factor) {
    double sum = 0.0;
    for (std::size_t j = 0; j < factor; ++j) sum += increments[i + j];
    out.increments.push_back(sum);
  }
  return out;
}

NoiseRealization wiener(std::uint64_t seed, double dt, std::size_t steps) {
  if (!(dt > 0.0)) throw std::invalid_argument("wiener: dt must be > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(dt));
  NoiseRealization out{seed, dt, std::vector<double>(steps)};
  for (auto& x : out.increments) x = normal(rng);
  return out;
}

double noise_amplitude(double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("noise_amplitude: kappa must be >= 0");
  return std::sqrt(2.0 * kappa);
}

TrajectoryStepper::TrajectoryStepper(const SystemParams& params, double kappa, double dt)
    : dt_(dt), sigma_(noise_amplitude(kappa)) {
  if (!(dt > 0.0)) throw std::invalid_argument("TrajectoryStepper: dt must be > 0");
  const FockSpace space(params.dim);
  const auto q = quadratures(space);
  const Eigen::MatrixXd x2 = (q.X * q.X).real();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x2);
  basis_ = eig.eigenvectors().cast<cplx>();
  x2_eigen_ = eig.eigenvalues();
  const auto H = effective_hamiltonian(params, space);
  const auto to_eigen_basis = [&](const Operator& U) -> Eigen::MatrixXcd {
    return basis_.adjoint() * U * basis_;
  };
  half_g_ = to_eigen_basis(exp_hermitian(H.H_g, 0.5 * dt));
  half_e_ = to_eigen_basis(exp_hermitian(H.H_e, 0.5 * dt));
  full_g_ = to_eigen_basis(exp_hermitian(H.H_g, dt));
  full_e_ = to_eigen_basis(exp_hermitian(H.H_e, dt));
}

void TrajectoryStepper::apply_noise(TwoLevelState& psi, double dW) const {
  const double theta = sigma_ * dW;
  for (Eigen::Index j = 0; j < x2_eigen_.size(); ++j) {
    const cplx phase = std::polar(1.0, -theta * x2_eigen_(j));
    psi.g(j) *= phase;
    psi.e(j) *= phase;
  }
}

double TrajectoryStepper::checked_norm(const TwoLevelState& psi, double previous) const {
  const double norm = psi.norm_squared();
  if (!(std::abs(norm - previous) <= kNormStepTol)) {
    throw NumericalError("trajectory: norm changed by " + std::to_string(norm - previous) +
                         " in one step");
  }
  return norm;
}

Operator TrajectoryStepper::noise_factor(double dW) const {
  const Eigen::VectorXcd phases =
      (-I * (sigma_ * dW) * x2_eigen_.cast<cplx>()).array().exp().matrix();
  return basis_ * phases.asDiagonal() * basis_.adjoint();
}

TwoLevelState TrajectoryStepper::step(const TwoLevelState& psi, double dW) const {
  TwoLevelState out{basis_.adjoint() * psi.g, basis_.adjoint() * psi.e};
  const double before = out.norm_squared();
  out.g = half_g_ * out.g;
  out.e = half_e_ * out.e;
  apply_noise(out, dW);
  out.g = half_g_ * out.g;
  out.e = half_e_ * out.e;
  checked_norm(out, before);
  return {basis_ * out.g, basis_ * out.e};
}

TwoLevelState step_trajectory(const TwoLevelState& psi, double dW, double dt,
                              const SystemParams& params, double kappa) {
  return TrajectoryStepper(params, kappa, dt).step(psi, dW);
}

cplx pairwise_sum(std::span<const cplx> values) {
  if (values.size() <= 8) {
    cplx s = 0.0;
    for (const cplx v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

EnsembleResult run_ensemble(const SystemParams& params, double kappa, std::size_t n_traj,
                            std::span<const double> t_grid, std::uint64_t base_seed,
                            const EnsembleOptions& opts) {
  return run_ensemble_impl<true>(params, kappa, n_traj, t_grid, base_seed, opts);
}

EnsembleResult run_ensemble_serial(const SystemParams& params, double kappa, std::size_t n_traj,
                                   std::span<const double> t_grid, std::uint64_t base_seed,
                                   const EnsembleOptions& opts) {
  return run_ensemble_impl<false>(params, kappa, n_traj, t_grid, base_seed, opts);
}

}  // namespace iondecoh::trajectories
