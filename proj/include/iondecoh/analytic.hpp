// Closed-form noise-free evolution of the driven ion.
//
// In the rotating frame the sigma_z-conditional Hamiltonians
// omega a^dag a -+ i g (a^dag - a) are driven oscillators, so each internal
// branch of the initial superposition c_g|g,alpha_g> + c_e|e,alpha_e> stays a
// coherent state. The evolution operator is written in disentangled form
//
//   U(t) = e^{-i omega a^dag a t} e^{f} e^{+-A a^dag} e^{+-B a},   B = -conj(A),
//
// and the lab-frame state is recovered by undoing the Rabi rotation.

#pragma once

#include <array>
#include <span>
#include <vector>

#include "iondecoh/fock.hpp"
#include "iondecoh/model.hpp"

namespace iondecoh::analytic {

/// Choice of the scalar f(t) in the disentangled evolution operator.
enum class PhaseConvention {
  Unitary,      ///< f = i g^2 t / omega - (g^2/omega^2)(1 - e^{-i omega t}); Re f = -|A|^2/2
  Printed,      ///< f exactly as published, with c_i(t) = c_i e^{f - |A|^2/2}
  FlippedReal,  ///< Unitary with Re f negated; negative control for verify_unitarity
};

const char* to_string(PhaseConvention c);

struct DisplacementFunctions {
  cplx A;
  cplx B;
  cplx f;
  double t = 0.0;
};

struct RabiAmplitudes {
  cplx alpha1;
  cplx alpha2;
};

struct DisplacedCoherentParams {
  cplx ag_plus;
  cplx ag_minus;
  cplx ae_plus;
  cplx ae_minus;
};

enum class Level { G, E };

/// One term of the lab-frame state: coefficient * |level> (x) e^{-i omega a^dag a t}|amplitude>.
struct Branch {
  Level level;
  cplx coefficient;
  cplx amplitude;
};

struct LabFrameState {
  double t = 0.0;
  double omega = 0.0;
  std::array<Branch, 4> branches;
};

/// Internal components of a (2 x dim) state vector.
struct TwoLevelState {
  StateVector g;
  StateVector e;

  double norm_squared() const { return g.squaredNorm() + e.squaredNorm(); }
};

DisplacementFunctions displacement(const SystemParams& params, double t,
                                   PhaseConvention conv = PhaseConvention::Unitary);

RabiAmplitudes rabi_amplitudes(const SystemParams& params, double t);

DisplacedCoherentParams displaced_params(const SystemParams& params, double t);

/// Amplitude multiplying |alpha + sign*A> when e^{f} e^{sign A a^dag} e^{sign B a} acts on |alpha>.
cplx branch_factor(const DisplacementFunctions& d, cplx alpha, int sign, PhaseConvention conv);

LabFrameState evolve_state(const SystemParams& params, double t,
                           PhaseConvention conv = PhaseConvention::Unitary);

/// Builds the Fock-basis vectors. Throws LeakageError if any displaced
/// coherent state leaks more than `leakage_tol` out of `space`.
TwoLevelState materialize(const LabFrameState& state, const FockSpace& space,
                          double leakage_tol = 1e-6);

/// Largest coherent_leakage over the branches of `state`.
double max_leakage(const LabFrameState& state, const FockSpace& space);

/// Tr_motion <g|rho|e> for rho = |psi><psi|, from closed-form coherent overlaps.
cplx coherence(const LabFrameState& state);

/// Tr_motion <g|rho|e> computed from materialized vectors (the density-matrix oracle).
cplx coherence_from_state(const TwoLevelState& psi);

enum class RMode {
  Consistent,  ///< modulus of coherence(evolve_state(...)); agrees with the oracle
  Literal,     ///< the published four-term expression, phase factors and all
};

const char* to_string(RMode m);

double coherence_modulus_R(const SystemParams& params, double t, RMode mode = RMode::Consistent);

/// Per-term values of the published four-term expression (before modulus and
/// before the e^{-4 g^2/omega^2 (1 - cos omega t)} factor), plus that factor.
struct LiteralTerms {
  std::array<cplx, 4> terms;
  double suppression = 1.0;
};

LiteralTerms literal_terms(const SystemParams& params, double t);

struct UnitarityReport {
  double max_norm_deviation = 0.0;  ///< max_t | ||psi(t)||^2 - 1 |
  double max_oracle_distance = 0.0; ///< max_t ||psi(t) - psi_exact(t)||
  double max_leakage = 0.0;
};

/// Compares evolve_state against brute-force propagation
/// U2(t) e^{-i H_I t} psi(0) with H_I diagonalized in `params.dim` levels.
UnitarityReport verify_unitarity(const SystemParams& params, std::span<const double> t_grid,
                                 PhaseConvention conv = PhaseConvention::Unitary);

}  // namespace iondecoh::analytic
