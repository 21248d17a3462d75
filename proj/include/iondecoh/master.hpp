// Noise-averaged master equation for the rotating-frame density operator
//
//   d rho/dt = -i [H_0, rho] - kappa [X^2, [X^2, rho]],
//   H_0 = omega a^dag a + i g sigma_z (a^dag - a),
//
// written per internal block rho_ij = <i|rho|j>. Both H_0 and the dissipator
// are diagonal in the internal basis, so the four blocks evolve independently.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "iondecoh/analytic.hpp"
#include "iondecoh/fock.hpp"
#include "iondecoh/kernels.hpp"
#include "iondecoh/model.hpp"

namespace iondecoh::master {

using analytic::Level;

struct InternalBlocks {
  Operator gg;
  Operator ge;
  Operator eg;
  Operator ee;
  double t = 0.0;

  Operator& block(Level row, Level col);
  const Operator& block(Level row, Level col) const;

  cplx trace() const { return gg.trace() + ee.trace(); }
  /// tr(rho^2) of the full 2dim x 2dim operator.
  double purity() const;
  /// Max entrywise violation of gg = gg^dag, ee = ee^dag, eg = ge^dag.
  double hermiticity_defect() const;
  /// Population in the top default_leakage_tail Fock levels of gg and ee.
  double leakage() const;
};

/// How the dissipator strength kappa is obtained from the noise strength Gamma.
enum class DissipatorPreset {
  Eq17,    ///< kappa = Gamma
  Eq18,    ///< kappa = Gamma^2 omega^2 / 2
  Custom,  ///< kappa given directly
};

/// Coherent part of the block equations.
enum class CoherentForm {
  Full,         ///< -i (H_i rho_ij - rho_ij H_j), derived from H_0
  LiteralEq18,  ///< +-2 i g P rho_ge/eg only, as printed (no omega a^dag a term)
};

/// Rate law used by the diagonal closed form.
enum class RateLaw {
  Derived,  ///< 2 kappa Var_n(X^2) = kappa (n^2+n+1)/4, matches the implemented dissipator
  Printed,  ///< Gamma omega^2 (n^2+n+1)
};

const char* to_string(DissipatorPreset p);
const char* to_string(CoherentForm f);
const char* to_string(RateLaw r);

struct MasterOptions {
  DissipatorPreset preset = DissipatorPreset::Eq17;
  double custom_kappa = 0.0;
  CoherentForm form = CoherentForm::Full;
  RateLaw rate_law = RateLaw::Derived;
  /// dt * max(omega * dim, kappa * dim^2) <= courant.
  double courant = 0.1;
  /// Abort when |tr(gg) + tr(ee) - tr_0| exceeds this.
  double trace_tol = 1e-6;
  double leakage_tol = 1e-6;
};

double dissipator_strength(const SystemParams& params, const MasterOptions& opts);

/// Coefficient c with decay rate c * (n^2 + n + 1) under the chosen rate law.
double rate_coefficient(const SystemParams& params, const MasterOptions& opts);

/// Blocks of (c_g|g,alpha_g> + c_e|e,alpha_e>)(h.c.). Throws LeakageError
/// when the coherent states do not fit in params.dim.
InternalBlocks initial_blocks(const SystemParams& params, double leakage_tol = 1e-6);

class MasterEquation {
 public:
  MasterEquation(const SystemParams& params, const MasterOptions& opts);

  const SystemParams& params() const { return params_; }
  const MasterOptions& options() const { return opts_; }
  double kappa() const { return kappa_; }

  /// Largest step allowed by the courant rule.
  double max_step() const;

  /// d rho_ij / dt for one block.
  Operator block_rhs(Level row, Level col, const Operator& rho) const;
  InternalBlocks rhs(const InternalBlocks& blocks) const;

  /// Classical RK4 on one block, sampled at `t_grid` (t_grid[0] is the start time).
  std::vector<Operator> integrate_block(Level row, Level col, const Operator& initial,
                                        std::span<const double> t_grid) const;

  /// All four blocks at every grid time. Throws NumericalError on trace drift.
  std::vector<InternalBlocks> integrate(const InternalBlocks& initial,
                                        std::span<const double> t_grid) const;

 private:
  struct Workspace;
  void block_rhs_into(Level row, Level col, const Operator& rho, Operator& out,
                      Workspace& ws) const;
  const kernels::BandedOperator& hamiltonian(Level l) const;

  SystemParams params_;
  MasterOptions opts_;
  double kappa_;
  double g_;
  kernels::BandedOperator h_g_;
  kernels::BandedOperator h_e_;
  kernels::BandedOperator x2_;
  kernels::BandedOperator p_;
};

/// Tr_motion <g|rho|e> in the lab frame, rho = U2 rho^a U2^dag.
cplx lab_coherence(const InternalBlocks& blocks, const SystemParams& params);

/// Motional operator <g|rho|e> before the trace.
Operator lab_coherence_operator(const InternalBlocks& blocks, const SystemParams& params);

std::vector<cplx> lab_coherence(std::span<const InternalBlocks> series, const SystemParams& params);

/// Diagonal (short-time) approximation: each Fock diagonal of the initial
/// blocks decays at rate_coefficient * (n^2+n+1). Separate path; never used
/// in place of integrate().
double closed_form_R(const SystemParams& params, const MasterOptions& opts, double t);

struct RateRow {
  std::size_t n = 0;
  double fitted_rate = 0.0;
  double model_rate = 0.0;
  double ratio_to_n0 = 0.0;
  double expected_ratio = 0.0;
  double rel_error = 0.0;
  std::size_t samples = 0;
};

struct RateFitOptions {
  /// Fit window ends once |<n|rho_ge|n>| has fallen to exp(-window_decay).
  double window_decay = 0.005;
  /// Give up waiting for decay after this time; fit what was collected.
  double max_time = 200.0;
  /// Fitted rates below this are reported as 0.
  double zero_threshold = 1e-9;
};

/// Dephasing rate of <n|rho_ge|n> for each n, with g forced to 0. rel_error
/// compares fitted_rate/fitted_rate(n_list[0]) with the (n^2+n+1) ratio.
std::vector<RateRow> fit_decay_rates(const SystemParams& params, const MasterOptions& opts,
                                     std::span<const std::size_t> n_list,
                                     const RateFitOptions& fit = {});

}  // namespace iondecoh::master
