#include "iondecoh/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "iondecoh/errors.hpp"

namespace iondecoh::analytic {

namespace {

constexpr cplx I{0.0, 1.0};

StateVector propagate(const Eigen::SelfAdjointEigenSolver<Operator>& eig, const StateVector& psi,
                      double t) {
  const Eigen::VectorXcd phases =
      (-I * t * eig.eigenvalues().cast<cplx>()).array().exp().matrix();
  return eig.eigenvectors() * phases.asDiagonal() * (eig.eigenvectors().adjoint() * psi);
}

}  // namespace

const char* to_string(PhaseConvention c) {
  switch (c) {
    case PhaseConvention::Unitary: return "unitary";
    case PhaseConvention::Printed: return "printed";
    case PhaseConvention::FlippedReal: return "flipped-real";
  }
  return "?";
}

const char* to_string(RMode m) { return m == RMode::Consistent ? "consistent" : "literal"; }

DisplacementFunctions displacement(const SystemParams& params, double t, PhaseConvention conv) {
  const double w = params.omega;
  const double g = coupling_g(params);
  DisplacementFunctions d;
  d.t = t;
  d.A = (I * g / w) * (std::exp(I * (w * t)) - 1.0);
  d.B = -std::conj(d.A);
  const cplx printed = -I * (g * g / w) * t + (g * g / (w * w)) * (1.0 - std::exp(-I * (w * t)));
  switch (conv) {
    case PhaseConvention::Printed:
      d.f = printed;
      break;
    case PhaseConvention::Unitary:
      d.f = -printed;
      break;
    case PhaseConvention::FlippedReal:
      d.f = cplx(printed.real(), -printed.imag());
      break;
  }
  return d;
}

RabiAmplitudes rabi_amplitudes(const SystemParams& params, double t) {
  const double oe = std::hypot(params.omega_rabi, params.delta);
  if (oe == 0.0) throw std::invalid_argument("rabi_amplitudes: Omega_e = 0");
  const double c = std::cos(0.5 * oe * t);
  const double s = std::sin(0.5 * oe * t);
  return {cplx(c, -params.delta / oe * s), cplx(0.0, -params.omega_rabi / oe * s)};
}

DisplacedCoherentParams displaced_params(const SystemParams& params, double t) {
  const cplx A = displacement(params, t).A;
  const cplx kick = I * params.eta_recoil * std::exp(-I * (params.omega * t));
  return {params.alpha_g + A + kick, params.alpha_g + A - kick, params.alpha_e - A + kick,
          params.alpha_e - A - kick};
}

cplx branch_factor(const DisplacementFunctions& d, cplx alpha, int sign, PhaseConvention conv) {
  if (conv == PhaseConvention::Printed) return std::exp(d.f - 0.5 * std::norm(d.A));
  const double s = sign;
  // e^{sB a}|alpha> = e^{sB alpha}|alpha>, and e^{sA a^dag}|alpha> rescales onto |alpha + sA>.
  return std::exp(d.f + s * d.B * alpha + 0.5 * (std::norm(alpha + s * d.A) - std::norm(alpha)));
}

LabFrameState evolve_state(const SystemParams& params, double t, PhaseConvention conv) {
  const auto d = displacement(params, t, conv);
  const auto rabi = rabi_amplitudes(params, t);
  const auto amps = displaced_params(params, t);
  const cplx cg_t = params.c_g * branch_factor(d, params.alpha_g, +1, conv);
  const cplx ce_t = params.c_e * branch_factor(d, params.alpha_e, -1, conv);
  const cplx phase_g = std::exp(0.5 * I * (params.omega_laser * t));
  const cplx phase_e = std::conj(phase_g);
  const cplx a1c = std::conj(rabi.alpha1);

  LabFrameState s;
  s.t = t;
  s.omega = params.omega;
  s.branches = {{
      {Level::G, phase_g * a1c * cg_t, amps.ag_minus},
      {Level::G, phase_g * rabi.alpha2 * ce_t, amps.ae_minus},
      {Level::E, phase_e * rabi.alpha2 * cg_t, amps.ag_plus},
      {Level::E, phase_e * rabi.alpha1 * ce_t, amps.ae_plus},
  }};
  return s;
}

double max_leakage(const LabFrameState& state, const FockSpace& space) {
  double worst = 0.0;
  for (const auto& b : state.branches) {
    if (b.coefficient == cplx(0.0)) continue;
    worst = std::max(worst, coherent_leakage(b.amplitude, space));
  }
  return worst;
}

TwoLevelState materialize(const LabFrameState& state, const FockSpace& space, double leakage_tol) {
  const double leak = max_leakage(state, space);
  if (leak > leakage_tol) {
    throw LeakageError("materialize: truncation leakage " + std::to_string(leak) +
                       " exceeds tolerance at dim " + std::to_string(space.dim()));
  }
  const cplx rot = std::exp(-I * (state.omega * state.t));
  TwoLevelState psi{StateVector::Zero(space.size()), StateVector::Zero(space.size())};
  for (const auto& b : state.branches) {
    StateVector& target = b.level == Level::G ? psi.g : psi.e;
    target += b.coefficient * coherent_state(b.amplitude * rot, space);
  }
  return psi;
}

cplx coherence(const LabFrameState& state) {
  // Tr_motion |psi_g><psi_e| = <psi_e|psi_g>; the common free rotation drops out.
  cplx sum = 0.0;
  for (const auto& bg : state.branches) {
    if (bg.level != Level::G) continue;
    for (const auto& be : state.branches) {
      if (be.level != Level::E) continue;
      sum += bg.coefficient * std::conj(be.coefficient) * coherent_overlap(be.amplitude, bg.amplitude);
    }
  }
  return sum;
}

cplx coherence_from_state(const TwoLevelState& psi) { return overlap(psi.e, psi.g); }

LiteralTerms literal_terms(const SystemParams& params, double t) {
  const auto rabi = rabi_amplitudes(params, t);
  const auto p = displaced_params(params, t);
  const double w = params.omega;
  const double g = coupling_g(params);
  const cplx a1c = std::conj(rabi.alpha1);
  const cplx a2 = rabi.alpha2;
  const auto phase = [&](cplx x, cplx y) { return std::exp(-I * w * x * std::conj(y) * t); };

  LiteralTerms out;
  out.terms[0] = a1c * a2 * std::norm(params.c_g) * coherent_overlap(p.ag_minus, p.ag_plus) *
                 phase(p.ag_plus, p.ag_minus);
  out.terms[1] = a1c * a1c * std::conj(params.c_g) * params.c_e *
                 coherent_overlap(p.ag_minus, p.ae_plus) * phase(p.ae_plus, p.ag_minus);
  out.terms[2] = std::norm(a2) * std::conj(params.c_e) * params.c_g *
                 coherent_overlap(p.ae_minus, p.ag_plus) * phase(p.ae_minus, p.ag_plus);
  out.terms[3] = a1c * std::conj(a2) * std::norm(params.c_e) *
                 coherent_overlap(p.ae_minus, p.ae_plus) * phase(p.ae_minus, p.ae_plus);
  out.suppression = std::exp(-4.0 * g * g / (w * w) * (1.0 - std::cos(w * t)));
  return out;
}

double coherence_modulus_R(const SystemParams& params, double t, RMode mode) {
  if (mode == RMode::Consistent) return std::abs(coherence(evolve_state(params, t)));
  const auto lt = literal_terms(params, t);
  return std::abs(lt.terms[0] + lt.terms[1] + lt.terms[2] + lt.terms[3]) * lt.suppression;
}

UnitarityReport verify_unitarity(const SystemParams& params, std::span<const double> t_grid,
                                 PhaseConvention conv) {
  const FockSpace space(params.dim);
  const auto H = effective_hamiltonian(params, space);
  const Eigen::SelfAdjointEigenSolver<Operator> eig_g(H.H_g);
  const Eigen::SelfAdjointEigenSolver<Operator> eig_e(H.H_e);
  const StateVector init_g = params.c_g * coherent_state(params.alpha_g, space);
  const StateVector init_e = params.c_e * coherent_state(params.alpha_e, space);

  UnitarityReport report;
  for (const double t : t_grid) {
    const auto state = evolve_state(params, t, conv);
    report.max_leakage = std::max(report.max_leakage, max_leakage(state, space));
    // Materialize without the leakage guard; the caller reads max_leakage.
    const auto psi = materialize(state, space, std::numeric_limits<double>::infinity());
    report.max_norm_deviation = std::max(report.max_norm_deviation, std::abs(psi.norm_squared() - 1.0));

    const StateVector rot_g = propagate(eig_g, init_g, t);
    const StateVector rot_e = propagate(eig_e, init_e, t);
    const auto rabi = rabi_amplitudes(params, t);
    const cplx phase_g = std::exp(0.5 * I * (params.omega_laser * t));
    const StateVector exact_g = phase_g * (std::conj(rabi.alpha1) * rot_g + rabi.alpha2 * rot_e);
    const StateVector exact_e = std::conj(phase_g) * (rabi.alpha2 * rot_g + rabi.alpha1 * rot_e);
    const double dist = std::sqrt((psi.g - exact_g).squaredNorm() + (psi.e - exact_e).squaredNorm());
    report.max_oracle_distance = std::max(report.max_oracle_distance, dist);
  }
  return report;
}

}  // namespace iondecoh::analytic
