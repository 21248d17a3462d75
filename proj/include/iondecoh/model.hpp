// Physical parameters of the driven ion and the quantities derived from them.
//
// Units: every frequency-like field shares one unit (rad per time unit, see
// `time_unit`). Times are in the reciprocal unit. hbar = 1.
//
// Frame conventions: the laser frame (rotating at omega_L, recoil shift
// dropped) is taken as the starting point. The rotating frame removes the
// internal Rabi precession generated by (Omega_L sigma_x + delta sigma_z)/2.
// sigma_z = |e><e| - |g><g|.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>

#include "iondecoh/fock.hpp"

namespace iondecoh {

/// Which printed prefactor maps g_scale to the coupling g.
enum class GConvention {
  Eq8,   ///< g = g_scale * delta^2 / Omega_e^2, g_scale ~ sqrt(m omega / 2) k
  Eq15,  ///< g = 2 g_scale * delta^2 / Omega_e^2, from the sqrt(2 m omega) k form
};

const char* to_string(GConvention c);

struct SystemParams {
  double omega = 1.0;       ///< trap frequency
  double delta = 20.0;      ///< detuning omega_eg - omega_L
  double omega_rabi = 1.0;  ///< laser coupling Omega_L
  double gamma = 0.05;      ///< white-noise strength of the spring constant
  std::optional<double> g_coupling = 0.1;
  std::optional<double> g_scale;
  GConvention g_convention = GConvention::Eq8;
  double eta_recoil = 0.0;   ///< (1/2) k sqrt(1/(2 m omega)), dimensionless
  double omega_laser = 0.0;  ///< only enters the lab-frame phases e^{+-i omega_L t/2}
  cplx c_g{M_SQRT1_2, 0.0};
  cplx c_e{M_SQRT1_2, 0.0};
  cplx alpha_g{2.0, 0.0};
  cplx alpha_e{2.0, 0.0};
  std::size_t dim = 64;
  std::string time_unit = "rad/us";

  /// Throws std::invalid_argument naming the first violated rule.
  void validate() const;
};

/// Desk-scale parameter set: every time scale fits on one plot.
SystemParams desk_params();

/// The published caption values in rad/us (omega = 2 pi x 11.3 MHz,
/// delta = 4 GHz, Omega_L = 10 kHz, Gamma = 1 kHz). Needs an explicit g.
SystemParams caption_params();

struct DerivedParams {
  double omega_e = 0.0;                   ///< sqrt(Omega_L^2 + delta^2)
  double g = 0.0;                         ///< effective sigma_z coupling
  std::array<double, 3> alpha_bar{};      ///< coarse-grained (x, y, z) coefficients
  double neglected_sigma_x = 0.0;         ///< |alpha_bar_x|, dropped far off resonance
};

DerivedParams derive(const SystemParams& params);

/// Rotating-frame coefficients (alpha_x(t), alpha_y(t), alpha_z(t)).
std::array<double, 3> alpha_coefficients(const SystemParams& params, double t);

double coupling_g(const SystemParams& params);

struct ConditionalHamiltonians {
  Operator H_g;  ///< omega a^dag a - i g (a^dag - a)
  Operator H_e;  ///< omega a^dag a + i g (a^dag - a)
};

ConditionalHamiltonians effective_hamiltonian(const SystemParams& params, const FockSpace& space);

}  // namespace iondecoh
