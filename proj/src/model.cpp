#include "iondecoh/model.hpp"

#include <cmath>
#include <stdexcept>

namespace iondecoh {

const char* to_string(GConvention c) {
  switch (c) {
    case GConvention::Eq8: return "eq8";
    case GConvention::Eq15: return "eq15";
  }
  return "?";
}

void SystemParams::validate() const {
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be > 0");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  if (dim < 2) throw std::invalid_argument("dim must be >= 2");
  if (!std::isfinite(delta) || !std::isfinite(omega_rabi)) {
    throw std::invalid_argument("delta and omega_rabi must be finite");
  }
  const double norm = std::norm(c_g) + std::norm(c_e);
  if (std::abs(norm - 1.0) > 1e-12) {
    throw std::invalid_argument("|c_g|^2 + |c_e|^2 must equal 1");
  }
  if (!g_coupling && !g_scale) {
    throw std::invalid_argument("either g_coupling or g_scale must be configured");
  }
}

SystemParams desk_params() { return SystemParams{}; }

SystemParams caption_params() {
  constexpr double two_pi = 2.0 * M_PI;
  SystemParams p;
  p.omega = two_pi * 11.3;  // 11.3 MHz in rad/us
  p.delta = 4.0e3;          // 4.0 GHz
  p.omega_rabi = 1.0e-2;    // 10.0 kHz
  p.gamma = 1.0e-3;         // 1.0 kHz
  p.g_coupling.reset();
  p.g_scale = 1.0;
  p.alpha_g = p.alpha_e = 3.0;
  return p;
}

DerivedParams derive(const SystemParams& params) {
  DerivedParams d;
  d.omega_e = std::hypot(params.omega_rabi, params.delta);
  if (d.omega_e == 0.0) throw std::invalid_argument("derive: Omega_e = 0 (delta = Omega_L = 0)");
  const double oe2 = d.omega_e * d.omega_e;
  d.alpha_bar = {params.delta * params.omega_rabi / oe2, 0.0, params.delta * params.delta / oe2};
  d.neglected_sigma_x = std::abs(d.alpha_bar[0]);
  d.g = coupling_g(params);
  return d;
}

std::array<double, 3> alpha_coefficients(const SystemParams& params, double t) {
  const double oe = std::hypot(params.omega_rabi, params.delta);
  if (oe == 0.0) throw std::invalid_argument("alpha_coefficients: Omega_e = 0");
  const double oe2 = oe * oe;
  const double c = std::cos(oe * t);
  const double s = std::sin(oe * t);
  return {params.omega_rabi * params.delta / oe2 * (1.0 - c), params.omega_rabi / oe * s,
          params.delta * params.delta / oe2 + params.omega_rabi * params.omega_rabi / oe2 * c};
}

double coupling_g(const SystemParams& params) {
  if (params.g_coupling) return *params.g_coupling;
  if (!params.g_scale) throw std::invalid_argument("coupling_g: neither g_coupling nor g_scale set");
  const double oe = std::hypot(params.omega_rabi, params.delta);
  if (oe == 0.0) throw std::invalid_argument("coupling_g: Omega_e = 0");
  const double ratio = params.delta * params.delta / (oe * oe);
  const double prefactor = params.g_convention == GConvention::Eq15 ? 2.0 : 1.0;
  return prefactor * *params.g_scale * ratio;
}

ConditionalHamiltonians effective_hamiltonian(const SystemParams& params, const FockSpace& space) {
  const double g = coupling_g(params);
  const auto [a, ad] = ladder(space);
  const Operator free = params.omega * number_operator(space);
  const Operator drive = cplx(0.0, g) * (ad - a);
  return {free - drive, free + drive};
}

}  // namespace iondecoh
