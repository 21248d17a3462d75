#include "iondecoh/master.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "iondecoh/errors.hpp"

namespace iondecoh::master {

namespace {

constexpr cplx I{0.0, 1.0};

std::size_t steps_for(double interval, double max_step) {
  if (interval <= 0.0) throw std::invalid_argument("integrate: time grid must be strictly increasing");
  return static_cast<std::size_t>(std::ceil(interval / max_step - 1e-9));
}

double offdiag_rate_term(std::size_t n) {
  const double x = static_cast<double>(n);
  return x * x + x + 1.0;
}

}  // namespace

const char* to_string(DissipatorPreset p) {
  switch (p) {
    case DissipatorPreset::Eq17: return "eq17";
    case DissipatorPreset::Eq18: return "eq18";
    case DissipatorPreset::Custom: return "custom";
  }
  return "?";
}

const char* to_string(CoherentForm f) { return f == CoherentForm::Full ? "full" : "literal-eq18"; }

const char* to_string(RateLaw r) { return r == RateLaw::Derived ? "derived" : "printed"; }

Operator& InternalBlocks::block(Level row, Level col) {
  if (row == Level::G) return col == Level::G ? gg : ge;
  return col == Level::G ? eg : ee;
}

const Operator& InternalBlocks::block(Level row, Level col) const {
  return const_cast<InternalBlocks*>(this)->block(row, col);
}

double InternalBlocks::purity() const {
  const cplx p = (gg * gg).trace() + (ee * ee).trace() + (ge * eg).trace() + (eg * ge).trace();
  return p.real();
}

double InternalBlocks::hermiticity_defect() const {
  double d = (gg - gg.adjoint()).cwiseAbs().maxCoeff();
  d = std::max(d, (ee - ee.adjoint()).cwiseAbs().maxCoeff());
  return std::max(d, (eg - ge.adjoint()).cwiseAbs().maxCoeff());
}

double InternalBlocks::leakage() const {
  const FockSpace space(static_cast<std::size_t>(gg.rows()));
  const Eigen::Index tail = static_cast<Eigen::Index>(default_leakage_tail(space));
  const Eigen::Index n = gg.rows();
  double sum = 0.0;
  for (Eigen::Index i = n - tail; i < n; ++i) sum += std::abs(gg(i, i).real()) + std::abs(ee(i, i).real());
  return sum;
}

double dissipator_strength(const SystemParams& params, const MasterOptions& opts) {
  switch (opts.preset) {
    case DissipatorPreset::Eq17: return params.gamma;
    case DissipatorPreset::Eq18:
      return 0.5 * params.gamma * params.gamma * params.omega * params.omega;
    case DissipatorPreset::Custom:
      if (opts.custom_kappa < 0.0) throw std::invalid_argument("custom kappa must be >= 0");
      return opts.custom_kappa;
  }
  return 0.0;
}

double rate_coefficient(const SystemParams& params, const MasterOptions& opts) {
  if (opts.rate_law == RateLaw::Printed) return params.gamma * params.omega * params.omega;
  return 0.25 * dissipator_strength(params, opts);
}

InternalBlocks initial_blocks(const SystemParams& params, double leakage_tol) {
  const FockSpace space(params.dim);
  for (const cplx a : {params.alpha_g, params.alpha_e}) {
    const double leak = coherent_leakage(a, space);
    if (leak > leakage_tol) {
      throw LeakageError("initial_blocks: coherent amplitude leaks " + std::to_string(leak) +
                         " at dim " + std::to_string(params.dim));
    }
  }
  const StateVector g = params.c_g * coherent_state(params.alpha_g, space);
  const StateVector e = params.c_e * coherent_state(params.alpha_e, space);
  return {g * g.adjoint(), g * e.adjoint(), e * g.adjoint(), e * e.adjoint(), 0.0};
}

struct MasterEquation::Workspace {
  Operator k1, k2, k3, k4, stage, comm, tmp;
};

MasterEquation::MasterEquation(const SystemParams& params, const MasterOptions& opts)
    : params_(params),
      opts_(opts),
      kappa_(dissipator_strength(params, opts)),
      g_(coupling_g(params)),
      h_g_(static_cast<Eigen::Index>(params.dim)),
      h_e_(static_cast<Eigen::Index>(params.dim)),
      x2_(static_cast<Eigen::Index>(params.dim)),
      p_(static_cast<Eigen::Index>(params.dim)) {
  params_.validate();
  if (!(opts.courant > 0.0)) throw std::invalid_argument("courant factor must be > 0");
  const FockSpace space(params.dim);
  const auto H = effective_hamiltonian(params, space);
  const auto q = quadratures(space);
  h_g_ = kernels::BandedOperator::from_dense(H.H_g);
  h_e_ = kernels::BandedOperator::from_dense(H.H_e);
  x2_ = kernels::BandedOperator::from_dense(q.X * q.X, 1e-14);
  p_ = kernels::BandedOperator::from_dense(q.P);
}

double MasterEquation::max_step() const {
  const double n = static_cast<double>(params_.dim);
  const double scale = std::max(params_.omega * n, kappa_ * n * n);
  return opts_.courant / scale;
}

const kernels::BandedOperator& MasterEquation::hamiltonian(Level l) const {
  return l == Level::G ? h_g_ : h_e_;
}

void MasterEquation::block_rhs_into(Level row, Level col, const Operator& rho, Operator& out,
                                    Workspace& ws) const {
  if (opts_.form == CoherentForm::Full) {
    kernels::sandwich_commutator(hamiltonian(row), rho, hamiltonian(col), out);
    out *= -I;
  } else if (row == col) {
    out.setZero(rho.rows(), rho.cols());
  } else {
    kernels::left_multiply(p_, rho, out);
    out *= (row == Level::G ? 2.0 : -2.0) * I * g_;
  }
  if (kappa_ != 0.0) {
    kernels::sandwich_commutator(x2_, rho, x2_, ws.comm);
    kernels::sandwich_commutator(x2_, ws.comm, x2_, ws.tmp);
    out.noalias() -= kappa_ * ws.tmp;
  }
}

Operator MasterEquation::block_rhs(Level row, Level col, const Operator& rho) const {
  Workspace ws;
  Operator out;
  block_rhs_into(row, col, rho, out, ws);
  return out;
}

InternalBlocks MasterEquation::rhs(const InternalBlocks& blocks) const {
  InternalBlocks d;
  d.t = blocks.t;
  for (Level r : {Level::G, Level::E}) {
    for (Level c : {Level::G, Level::E}) d.block(r, c) = block_rhs(r, c, blocks.block(r, c));
  }
  return d;
}

std::vector<Operator> MasterEquation::integrate_block(Level row, Level col, const Operator& initial,
                                                      std::span<const double> t_grid) const {
  if (t_grid.empty()) return {};
  Workspace ws;
  std::vector<Operator> out;
  out.reserve(t_grid.size());
  Operator rho = initial;
  out.push_back(rho);
  const double h_max = max_step();
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    const double interval = t_grid[k] - t_grid[k - 1];
    const std::size_t steps = steps_for(interval, h_max);
    const double h = interval / static_cast<double>(steps);
    for (std::size_t s = 0; s < steps; ++s) {
      block_rhs_into(row, col, rho, ws.k1, ws);
      ws.stage = rho + (0.5 * h) * ws.k1;
      block_rhs_into(row, col, ws.stage, ws.k2, ws);
      ws.stage = rho + (0.5 * h) * ws.k2;
      block_rhs_into(row, col, ws.stage, ws.k3, ws);
      ws.stage = rho + h * ws.k3;
      block_rhs_into(row, col, ws.stage, ws.k4, ws);
      rho += (h / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
    }
    if (!rho.allFinite()) {
      throw NumericalError("integrate: non-finite block entries at t = " + std::to_string(t_grid[k]));
    }
    out.push_back(rho);
  }
  return out;
}

std::vector<InternalBlocks> MasterEquation::integrate(const InternalBlocks& initial,
                                                      std::span<const double> t_grid) const {
  const std::array<std::pair<Level, Level>, 4> order{
      {{Level::G, Level::G}, {Level::G, Level::E}, {Level::E, Level::G}, {Level::E, Level::E}}};
  std::array<std::vector<Operator>, 4> series;
  std::array<std::string, 4> errors;

  // Blocks are decoupled; one worker per block.
#pragma omp parallel for schedule(static, 1)
  for (int b = 0; b < 4; ++b) {
    const auto [r, c] = order[static_cast<std::size_t>(b)];
    try {
      series[static_cast<std::size_t>(b)] = integrate_block(r, c, initial.block(r, c), t_grid);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(b)] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw NumericalError(e);
  }

  std::vector<InternalBlocks> out(t_grid.size());
  const cplx tr0 = initial.trace();
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    out[k] = {std::move(series[0][k]), std::move(series[1][k]), std::move(series[2][k]),
              std::move(series[3][k]), t_grid[k]};
    const double drift = std::abs(out[k].trace() - tr0);
    if (drift > opts_.trace_tol) {
      throw NumericalError("integrate: trace drift " + std::to_string(drift) + " at t = " +
                           std::to_string(t_grid[k]) + "; reduce the courant factor");
    }
  }
  return out;
}

Operator lab_coherence_operator(const InternalBlocks& blocks, const SystemParams& params) {
  const auto r = analytic::rabi_amplitudes(params, blocks.t);
  const cplx a1c = std::conj(r.alpha1);
  const cplx lab_phase = std::exp(I * (params.omega_laser * blocks.t));
  return lab_phase * (a1c * std::conj(r.alpha2) * blocks.gg + a1c * a1c * blocks.ge +
                      std::norm(r.alpha2) * blocks.eg + a1c * r.alpha2 * blocks.ee);
}

cplx lab_coherence(const InternalBlocks& blocks, const SystemParams& params) {
  const auto r = analytic::rabi_amplitudes(params, blocks.t);
  const cplx a1c = std::conj(r.alpha1);
  const cplx lab_phase = std::exp(I * (params.omega_laser * blocks.t));
  return lab_phase * (a1c * std::conj(r.alpha2) * blocks.gg.trace() + a1c * a1c * blocks.ge.trace() +
                      std::norm(r.alpha2) * blocks.eg.trace() + a1c * r.alpha2 * blocks.ee.trace());
}

std::vector<cplx> lab_coherence(std::span<const InternalBlocks> series, const SystemParams& params) {
  std::vector<cplx> out;
  out.reserve(series.size());
  for (const auto& b : series) out.push_back(lab_coherence(b, params));
  return out;
}

double closed_form_R(const SystemParams& params, const MasterOptions& opts, double t) {
  const FockSpace space(params.dim);
  const StateVector g = params.c_g * coherent_state(params.alpha_g, space);
  const StateVector e = params.c_e * coherent_state(params.alpha_e, space);
  const auto r = analytic::rabi_amplitudes(params, t);
  const cplx a1c = std::conj(r.alpha1);
  const double coef = rate_coefficient(params, opts);
  cplx sum = 0.0;
  for (Eigen::Index n = 0; n < space.size(); ++n) {
    const cplx gg = g(n) * std::conj(g(n));
    const cplx ge = g(n) * std::conj(e(n));
    const cplx eg = e(n) * std::conj(g(n));
    const cplx ee = e(n) * std::conj(e(n));
    const double decay = std::exp(-coef * offdiag_rate_term(static_cast<std::size_t>(n)) * t);
    sum += (a1c * std::conj(r.alpha2) * gg + a1c * a1c * ge + std::norm(r.alpha2) * eg +
            a1c * r.alpha2 * ee) *
           decay;
  }
  return std::abs(sum);
}

std::vector<RateRow> fit_decay_rates(const SystemParams& params, const MasterOptions& opts,
                                     std::span<const std::size_t> n_list, const RateFitOptions& fit) {
  if (n_list.empty()) throw std::invalid_argument("fit_decay_rates: empty n_list");
  SystemParams p = params;
  p.g_coupling = 0.0;  // isolate pure dephasing
  const MasterEquation eq(p, opts);
  const FockSpace space(p.dim);
  const double h = eq.max_step();
  const double threshold = std::exp(-fit.window_decay);
  const double coef = rate_coefficient(params, opts);
  // Nothing decays without the reservoir; a few trap periods show that.
  const double horizon = eq.kappa() > 0.0 ? fit.max_time : std::min(fit.max_time, 20.0 / p.omega);

  std::vector<RateRow> rows;
  for (const std::size_t n : n_list) {
    if (n + 2 >= p.dim) throw std::invalid_argument("fit_decay_rates: n too close to the cutoff");
    const StateVector fock = fock_state(n, space);
    Operator rho = fock * fock.adjoint();
    const auto idx = static_cast<Eigen::Index>(n);

    // Classical RK4 stepping; sample every step until the fit window closes.
    std::vector<double> ts{0.0};
    std::vector<double> ys{0.0};
    double t = 0.0;
    while (t < horizon) {
      const Operator k1 = eq.block_rhs(Level::G, Level::E, rho);
      const Operator k2 = eq.block_rhs(Level::G, Level::E, rho + (0.5 * h) * k1);
      const Operator k3 = eq.block_rhs(Level::G, Level::E, rho + (0.5 * h) * k2);
      const Operator k4 = eq.block_rhs(Level::G, Level::E, rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t += h;
      const double y = std::abs(rho(idx, idx));
      ts.push_back(t);
      ys.push_back(std::log(y));
      if (y < threshold) break;
    }

    // Least-squares slope of log|y| against t.
    const double m = static_cast<double>(ts.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      st += ts[i];
      sy += ys[i];
      stt += ts[i] * ts[i];
      sty += ts[i] * ys[i];
    }
    const double denom = m * stt - st * st;
    double rate = denom > 0.0 ? -(m * sty - st * sy) / denom : 0.0;
    if (std::abs(rate) < fit.zero_threshold) rate = 0.0;

    RateRow row;
    row.n = n;
    row.fitted_rate = rate;
    row.model_rate = coef * offdiag_rate_term(n);
    row.samples = ts.size();
    rows.push_back(row);
  }

  const double base_rate = rows.front().fitted_rate;
  const double base_term = offdiag_rate_term(rows.front().n);
  for (auto& row : rows) {
    row.expected_ratio = offdiag_rate_term(row.n) / base_term;
    row.ratio_to_n0 = base_rate != 0.0 ? row.fitted_rate / base_rate : 0.0;
    row.rel_error = base_rate != 0.0 ? std::abs(row.ratio_to_n0 / row.expected_ratio - 1.0) : 0.0;
  }
  return rows;
}

}  // namespace iondecoh::master
