#include "iondecoh/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

#include "iondecoh/errors.hpp"

namespace iondecoh {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Analytic-sweep unitarity is checked on at most this many grid times.
constexpr std::size_t kUnitaritySamples = 41;

struct Context {
  const RunConfig& config;
  ExperimentResult& result;

  double init_leakage_tol() const { return config.allow_leakage ? kInf : config.leakage_tol; }

  master::MasterOptions master_options() const {
    auto m = config.master;
    m.leakage_tol = init_leakage_tol();
    return m;
  }

  trajectories::EnsembleOptions ensemble_options() const {
    auto e = config.ensemble;
    e.leakage_tol = init_leakage_tol();
    return e;
  }

  void record_leakage(double leak, const std::string& source) {
    result.max_leakage = std::max(result.max_leakage, leak);
    if (leak <= config.leakage_tol) return;
    const bool first = !result.leakage_exceeded;
    result.leakage_exceeded = true;
    if (!config.allow_leakage) {
      throw LeakageError(source + ": truncation leakage " + std::to_string(leak) + " exceeds " +
                         std::to_string(config.leakage_tol) + " (set numerics.allow_leakage to override)");
    }
    if (first) result.notes.push_back(source + ": leakage above tolerance, reported because allow_leakage is set");
  }

  // Truncation loss of the prepared state, recorded before any engine runs so
  // that a refused start still reports how much weight was missing.
  void record_initial_leakage(const std::string& source) {
    const auto init = master::initial_blocks(config.params, kInf);
    record_leakage(init.leakage() + std::max(0.0, 1.0 - std::abs(init.trace())), source + " initial state");
  }

  void check(std::string name, bool passed, double value, double threshold) {
    result.checks.push_back({std::move(name), passed, value, threshold});
  }
};

// ---------------------------------------------------------------- engines

struct Series {
  std::vector<double> R;
  std::vector<double> stderr_;
};

Series analytic_series(Context& ctx, std::span<const double> grid) {
  const auto& p = ctx.config.params;
  const FockSpace space(p.dim);
  Series s;
  double leak = 0.0;
  for (const double t : grid) {
    const auto state = analytic::evolve_state(p, t, ctx.config.phase_convention);
    leak = std::max(leak, analytic::max_leakage(state, space));
    s.R.push_back(ctx.config.r_mode == analytic::RMode::Consistent
                      ? std::abs(analytic::coherence(state))
                      : analytic::coherence_modulus_R(p, t, analytic::RMode::Literal));
  }
  ctx.record_leakage(leak, "analytic");
  return s;
}

std::vector<master::InternalBlocks> master_blocks(Context& ctx, std::span<const double> grid) {
  const auto& p = ctx.config.params;
  const master::MasterEquation eq(p, ctx.master_options());
  ctx.record_initial_leakage("master");
  const auto init = master::initial_blocks(p, ctx.init_leakage_tol());
  auto series = eq.integrate(init, grid);
  double leak = 0.0;
  for (const auto& b : series) leak = std::max(leak, b.leakage());
  ctx.record_leakage(leak, "master");
  return series;
}

Series master_series(Context& ctx, std::span<const double> grid) {
  const auto blocks = master_blocks(ctx, grid);
  Series s;
  for (const auto& b : blocks) s.R.push_back(std::abs(master::lab_coherence(b, ctx.config.params)));
  return s;
}

trajectories::EnsembleResult ensemble_run(Context& ctx, std::span<const double> grid) {
  const auto& c = ctx.config;
  const double kappa = master::dissipator_strength(c.params, c.master);
  ctx.record_initial_leakage("ensemble");
  auto res = trajectories::run_ensemble(c.params, kappa, c.n_traj, grid, c.base_seed, ctx.ensemble_options());
  ctx.record_leakage(res.max_leakage, "ensemble");
  return res;
}

Series ensemble_series(Context& ctx, std::span<const double> grid) {
  auto res = ensemble_run(ctx, grid);
  ctx.check("ensemble_norm_drift_per_step", res.max_norm_drift < 1e-8, res.max_norm_drift, 1e-8);
  return {std::move(res.R), std::move(res.R_stderr)};
}

// ----------------------------------------------------------- experiments

void analytic_sweep(Context& ctx) {
  const auto& c = ctx.config;
  const auto grid = c.time_grid();
  const FockSpace space(c.params.dim);
  auto& table = ctx.result.table;
  table.header = {"t", "R", "R_literal", "term_gg", "term_ge", "term_eg", "term_ee", "suppression", "leakage"};
  double leak_max = 0.0;
  double r_max = 0.0;
  for (const double t : grid) {
    const auto state = analytic::evolve_state(c.params, t, c.phase_convention);
    const double leak = analytic::max_leakage(state, space);
    leak_max = std::max(leak_max, leak);
    const auto lt = analytic::literal_terms(c.params, t);
    const double r_literal =
        std::abs(lt.terms[0] + lt.terms[1] + lt.terms[2] + lt.terms[3]) * lt.suppression;
    const double r = c.r_mode == analytic::RMode::Consistent ? std::abs(analytic::coherence(state)) : r_literal;
    r_max = std::max(r_max, r);
    table.rows.push_back({t, r, r_literal, std::abs(lt.terms[0]), std::abs(lt.terms[1]), std::abs(lt.terms[2]),
                          std::abs(lt.terms[3]), lt.suppression, leak});
  }
  ctx.record_leakage(leak_max, "analytic");

  if (master::dissipator_strength(c.params, c.master) > 0.0) {
    ctx.result.notes.push_back("analytic engine is noiseless; the reservoir setting is ignored");
  }
  // Coherence of a normalized state obeys |<psi_e|psi_g>| <= |psi_g| |psi_e| <= 1/2.
  if (c.r_mode == analytic::RMode::Consistent) {
    ctx.check("R_bounded", r_max <= 0.5 + 1e-12, r_max, 0.5);
  }
  if (ctx.result.leakage_exceeded) {
    ctx.result.notes.push_back("unitarity check skipped: truncation too small for the oracle");
    return;
  }
  std::vector<double> sample;
  const std::size_t stride = std::max<std::size_t>(1, (grid.size() + kUnitaritySamples - 2) / (kUnitaritySamples - 1));
  for (std::size_t k = 0; k < grid.size(); k += stride) sample.push_back(grid[k]);
  if (sample.back() != grid.back()) sample.push_back(grid.back());
  const auto rep = analytic::verify_unitarity(c.params, sample, c.phase_convention);
  ctx.check("norm_deviation", rep.max_norm_deviation < 1e-8, rep.max_norm_deviation, 1e-8);
  ctx.check("oracle_distance", rep.max_oracle_distance < 1e-6, rep.max_oracle_distance, 1e-6);
}

void master_sweep(Context& ctx) {
  const auto& c = ctx.config;
  const auto grid = c.time_grid();
  const auto blocks = master_blocks(ctx, grid);
  const auto mopts = ctx.master_options();
  auto& table = ctx.result.table;
  table.header = {"t", "R", "trace", "purity", "leakage", "R_diagonal_approx"};
  const double tr0 = blocks.front().trace().real();
  double trace_drift = 0.0;
  double herm = 0.0;
  double purity_rise = 0.0;
  double purity_change = 0.0;
  double prev_purity = blocks.front().purity();
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto& b = blocks[k];
    const double purity = b.purity();
    trace_drift = std::max(trace_drift, std::abs(b.trace().real() - tr0));
    herm = std::max(herm, b.hermiticity_defect());
    purity_rise = std::max(purity_rise, purity - prev_purity);
    purity_change = std::max(purity_change, std::abs(purity - blocks.front().purity()));
    prev_purity = purity;
    table.rows.push_back({grid[k], std::abs(master::lab_coherence(b, c.params)), b.trace().real(), purity,
                          b.leakage(), master::closed_form_R(c.params, mopts, grid[k])});
  }
  ctx.check("trace_drift", trace_drift < 1e-8, trace_drift, 1e-8);
  ctx.check("hermiticity", herm < 1e-9, herm, 1e-9);
  const double kappa = master::dissipator_strength(c.params, mopts);
  if (kappa == 0.0 && c.master.form == master::CoherentForm::Full) {
    ctx.check("purity_constant", purity_change < 1e-8, purity_change, 1e-8);
  } else if (coupling_g(c.params) == 0.0) {
    ctx.check("purity_non_increasing", purity_rise <= 1e-9, purity_rise, 1e-9);
  }
}

void ensemble_sweep(Context& ctx) {
  const auto grid = ctx.config.time_grid();
  const auto s = ensemble_series(ctx, grid);
  auto& table = ctx.result.table;
  table.header = {"t", "R", "stderr"};
  for (std::size_t k = 0; k < grid.size(); ++k) table.rows.push_back({grid[k], s.R[k], s.stderr_[k]});
}

void compare(Context& ctx) {
  const auto& c = ctx.config;
  const double kappa = master::dissipator_strength(c.params, c.master);
  const bool has_analytic = std::find(c.engines.begin(), c.engines.end(), Engine::Analytic) != c.engines.end();
  if (has_analytic && kappa > 0.0) {
    throw ConfigError("compare: the analytic engine is only available without the reservoir (kappa = 0), got kappa = " +
                      std::to_string(kappa));
  }
  const auto grid = c.time_grid();
  std::vector<Series> series;
  const Series* ens = nullptr;
  for (const Engine e : c.engines) {
    switch (e) {
      case Engine::Analytic: series.push_back(analytic_series(ctx, grid)); break;
      case Engine::Master: series.push_back(master_series(ctx, grid)); break;
      case Engine::Ensemble: series.push_back(ensemble_series(ctx, grid)); break;
    }
  }
  for (std::size_t i = 0; i < c.engines.size(); ++i) {
    if (c.engines[i] == Engine::Ensemble) ens = &series[i];
  }

  auto& table = ctx.result.table;
  table.header = {"t"};
  for (const Engine e : c.engines) table.header.push_back(std::string("R_") + to_string(e));
  if (ens) table.header.push_back("stderr");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::vector<double> row{grid[k]};
    for (const auto& s : series) row.push_back(s.R[k]);
    if (ens) row.push_back(ens->stderr_[k]);
    table.rows.push_back(std::move(row));
  }

  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t j = i + 1; j < series.size(); ++j) {
      const bool stochastic =
          (c.engines[i] == Engine::Ensemble || c.engines[j] == Engine::Ensemble) && kappa > 0.0;
      PairDeviation d{to_string(c.engines[i]), to_string(c.engines[j])};
      std::size_t within = 0;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const double dev = std::abs(series[i].R[k] - series[j].R[k]);
        d.max_abs = std::max(d.max_abs, dev);
        d.mean_abs += dev / static_cast<double>(grid.size());
        if (stochastic) {
          const double se = ens->stderr_[k];
          if (se > 0.0) d.max_z = std::max(d.max_z, dev / se);
          if (dev <= c.stderr_tol * se || dev <= c.compare_tol) ++within;
        } else if (dev <= c.compare_tol) {
          ++within;
        }
      }
      d.fraction_within = static_cast<double>(within) / static_cast<double>(grid.size());
      const std::string tag = "[" + d.a + "," + d.b + "]";
      if (stochastic) {
        ctx.check("fraction_within_stderr" + tag, d.fraction_within >= c.stderr_fraction, d.fraction_within,
                  c.stderr_fraction);
      } else {
        ctx.check("max_abs_deviation" + tag, d.max_abs < c.compare_tol, d.max_abs, c.compare_tol);
      }
      ctx.result.pairs.push_back(d);
    }
  }
}

void rates(Context& ctx) {
  const auto& c = ctx.config;
  const auto mopts = ctx.master_options();
  const auto rows = master::fit_decay_rates(c.params, mopts, c.n_list);
  auto& table = ctx.result.table;
  table.header = {"n", "fitted_rate", "model_rate", "ratio_to_n0", "expected_ratio", "rel_error"};
  double worst = 0.0;
  double largest_rate = 0.0;
  for (const auto& r : rows) {
    table.rows.push_back({static_cast<double>(r.n), r.fitted_rate, r.model_rate, r.ratio_to_n0, r.expected_ratio,
                          r.rel_error});
    worst = std::max(worst, r.rel_error);
    largest_rate = std::max(largest_rate, std::abs(r.fitted_rate));
  }
  if (master::dissipator_strength(c.params, mopts) == 0.0) {
    ctx.result.notes.push_back("no decoherence: without the reservoir every fitted rate is zero");
    ctx.check("zero_rates", largest_rate == 0.0, largest_rate, 0.0);
  } else {
    ctx.check("rate_ratio_rel_error", worst < c.rate_tol, worst, c.rate_tol);
  }
}

json config_json(const RunConfig& config) {
  json j = json::object();
  for (const auto& [key, value] : config.echo()) j[key] = value;
  return j;
}

json conventions_json(const RunConfig& c) {
  json j;
  j["dissipator_preset"] = master::to_string(c.master.preset);
  j["g_convention"] = to_string(c.params.g_convention);
  j["coherent_form"] = master::to_string(c.master.form);
  j["rate_law"] = master::to_string(c.master.rate_law);
  j["phase_convention"] = analytic::to_string(c.phase_convention);
  j["r_mode"] = analytic::to_string(c.r_mode);
  try {
    j["kappa"] = master::dissipator_strength(c.params, c.master);
    j["g"] = coupling_g(c.params);
  } catch (const std::exception&) {
    // Left out when the configuration itself is invalid.
  }
  j["hbar"] = 1;
  j["time_unit"] = c.params.time_unit;
  return j;
}

}  // namespace

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::out_of_range("Table: no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> Table::values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

namespace {

// Fills `result` as far as the experiment gets, so an abort still leaves its
// diagnostics behind.
void run_into(const RunConfig& config, ExperimentResult& result) {
  config.validate();
  result.experiment = config.experiment;
  Context ctx{config, result};
  try {
    switch (config.experiment) {
      case Experiment::AnalyticSweep: analytic_sweep(ctx); break;
      case Experiment::MasterSweep: master_sweep(ctx); break;
      case Experiment::EnsembleSweep: ensemble_sweep(ctx); break;
      case Experiment::Compare: compare(ctx); break;
      case Experiment::Rates: rates(ctx); break;
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& config) {
  ExperimentResult result;
  run_into(config, result);
  return result;
}

std::string format_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  char buf[40];
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

RunOutcome execute(const RunConfig& config, const std::filesystem::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  const std::string stem = to_string(config.experiment);
  RunOutcome outcome;
  outcome.report = out_dir / (stem + ".report.json");

  json report;
  report["experiment"] = stem;
  report["config"] = config_json(config);
  report["conventions"] = conventions_json(config);
  report["base_seed"] = config.base_seed;

  ExperimentResult result;
  try {
    run_into(config, result);
    outcome.exit_code = result.passed() ? kOk : kInvariantFailure;
    outcome.message = result.passed() ? "all checks passed" : "invariant check failed";
  } catch (const ConfigError& e) {
    outcome.exit_code = kConfigError;
    outcome.message = e.what();
  } catch (const NumericalError& e) {
    outcome.exit_code = kNumericalError;
    outcome.message = e.what();
  } catch (const LeakageError& e) {
    outcome.exit_code = kLeakage;
    outcome.message = e.what();
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    outcome.exit_code = kConfigError;
    outcome.message = "cannot create output directory " + out_dir.string() + ": " + ec.message();
    return outcome;
  }

  const bool have_table = outcome.exit_code == kOk || outcome.exit_code == kInvariantFailure;
  if (have_table) {
    outcome.csv = out_dir / (stem + ".csv");
    std::ofstream csv(outcome.csv, std::ios::binary);
    csv << format_csv(result.table);
    if (!csv) {
      outcome.exit_code = kConfigError;
      outcome.message = "cannot write " + outcome.csv.string();
    }
    report["csv"] = outcome.csv.filename().string();
  }

  json checks = json::array();
  for (const auto& c : result.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold}});
  }
  json pairs = json::array();
  for (const auto& p : result.pairs) {
    pairs.push_back({{"engines", {p.a, p.b}},
                     {"max_abs_deviation", p.max_abs},
                     {"mean_abs_deviation", p.mean_abs},
                     {"max_deviation_over_stderr", p.max_z},
                     {"fraction_within_tolerance", p.fraction_within}});
  }
  report["checks"] = checks;
  if (!pairs.empty()) report["pairs"] = pairs;
  report["notes"] = result.notes;
  report["leakage"] = {{"max", result.max_leakage},
                       {"tolerance", config.leakage_tol},
                       {"exceeded", result.leakage_exceeded},
                       {"allowed", config.allow_leakage}};
  report["exit_code"] = outcome.exit_code;
  report["message"] = outcome.message;
  report["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ofstream out(outcome.report);
  out << report.dump(2) << '\n';
  if (!out && outcome.exit_code == kOk) {
    outcome.exit_code = kConfigError;
    outcome.message = "cannot write " + outcome.report.string();
  }
  return outcome;
}

}  // namespace iondecoh
