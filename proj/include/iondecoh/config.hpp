// Run configuration: a flat INI file with [system], [numerics] and [run]
// sections. Unknown sections or keys are rejected.
//
//   [system]    omega delta omega_rabi gamma g g_scale g_convention eta_recoil
//               omega_laser c_g c_e alpha_g alpha_e time_unit
//   [numerics]  dim courant trace_tol traj_dt noise_substeps leakage_tol
//               allow_leakage r_mode phase_convention coherent_form rate_law
//   [run]       experiment t_max n_points n_traj base_seed dissipator kappa
//               engines n_list compare_tol stderr_tol stderr_fraction
//
// Complex values are written "re" or "re,im".

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "iondecoh/analytic.hpp"
#include "iondecoh/master.hpp"
#include "iondecoh/model.hpp"
#include "iondecoh/trajectories.hpp"

namespace iondecoh {

enum class Experiment { AnalyticSweep, MasterSweep, EnsembleSweep, Compare, Rates };
enum class Engine { Analytic, Master, Ensemble };

const char* to_string(Experiment e);
const char* to_string(Engine e);

struct RunConfig {
  SystemParams params = desk_params();
  master::MasterOptions master;
  trajectories::EnsembleOptions ensemble;
  analytic::RMode r_mode = analytic::RMode::Consistent;
  analytic::PhaseConvention phase_convention = analytic::PhaseConvention::Unitary;

  Experiment experiment = Experiment::AnalyticSweep;
  double t_max = 20.0;
  std::size_t n_points = 401;
  std::size_t n_traj = 2000;
  std::uint64_t base_seed = 20240601;
  std::vector<Engine> engines{Engine::Analytic, Engine::Master};
  std::vector<std::size_t> n_list{0, 1, 2, 3};

  double leakage_tol = 1e-6;
  bool allow_leakage = false;
  double compare_tol = 1e-6;     ///< max |dR| between deterministic engines
  double stderr_tol = 3.0;       ///< |dR| / stderr bound against the ensemble
  double stderr_fraction = 0.99; ///< share of grid points that must meet stderr_tol
  double rate_tol = 0.03;        ///< ratio-law tolerance for the rates experiment

  /// Every key the file format knows, with its current value as text.
  std::map<std::string, std::string> echo() const;

  /// Uniform grid t_k = k t_max / (n_points - 1).
  std::vector<double> time_grid() const;

  /// Throws ConfigError on the first violated rule.
  void validate() const;
};

/// Parses INI text. Throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Applies "section.key=value". Throws ConfigError for unknown keys.
void apply_override(RunConfig& config, const std::string& assignment);

}  // namespace iondecoh
