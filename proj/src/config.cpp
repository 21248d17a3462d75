#include "iondecoh/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "iondecoh/errors.hpp"

namespace iondecoh {

namespace {

using Setter = std::function<void(RunConfig&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Key {
  Setter set;
  Getter get;
};

std::string fail_prefix(const std::string& key) { return "config: " + key + ": "; }

double to_double(const std::string& key, const std::string& text) {
  const std::string s = boost::trim_copy(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw ConfigError(fail_prefix(key) + "expected a finite number, got '" + text + "'");
  }
  return value;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text) {
  const std::string s = boost::trim_copy(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(fail_prefix(key) + "expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string s = boost::to_lower_copy(boost::trim_copy(text));
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(fail_prefix(key) + "expected true or false, got '" + text + "'");
}

cplx to_complex(const std::string& key, const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  if (parts.size() == 1) return {to_double(key, parts[0]), 0.0};
  if (parts.size() == 2) return {to_double(key, parts[0]), to_double(key, parts[1])};
  throw ConfigError(fail_prefix(key) + "expected 're' or 're,im', got '" + text + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fmt(cplx v) { return fmt(v.real()) + "," + fmt(v.imag()); }

template <typename Enum>
Enum to_enum(const std::string& key, const std::string& text,
             std::initializer_list<std::pair<const char*, Enum>> names) {
  const std::string s = boost::to_lower_copy(boost::trim_copy(text));
  std::string allowed;
  for (const auto& [name, value] : names) {
    if (s == name) return value;
    allowed += allowed.empty() ? name : std::string("|") + name;
  }
  throw ConfigError(fail_prefix(key) + "expected one of " + allowed + ", got '" + text + "'");
}

Experiment to_experiment(const std::string& key, const std::string& text) {
  return to_enum<Experiment>(key, text,
                             {{"analytic-sweep", Experiment::AnalyticSweep},
                              {"master-sweep", Experiment::MasterSweep},
                              {"ensemble-sweep", Experiment::EnsembleSweep},
                              {"compare", Experiment::Compare},
                              {"rates", Experiment::Rates}});
}

std::vector<Engine> to_engines(const std::string& key, const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<Engine> out;
  for (const auto& p : parts) {
    const Engine e = to_enum<Engine>(key, p,
                                     {{"analytic", Engine::Analytic},
                                      {"master", Engine::Master},
                                      {"ensemble", Engine::Ensemble}});
    if (std::find(out.begin(), out.end(), e) != out.end()) {
      throw ConfigError(fail_prefix(key) + "engine listed twice");
    }
    out.push_back(e);
  }
  return out;
}

std::vector<std::size_t> to_list(const std::string& key, const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<std::size_t> out;
  for (const auto& p : parts) out.push_back(static_cast<std::size_t>(to_unsigned(key, p)));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ",";
    if constexpr (std::is_same_v<T, Engine>) {
      out += to_string(v);
    } else {
      out += std::to_string(v);
    }
  }
  return out;
}

const std::map<std::string, Key>& registry() {
  static const std::map<std::string, Key> keys = [] {
    std::map<std::string, Key> k;
    const auto num = [&k](const std::string& name, double SystemParams::*field) {
      k[name] = {[name, field](RunConfig& c, const std::string& v) { c.params.*field = to_double(name, v); },
                 [field](const RunConfig& c) { return fmt(c.params.*field); }};
    };
    const auto cnum = [&k](const std::string& name, cplx SystemParams::*field) {
      k[name] = {[name, field](RunConfig& c, const std::string& v) { c.params.*field = to_complex(name, v); },
                 [field](const RunConfig& c) { return fmt(c.params.*field); }};
    };
    const auto rnum = [&k](const std::string& name, double RunConfig::*field) {
      k[name] = {[name, field](RunConfig& c, const std::string& v) { c.*field = to_double(name, v); },
                 [field](const RunConfig& c) { return fmt(c.*field); }};
    };

    num("system.omega", &SystemParams::omega);
    num("system.delta", &SystemParams::delta);
    num("system.omega_rabi", &SystemParams::omega_rabi);
    num("system.gamma", &SystemParams::gamma);
    num("system.eta_recoil", &SystemParams::eta_recoil);
    num("system.omega_laser", &SystemParams::omega_laser);
    cnum("system.c_g", &SystemParams::c_g);
    cnum("system.c_e", &SystemParams::c_e);
    cnum("system.alpha_g", &SystemParams::alpha_g);
    cnum("system.alpha_e", &SystemParams::alpha_e);
    k["system.g"] = {[](RunConfig& c, const std::string& v) {
                       const auto s = boost::to_lower_copy(boost::trim_copy(v));
                       if (s == "none" || s.empty()) {
                         c.params.g_coupling.reset();
                       } else {
                         c.params.g_coupling = to_double("system.g", v);
                       }
                     },
                     [](const RunConfig& c) {
                       return c.params.g_coupling ? fmt(*c.params.g_coupling) : std::string("none");
                     }};
    k["system.g_scale"] = {[](RunConfig& c, const std::string& v) {
                             const auto s = boost::to_lower_copy(boost::trim_copy(v));
                             if (s == "none" || s.empty()) {
                               c.params.g_scale.reset();
                             } else {
                               c.params.g_scale = to_double("system.g_scale", v);
                             }
                           },
                           [](const RunConfig& c) {
                             return c.params.g_scale ? fmt(*c.params.g_scale) : std::string("none");
                           }};
    k["system.g_convention"] = {
        [](RunConfig& c, const std::string& v) {
          c.params.g_convention = to_enum<GConvention>(
              "system.g_convention", v, {{"eq8", GConvention::Eq8}, {"eq15", GConvention::Eq15}});
        },
        [](const RunConfig& c) { return std::string(to_string(c.params.g_convention)); }};
    k["system.time_unit"] = {[](RunConfig& c, const std::string& v) { c.params.time_unit = boost::trim_copy(v); },
                             [](const RunConfig& c) { return c.params.time_unit; }};

    k["numerics.dim"] = {[](RunConfig& c, const std::string& v) {
                           c.params.dim = static_cast<std::size_t>(to_unsigned("numerics.dim", v));
                         },
                         [](const RunConfig& c) { return std::to_string(c.params.dim); }};
    k["numerics.courant"] = {[](RunConfig& c, const std::string& v) { c.master.courant = to_double("numerics.courant", v); },
                             [](const RunConfig& c) { return fmt(c.master.courant); }};
    k["numerics.trace_tol"] = {
        [](RunConfig& c, const std::string& v) { c.master.trace_tol = to_double("numerics.trace_tol", v); },
        [](const RunConfig& c) { return fmt(c.master.trace_tol); }};
    k["numerics.traj_dt"] = {[](RunConfig& c, const std::string& v) { c.ensemble.dt = to_double("numerics.traj_dt", v); },
                             [](const RunConfig& c) { return fmt(c.ensemble.dt); }};
    k["numerics.noise_substeps"] = {
        [](RunConfig& c, const std::string& v) {
          c.ensemble.noise_substeps = static_cast<std::size_t>(to_unsigned("numerics.noise_substeps", v));
        },
        [](const RunConfig& c) { return std::to_string(c.ensemble.noise_substeps); }};
    rnum("numerics.leakage_tol", &RunConfig::leakage_tol);
    k["numerics.allow_leakage"] = {
        [](RunConfig& c, const std::string& v) { c.allow_leakage = to_bool("numerics.allow_leakage", v); },
        [](const RunConfig& c) { return std::string(c.allow_leakage ? "true" : "false"); }};
    k["numerics.r_mode"] = {[](RunConfig& c, const std::string& v) {
                              c.r_mode = to_enum<analytic::RMode>(
                                  "numerics.r_mode", v,
                                  {{"consistent", analytic::RMode::Consistent}, {"literal", analytic::RMode::Literal}});
                            },
                            [](const RunConfig& c) { return std::string(analytic::to_string(c.r_mode)); }};
    k["numerics.phase_convention"] = {
        [](RunConfig& c, const std::string& v) {
          c.phase_convention = to_enum<analytic::PhaseConvention>(
              "numerics.phase_convention", v,
              {{"unitary", analytic::PhaseConvention::Unitary},
               {"printed", analytic::PhaseConvention::Printed},
               {"flipped-real", analytic::PhaseConvention::FlippedReal}});
        },
        [](const RunConfig& c) { return std::string(analytic::to_string(c.phase_convention)); }};
    k["numerics.coherent_form"] = {
        [](RunConfig& c, const std::string& v) {
          c.master.form = to_enum<master::CoherentForm>(
              "numerics.coherent_form", v,
              {{"full", master::CoherentForm::Full}, {"literal-eq18", master::CoherentForm::LiteralEq18}});
        },
        [](const RunConfig& c) { return std::string(master::to_string(c.master.form)); }};
    k["numerics.rate_law"] = {
        [](RunConfig& c, const std::string& v) {
          c.master.rate_law = to_enum<master::RateLaw>(
              "numerics.rate_law", v,
              {{"derived", master::RateLaw::Derived}, {"printed", master::RateLaw::Printed}});
        },
        [](const RunConfig& c) { return std::string(master::to_string(c.master.rate_law)); }};

    k["run.experiment"] = {[](RunConfig& c, const std::string& v) { c.experiment = to_experiment("run.experiment", v); },
                           [](const RunConfig& c) { return std::string(to_string(c.experiment)); }};
    rnum("run.t_max", &RunConfig::t_max);
    k["run.n_points"] = {[](RunConfig& c, const std::string& v) {
                           c.n_points = static_cast<std::size_t>(to_unsigned("run.n_points", v));
                         },
                         [](const RunConfig& c) { return std::to_string(c.n_points); }};
    k["run.n_traj"] = {[](RunConfig& c, const std::string& v) {
                         c.n_traj = static_cast<std::size_t>(to_unsigned("run.n_traj", v));
                       },
                       [](const RunConfig& c) { return std::to_string(c.n_traj); }};
    k["run.base_seed"] = {[](RunConfig& c, const std::string& v) { c.base_seed = to_unsigned("run.base_seed", v); },
                          [](const RunConfig& c) { return std::to_string(c.base_seed); }};
    k["run.dissipator"] = {
        [](RunConfig& c, const std::string& v) {
          c.master.preset = to_enum<master::DissipatorPreset>(
              "run.dissipator", v,
              {{"eq17", master::DissipatorPreset::Eq17},
               {"eq18", master::DissipatorPreset::Eq18},
               {"custom", master::DissipatorPreset::Custom}});
        },
        [](const RunConfig& c) { return std::string(master::to_string(c.master.preset)); }};
    k["run.kappa"] = {[](RunConfig& c, const std::string& v) { c.master.custom_kappa = to_double("run.kappa", v); },
                      [](const RunConfig& c) { return fmt(c.master.custom_kappa); }};
    k["run.engines"] = {[](RunConfig& c, const std::string& v) { c.engines = to_engines("run.engines", v); },
                        [](const RunConfig& c) { return join(c.engines); }};
    k["run.n_list"] = {[](RunConfig& c, const std::string& v) { c.n_list = to_list("run.n_list", v); },
                       [](const RunConfig& c) { return join(c.n_list); }};
    rnum("run.compare_tol", &RunConfig::compare_tol);
    rnum("run.stderr_tol", &RunConfig::stderr_tol);
    rnum("run.stderr_fraction", &RunConfig::stderr_fraction);
    rnum("run.rate_tol", &RunConfig::rate_tol);
    return k;
  }();
  return keys;
}

void assign(RunConfig& config, const std::string& key, const std::string& value) {
  const auto& keys = registry();
  const auto it = keys.find(key);
  if (it == keys.end()) throw ConfigError("config: unknown key '" + key + "'");
  it->second.set(config, value);
}

}  // namespace

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::AnalyticSweep: return "analytic-sweep";
    case Experiment::MasterSweep: return "master-sweep";
    case Experiment::EnsembleSweep: return "ensemble-sweep";
    case Experiment::Compare: return "compare";
    case Experiment::Rates: return "rates";
  }
  return "?";
}

const char* to_string(Engine e) {
  switch (e) {
    case Engine::Analytic: return "analytic";
    case Engine::Master: return "master";
    case Engine::Ensemble: return "ensemble";
  }
  return "?";
}

std::map<std::string, std::string> RunConfig::echo() const {
  std::map<std::string, std::string> out;
  for (const auto& [name, key] : registry()) out[name] = key.get(*this);
  return out;
}

std::vector<double> RunConfig::time_grid() const {
  std::vector<double> grid(n_points);
  const double denom = static_cast<double>(n_points - 1);
  for (std::size_t k = 0; k < n_points; ++k) grid[k] = t_max * static_cast<double>(k) / denom;
  return grid;
}

void RunConfig::validate() const {
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!params.g_coupling && !params.g_scale) {
    throw ConfigError("config: system.g or system.g_scale must be set");
  }
  if (!(t_max > 0.0)) throw ConfigError("config: run.t_max must be > 0");
  if (n_points < 2) throw ConfigError("config: run.n_points must be >= 2");
  if (n_traj < 1) throw ConfigError("config: run.n_traj must be >= 1");
  if (engines.size() < 2 && experiment == Experiment::Compare) {
    throw ConfigError("config: run.engines needs at least two engines for compare");
  }
  if (n_list.empty()) throw ConfigError("config: run.n_list must not be empty");
  if (!(master.courant > 0.0)) throw ConfigError("config: numerics.courant must be > 0");
  if (!(master.trace_tol > 0.0)) throw ConfigError("config: numerics.trace_tol must be > 0");
  if (!(ensemble.dt > 0.0)) throw ConfigError("config: numerics.traj_dt must be > 0");
  if (ensemble.noise_substeps < 1) throw ConfigError("config: numerics.noise_substeps must be >= 1");
  if (!(leakage_tol > 0.0)) throw ConfigError("config: numerics.leakage_tol must be > 0");
  if (master.preset == master::DissipatorPreset::Custom && !(master.custom_kappa >= 0.0)) {
    throw ConfigError("config: run.kappa must be >= 0");
  }
  if (!(compare_tol > 0.0) || !(stderr_tol > 0.0) || !(rate_tol > 0.0)) {
    throw ConfigError("config: tolerances must be > 0");
  }
  if (!(stderr_fraction > 0.0 && stderr_fraction <= 1.0)) {
    throw ConfigError("config: run.stderr_fraction must lie in (0, 1]");
  }
}

RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig config;
  bool g_set = false;
  bool g_scale_set = false;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      assign(config, full, value.data());
      g_set |= full == "system.g";
      g_scale_set |= full == "system.g_scale";
    }
  }
  // A file that gives only g_scale means "derive g from it".
  if (g_scale_set && !g_set) config.params.g_coupling.reset();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("config: override '" + assignment + "' is not section.key=value");
  }
  const std::string key = boost::trim_copy(assignment.substr(0, eq));
  assign(config, key, assignment.substr(eq + 1));
}

}  // namespace iondecoh
