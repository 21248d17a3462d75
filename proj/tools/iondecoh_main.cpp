// iondecoh: run, compare, rates.
//
//   iondecoh run     --config fig1.ini --out results/
//   iondecoh compare --config compare.ini --out results/ --seed 7
//   iondecoh rates   --config rates.ini --override system.gamma=0.1
//
// Exit codes: 0 ok, 1 invariant check failed, 2 configuration error,
// 3 numerical instability, 4 truncation leakage.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "iondecoh/config.hpp"
#include "iondecoh/errors.hpp"
#include "iondecoh/experiments.hpp"

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Options& opts) {
  cmd->add_option("--config", opts.config, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", opts.seed, "base seed for the trajectory ensemble");
  cmd->add_option("--override", opts.overrides, "section.key=value, may be repeated");
}

int run(const Options& opts, std::optional<iondecoh::Experiment> forced) {
  using namespace iondecoh;
  RunConfig config;
  try {
    if (!opts.config.empty()) config = load_config(opts.config);
    for (const auto& o : opts.overrides) apply_override(config, o);
    if (opts.seed) config.base_seed = *opts.seed;
    if (forced) config.experiment = *forced;
  } catch (const ConfigError& e) {
    std::cerr << "iondecoh: " << e.what() << '\n';
    return kConfigError;
  }
  const RunOutcome outcome = execute(config, opts.out);
  std::ostream& os = outcome.exit_code == kOk ? std::cout : std::cerr;
  os << "iondecoh: " << to_string(config.experiment) << ": " << outcome.message << '\n';
  if (!outcome.csv.empty()) os << "  csv:    " << outcome.csv.string() << '\n';
  os << "  report: " << outcome.report.string() << '\n';
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoherence of a trapped-ion qubit under a fluctuating trap frequency"};
  app.require_subcommand(1);

  Options run_opts, compare_opts, rates_opts;
  auto* run_cmd = app.add_subcommand("run", "run the experiment named in [run] experiment");
  auto* compare_cmd = app.add_subcommand("compare", "cross-check the engines listed in [run] engines");
  auto* rates_cmd = app.add_subcommand("rates", "fit Fock-state dephasing rates for [run] n_list");
  add_common(run_cmd, run_opts);
  add_common(compare_cmd, compare_opts);
  add_common(rates_cmd, rates_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : iondecoh::kConfigError;
  }

  if (run_cmd->parsed()) return run(run_opts, std::nullopt);
  if (compare_cmd->parsed()) return run(compare_opts, iondecoh::Experiment::Compare);
  return run(rates_opts, iondecoh::Experiment::Rates);
}
