// Command-line front end: closed-loop simulation, model verification, and
// forward reach-tube dumps for the bundled platoon configuration.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "rta/barrier.hpp"
#include "rta/harness.hpp"
#include "rta/platoon.hpp"
#include "rta/reachability.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerificationFailure = 1;
constexpr int kExitConfigError = 2;

int run_simulate(const std::string& config_path, const std::optional<std::string>& mode,
                 const std::optional<std::uint64_t>& seed,
                 const std::optional<std::string>& out) {
  rta::SimulationConfig cfg = rta::SimulationConfig::from_json_file(config_path);
  if (mode) cfg.controller_mode = rta::mode_from_string(*mode);
  if (seed) cfg.seed = *seed;
  if (out) cfg.output_path = *out;

  const rta::PlatoonModel model = rta::build_platoon(cfg.platoon);
  const rta::TrajectoryRecord record = rta::run_simulation(cfg, model);

  std::printf("simulated %zu steps, mode %s, seed %llu\n", record.rows.size(),
              rta::to_string(cfg.controller_mode),
              static_cast<unsigned long long>(cfg.seed));
  std::printf("  min h          : %.6g\n", record.min_h());
  std::printf("  max |z|        : %.6g (limit %.6g)\n", record.max_abs_z(), cfg.platoon.z_limit);
  std::printf("  passed-desired : %ld\n", record.count(rta::FilterStatus::passed_desired));
  std::printf("  projected      : %ld\n", record.count(rta::FilterStatus::projected));
  std::printf("  backup-fallback: %ld\n", record.count(rta::FilterStatus::backup_fallback));
  std::printf("  unsafe flag    : %s\n", record.unsafe_flag ? "SET" : "clear");
  if (record.error_flag) std::printf("  error flag     : SET (trajectory truncated)\n");

  if (!cfg.output_path.empty()) {
    const std::filesystem::path csv_path = cfg.output_path;
    rta::export_csv(record, csv_path);
    std::printf("  wrote %s\n", csv_path.string().c_str());
    std::filesystem::path svg_path = csv_path;
    svg_path.replace_extension(".svg");
    rta::export_plot(record, model, svg_path);
    std::printf("  wrote %s\n", svg_path.string().c_str());
  }
  return record.unsafe_flag || record.error_flag ? kExitVerificationFailure : kExitOk;
}

int run_verify(const std::string& config_path, long samples, long mc_trials) {
  const rta::SimulationConfig cfg = rta::SimulationConfig::from_json_file(config_path);
  const rta::PlatoonModel model = rta::build_platoon(cfg.platoon);
  bool ok = true;

  const rta::IntervalVector sample_box =
      rta::IntervalVector::centered(Eigen::VectorXd::Constant(model.config.state_dim(), 6.0));

  const rta::DecompositionReport forward =
      rta::check_decomposition(model.decomposition, model.backup_loop, sample_box, model.config.W,
                               samples, cfg.seed + 1);
  std::printf("[%s] forward %s\n", forward.ok() ? "PASS" : "FAIL", forward.describe().c_str());
  ok = ok && forward.ok();

  rta::ClosedLoopField reversed = model.backup_loop;
  reversed.F = [&model](const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
    return (-model.backup_loop.F(x, w)).eval();
  };
  const rta::DecompositionReport reverse =
      rta::check_decomposition(model.reverse_decomposition, reversed, sample_box, model.config.W,
                               samples, cfg.seed + 2);
  std::printf("[%s] reverse %s\n", reverse.ok() ? "PASS" : "FAIL", reverse.describe().c_str());
  ok = ok && reverse.ok();

  const rta::InvarianceReport invariance =
      rta::verify_backup_invariance(model, samples, cfg.seed + 3);
  std::printf("[%s] %s\n", invariance.ok() ? "PASS" : "FAIL", invariance.describe().c_str());
  ok = ok && invariance.ok();

  rta::Assumption1Params params;
  params.mc_trials = mc_trials;
  params.mc_seed = cfg.seed + 4;
  const rta::Assumption1Report assumption1 = rta::check_assumption1(
      model.backup_loop, model.reverse_decomposition, model.policy.h, model.config.W,
      model.sb_bounding_box, model.unsafe, model.falsification_box, model.system.statespace,
      model.config.T_b, params);
  std::printf("[%s] %s\n", assumption1.passed() ? "PASS" : "FAIL",
              assumption1.describe().c_str());
  ok = ok && assumption1.passed();

  return ok ? kExitOk : kExitVerificationFailure;
}

int run_reach(const std::string& config_path, double horizon) {
  const rta::SimulationConfig cfg = rta::SimulationConfig::from_json_file(config_path);
  const rta::PlatoonModel model = rta::build_platoon(cfg.platoon);

  const rta::ReachTube tube =
      rta::forward_overapprox(model.decomposition, model.config.W,
                              rta::IntervalVector::point(cfg.x0), model.system.statespace,
                              horizon, cfg.dt_embed);
  const int n = model.config.state_dim();
  std::printf("t");
  for (int i = 0; i < n; ++i) std::printf(",lo%d", i + 1);
  for (int i = 0; i < n; ++i) std::printf(",hi%d", i + 1);
  std::printf(",valid\n");
  for (std::size_t k = 0; k < tube.size(); ++k) {
    std::printf("%.9g", tube.times[k]);
    for (int i = 0; i < n; ++i) std::printf(",%.9g", tube.states[k].under[i]);
    for (int i = 0; i < n; ++i) std::printf(",%.9g", tube.states[k].over[i]);
    std::printf(",%d\n", tube.valid[k] ? 1 : 0);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"runtime-assured control with embedding-based reach bounds"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> mode_override;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
  long samples = 10000;
  long mc_trials = 10000;
  double horizon = 1.0;

  auto* simulate = app.add_subcommand("simulate", "run a closed-loop simulation");
  simulate->add_option("config", config_path, "JSON configuration file")->required();
  simulate->add_option("--mode", mode_override,
                       "controller mode: desired-only|vanilla-cbf|asif|backup-only");
  simulate->add_option("--seed", seed_override, "disturbance seed");
  simulate->add_option("--out", out_override, "output CSV path (plot written alongside)");

  auto* verify = app.add_subcommand("verify", "run the model verification reports");
  verify->add_option("config", config_path, "JSON configuration file")->required();
  verify->add_option("--samples", samples, "sample count for the sampled checks");
  verify->add_option("--mc-trials", mc_trials, "falsification trial count");

  auto* reach = app.add_subcommand("reach", "print the forward over-approximation tube as CSV");
  reach->add_option("config", config_path, "JSON configuration file")->required();
  reach->add_option("--horizon", horizon, "tube horizon in seconds")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      return run_simulate(config_path, mode_override, seed_override, out_override);
    }
    if (verify->parsed()) return run_verify(config_path, samples, mc_trials);
    if (reach->parsed()) return run_reach(config_path, horizon);
  } catch (const rta::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitVerificationFailure;
  }
  return kExitOk;
}
