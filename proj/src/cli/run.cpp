#include "plqks/cli.hpp"

#include <CLI11.hpp>

#include <map>
#include <ostream>

namespace plqks::cli {

namespace {

void add_solver_flags(CLI::App* cmd, SolverOptions& s) {
  cmd->add_option("--tol", s.tol_res, "Stop when ||F_0||_inf is below this")->check(CLI::PositiveNumber);
  cmd->add_option("--tol-mu", s.tol_mu, "Stop when mu is below this")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", s.max_iter, "Interior-point iteration limit")->check(CLI::PositiveNumber);
  cmd->add_option("--mu-reduction", s.mu_reduce, "Barrier reduction factor in (0, 1)");
  cmd->add_option("--step-frac", s.step_frac, "Fraction-to-boundary factor in (0, 1)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kalman smoothing with piecewise linear-quadratic penalties", "plqks"};
  app.require_subcommand(1);

  FitOptions fit;
  std::optional<std::string> both;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Smooth a measurement series");
  fit_cmd->add_option("--config", fit.config, "Model JSON")->required();
  fit_cmd->add_option("--measurements", fit.measurements, "N x m measurement CSV")->required();
  fit_cmd->add_option("--output", fit.output, "Smoothed states CSV")->required();
  const std::map<std::string, Oracle> oracles{{"none", Oracle::kNone}, {"rts", Oracle::kRts}, {"dense", Oracle::kDense}};
  fit_cmd->add_option("--oracle", fit.oracle, "Solve with rts, dense or none (interior point)")
      ->transform(CLI::CheckedTransformer(oracles, CLI::ignore_case));
  fit_cmd->add_option("--penalty", both, "Override both penalties, e.g. l2 or huber:1");
  fit_cmd->add_option("--process-penalty", fit.process_penalty, "Override the process penalty");
  fit_cmd->add_option("--measurement-penalty", fit.measurement_penalty, "Override the measurement penalty");
  add_solver_flags(fit_cmd, fit.solver);

  SimulateOptions sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Draw a trajectory and measurements");
  sim_cmd->add_option("--config", sim.config, "Model JSON")->required();
  sim_cmd->add_option("--output", sim.prefix, "Output prefix")->required();
  sim_cmd->add_option("--steps", sim.steps, "Number of time steps (defaults to config N)");
  sim_cmd->add_option("--seed", sim.seed, "RNG seed");
  sim_cmd->add_option("--w-noise", sim.w_noise, "gaussian or laplace");
  sim_cmd->add_option("--v-noise", sim.v_noise, "gaussian or laplace");
  sim_cmd->add_option("--w-outlier-prob", sim.w_outlier_prob);
  sim_cmd->add_option("--w-outlier-scale", sim.w_outlier_scale);
  sim_cmd->add_option("--v-outlier-prob", sim.v_outlier_prob);
  sim_cmd->add_option("--v-outlier-scale", sim.v_outlier_scale);

  std::filesystem::path check_config;
  CLI::App* check_cmd = app.add_subcommand("check", "Coercivity and finiteness of the config penalties");
  check_cmd->add_option("--config", check_config, "Model JSON")->required();

  BenchOptions bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Time ip_solve over a list of series lengths");
  bench_cmd->add_option("--n", bench.n, "State dimension")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--m", bench.m, "Measurement dimension")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--N", bench.N_list, "Comma-separated series lengths")->delimiter(',');
  bench_cmd->add_option("--process-penalty", bench.process_penalty);
  bench_cmd->add_option("--measurement-penalty", bench.measurement_penalty);
  bench_cmd->add_option("--seed", bench.seed);
  bench_cmd->add_option("--repeats", bench.repeats)->check(CLI::PositiveNumber);
  add_solver_flags(bench_cmd, bench.solver);

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kInputError;
  }

  if (*fit_cmd) {
    if (both) {
      if (!fit.process_penalty) fit.process_penalty = both;
      if (!fit.measurement_penalty) fit.measurement_penalty = both;
    }
    return cmd_fit(fit, out, err);
  }
  if (*sim_cmd) return cmd_simulate(sim, out, err);
  if (*check_cmd) return cmd_check(check_config, out, err);
  return cmd_bench(bench, out, err);
}

}  // namespace plqks::cli
