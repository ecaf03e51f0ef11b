#pragma once

#include "plqks/ip_solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace plqks::cli {

/// Exit codes shared by every command.
enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kNotConverged = 2,
  kCheckFailed = 3,
};

enum class Oracle { kNone, kRts, kDense };

struct FitOptions {
  std::filesystem::path config;
  std::filesystem::path measurements;
  std::filesystem::path output;
  SolverOptions solver;
  Oracle oracle = Oracle::kNone;
  /// Short-form overrides of the config penalties ("huber:1", ...).
  std::optional<std::string> process_penalty, measurement_penalty;
};

struct SimulateOptions {
  std::filesystem::path config;
  std::string prefix;
  std::optional<Eigen::Index> steps;
  std::uint64_t seed = 0;
  std::string w_noise = "gaussian", v_noise = "gaussian";
  double w_outlier_prob = 0.0, w_outlier_scale = 1.0;
  double v_outlier_prob = 0.0, v_outlier_scale = 1.0;
};

struct BenchOptions {
  Eigen::Index n = 2;
  Eigen::Index m = 1;
  std::vector<Eigen::Index> N_list{500, 1000, 2000, 4000};
  std::string process_penalty = "huber:1";
  std::string measurement_penalty = "huber:1";
  std::uint64_t seed = 1;
  int repeats = 3;
  SolverOptions solver;
};

struct BenchRow {
  Eigen::Index N = 0;
  double ms = 0.0;  ///< fastest per-solve ip_solve wall time over the repeats
  int iterations = 0;
  bool converged = false;
};

/// The synthetic problem solved by bench for one N: a chain of integrators
/// with Gaussian process noise and 5% scale-10 measurement outliers.
SmootherProblem bench_problem(const BenchOptions& opts, Eigen::Index N);

std::vector<BenchRow> run_bench(const BenchOptions& opts);

int cmd_fit(const FitOptions& opts, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_check(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err);

/// Parses argv (argv[0] is the program name) and dispatches.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace plqks::cli
