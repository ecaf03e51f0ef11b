#include "plqks/cli.hpp"

#include "plqks/analysis.hpp"
#include "plqks/errors.hpp"
#include "plqks/io.hpp"
#include "plqks/oracle.hpp"
#include "plqks/sim.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <limits>
#include <ostream>

namespace plqks::cli {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

const char* oracle_name(Oracle o) {
  switch (o) {
    case Oracle::kRts: return "rts";
    case Oracle::kDense: return "dense";
    case Oracle::kNone: break;
  }
  return "none";
}

json solver_json(const SolverOptions& s) {
  return {{"tol", s.tol_res},
          {"tol_mu", s.tol_mu},
          {"max_iter", s.max_iter},
          {"mu_reduction", s.mu_reduce},
          {"step_frac", s.step_frac}};
}

bool all_l2(const std::vector<PlqPenalty>& ps) {
  for (const PlqPenalty& p : ps) {
    for (std::size_t i = 0; i < p.num_blocks(); ++i) {
      const auto& atom = p.block(i).atom;
      if (!atom || atom->tag != AtomKind::Tag::kL2) return false;
    }
  }
  return true;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

NoiseSpec::Base noise_base(const std::string& name) {
  if (name == "gaussian") return NoiseSpec::Base::kGaussian;
  if (name == "laplace") return NoiseSpec::Base::kLaplace;
  throw InvalidArgument("noise: unknown distribution '" + name + "' (expected gaussian or laplace)");
}

// Distinct stream for the measurement noise of a given seed.
std::uint64_t measurement_seed(std::uint64_t seed) { return seed ^ 0x9e3779b97f4a7c15ULL; }

std::string vec_str(const VectorXd& v) {
  std::string s = "[";
  for (Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + io::format_double(v(i));
  return s + "]";
}

PlqPenalty single_block(const PlqBlock& blk) {
  return blk.atom ? make_atom(*blk.atom) : PlqPenalty::from_data(blk.data);
}

// Prints the report for one penalty; returns true when both conditions hold.
bool report_penalty(const std::string& label, const PlqPenalty& p, std::ostream& out) {
  const ConeCheckReport coer = check_coercivity(p);
  const ConeCheckReport fin = check_finite(p);
  out << label << ": blocks=" << p.num_blocks() << " dim_y=" << p.dim_y() << '\n';
  out << "  coercive: " << (coer.satisfied ? "yes" : "no") << '\n';
  if (coer.witness) out << "    witness (y-space): " << vec_str(*coer.witness) << '\n';
  out << "  finite: " << (fin.satisfied ? "yes" : "no") << '\n';
  if (fin.witness) out << "    witness (u-space): " << vec_str(*fin.witness) << '\n';
  for (std::size_t i = 0; i < p.num_blocks(); ++i) {
    const PlqBlock& blk = p.block(i);
    if (blk.data.dim_y() != 1) continue;
    const PlqPenalty single = single_block(blk);
    out << "  block " << i << ": ";
    if (blk.atom) out << blk.atom->name() << ' ';
    if (!check_coercivity(single).satisfied) {
      out << "c1 undefined (not coercive)\n";
      continue;
    }
    try {
      out << "c1 = " << io::format_double(normalization_constant(single)) << '\n';
    } catch (const Error& e) {
      out << "c1 undefined (" << e.what() << ")\n";
    }
  }
  return coer.satisfied && fin.satisfied;
}

}  // namespace

int cmd_fit(const FitOptions& opts, std::ostream& out, std::ostream& err) {
  const auto t_start = Clock::now();
  json report{{"command", "fit"},
              {"config", opts.config.string()},
              {"measurements", opts.measurements.string()},
              {"output", opts.output.string()},
              {"oracle", oracle_name(opts.oracle)},
              {"options", solver_json(opts.solver)}};
  try {
    opts.solver.validate();
    const io::ModelConfig cfg = io::load_config(opts.config);
    const std::vector<VectorXd> z = io::read_csv(opts.measurements, cfg.m);
    const StateSpaceModel model = cfg.model(static_cast<Index>(z.size()));
    model.validate();
    const json pspec = opts.process_penalty ? io::penalty_spec_from_string(*opts.process_penalty)
                                            : cfg.process_penalty;
    const json vspec = opts.measurement_penalty
                           ? io::penalty_spec_from_string(*opts.measurement_penalty)
                           : cfg.measurement_penalty;
    report["process_penalty"] = pspec;
    report["measurement_penalty"] = vspec;
    const std::vector<PlqPenalty> pw = io::penalties_from_json(pspec, cfg.n);
    const std::vector<PlqPenalty> pv = io::penalties_from_json(vspec, cfg.m);
    const double t_parse = ms_since(t_start);

    auto t0 = Clock::now();
    const SmootherProblem problem = build_problem(model, pw, pv, z);
    const double t_build = ms_since(t0);

    t0 = Clock::now();
    std::vector<VectorXd> x_hat;
    bool converged = true;
    if (opts.oracle == Oracle::kRts) {
      if (!all_l2(pw) || !all_l2(pv)) {
        throw InvalidArgument("fit: --oracle rts requires l2 process and measurement penalties");
      }
      x_hat = rts_smooth(model, z);
      VectorXd x(cfg.n * model.num_steps());
      for (std::size_t k = 0; k < x_hat.size(); ++k) x.segment(static_cast<Index>(k) * cfg.n, cfg.n) = x_hat[k];
      report["objective"] = objective(problem, x);
    } else {
      const SmootherResult res = opts.oracle == Oracle::kDense ? dense_reference_solve(problem, opts.solver)
                                                               : ip_solve(problem, opts.solver);
      x_hat = res.x_hat;
      converged = res.converged;
      report["iterations"] = res.iterations;
      report["objective"] = res.objective_value;
      report["final_residual"] = res.final_residual;
      report["final_mu"] = res.final_mu;
      report["max_complementarity"] = res.max_complementarity;
    }
    report["converged"] = converged;
    const double t_solve = ms_since(t0);

    t0 = Clock::now();
    io::write_csv(opts.output, x_hat, "x");
    const double t_write = ms_since(t0);
    report["timing_ms"] = {{"parse", t_parse},
                           {"build", t_build},
                           {"solve", t_solve},
                           {"write", t_write},
                           {"total", ms_since(t_start)}};
    write_json(opts.output.string() + ".report.json", report);

    out << "fit: " << x_hat.size() << " states written to " << opts.output.string();
    if (report.contains("iterations")) out << " (" << report["iterations"].get<int>() << " iterations)";
    out << '\n';
    if (!converged) {
      err << "fit: not converged after " << opts.solver.max_iter << " iterations; partial result written\n";
      return kNotConverged;
    }
    return kOk;
  } catch (const Error& e) {
    err << "fit: " << e.what() << '\n';
  } catch (const json::exception& e) {
    err << "fit: " << e.what() << '\n';
  }
  return kInputError;
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const io::ModelConfig cfg = io::load_config(opts.config);
    const std::optional<Index> N = opts.steps ? opts.steps : cfg.N;
    if (!N) throw InvalidArgument("simulate: number of steps not given (--steps or config field 'N')");
    if (*N <= 0) throw InvalidArgument("simulate: --steps must be positive");
    const StateSpaceModel model = cfg.model(*N);
    NoiseSpec w{noise_base(opts.w_noise), opts.w_outlier_prob, opts.w_outlier_scale, opts.seed};
    NoiseSpec v{noise_base(opts.v_noise), opts.v_outlier_prob, opts.v_outlier_scale, measurement_seed(opts.seed)};
    const Simulation sim = simulate(model, w, v);

    const std::string states = opts.prefix + "_states.csv";
    const std::string meas = opts.prefix + "_measurements.csv";
    io::write_csv(states, sim.x_true, "x");
    io::write_csv(meas, sim.z, "z");
    const auto noise_json = [&](const NoiseSpec& s, std::size_t outliers) {
      return json{{"base", s.base_name()},
                  {"outlier_prob", s.outlier_prob},
                  {"outlier_scale", s.outlier_scale},
                  {"seed", s.seed},
                  {"realized_outliers", outliers},
                  {"realized_fraction", static_cast<double>(outliers) / static_cast<double>(*N)}};
    };
    const json meta{{"command", "simulate"},
                    {"config", opts.config.string()},
                    {"seed", opts.seed},
                    {"rng", kRngAlgorithm},
                    {"N", *N},
                    {"process_noise", noise_json(w, sim.w_outliers)},
                    {"measurement_noise", noise_json(v, sim.v_outliers)},
                    {"states", states},
                    {"measurements", meas}};
    write_json(opts.prefix + "_meta.json", meta);
    out << "simulate: " << *N << " steps written to " << states << " and " << meas << '\n';
    return kOk;
  } catch (const Error& e) {
    err << "simulate: " << e.what() << '\n';
  } catch (const json::exception& e) {
    err << "simulate: " << e.what() << '\n';
  }
  return kInputError;
}

int cmd_check(const std::filesystem::path& config, std::ostream& out, std::ostream& err) {
  try {
    const io::ModelConfig cfg = io::load_config(config);
    const std::vector<PlqPenalty> pw = io::penalties_from_json(cfg.process_penalty, cfg.n);
    const std::vector<PlqPenalty> pv = io::penalties_from_json(cfg.measurement_penalty, cfg.m);
    bool ok = true;
    const auto label = [](const char* what, std::size_t i, std::size_t count) {
      return count == 1 ? std::string(what) : std::string(what) + " [step " + std::to_string(i + 1) + "]";
    };
    for (std::size_t i = 0; i < pw.size(); ++i) ok = report_penalty(label("process", i, pw.size()), pw[i], out) && ok;
    for (std::size_t i = 0; i < pv.size(); ++i) {
      ok = report_penalty(label("measurement", i, pv.size()), pv[i], out) && ok;
    }
    out << (ok ? "all penalties coercive and finite\n" : "check failed\n");
    return ok ? kOk : kCheckFailed;
  } catch (const Error& e) {
    err << "check: " << e.what() << '\n';
  } catch (const json::exception& e) {
    err << "check: " << e.what() << '\n';
  }
  return kInputError;
}

SmootherProblem bench_problem(const BenchOptions& opts, Index N) {
  const Index n = opts.n, m = opts.m;
  MatrixXd G = MatrixXd::Identity(n, n);
  for (Index i = 0; i + 1 < n; ++i) G(i, i + 1) = 0.1;
  MatrixXd H = MatrixXd::Zero(m, n);
  for (Index i = 0; i < m; ++i) H(i, i % n) = 1.0;
  const StateSpaceModel model = StateSpaceModel::constant(N, G, H, 0.1 * MatrixXd::Identity(n, n),
                                                          MatrixXd::Identity(m, m), VectorXd::Zero(n));
  const NoiseSpec w{NoiseSpec::Base::kGaussian, 0.0, 1.0, opts.seed};
  const NoiseSpec v{NoiseSpec::Base::kGaussian, 0.05, 10.0, measurement_seed(opts.seed)};
  const Simulation sim = simulate(model, w, v);
  const std::vector<PlqPenalty> pw{io::penalty_from_json(io::penalty_spec_from_string(opts.process_penalty), n)};
  const std::vector<PlqPenalty> pv{
      io::penalty_from_json(io::penalty_spec_from_string(opts.measurement_penalty), m)};
  return build_problem(model, pw, pv, sim.z);
}

std::vector<BenchRow> run_bench(const BenchOptions& opts) {
  if (opts.n <= 0 || opts.m <= 0) throw InvalidArgument("bench: --n and --m must be positive");
  if (opts.N_list.empty()) throw InvalidArgument("bench: empty --N list");
  if (opts.repeats <= 0) throw InvalidArgument("bench: --repeats must be positive");
  opts.solver.validate();
  std::vector<SmootherProblem> problems;
  std::vector<BenchRow> rows;
  for (const Index N : opts.N_list) {
    if (N <= 0) throw InvalidArgument("bench: N must be positive");
    problems.push_back(bench_problem(opts, N));
    BenchRow row;
    row.N = N;
    row.ms = std::numeric_limits<double>::infinity();
    rows.push_back(row);
  }
  // Each sample of a small N batches enough solves to span about as much work
  // as one solve of the largest N, and samples are interleaved across N, so
  // that slow phases of a shared machine hit every size alike. The fastest
  // sample per N is kept.
  const Index N_max = *std::max_element(opts.N_list.begin(), opts.N_list.end());
  for (int r = 0; r < opts.repeats; ++r) {
    for (std::size_t i = 0; i < problems.size(); ++i) {
      const Index batch = std::max<Index>(1, N_max / rows[i].N);
      const auto t0 = Clock::now();
      for (Index b = 0; b < batch; ++b) {
        const SmootherResult res = ip_solve(problems[i], opts.solver);
        rows[i].iterations = res.iterations;
        rows[i].converged = res.converged;
      }
      rows[i].ms = std::min(rows[i].ms, ms_since(t0) / static_cast<double>(batch));
    }
  }
  return rows;
}

int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const std::vector<BenchRow> rows = run_bench(opts);
    bool all_converged = true;
    out << "N,ms,iterations,converged\n";
    for (const BenchRow& r : rows) {
      out << r.N << ',' << io::format_double(r.ms) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
      all_converged = all_converged && r.converged;
    }
    return all_converged ? kOk : kNotConverged;
  } catch (const Error& e) {
    err << "bench: " << e.what() << '\n';
  }
  return kInputError;
}

}  // namespace plqks::cli
