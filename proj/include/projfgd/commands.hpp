#pragma once

// The fpgd subcommands. Each returns a process exit code; ConfigError and
// UnknownSuite propagate so the caller can map them to EX_USAGE (64).

#include "projfgd/io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>
#include <variant>

namespace projfgd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitMaxIters = 2;
inline constexpr int kExitUsage = 64;

// ---------------------------------------------------------------------------
// Logging

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

inline LogLevel log_level_from_env() {
  const char* v = std::getenv("FPGD_LOG");
  if (v == nullptr) return LogLevel::Info;
  const std::string s(v);
  if (s == "error") return LogLevel::Error;
  if (s == "debug") return LogLevel::Debug;
  return LogLevel::Info;
}

class Logger {
public:
  explicit Logger(LogLevel level = log_level_from_env(), std::ostream& out = std::cerr) : level_(level), out_(&out) {}

  void error(const std::string& msg) const { write(LogLevel::Error, "error", msg); }
  void info(const std::string& msg) const { write(LogLevel::Info, "info", msg); }
  void debug(const std::string& msg) const { write(LogLevel::Debug, "debug", msg); }
  bool enabled(LogLevel l) const { return static_cast<int>(l) <= static_cast<int>(level_); }

private:
  void write(LogLevel l, const char* tag, const std::string& msg) const {
    if (!enabled(l)) return;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    *out_ << "fpgd [" << tag << "] " << msg << '\n';
  }

  LogLevel level_;
  std::ostream* out_;
};

// ---------------------------------------------------------------------------
// Instances

using AnyInstance = std::variant<ProblemInstance<double>, ProblemInstance<Complex>>;

inline AnyInstance load_instance_files(const ProblemSpec& p) {
  if (p.ensemble_path.empty() || p.instance_path.empty())
    throw ConfigError("problem kind 'file' needs ensemble_path and instance_path");
  const Json ens = read_json_file(p.ensemble_path);
  const Json comp = read_json_file(p.instance_path);
  if (ensemble_field(ens) == "real") return instance_from_json<double>(ens, comp);
  return instance_from_json<Complex>(ens, comp);
}

inline AnyInstance make_instance(const ProblemSpec& p, std::uint64_t seed) {
  try {
    if (p.kind == "qst") {
      QstParams q;
      q.qubits = p.qubits;
      q.rank = p.rank;
      q.c_sam = p.c_sam;
      q.noise_norm = p.noise_norm;
      q.seed = seed;
      q.scaling = pauli_scaling_from_string(p.pauli_scaling);
      return gen_qst(q);
    }
    if (p.kind == "synthetic") {
      SyntheticParams s;
      s.n = p.n;
      s.rank = p.rank;
      s.m = p.m > 0 ? p.m : 6 * p.rank * p.n;
      s.condition_number = p.condition_number;
      s.noise_norm = p.noise_norm;
      s.seed = seed;
      return gen_synthetic(s);
    }
    if (p.kind == "phase_retrieval") {
      PhaseRetrievalParams r;
      r.n = p.n;
      r.sparsity = p.sparsity;
      r.m = p.m > 0 ? p.m : 8 * p.n;
      r.noise_norm = p.noise_norm;
      r.lambda = p.lambda;
      r.lambda_factor = p.lambda_factor;
      r.seed = seed;
      if (p.design == "gaussian") {
        r.design = PhaseRetrievalDesign::Gaussian;
      } else if (p.design == "octanary_cdp") {
        r.design = PhaseRetrievalDesign::OctanaryCdp;
      } else {
        throw ConfigError("unknown phase retrieval design '" + p.design + "'");
      }
      return gen_phase_retrieval(r);
    }
    if (p.kind == "file") return load_instance_files(p);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid problem: ") + e.what());
  } catch (const DimensionMismatch& e) {
    throw ConfigError(std::string("invalid problem: ") + e.what());
  }
  throw ConfigError("unknown problem kind '" + p.kind + "'");
}

inline std::filesystem::path prepare_out_dir(const std::string& dir) {
  std::filesystem::path p(dir.empty() ? "." : dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw Error("cannot create output directory '" + p.string() + "': " + ec.message());
  return p;
}

// ---------------------------------------------------------------------------
// solve

struct SolveOutcome {
  SolveSummary summary;
  SolverConfig config;
};

/// Runs the configured solver on an instance, streaming trace rows to `trace_out` when given.
template <Field S>
SolveOutcome run_solve(const ProblemInstance<S>& inst, const RunConfig& rc, std::ostream* trace_out = nullptr) {
  SolveOutcome out;
  out.config = solver_config(rc, inst.rank);
  const bool have_truth = inst.truth_factor.cols() == out.config.rank && inst.truth_x.norm() > 0.0;
  if (!have_truth) out.config.record_truth_dist = false;
  SolveOptions<S> opts;
  if (trace_out) {
    *trace_out << kTraceHeader << '\n';
    opts.on_record = [trace_out](const IterationRecord& r) { *trace_out << trace_csv_row(r) << '\n'; };
  }
  const Algorithm algo = algorithm_from_string(rc.solver.algorithm);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const SolveResult<S> res =
        algo == Algorithm::ProjFgd ? projfgd_solve<S>(inst, out.config, opts) : fgd_solve<S>(inst, out.config, opts);
    out.summary.status = res.trace.status;
    out.summary.iters = res.trace.iterations();
    out.summary.final_objective = res.trace.records.back().objective;
    if (inst.truth_x.norm() > 0.0)
      out.summary.final_rel_error = relative_error<S>(to_x<S>(res.factor), inst.truth_x);
  } catch (const Error& e) {
    out.summary.error = e.what();
  }
  out.summary.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline int solve_exit_code(const SolveSummary& s) {
  if (!s.error.empty()) return kExitFailure;
  switch (s.status) {
    case SolveStatus::Converged: return kExitOk;
    case SolveStatus::MaxIters: return kExitMaxIters;
    case SolveStatus::Diverged: return kExitFailure;
  }
  return kExitFailure;
}

/// Writes trace.csv and summary.json. Exit 0 converged, 2 max iterations, 1 divergence or numeric error.
inline int cmd_solve(const RunConfig& rc, const std::string& out_dir, const Logger& log = Logger()) {
  const AnyInstance any = make_instance(rc.problem, rc.seed);
  solver_config(rc, 1);  // reject bad solver settings before creating any output
  const auto dir = prepare_out_dir(out_dir);
  std::ofstream trace(dir / "trace.csv", std::ios::binary | std::ios::trunc);
  if (!trace) throw Error("cannot write '" + (dir / "trace.csv").string() + "'");
  const SolveOutcome res = std::visit([&](const auto& inst) { return run_solve(inst, rc, &trace); }, any);
  trace.close();
  write_json_file((dir / "summary.json").string(), summary_to_json(res.summary, res.config, rc));
  if (!res.summary.error.empty()) {
    log.error("solve failed: " + res.summary.error);
  } else {
    std::string msg = std::string("solve ") + to_string(res.summary.status) + " after " +
                      std::to_string(res.summary.iters) + " iterations";
    if (res.summary.final_rel_error) msg += ", relative error " + format_double(*res.summary.final_rel_error);
    if (res.summary.status == SolveStatus::Diverged) {
      log.error(msg);
    } else {
      log.info(msg);
    }
  }
  return solve_exit_code(res.summary);
}

// ---------------------------------------------------------------------------
// generate

inline int cmd_generate(const RunConfig& rc, const std::string& out_dir, const Logger& log = Logger()) {
  const AnyInstance any = make_instance(rc.problem, rc.seed);
  const auto dir = prepare_out_dir(out_dir);
  std::visit(
      [&](const auto& inst) {
        write_json_file((dir / "ensemble.json").string(), ensemble_to_json(inst.objective.ensemble()));
        write_json_file((dir / "instance.json").string(), instance_to_json(inst));
        log.info("wrote " + std::to_string(inst.objective.ensemble().size()) + " measurements of dimension " +
                 std::to_string(inst.objective.dim()));
      },
      any);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepCell {
  int qubits = 0;
  Eigen::Index rank = 0;
  double c_sam = 0.0;
  std::uint64_t seed = 0;
};

struct SweepRow {
  SweepCell cell;
  int iters = 0;
  double rel_error = std::numeric_limits<double>::quiet_NaN();
  double elapsed_ms = 0.0;
  std::string status;
};

inline constexpr const char* kSweepHeader = "q,r,c_sam,seed,iters,rel_error,elapsed_ms,status";

/// Grid order: qubits, then ranks, then c_sam, then seeds (innermost).
inline std::vector<SweepCell> sweep_cells(const SweepSpec& s) {
  std::vector<SweepCell> cells;
  for (int q : s.qubits)
    for (Eigen::Index r : s.ranks)
      for (double c : s.c_sam)
        for (std::uint64_t seed : s.seeds) cells.push_back({q, r, c, seed});
  return cells;
}

inline SweepRow run_sweep_cell(const RunConfig& rc, const SweepCell& cell) {
  SweepRow row;
  row.cell = cell;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    ProblemSpec p = rc.problem;
    p.kind = "qst";
    p.qubits = cell.qubits;
    p.rank = cell.rank;
    p.c_sam = cell.c_sam;
    const AnyInstance any = make_instance(p, cell.seed);
    const auto& inst = std::get<ProblemInstance<Complex>>(any);
    RunConfig cellcfg = rc;
    cellcfg.seed = cell.seed;
    cellcfg.solver.record_truth_dist = false;
    const SolveOutcome res = run_solve(inst, cellcfg);
    row.iters = res.summary.iters;
    if (res.summary.final_rel_error) row.rel_error = *res.summary.final_rel_error;
    row.status = res.summary.error.empty() ? to_string(res.summary.status) : "error";
  } catch (const std::exception&) {
    row.status = "error";
  }
  row.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

inline std::string sweep_row_csv(const SweepRow& r) {
  return std::to_string(r.cell.qubits) + ',' + std::to_string(r.cell.rank) + ',' + format_double(r.cell.c_sam) + ',' +
         std::to_string(r.cell.seed) + ',' + std::to_string(r.iters) + ',' + format_double(r.rel_error) + ',' +
         format_double(r.elapsed_ms) + ',' + r.status;
}

/// Runs cells on up to `jobs` threads; rows come back in grid order.
inline std::vector<SweepRow> run_sweep(const RunConfig& rc, int jobs) {
  const std::vector<SweepCell> cells = sweep_cells(rc.sweep);
  std::vector<SweepRow> rows(cells.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < cells.size(); i = next++) rows[i] = run_sweep_cell(rc, cells[i]);
  };
  const size_t nthreads = std::min(cells.size(), static_cast<size_t>(std::max(1, jobs)));
  std::vector<std::thread> pool;
  for (size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

/// Writes sweep.csv. Exit 0 when every cell ran without error, 1 otherwise.
inline int cmd_sweep(const RunConfig& rc, const std::string& out_dir, int jobs, const Logger& log = Logger()) {
  if (rc.sweep.qubits.empty() || rc.sweep.ranks.empty() || rc.sweep.c_sam.empty() || rc.sweep.seeds.empty())
    throw ConfigError("sweep grid has an empty axis");
  if (rc.problem.kind != "qst") throw ConfigError("sweeps run over QST instances; set problem.kind to 'qst'");
  solver_config(rc, 1);
  const auto dir = prepare_out_dir(out_dir);
  const std::vector<SweepRow> rows = run_sweep(rc, jobs);
  std::string csv = std::string(kSweepHeader) + "\n";
  int failed = 0;
  for (const auto& r : rows) {
    csv += sweep_row_csv(r) + "\n";
    if (r.status == "error") ++failed;
    log.debug(sweep_row_csv(r));
  }
  write_text_file((dir / "sweep.csv").string(), csv);
  log.info("sweep finished: " + std::to_string(rows.size()) + " cells, " + std::to_string(failed) + " failed");
  return failed == 0 ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// verify

/// Writes report_<suite>.json. Exit 0 iff no in-hypothesis violations.
inline int cmd_verify(const std::string& suite, const std::string& out_dir, const Logger& log = Logger()) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end()) throw UnknownSuite(suite);
  const SuiteResult res = run_suite(suite);
  const auto dir = prepare_out_dir(out_dir);
  write_json_file((dir / ("report_" + suite + ".json")).string(), suite_to_json(res));
  for (const auto& r : res.reports)
    log.debug(r.name + ": " + std::to_string(r.trials) + " trials, " + std::to_string(r.violations) + " violations");
  if (res.passed()) {
    log.info("suite " + suite + " passed");
  } else {
    log.error("suite " + suite + " failed with " + std::to_string(res.violations()) + " violations");
  }
  return res.passed() ? kExitOk : kExitFailure;
}

}  // namespace projfgd
