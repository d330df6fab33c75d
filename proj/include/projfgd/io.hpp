#pragma once

// File formats: run configs, ensembles and instances (JSON), solver traces
// (CSV), solve summaries and lemma reports (JSON).

#include "projfgd/diagnostics.hpp"
#include "projfgd/problems.hpp"
#include "projfgd/solver.hpp"
#include "projfgd/suites.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace projfgd {

using Json = nlohmann::ordered_json;

/// Malformed or unreadable input document.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

inline void write_json_file(const std::string& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

/// Finite doubles as numbers, everything else as null.
inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

// ---------------------------------------------------------------------------
// Matrices

template <Field S> Json scalar_to_json(S v) {
  if constexpr (is_complex_v<S>) {
    return Json::array({v.real(), v.imag()});
  } else {
    return Json(v);
  }
}

template <Field S> S scalar_from_json(const Json& j) {
  if constexpr (is_complex_v<S>) {
    if (j.is_number()) return S(j.get<double>(), 0.0);
    if (!j.is_array() || j.size() != 2) throw ConfigError("complex entries must be [re, im] pairs");
    return S(j.at(0).get<double>(), j.at(1).get<double>());
  } else {
    if (!j.is_number()) throw ConfigError("real entries must be numbers");
    return j.get<double>();
  }
}

/// Row-major flat list of entries.
template <Field S> Json matrix_to_json(const Matrix<S>& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(scalar_to_json<S>(m(i, j)));
  return a;
}

template <Field S> Matrix<S> matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows * cols)
    throw ConfigError("matrix has " + std::to_string(j.is_array() ? j.size() : 0) + " entries, expected " +
                      std::to_string(rows * cols));
  Matrix<S> m(rows, cols);
  size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index jj = 0; jj < cols; ++jj) m(i, jj) = scalar_from_json<S>(j[k++]);
  return m;
}

// ---------------------------------------------------------------------------
// Ensembles and instances

template <Field S> Json ensemble_to_json(const MeasurementEnsemble<S>& e) {
  Json j;
  j["dim"] = e.dim();
  j["field"] = field_name<S>();
  j["normalization"] = e.normalization();
  Json ops = Json::array();
  for (Eigen::Index i = 0; i < e.size(); ++i) ops.push_back(matrix_to_json<S>(e.operator_at(i)));
  j["operators"] = std::move(ops);
  j["y"] = std::vector<double>(e.observations().data(), e.observations().data() + e.size());
  j["noise_norm"] = e.noise_norm();
  return j;
}

inline std::string ensemble_field(const Json& j) {
  if (!j.contains("field")) throw ConfigError("ensemble is missing 'field'");
  const std::string f = j.at("field").get<std::string>();
  if (f != "real" && f != "complex") throw ConfigError("ensemble field must be 'real' or 'complex'");
  return f;
}

template <Field S> MeasurementEnsemble<S> ensemble_from_json(const Json& j) {
  try {
    if (ensemble_field(j) != field_name<S>()) throw ConfigError("ensemble field does not match the requested scalar type");
    const Eigen::Index n = j.at("dim").get<Eigen::Index>();
    if (n < 1) throw ConfigError("ensemble dim must be positive");
    const Json& ops = j.at("operators");
    const Json& y = j.at("y");
    if (!ops.is_array() || !y.is_array() || ops.size() != y.size())
      throw ConfigError("ensemble needs one observation per operator");
    std::vector<Hermitian<S>> mats;
    mats.reserve(ops.size());
    for (const auto& o : ops) mats.push_back(matrix_from_json<S>(o, n, n));
    Eigen::VectorXd yy(static_cast<Eigen::Index>(y.size()));
    for (size_t i = 0; i < y.size(); ++i) yy(static_cast<Eigen::Index>(i)) = y[i].get<double>();
    const double noise = j.value("noise_norm", 0.0);
    const std::string norm = j.value("normalization", std::string("none"));
    if (mats.empty()) throw ConfigError("ensemble has no operators");
    return MeasurementEnsemble<S>::from_operators(mats, yy, noise, norm);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed ensemble: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid ensemble: ") + e.what());
  }
}

inline Json constraint_to_json(const ConstraintSet& c) {
  Json j;
  j["kind"] = to_string(c.kind());
  j["radius"] = c.radius();
  j["faithful"] = c.faithful();
  return j;
}

inline ConstraintSet constraint_from_json(const Json& j) {
  try {
    return ConstraintSet::make(constraint_kind_from_string(j.at("kind").get<std::string>()), j.value("radius", 0.0));
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed constraint: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid constraint: ") + e.what());
  }
}

/// Companion document: everything in an instance except the ensemble.
template <Field S> Json instance_to_json(const ProblemInstance<S>& inst) {
  Json j;
  j["kind"] = inst.kind;
  j["field"] = field_name<S>();
  j["seed"] = inst.seed;
  j["rank"] = inst.rank;
  j["constraint"] = constraint_to_json(inst.constraint);
  Json t;
  t["rows"] = inst.truth_factor.rows();
  t["cols"] = inst.truth_factor.cols();
  t["factor"] = matrix_to_json<S>(inst.truth_factor);
  j["truth"] = std::move(t);
  return j;
}

template <Field S> ProblemInstance<S> instance_from_json(const Json& ensemble, const Json& companion) {
  MeasurementEnsemble<S> ens = ensemble_from_json<S>(ensemble);
  try {
    const Json& t = companion.at("truth");
    const Eigen::Index rows = t.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = t.at("cols").get<Eigen::Index>();
    if (rows != ens.dim()) throw ConfigError("truth factor rows do not match the ensemble dim");
    Factor<S> u = matrix_from_json<S>(t.at("factor"), rows, cols);
    Hermitian<S> x = hermitian_part<S>(to_x<S>(u));
    return ProblemInstance<S>{Objective<S>(std::move(ens)),
                              std::move(x),
                              std::move(u),
                              constraint_from_json(companion.at("constraint")),
                              companion.value("rank", cols),
                              companion.value("seed", std::uint64_t{0}),
                              companion.value("kind", std::string("file"))};
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed instance document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Run configuration

struct ProblemSpec {
  std::string kind = "qst";  // qst | synthetic | phase_retrieval | file
  int qubits = 6;
  Eigen::Index n = 32;
  Eigen::Index rank = 1;
  double c_sam = 3.0;
  Eigen::Index m = 0;  // 0: 6 r n for synthetic, 8 n for phase retrieval
  double noise_norm = 1e-3;
  double condition_number = 2.0;
  Eigen::Index sparsity = 4;
  double lambda = 0.0;
  double lambda_factor = 1.2;
  std::string pauli_scaling = "raw";
  std::string design = "gaussian";
  std::string ensemble_path;
  std::string instance_path;

  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

struct SolverSpec {
  std::string algorithm = "projfgd";
  double tol = kDefaultTolerance;
  int max_iters = 10000;
  std::string step_mode = "fixed_from_init";
  /// Unset: 1/128 for projfgd, 1/16 for fgd.
  std::optional<double> step_constant;
  bool record_truth_dist = true;

  friend bool operator==(const SolverSpec&, const SolverSpec&) = default;
};

struct SweepSpec {
  std::vector<int> qubits = {6};
  std::vector<Eigen::Index> ranks = {1};
  std::vector<double> c_sam = {3.0};
  std::vector<std::uint64_t> seeds = {0};

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct RunConfig {
  std::string command = "solve";
  ProblemSpec problem;
  SolverSpec solver;
  SweepSpec sweep;
  std::string suite;
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline Json to_json(const RunConfig& c) {
  Json p;
  p["kind"] = c.problem.kind;
  p["qubits"] = c.problem.qubits;
  p["n"] = c.problem.n;
  p["rank"] = c.problem.rank;
  p["c_sam"] = c.problem.c_sam;
  p["m"] = c.problem.m;
  p["noise_norm"] = c.problem.noise_norm;
  p["condition_number"] = c.problem.condition_number;
  p["sparsity"] = c.problem.sparsity;
  p["lambda"] = c.problem.lambda;
  p["lambda_factor"] = c.problem.lambda_factor;
  p["pauli_scaling"] = c.problem.pauli_scaling;
  p["design"] = c.problem.design;
  p["ensemble_path"] = c.problem.ensemble_path;
  p["instance_path"] = c.problem.instance_path;
  Json s;
  s["algorithm"] = c.solver.algorithm;
  s["tol"] = c.solver.tol;
  s["max_iters"] = c.solver.max_iters;
  s["step_mode"] = c.solver.step_mode;
  s["step_constant"] = c.solver.step_constant ? Json(*c.solver.step_constant) : Json(nullptr);
  s["record_truth_dist"] = c.solver.record_truth_dist;
  Json w;
  w["qubits"] = c.sweep.qubits;
  w["ranks"] = c.sweep.ranks;
  w["c_sam"] = c.sweep.c_sam;
  w["seeds"] = c.sweep.seeds;
  Json j;
  j["command"] = c.command;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["suite"] = c.suite;
  j["problem"] = std::move(p);
  j["solver"] = std::move(s);
  j["sweep"] = std::move(w);
  return j;
}

namespace detail {

inline void reject_unknown_keys(const Json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T> void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

/// Missing keys keep their defaults; unknown keys and wrong types are errors.
inline RunConfig run_config_from_json(const Json& j) {
  using detail::read_opt;
  RunConfig c;
  try {
    detail::reject_unknown_keys(j, {"command", "seed", "out_dir", "suite", "problem", "solver", "sweep"}, "config");
    read_opt(j, "command", c.command);
    read_opt(j, "seed", c.seed);
    read_opt(j, "out_dir", c.out_dir);
    read_opt(j, "suite", c.suite);
    if (j.contains("problem")) {
      const Json& p = j.at("problem");
      detail::reject_unknown_keys(p,
                                  {"kind", "qubits", "n", "rank", "c_sam", "m", "noise_norm", "condition_number",
                                   "sparsity", "lambda", "lambda_factor", "pauli_scaling", "design", "ensemble_path",
                                   "instance_path"},
                                  "problem");
      read_opt(p, "kind", c.problem.kind);
      read_opt(p, "qubits", c.problem.qubits);
      read_opt(p, "n", c.problem.n);
      read_opt(p, "rank", c.problem.rank);
      read_opt(p, "c_sam", c.problem.c_sam);
      read_opt(p, "m", c.problem.m);
      read_opt(p, "noise_norm", c.problem.noise_norm);
      read_opt(p, "condition_number", c.problem.condition_number);
      read_opt(p, "sparsity", c.problem.sparsity);
      read_opt(p, "lambda", c.problem.lambda);
      read_opt(p, "lambda_factor", c.problem.lambda_factor);
      read_opt(p, "pauli_scaling", c.problem.pauli_scaling);
      read_opt(p, "design", c.problem.design);
      read_opt(p, "ensemble_path", c.problem.ensemble_path);
      read_opt(p, "instance_path", c.problem.instance_path);
    }
    if (j.contains("solver")) {
      const Json& s = j.at("solver");
      detail::reject_unknown_keys(s, {"algorithm", "tol", "max_iters", "step_mode", "step_constant", "record_truth_dist"},
                                  "solver");
      read_opt(s, "algorithm", c.solver.algorithm);
      read_opt(s, "tol", c.solver.tol);
      read_opt(s, "max_iters", c.solver.max_iters);
      read_opt(s, "step_mode", c.solver.step_mode);
      if (s.contains("step_constant") && !s.at("step_constant").is_null())
        c.solver.step_constant = s.at("step_constant").get<double>();
      read_opt(s, "record_truth_dist", c.solver.record_truth_dist);
    }
    if (j.contains("sweep")) {
      const Json& w = j.at("sweep");
      detail::reject_unknown_keys(w, {"qubits", "ranks", "c_sam", "seeds"}, "sweep");
      read_opt(w, "qubits", c.sweep.qubits);
      read_opt(w, "ranks", c.sweep.ranks);
      read_opt(w, "c_sam", c.sweep.c_sam);
      read_opt(w, "seeds", c.sweep.seeds);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return c;
}

inline RunConfig read_run_config(const std::string& path) { return run_config_from_json(read_json_file(path)); }

inline std::string dump_run_config(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

/// Solver configuration resolved from a run config.
inline SolverConfig solver_config(const RunConfig& c, Eigen::Index rank) {
  try {
    const Algorithm algo = algorithm_from_string(c.solver.algorithm);
    SolverConfig s = algo == Algorithm::ProjFgd ? SolverConfig::projfgd(rank) : SolverConfig::fgd(rank);
    s.tol = c.solver.tol;
    s.max_iters = c.solver.max_iters;
    s.step_mode = step_mode_from_string(c.solver.step_mode);
    if (c.solver.step_constant) s.step_constant = *c.solver.step_constant;
    s.record_truth_dist = c.solver.record_truth_dist;
    s.validate();
    return s;
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid solver settings: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Traces and summaries

inline constexpr const char* kTraceHeader = "iter,objective,rel_change,xi,dist,grad_norm";

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trace_csv_row(const IterationRecord& r) {
  std::string s = std::to_string(r.iter);
  s += ',' + format_double(r.objective);
  s += ',' + format_double(r.rel_change);
  s += ',' + format_double(r.xi);
  s += ',';
  if (r.dist) s += format_double(*r.dist);
  s += ',' + format_double(r.grad_norm);
  return s;
}

inline std::string trace_to_csv(const SolveTrace& t) {
  std::string out = std::string(kTraceHeader) + "\n";
  for (const auto& r : t.records) out += trace_csv_row(r) + "\n";
  return out;
}

struct SolveSummary {
  SolveStatus status = SolveStatus::MaxIters;
  int iters = 0;
  double final_objective = 0.0;
  std::optional<double> final_rel_error;
  double elapsed_ms = 0.0;
  std::string error;
};

inline Json summary_to_json(const SolveSummary& s, const SolverConfig& cfg, const RunConfig& rc) {
  Json j;
  j["status"] = s.error.empty() ? to_string(s.status) : "error";
  j["iters"] = s.iters;
  j["final_objective"] = number_or_null(s.final_objective);
  j["final_rel_error"] = s.final_rel_error ? number_or_null(*s.final_rel_error) : Json(nullptr);
  j["elapsed_ms"] = s.elapsed_ms;
  j["tol"] = cfg.tol;
  j["max_iters"] = cfg.max_iters;
  j["step_constant"] = cfg.step_constant;
  j["step_mode"] = to_string(cfg.step_mode);
  j["algorithm"] = rc.solver.algorithm;
  j["rank"] = cfg.rank;
  j["seed"] = rc.seed;
  if (!s.error.empty()) j["error"] = s.error;
  return j;
}

// ---------------------------------------------------------------------------
// Reports

inline Json report_to_json(const LemmaReport& r) {
  Json j;
  j["name"] = r.name;
  j["trials"] = r.trials;
  j["violations"] = r.violations;
  j["skipped"] = r.skipped;
  j["skipped_violations"] = r.skipped_violations;
  j["worst_margin"] = number_or_null(r.worst_margin);
  Json ctx = Json::object();
  for (const auto& [k, v] : r.context) ctx[k] = number_or_null(v);
  j["context"] = std::move(ctx);
  return j;
}

inline Json suite_to_json(const SuiteResult& s) {
  Json j;
  j["suite"] = s.suite;
  j["passed"] = s.passed();
  j["violations"] = s.violations();
  Json reps = Json::array();
  for (const auto& r : s.reports) reps.push_back(report_to_json(r));
  j["reports"] = std::move(reps);
  return j;
}

}  // namespace projfgd
