#pragma once

// Projected factored gradient descent (and its unconstrained special case).
//
//   X_0 = Pi_+(-grad f(0)) / L_hat,  U~_0 = top-r factor of X_0,  U_0 = Pi_C(U~_0)
//   U_{t+1} = Pi_C(U_t - eta * grad f(U_t U_t^H) U_t)
//
// with eta = C / (L_hat ||X_0||_2 + ||grad f(X_0)||_2) fixed at the start, or
// recomputed every iteration as C / (L_hat ||X_t||_2 + ||Q Q^H grad f(X_t)||_2)
// where Q spans the columns of U_t. The loop stops once
// ||X_{t+1} - X_t||_2 / ||X_{t+1}||_2 <= tol.

#include "projfgd/constraint.hpp"
#include "projfgd/objective.hpp"
#include "projfgd/problems.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace projfgd {

enum class StepMode { FixedFromInit, AdaptivePerIter };

inline const char* to_string(StepMode m) {
  return m == StepMode::FixedFromInit ? "fixed_from_init" : "adaptive_per_iter";
}

inline StepMode step_mode_from_string(const std::string& s) {
  if (s == "fixed_from_init" || s == "fixed") return StepMode::FixedFromInit;
  if (s == "adaptive_per_iter" || s == "adaptive") return StepMode::AdaptivePerIter;
  throw InvalidArgument("unknown step mode '" + s + "'");
}

inline constexpr double kProjFgdStepConstant = 1.0 / 128.0;
inline constexpr double kFgdStepConstant = 1.0 / 16.0;
inline constexpr double kDefaultTolerance = 5e-6;
/// Abort once the objective exceeds this multiple of its starting value.
inline constexpr double kDivergenceFactor = 1e6;

struct SolverConfig {
  Eigen::Index rank = 1;
  int max_iters = 10000;
  double tol = kDefaultTolerance;
  double step_constant = kProjFgdStepConstant;
  StepMode step_mode = StepMode::FixedFromInit;
  bool record_truth_dist = false;

  static SolverConfig projfgd(Eigen::Index rank) {
    SolverConfig c;
    c.rank = rank;
    return c;
  }
  static SolverConfig fgd(Eigen::Index rank) {
    SolverConfig c;
    c.rank = rank;
    c.step_constant = kFgdStepConstant;
    return c;
  }

  void validate() const {
    require(rank >= 1, "solver rank must be positive");
    require(max_iters >= 0, "max_iters must be non-negative");
    require(tol > 0.0, "tolerance must be positive");
    require(step_constant > 0.0 && step_constant <= 1.0, "step constant must lie in (0, 1]");
  }

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double rel_change = 0.0;
  double xi = 1.0;
  std::optional<double> dist;
  double grad_norm = 0.0;  // ||grad f(X_t) U_t||_F of the step that produced this iterate
  double step = 0.0;       // step size used for that step (0 for the initial record)
};

enum class SolveStatus { Converged, MaxIters, Diverged };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIters: return "max_iters";
    case SolveStatus::Diverged: return "diverged";
  }
  return "unknown";
}

/// Record 0 describes the initial point; record t the iterate after step t.
struct SolveTrace {
  std::vector<IterationRecord> records;
  SolveStatus status = SolveStatus::MaxIters;
  double initial_step = 0.0;
  double smoothness = 0.0;

  int iterations() const { return records.empty() ? 0 : records.back().iter; }
};

template <Field S> struct SolveResult {
  Factor<S> factor;
  SolveTrace trace;
};

template <Field S> struct SolveOptions {
  /// Start from this factor instead of the spectral initialization (it is projected onto C first).
  std::optional<Factor<S>> initial;
  /// Ground truth for the dist column; required when record_truth_dist is set.
  const Factor<S>* truth = nullptr;
  /// Called with every record as soon as it is produced.
  std::function<void(const IterationRecord&)> on_record;
};

/// U~_0 with U~_0 U~_0^H = top-r part of Pi_+(-grad f(0)) / L_hat, before projection onto C.
template <Field S> Factor<S> spectral_init(const Objective<S>& obj, Eigen::Index rank) {
  require(rank >= 1, "rank must be positive");
  require_dims(rank <= obj.dim(), "rank exceeds the dimension");
  const double lhat = obj.smoothness();
  require(lhat > 0.0, "smoothness estimate must be positive");
  const Hermitian<S> zero = Hermitian<S>::Zero(obj.dim(), obj.dim());
  const Hermitian<S> neg_grad = -obj.grad(zero) / lhat;
  // Top-r eigenpairs of the PSD projection are the positive part of the top-r eigenpairs.
  return psd_factor_top_r<S>(neg_grad, rank);
}

/// U_0 = Pi_C(U~_0). An all-zero negative gradient yields the zero factor.
template <Field S> Factor<S> init_point(const Objective<S>& obj, const ConstraintSet& c, Eigen::Index rank) {
  return c.project<S>(spectral_init<S>(obj, rank)).factor;
}

/// C / (L_hat ||x0||_2 + ||grad f(x0)||_2).
template <Field S> double step_size(const Objective<S>& obj, const Hermitian<S>& x0, double constant) {
  require(constant > 0.0, "step constant must be positive");
  const double denom = obj.smoothness() * spectral_norm_hermitian<S>(x0) + spectral_norm_hermitian<S>(obj.grad(x0));
  require(denom > 0.0 && std::isfinite(denom), "step size undefined: ||X_0||_2 and ||grad f(X_0)||_2 are both zero");
  return constant / denom;
}

/// ||Q Q^H G||_2 with Q an orthonormal basis of range(U); equal to ||Q^H G||_2.
template <Field S> double projected_grad_norm(const Factor<S>& u, const Hermitian<S>& g) {
  const Matrix<S> q = column_basis<S>(u);
  if (q.cols() == 0) return 0.0;
  return spectral_norm<S>(Matrix<S>(q.adjoint() * g));
}

/// C / (L_hat ||X_t||_2 + ||Q_U Q_U^H grad f(X_t)||_2), the per-iterate step used in the analysis.
template <Field S>
double adaptive_step_size(const Objective<S>& obj, const Factor<S>& u, const Hermitian<S>& g, double constant) {
  const double denom = obj.smoothness() * spectral_norm_hermitian<S>(to_x<S>(u)) + projected_grad_norm<S>(u, g);
  require(denom > 0.0 && std::isfinite(denom), "adaptive step size undefined at the zero factor");
  return constant / denom;
}

template <Field S>
SolveResult<S> solve(const Objective<S>& obj, const ConstraintSet& constraint, const SolverConfig& cfg,
                     const SolveOptions<S>& opts = {}) {
  cfg.validate();
  require_dims(cfg.rank <= obj.dim(), "solver rank exceeds the dimension");
  require(!cfg.record_truth_dist || opts.truth != nullptr, "record_truth_dist needs a ground-truth factor");
  if (opts.truth) require_dims(opts.truth->rows() == obj.dim() && opts.truth->cols() == cfg.rank,
                               "ground-truth factor shape does not match the solver rank");

  SolveResult<S> out;
  out.trace.smoothness = obj.smoothness();
  auto emit = [&](const IterationRecord& rec) {
    out.trace.records.push_back(rec);
    if (opts.on_record) opts.on_record(rec);
  };
  auto dist_to_truth = [&](const Factor<S>& u) -> std::optional<double> {
    if (!cfg.record_truth_dist) return std::nullopt;
    return procrustes_dist<S>(u, *opts.truth);
  };

  Factor<S> start;
  if (opts.initial) {
    require_dims(opts.initial->rows() == obj.dim() && opts.initial->cols() == cfg.rank,
                 "initial factor shape does not match the solver rank");
    start = *opts.initial;
  } else {
    start = spectral_init<S>(obj, cfg.rank);
  }
  ScaledFactor<S> projected = constraint.project<S>(start);
  Factor<S> u = std::move(projected.factor);
  Hermitian<S> x = to_x<S>(u);
  Eigen::VectorXd res = obj.residual(x);
  double value = res.squaredNorm();
  Hermitian<S> g = obj.grad_from_residual(res);
  const double initial_value = value;

  IterationRecord first;
  first.iter = 0;
  first.objective = value;
  first.xi = projected.xi;
  first.dist = dist_to_truth(u);
  emit(first);
  if (!std::isfinite(value) || !g.allFinite()) {
    out.trace.status = SolveStatus::Diverged;
    out.factor = std::move(u);
    return out;
  }

  double eta = 0.0;
  if (cfg.step_mode == StepMode::FixedFromInit) {
    const double denom = obj.smoothness() * spectral_norm_hermitian<S>(x) + spectral_norm_hermitian<S>(g);
    require(denom > 0.0, "step size undefined: ||X_0||_2 and ||grad f(X_0)||_2 are both zero");
    eta = cfg.step_constant / denom;
  }

  out.trace.status = SolveStatus::MaxIters;
  for (int t = 0; t < cfg.max_iters; ++t) {
    if (cfg.step_mode == StepMode::AdaptivePerIter) eta = adaptive_step_size<S>(obj, u, g, cfg.step_constant);
    if (t == 0) out.trace.initial_step = eta;

    const Factor<S> fg = g * u;
    ScaledFactor<S> next = constraint.project<S>(Factor<S>(u - eta * fg));
    Hermitian<S> x_next = to_x<S>(next.factor);
    const double denom = spectral_norm_hermitian<S>(x_next);
    const double diff = spectral_norm_hermitian<S>(Hermitian<S>(x_next - x));
    const double rel = denom > 0.0 ? diff / denom : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());

    u = std::move(next.factor);
    x = std::move(x_next);
    res = obj.residual(x);
    value = res.squaredNorm();

    IterationRecord rec;
    rec.iter = t + 1;
    rec.objective = value;
    rec.rel_change = rel;
    rec.xi = next.xi;
    rec.dist = dist_to_truth(u);
    rec.grad_norm = fg.norm();
    rec.step = eta;
    emit(rec);

    if (!std::isfinite(value) || value > kDivergenceFactor * std::max(initial_value, 1e-300)) {
      out.trace.status = SolveStatus::Diverged;
      break;
    }
    if (rel <= cfg.tol) {
      out.trace.status = SolveStatus::Converged;
      break;
    }
    g = obj.grad_from_residual(res);
  }
  out.factor = std::move(u);
  return out;
}

/// ProjFGD on a generated instance, projecting onto the instance's constraint set.
template <Field S>
SolveResult<S> projfgd_solve(const ProblemInstance<S>& inst, const SolverConfig& cfg, SolveOptions<S> opts = {}) {
  if (opts.truth == nullptr && inst.truth_factor.cols() == cfg.rank) opts.truth = &inst.truth_factor;
  return solve<S>(inst.objective, inst.constraint, cfg, opts);
}

/// Unconstrained factored gradient descent (identity projection).
template <Field S>
SolveResult<S> fgd_solve(const ProblemInstance<S>& inst, const SolverConfig& cfg, SolveOptions<S> opts = {}) {
  if (opts.truth == nullptr && inst.truth_factor.cols() == cfg.rank) opts.truth = &inst.truth_factor;
  return solve<S>(inst.objective, ConstraintSet::unconstrained(), cfg, opts);
}

}  // namespace projfgd
