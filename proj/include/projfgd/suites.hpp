#pragma once

// Named batches of diagnostic checks, run by `fpgd verify --suite NAME`.

#include "projfgd/diagnostics.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace projfgd {

class UnknownSuite : public InvalidArgument {
public:
  explicit UnknownSuite(const std::string& name) : InvalidArgument("unknown suite '" + name + "'") {}
};

struct SuiteResult {
  std::string suite;
  std::vector<LemmaReport> reports;

  bool passed() const {
    for (const auto& r : reports)
      if (!r.passed()) return false;
    return true;
  }
  int violations() const {
    int v = 0;
    for (const auto& r : reports) v += r.violations;
    return v;
  }
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"projections", "procrustes", "gradients", "tu",
                                                 "descent",     "contraction", "xi",       "init"};
  return names;
}

// ---------------------------------------------------------------------------
// projections

inline constexpr double kProjectionTol = 1e-10;

struct ProjectionParams {
  int exterior_points = 20;
  int witnesses = 100;
  int pairs = 1000;
  Eigen::Index n = 6;
  Eigen::Index r = 2;
  double lambda = 1.0;
  std::uint64_t seed = 11;
};

namespace detail {

template <Field S> Factor<S> feasible_witness(Rng& rng, const ConstraintSet& c, Eigen::Index n, Eigen::Index r) {
  Factor<S> u = rng.gaussian_matrix<S>(n, r);
  const double frac = rng.uniform();
  if (c.kind() == ConstraintKind::L1Ball) {
    u *= frac * c.radius() / l1_norm(u);
  } else {
    u *= frac * c.radius() / u.norm();
  }
  return u;
}

template <Field S> Factor<S> exterior_point(Rng& rng, const ConstraintSet& c, Eigen::Index n, Eigen::Index r) {
  Factor<S> v = rng.gaussian_matrix<S>(n, r);
  const double size = c.radius() * (1.5 + 3.0 * rng.uniform());
  return c.kind() == ConstraintKind::L1Ball ? Factor<S>(v * (size / l1_norm(v))) : Factor<S>(v * (size / v.norm()));
}

template <Field S> void projection_checks(const ConstraintSet& c, const ProjectionParams& p, std::uint64_t stream,
                                          LemmaReport& vi, LemmaReport& nonexp, LemmaReport& feas) {
  for (int k = 0; k < p.exterior_points; ++k) {
    Rng rng(derive_seed(p.seed, stream), static_cast<std::uint64_t>(k));
    const Factor<S> v = exterior_point<S>(rng, c, p.n, p.r);
    const Factor<S> pv = c.project<S>(v).factor;
    record_margin(feas, c.contains<S>(pv, kProjectionTol) ? 0.0 : -1.0, 0.0);
    for (int w = 0; w < p.witnesses; ++w) {
      const Factor<S> u = feasible_witness<S>(rng, c, p.n, p.r);
      record_margin(vi, inner(Factor<S>(pv - u), Factor<S>(v - pv)), kProjectionTol);
    }
  }
  for (int k = 0; k < p.pairs; ++k) {
    Rng rng(derive_seed(p.seed, stream + 100), static_cast<std::uint64_t>(k));
    const Factor<S> a = rng.gaussian_matrix<S>(p.n, p.r) * (3.0 * rng.uniform());
    const Factor<S> b = rng.gaussian_matrix<S>(p.n, p.r) * (3.0 * rng.uniform());
    const double lhs = (a - b).norm();
    const double rhs = (c.project<S>(a).factor - c.project<S>(b).factor).norm();
    record_margin(nonexp, lhs - rhs, kProjectionTol);
  }
}

}  // namespace detail

/// Variational inequality, non-expansiveness and feasibility for both balls in both fields.
inline SuiteResult run_projections_suite(const ProjectionParams& p = {}) {
  SuiteResult out{"projections", {}};
  const ConstraintSet balls[2] = {ConstraintSet::frobenius_ball(p.lambda), ConstraintSet::l1_ball(p.lambda)};
  std::uint64_t stream = 0;
  for (const auto& c : balls) {
    for (int field = 0; field < 2; ++field) {
      const std::string tag = std::string(to_string(c.kind())) + (field == 0 ? "/real" : "/complex");
      LemmaReport vi{"variational_inequality/" + tag};
      LemmaReport ne{"nonexpansive/" + tag};
      LemmaReport fe{"feasible_output/" + tag};
      if (field == 0) {
        detail::projection_checks<double>(c, p, stream, vi, ne, fe);
      } else {
        detail::projection_checks<Complex>(c, p, stream, vi, ne, fe);
      }
      ++stream;
      out.reports.push_back(vi);
      out.reports.push_back(ne);
      out.reports.push_back(fe);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// procrustes

struct ProcrustesParams {
  int pairs = 200;
  int rotations = 50;
  Eigen::Index n = 6;
  Eigen::Index r = 2;
  std::uint64_t seed = 12;
};

namespace detail {

template <Field S> void procrustes_checks(const ProcrustesParams& p, std::uint64_t stream, LemmaReport& sym,
                                          LemmaReport& inv, LemmaReport& opt) {
  for (int k = 0; k < p.pairs; ++k) {
    Rng rng(derive_seed(p.seed, stream), static_cast<std::uint64_t>(k));
    const Factor<S> u = rng.gaussian_matrix<S>(p.n, p.r);
    const Factor<S> v = rng.gaussian_matrix<S>(p.n, p.r);
    const double d = procrustes_dist<S>(u, v);
    record_margin(sym, 1e-10 - std::abs(d - procrustes_dist<S>(v, u)), 0.0);
    const Matrix<S> q = random_orthonormal<S>(rng, p.r, p.r);
    record_margin(inv, 1e-9 - std::abs(d - procrustes_dist<S>(Factor<S>(u * q), v)), 0.0);
    for (int j = 0; j < p.rotations; ++j) {
      const Matrix<S> rot = random_orthonormal<S>(rng, p.r, p.r);
      record_margin(opt, (u - v * rot).norm() - d, 1e-10);
    }
  }
}

}  // namespace detail

inline SuiteResult run_procrustes_suite(const ProcrustesParams& p = {}) {
  SuiteResult out{"procrustes", {}};
  for (int field = 0; field < 2; ++field) {
    const std::string tag = field == 0 ? "real" : "complex";
    LemmaReport sym{"symmetry/" + tag}, inv{"rotation_invariance/" + tag}, opt{"optimality/" + tag};
    if (field == 0) {
      detail::procrustes_checks<double>(p, 0, sym, inv, opt);
    } else {
      detail::procrustes_checks<Complex>(p, 1, sym, inv, opt);
    }
    out.reports.push_back(sym);
    out.reports.push_back(inv);
    out.reports.push_back(opt);
  }
  return out;
}

// ---------------------------------------------------------------------------
// gradients

inline constexpr double kGradientRelTol = 1e-6;

struct GradientParams {
  int points = 50;
  std::uint64_t seed = 13;
};

/// Central differences (step 1e-5) of f and of U -> f(U U^H) at random points
/// of a real Gaussian instance and a complex Pauli instance.
inline SuiteResult run_gradients_suite(const GradientParams& p = {}) {
  SuiteResult out{"gradients", {}};
  SyntheticParams sp;
  sp.n = 5;
  sp.rank = 2;
  sp.m = 30;
  sp.noise_norm = 0.1;
  sp.seed = p.seed;
  const auto real_inst = gen_synthetic(sp);
  QstParams qp;
  qp.qubits = 2;
  qp.rank = 2;
  qp.c_sam = 1.0;
  qp.noise_norm = 0.1;
  qp.seed = p.seed;
  const auto cplx_inst = gen_qst(qp);

  LemmaReport mat{"matrix_gradient"}, fac{"factored_gradient"};
  double worst_mat = 0.0, worst_fac = 0.0;
  for (int k = 0; k < p.points; ++k) {
    Rng rng(p.seed, static_cast<std::uint64_t>(k));
    double em, ef;
    if (k % 2 == 0) {
      const Factor<double> u = rng.gaussian_matrix<double>(sp.n, sp.rank);
      const Hermitian<double> x = hermitian_part<double>(rng.gaussian_matrix<double>(sp.n, sp.n));
      em = matrix_gradient_fd_error<double>(real_inst.objective, x);
      ef = factored_gradient_fd_error<double>(real_inst.objective, u);
    } else {
      const Factor<Complex> u = rng.gaussian_matrix<Complex>(4, qp.rank);
      const Hermitian<Complex> x = hermitian_part<Complex>(rng.gaussian_matrix<Complex>(4, 4));
      em = matrix_gradient_fd_error<Complex>(cplx_inst.objective, x);
      ef = factored_gradient_fd_error<Complex>(cplx_inst.objective, u);
    }
    worst_mat = std::max(worst_mat, em);
    worst_fac = std::max(worst_fac, ef);
    record_margin(mat, kGradientRelTol - em, 0.0);
    record_margin(fac, kGradientRelTol - ef, 0.0);
  }
  mat.context["max_rel_error"] = worst_mat;
  fac.context["max_rel_error"] = worst_fac;
  out.reports.push_back(mat);
  out.reports.push_back(fac);
  return out;
}

// ---------------------------------------------------------------------------
// tu

struct TuParams {
  int trials = 1000;
  Eigen::Index n = 10;
  std::vector<Eigen::Index> ranks = {1, 2, 3};
  int complex_trials = 300;
  std::uint64_t seed = 14;
};

inline SuiteResult run_tu_suite(const TuParams& p = {}) {
  SuiteResult out{"tu", {}};
  for (Eigen::Index r : p.ranks) {
    LemmaReport rep = check_tu_inequality<double>(p.trials, p.n, r, derive_seed(p.seed, static_cast<std::uint64_t>(r)));
    rep.name = "tu/real/r=" + std::to_string(r);
    out.reports.push_back(rep);
  }
  for (Eigen::Index r : p.ranks) {
    LemmaReport rep =
        check_tu_inequality<Complex>(p.complex_trials, p.n, r, derive_seed(p.seed, static_cast<std::uint64_t>(100 + r)));
    rep.name = "tu/complex/r=" + std::to_string(r);
    out.reports.push_back(rep);
  }
  return out;
}

// ---------------------------------------------------------------------------
// descent

struct DescentSuiteParams {
  int instances = 4;
  int trials_per_instance = 50;
  /// Extra perturbations this many radii away; evaluated, not asserted.
  double far_fraction = 50.0;
  int far_trials_per_instance = 25;
  SyntheticParams problem{32, 2, 384, 2.0, 0.0, 0};
  std::uint64_t seed = 15;
};

inline SuiteResult run_descent_suite(const DescentSuiteParams& p = {}) {
  SuiteResult out{"descent", {}};
  LemmaReport total{"descent_lemma"};
  for (int i = 0; i < p.instances; ++i) {
    SyntheticParams sp = p.problem;
    sp.seed = derive_seed(p.seed, static_cast<std::uint64_t>(i));
    const auto inst = gen_synthetic(sp);
    const TheoremConstants tc = estimated_theorem_constants(inst);
    DescentOptions near;
    near.trials = p.trials_per_instance;
    near.seed = derive_seed(sp.seed, 1);
    total.merge(check_descent_lemma(inst, inst.truth_factor, tc, near));
    DescentOptions far = near;
    far.trials = p.far_trials_per_instance;
    far.radius_fraction = p.far_fraction;
    far.seed = derive_seed(sp.seed, 2);
    total.merge(check_descent_lemma(inst, inst.truth_factor, tc, far));
  }
  total.context["instances"] = p.instances;
  out.reports.push_back(total);
  return out;
}

// ---------------------------------------------------------------------------
// contraction

enum class Algorithm { ProjFgd, Fgd };

inline const char* to_string(Algorithm a) { return a == Algorithm::ProjFgd ? "projfgd" : "fgd"; }

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "projfgd") return Algorithm::ProjFgd;
  if (s == "fgd") return Algorithm::Fgd;
  throw InvalidArgument("unknown algorithm '" + s + "'");
}

struct ContractionParams {
  int instances = 50;
  int iters = 100;
  /// Start at this fraction of the theorem radius from the truth.
  double start_fraction = 0.9;
  SyntheticParams problem{32, 2, 384, 2.0, 0.0, 0};
  std::uint64_t seed = 16;
};

/// Starts inside rho' sigma_r(U*) (c = 1/200) and checks every in-radius step
/// against alpha. ProjFGD uses the per-iterate step of its analysis, FGD the
/// fixed step with C = 1/16.
inline LemmaReport check_contraction(Algorithm algo, const ContractionParams& p) {
  LemmaReport rep{std::string("contraction/") + to_string(algo)};
  double max_ratio = 0.0, max_alpha = 0.0, min_alpha = 1.0;
  const double denom = algo == Algorithm::ProjFgd ? kProjFgdRateDenominator : kFgdRateDenominator;
  for (int i = 0; i < p.instances; ++i) {
    SyntheticParams sp = p.problem;
    sp.seed = derive_seed(p.seed, static_cast<std::uint64_t>(i));
    const auto inst = gen_synthetic(sp);
    const TheoremConstants tc = estimated_theorem_constants(inst, denom);
    Rng rng(sp.seed, 7);
    const Factor<double> dir = rng.gaussian_matrix<double>(sp.n, sp.rank);
    Factor<double> u0 = inst.truth_factor + dir * (p.start_fraction * tc.radius / dir.norm());

    SolverConfig cfg = algo == Algorithm::ProjFgd ? SolverConfig::projfgd(sp.rank) : SolverConfig::fgd(sp.rank);
    cfg.step_mode = algo == Algorithm::ProjFgd ? StepMode::AdaptivePerIter : StepMode::FixedFromInit;
    cfg.max_iters = p.iters;
    cfg.tol = 1e-15;
    cfg.record_truth_dist = true;
    SolveOptions<double> opts;
    opts.initial = u0;
    const auto res = algo == Algorithm::ProjFgd ? projfgd_solve(inst, cfg, opts) : fgd_solve(inst, cfg, opts);
    const ContractionFit fit = fit_contraction(res.trace, tc.radius, tc.alpha);
    rep.trials += fit.steps;
    rep.violations += fit.violations;
    rep.skipped += fit.outside;
    rep.worst_margin = std::min(rep.worst_margin, fit.worst_margin);
    max_ratio = std::max(max_ratio, fit.max_ratio);
    max_alpha = std::max(max_alpha, tc.alpha);
    min_alpha = std::min(min_alpha, tc.alpha);
  }
  rep.context["instances"] = p.instances;
  rep.context["max_ratio"] = max_ratio;
  rep.context["min_alpha"] = min_alpha;
  rep.context["max_alpha"] = max_alpha;
  return rep;
}

inline SuiteResult run_contraction_suite(const ContractionParams& p = {}) {
  return SuiteResult{"contraction", {check_contraction(Algorithm::ProjFgd, p), check_contraction(Algorithm::Fgd, p)}};
}

// ---------------------------------------------------------------------------
// xi

struct XiParams {
  int runs = 50;
  int iters = 300;
  /// Ball radii as fractions of ||U*||_F, cycled over runs.
  std::vector<double> radius_fractions = {0.5, 0.7, 0.9};
  SyntheticParams problem{16, 2, 192, 2.0, 0.0, 0};
  std::uint64_t seed = 17;
};

/// Frobenius-ball runs with the adaptive step, started on the boundary with a
/// radius below ||U*||_F so the projection keeps firing; every fired xi must be
/// at least 128/129.
inline SuiteResult run_xi_suite(const XiParams& p = {}) {
  const double bound = 128.0 / 129.0;
  LemmaReport rep{"xi_lower_bound"};
  double min_xi = std::numeric_limits<double>::infinity();
  int fired_runs = 0;
  for (int i = 0; i < p.runs; ++i) {
    SyntheticParams sp = p.problem;
    sp.seed = derive_seed(p.seed, static_cast<std::uint64_t>(i));
    auto inst = gen_synthetic(sp);
    const double lambda = p.radius_fractions[static_cast<size_t>(i) % p.radius_fractions.size()] *
                          inst.truth_factor.norm();
    inst.constraint = ConstraintSet::frobenius_ball(lambda);
    Factor<double> u0 = spectral_init<double>(inst.objective, sp.rank);
    u0 *= lambda / u0.norm();

    SolverConfig cfg = SolverConfig::projfgd(sp.rank);
    cfg.step_mode = StepMode::AdaptivePerIter;
    cfg.max_iters = p.iters;
    SolveOptions<double> opts;
    opts.initial = u0;
    const auto res = projfgd_solve(inst, cfg, opts);
    bool fired = false;
    for (size_t t = 1; t < res.trace.records.size(); ++t) {
      const double xi = res.trace.records[t].xi;
      if (xi < 1.0) {
        fired = true;
        min_xi = std::min(min_xi, xi);
        record_margin(rep, xi - bound, kMarginAbsTol);
      } else {
        ++rep.skipped;
      }
    }
    if (fired) ++fired_runs;
  }
  rep.context["runs"] = p.runs;
  rep.context["fired_runs"] = fired_runs;
  rep.context["min_xi"] = min_xi;
  rep.context["bound"] = bound;
  return SuiteResult{"xi", {rep}};
}

// ---------------------------------------------------------------------------
// init

struct InitParams {
  std::vector<Eigen::Index> dims = {3, 4, 6};
  int seeds = 10;
  /// m as a multiple of the real Hermitian dimension n(n+1)/2.
  double oversampling = 5.0;
  double condition_number = 2.0;
  std::uint64_t seed = 18;
};

/// Full-rank (r = n) instances with exact mu and L; vacuous bounds are skipped.
inline SuiteResult run_init_suite(const InitParams& p = {}) {
  LemmaReport rep{"init_bound"};
  double worst_ratio = 0.0;
  for (Eigen::Index n : p.dims) {
    for (int s = 0; s < p.seeds; ++s) {
      SyntheticParams sp;
      sp.n = n;
      sp.rank = n;
      sp.m = static_cast<Eigen::Index>(std::ceil(p.oversampling * static_cast<double>(n * (n + 1) / 2)));
      sp.condition_number = p.condition_number;
      sp.seed = derive_seed(p.seed, static_cast<std::uint64_t>(n * 1000 + s));
      const auto inst = gen_synthetic(sp);
      const CurvatureBounds cb = exact_curvature(inst.objective.ensemble());
      const InitBound b = check_init_bound<double>(inst.objective, inst.constraint, inst.truth_factor, cb);
      if (!b.vacuous) worst_ratio = std::max(worst_ratio, b.dist / b.radius);
      record_margin(rep, b.radius - b.dist, 1e-12, !b.vacuous);
    }
  }
  rep.context["worst_dist_over_radius"] = worst_ratio;
  return SuiteResult{"init", {rep}};
}

// ---------------------------------------------------------------------------

inline SuiteResult run_suite(const std::string& name) {
  if (name == "projections") return run_projections_suite();
  if (name == "procrustes") return run_procrustes_suite();
  if (name == "gradients") return run_gradients_suite();
  if (name == "tu") return run_tu_suite();
  if (name == "descent") return run_descent_suite();
  if (name == "contraction") return run_contraction_suite();
  if (name == "xi") return run_xi_suite();
  if (name == "init") return run_init_suite();
  throw UnknownSuite(name);
}

}  // namespace projfgd
