#pragma once

// Numeric checks of the convergence analysis: theorem constants, the descent
// lemma, the factor-distance inequality, contraction fitting, and
// finite-difference gradient checks.

#include "projfgd/constraint.hpp"
#include "projfgd/objective.hpp"
#include "projfgd/problems.hpp"
#include "projfgd/rng.hpp"
#include "projfgd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace projfgd {

/// Outcome of one batch of inequality trials. Margins are "lhs - rhs" of an
/// inequality that should be non-negative; a trial violates it when the margin
/// falls below -(1e-9 + 1e-9 * scale).
struct LemmaReport {
  LemmaReport() = default;
  explicit LemmaReport(std::string n) : name(std::move(n)) {}

  std::string name;
  int trials = 0;
  int violations = 0;
  /// Trials outside the lemma's hypotheses (evaluated, never asserted).
  int skipped = 0;
  int skipped_violations = 0;
  /// Smallest margin among in-hypothesis trials (+inf when there are none).
  double worst_margin = std::numeric_limits<double>::infinity();
  std::map<std::string, double> context;

  bool passed() const { return violations == 0; }

  void merge(const LemmaReport& o) {
    trials += o.trials;
    violations += o.violations;
    skipped += o.skipped;
    skipped_violations += o.skipped_violations;
    worst_margin = std::min(worst_margin, o.worst_margin);
  }
};

inline constexpr double kMarginAbsTol = 1e-9;
inline constexpr double kMarginRelTol = 1e-9;

inline double margin_tolerance(double scale) { return kMarginAbsTol + kMarginRelTol * std::abs(scale); }

/// Counts one trial; it violates when margin < -tol.
inline void record_margin(LemmaReport& rep, double margin, double tol, bool in_hypothesis = true) {
  const bool bad = margin < -tol;
  if (in_hypothesis) {
    ++rep.trials;
    if (bad) ++rep.violations;
    rep.worst_margin = std::min(rep.worst_margin, margin);
  } else {
    ++rep.skipped;
    if (bad) ++rep.skipped_violations;
  }
}

/// ||xhat - xstar||_F / ||xstar||_F.
template <Field S> double relative_error(const Hermitian<S>& xhat, const Hermitian<S>& xstar) {
  require_dims(xhat.rows() == xstar.rows() && xhat.cols() == xstar.cols(), "relative_error needs equal shapes");
  const double d = xstar.norm();
  require(d > 0.0, "relative error against a zero matrix is undefined");
  return (xhat - xstar).norm() / d;
}

// ---------------------------------------------------------------------------
// Theorem constants

inline constexpr double kRadiusConstant = 1.0 / 200.0;
inline constexpr double kProjFgdRateDenominator = 550.0;
inline constexpr double kFgdRateDenominator = 64.0;

struct TheoremConstants {
  double mu = 0.0;
  double L = 0.0;
  double sigma_1_x = 0.0;  // ||X*||_2
  double sigma_r_x = 0.0;  // sigma_r(X*)
  double sigma_r_u = 0.0;  // sigma_r(U*)
  double grad_star_norm = 0.0;  // ||grad f(X*)||_2
  double rho_prime = 0.0;
  double radius = 0.0;  // rho' sigma_r(U*)
  double alpha = 1.0;
};

/// rho' = c (mu / L) sigma_r(X*) / sigma_1(X*) and
/// alpha = 1 - mu sigma_r(X*) / (denominator (L ||X*||_2 + ||grad f(X*)||_2)).
template <Field S>
TheoremConstants theorem_constants(const Objective<S>& obj, const Factor<S>& truth, double mu, double L,
                                   double rate_denominator = kProjFgdRateDenominator) {
  require(mu > 0.0 && L > 0.0, "theorem constants need positive mu and L");
  TheoremConstants c;
  c.mu = mu;
  c.L = L;
  const Hermitian<S> xs = to_x<S>(truth);
  const Eigen::VectorXd ev = hermitian_eigenvalues<S>(xs);
  const Eigen::Index r = truth.cols();
  c.sigma_1_x = ev(0);
  c.sigma_r_x = ev(r - 1);
  c.sigma_r_u = sigma_r<S>(truth);
  c.grad_star_norm = spectral_norm_hermitian<S>(obj.grad(xs));
  c.rho_prime = kRadiusConstant * (mu / L) * (c.sigma_r_x / c.sigma_1_x);
  c.radius = c.rho_prime * c.sigma_r_u;
  c.alpha = 1.0 - mu * c.sigma_r_x / (rate_denominator * (L * c.sigma_1_x + c.grad_star_norm));
  return c;
}

/// Constants with mu from random rank-r directions and L = L_hat.
template <Field S>
TheoremConstants estimated_theorem_constants(const ProblemInstance<S>& inst,
                                             double rate_denominator = kProjFgdRateDenominator) {
  const double mu = estimate_restricted_strong_convexity<S>(inst.objective, inst.rank);
  return theorem_constants<S>(inst.objective, inst.truth_factor, mu, inst.objective.smoothness(), rate_denominator);
}

// ---------------------------------------------------------------------------
// Descent lemma

struct DescentTerms {
  double step = 0.0;       // eta_hat
  double inner = 0.0;      // <grad f(X) U, U - U* R>
  double proj_gap = 0.0;   // ||U_+ - U~_+||_F^2
  double grad_sq = 0.0;    // ||grad f(X) U||_F^2
  double dist = 0.0;
  double margin = 0.0;
  double scale = 0.0;      // largest magnitude among the terms, for the relative tolerance
};

/// 2 eta <grad f U, U - U* R> + ||U_+ - U~_+||^2 - eta^2 ||grad f U||^2 - (3 eta mu / 10) sigma_r(X*) Dist^2
/// with the per-iterate step eta_hat and U~_+ = U - eta grad f U, U_+ = Pi_C(U~_+).
template <Field S>
DescentTerms descent_terms(const Objective<S>& obj, const ConstraintSet& constraint, const Factor<S>& u,
                           const Factor<S>& truth, double mu, double sigma_r_x,
                           double step_constant = kProjFgdStepConstant) {
  DescentTerms d;
  const Hermitian<S> g = obj.grad(to_x<S>(u));
  const Factor<S> gu = g * u;
  d.step = adaptive_step_size<S>(obj, u, g, step_constant);
  const ProcrustesResult<S> pr = procrustes<S>(u, truth);
  d.dist = pr.dist;
  d.inner = inner(gu, Factor<S>(u - truth * pr.rotation));
  const Factor<S> tilde = u - d.step * gu;
  const Factor<S> next = constraint.project<S>(tilde).factor;
  d.proj_gap = (next - tilde).squaredNorm();
  d.grad_sq = gu.squaredNorm();
  const double t1 = 2.0 * d.step * d.inner;
  const double t3 = d.step * d.step * d.grad_sq;
  const double t4 = 0.3 * d.step * mu * sigma_r_x * d.dist * d.dist;
  d.margin = t1 + d.proj_gap - t3 - t4;
  d.scale = std::max({std::abs(t1), d.proj_gap, t3, t4});
  return d;
}

struct DescentOptions {
  int trials = 200;
  /// Perturbation sizes are drawn uniformly in (0, radius_fraction * radius].
  double radius_fraction = 1.0;
  std::uint64_t seed = 1;
};

/// Random feasible perturbations of `center`; trials whose Dist to the truth
/// exceeds the theorem radius are evaluated but counted as skipped.
template <Field S>
LemmaReport check_descent_lemma(const ProblemInstance<S>& inst, const Factor<S>& center, const TheoremConstants& tc,
                                const DescentOptions& opt = {}) {
  require(tc.mu > 0.0, "descent lemma check needs a positive mu estimate");
  LemmaReport rep;
  rep.name = "descent";
  rep.context["mu"] = tc.mu;
  rep.context["L"] = tc.L;
  rep.context["radius"] = tc.radius;
  rep.context["radius_fraction"] = opt.radius_fraction;
  const Eigen::Index n = center.rows();
  const Eigen::Index r = center.cols();
  for (int k = 0; k < opt.trials; ++k) {
    Rng rng(opt.seed, static_cast<std::uint64_t>(k));
    Factor<S> dir = rng.gaussian_matrix<S>(n, r);
    const double size = rng.uniform_open0() * opt.radius_fraction * tc.radius;
    Factor<S> u = center + dir * (size / dir.norm());
    u = inst.constraint.template project<S>(u).factor;
    const DescentTerms d = descent_terms<S>(inst.objective, inst.constraint, u, inst.truth_factor, tc.mu, tc.sigma_r_x);
    const bool in_hyp = inst.constraint.faithful() && d.dist <= tc.radius;
    record_margin(rep, d.margin, margin_tolerance(d.scale), in_hyp);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Factor-distance inequality

/// ||U U^H - V V^H||_F^2 - 2 (sqrt 2 - 1) sigma_r(U)^2 Dist(U, V)^2.
template <Field S> double tu_margin(const Factor<S>& u, const Factor<S>& v, double* scale = nullptr) {
  const double lhs = (to_x<S>(u) - to_x<S>(v)).squaredNorm();
  const double s = sigma_r<S>(u);
  const double dist = procrustes_dist<S>(u, v);
  const double rhs = 2.0 * (std::numbers::sqrt2 - 1.0) * s * s * dist * dist;
  if (scale) *scale = std::max(lhs, rhs);
  return lhs - rhs;
}

/// Random Gaussian pairs; every third pair is a small perturbation so the
/// near-equality regime is exercised too.
template <Field S> LemmaReport check_tu_inequality(int trials, Eigen::Index n, Eigen::Index r, std::uint64_t seed) {
  LemmaReport rep;
  rep.name = "tu";
  rep.context["n"] = static_cast<double>(n);
  rep.context["r"] = static_cast<double>(r);
  for (int k = 0; k < trials; ++k) {
    Rng rng(seed, static_cast<std::uint64_t>(k));
    const Factor<S> u = rng.gaussian_matrix<S>(n, r);
    Factor<S> v = rng.gaussian_matrix<S>(n, r);
    if (k % 3 == 2) v = u + 1e-2 * v;
    if (sigma_r<S>(u) <= 0.0) {
      ++rep.skipped;
      continue;
    }
    double scale = 0.0;
    const double m = tu_margin<S>(u, v, &scale);
    record_margin(rep, m, margin_tolerance(scale));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Trace constraint vs Frobenius ball

inline constexpr double kMappingTol = 1e-12;

/// Both directions of trace(U U^H) = ||U||_F^2: random factors in the unit
/// Frobenius ball give trace-feasible X, and top-r factors of random
/// trace-feasible PSD X land in the unit ball.
template <Field S> LemmaReport check_trace_frobenius_mapping(int trials, Eigen::Index n, Eigen::Index r,
                                                             std::uint64_t seed) {
  LemmaReport rep;
  rep.name = "trace_frobenius";
  rep.context["n"] = static_cast<double>(n);
  rep.context["r"] = static_cast<double>(r);
  for (int k = 0; k < trials; ++k) {
    Rng rng(seed, static_cast<std::uint64_t>(k));
    Factor<S> u = rng.gaussian_matrix<S>(n, r);
    u *= std::sqrt(rng.uniform()) / u.norm();
    if (k % 4 == 0) u /= u.norm();  // boundary
    record_margin(rep, 1.0 - std::real(to_x<S>(u).trace()), kMappingTol);

    const Factor<S> g = rng.gaussian_matrix<S>(n, r);
    Hermitian<S> x = to_x<S>(g);
    x /= std::real(x.trace());
    if (k % 4 != 0) x *= rng.uniform();
    const Factor<S> top = psd_factor_top_r<S>(x, r);
    record_margin(rep, 1.0 - top.squaredNorm(), kMappingTol);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Contraction

struct ContractionFit {
  /// Largest Dist^2_{t+1} / Dist^2_t over in-radius steps (0 once the distance hits zero).
  double max_ratio = 0.0;
  int steps = 0;
  /// Steps with Dist^2_{t+1} > alpha Dist^2_t + 1e-9.
  int violations = 0;
  /// Smallest alpha Dist^2_t - Dist^2_{t+1}.
  double worst_margin = std::numeric_limits<double>::infinity();
  /// Steps starting outside the radius (not asserted).
  int outside = 0;
};

/// Scans consecutive records whose starting iterate lies within `radius`.
inline ContractionFit fit_contraction(const SolveTrace& trace, double radius, double alpha) {
  ContractionFit fit;
  for (size_t t = 0; t + 1 < trace.records.size(); ++t) {
    const auto& a = trace.records[t].dist;
    const auto& b = trace.records[t + 1].dist;
    require(a.has_value() && b.has_value(), "contraction fit needs a trace with recorded distances");
    if (*a > radius) {
      ++fit.outside;
      continue;
    }
    ++fit.steps;
    const double d0 = (*a) * (*a);
    const double d1 = (*b) * (*b);
    if (d0 > 0.0) fit.max_ratio = std::max(fit.max_ratio, d1 / d0);
    const double margin = alpha * d0 - d1;
    fit.worst_margin = std::min(fit.worst_margin, margin);
    if (margin < -kMarginAbsTol) ++fit.violations;
  }
  require(fit.steps > 0, "no in-radius iterations to fit");
  return fit;
}

// ---------------------------------------------------------------------------
// Initialization bound (full-rank regime)

struct InitBound {
  double rho_prime = 0.0;
  double radius = 0.0;  // rho' sigma_r(U*)
  double dist = 0.0;    // Dist(U_0, U*)
  /// The bound cannot fail when the radius exceeds ||U_0||_F + ||U*||_F.
  bool vacuous = false;
  bool holds = false;
};

/// rho' = sqrt((1 - mu/L) / (2 (sqrt 2 - 1))) tau(U*)^2 sqrt(srank(X*)) with exact mu, L.
template <Field S>
InitBound check_init_bound(const Objective<S>& obj, const ConstraintSet& c, const Factor<S>& truth,
                           const CurvatureBounds& cb) {
  require(cb.L > 0.0, "initialization bound needs a positive L");
  InitBound b;
  const Eigen::VectorXd s = singular_values<S>(truth);
  const double smin = s(s.size() - 1);
  require(smin > 0.0, "initialization bound needs a full-rank truth factor");
  const double tau = s(0) / smin;
  const double srank = stable_rank<S>(to_x<S>(truth));
  b.rho_prime = std::sqrt(std::max(0.0, 1.0 - cb.mu / cb.L) / (2.0 * (std::numbers::sqrt2 - 1.0))) * tau * tau *
                std::sqrt(srank);
  b.radius = b.rho_prime * smin;
  const Factor<S> u0 = init_point<S>(obj, c, truth.cols());
  b.dist = procrustes_dist<S>(u0, truth);
  b.vacuous = b.radius >= u0.norm() + truth.norm();
  b.holds = b.dist <= b.radius;
  return b;
}

// ---------------------------------------------------------------------------
// Scaling factors

/// Smallest xi among records where the projection actually scaled the iterate
/// (+inf when it never fired).
inline double min_fired_xi(const SolveTrace& trace) {
  double m = std::numeric_limits<double>::infinity();
  for (size_t t = 1; t < trace.records.size(); ++t)
    if (trace.records[t].xi < 1.0) m = std::min(m, trace.records[t].xi);
  return m;
}

// ---------------------------------------------------------------------------
// Finite-difference gradients

inline constexpr double kFiniteDifferenceStep = 1e-5;

/// Central differences of f along the isometric packed coordinates of X,
/// compared with pack(grad f(X)); returns the relative Frobenius error.
template <Field S> double matrix_gradient_fd_error(const Objective<S>& obj, const Hermitian<S>& x,
                                                   double h = kFiniteDifferenceStep) {
  const Eigen::Index n = x.rows();
  const Eigen::VectorXd base = pack<S>(x);
  Eigen::VectorXd fd(base.size());
  for (Eigen::Index k = 0; k < base.size(); ++k) {
    Eigen::VectorXd p = base, m = base;
    p(k) += h;
    m(k) -= h;
    fd(k) = (obj.eval(unpack<S>(p, n)) - obj.eval(unpack<S>(m, n))) / (2.0 * h);
  }
  const Eigen::VectorXd g = pack<S>(obj.grad(x));
  const double denom = std::max(g.norm(), std::numeric_limits<double>::min());
  return (fd - g).norm() / denom;
}

/// Central differences of g(U) = f(U U^H) over the real coordinates of U
/// (real and imaginary parts for complex U), compared with 2 grad f(X) U.
template <Field S> double factored_gradient_fd_error(const Objective<S>& obj, const Factor<S>& u,
                                                     double h = kFiniteDifferenceStep) {
  const Factor<S> analytic = 2.0 * obj.factored_grad(u);
  auto g = [&](const Factor<S>& v) { return obj.eval(to_x<S>(v)); };
  double err = 0.0;
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      Factor<S> p = u, m = u;
      p(i, j) += S(h);
      m(i, j) -= S(h);
      const double re = (g(p) - g(m)) / (2.0 * h);
      double diff = re - std::real(analytic(i, j));
      err += diff * diff;
      if constexpr (is_complex_v<S>) {
        p = u;
        m = u;
        p(i, j) += S(0.0, h);
        m(i, j) -= S(0.0, h);
        const double im = (g(p) - g(m)) / (2.0 * h);
        diff = im - std::imag(analytic(i, j));
        err += diff * diff;
      }
    }
  }
  const double denom = std::max(analytic.norm(), std::numeric_limits<double>::min());
  return std::sqrt(err) / denom;
}

}  // namespace projfgd
