#pragma once

// Least-squares sensing objective f(X) = ||A(X) - y||_2^2 over Hermitian X.
//
// Operators are stored densely as rows of a real design matrix in an isometric
// packing of the Hermitian space: diagonal entries, then sqrt(2) Re X_ij and
// (complex field) sqrt(2) Im X_ij for i < j. With that packing
// <E, X> = pack(E) . pack(X) and ||pack(X)||_2 = ||X||_F, so A(X) is a single
// matrix-vector product and the Gram form of A is the Gram matrix of the rows.

#include "projfgd/linalg.hpp"
#include "projfgd/rng.hpp"

#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace projfgd {

template <Field S> constexpr Eigen::Index packed_size(Eigen::Index n) {
  return is_complex_v<S> ? n * n : n * (n + 1) / 2;
}

template <Field S> Eigen::VectorXd pack(const Hermitian<S>& x) {
  const Eigen::Index n = x.rows();
  Eigen::VectorXd v(packed_size<S>(n));
  const double s2 = std::numbers::sqrt2;
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) v(k++) = std::real(x(i, i));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) v(k++) = s2 * std::real(x(i, j));
  if constexpr (is_complex_v<S>) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) v(k++) = s2 * std::imag(x(i, j));
  }
  return v;
}

template <Field S, typename Derived>
Hermitian<S> unpack(const Eigen::MatrixBase<Derived>& expr, Eigen::Index n) {
  require_dims(expr.size() == packed_size<S>(n), "packed vector has the wrong length");
  const Eigen::VectorXd v = expr;
  Hermitian<S> x(n, n);
  const double inv = 1.0 / std::numbers::sqrt2;
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) x(i, i) = v(k++);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) x(i, j) = v(k++) * inv;
  if constexpr (is_complex_v<S>) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) x(i, j) += S(0.0, v(k++) * inv);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if constexpr (is_complex_v<S>) {
        x(j, i) = std::conj(x(i, j));
      } else {
        x(j, i) = x(i, j);
      }
    }
  }
  return x;
}

/// The linear sensing map A together with its observations y.
template <Field S> class MeasurementEnsemble {
public:
  MeasurementEnsemble(Eigen::Index dim, Eigen::MatrixXd design, Eigen::VectorXd y, double noise_norm,
                      std::string normalization = "none")
      : dim_(dim),
        design_(std::move(design)),
        y_(std::move(y)),
        noise_norm_(noise_norm),
        normalization_(std::move(normalization)) {
    require(dim_ >= 1, "ensemble dimension must be positive");
    require_dims(design_.cols() == packed_size<S>(dim_), "design matrix width does not match the dimension");
    require_dims(design_.rows() == y_.size(), "one observation per operator is required");
    require(noise_norm_ >= 0.0, "noise norm must be non-negative");
  }

  static MeasurementEnsemble from_operators(const std::vector<Hermitian<S>>& ops, const Eigen::VectorXd& y,
                                            double noise_norm, std::string normalization = "none") {
    require(!ops.empty(), "ensemble needs at least one operator");
    const Eigen::Index n = ops.front().rows();
    Eigen::MatrixXd design(static_cast<Eigen::Index>(ops.size()), packed_size<S>(n));
    for (size_t i = 0; i < ops.size(); ++i) {
      require_dims(ops[i].rows() == n && ops[i].cols() == n, "all operators must share one dimension");
      check_hermitian<S>(ops[i], "sensing operator");
      design.row(static_cast<Eigen::Index>(i)) = pack<S>(ops[i]).transpose();
    }
    return MeasurementEnsemble(n, std::move(design), y, noise_norm, std::move(normalization));
  }

  Eigen::Index dim() const { return dim_; }
  Eigen::Index size() const { return design_.rows(); }
  const Eigen::MatrixXd& design() const { return design_; }
  const Eigen::VectorXd& observations() const { return y_; }
  double noise_norm() const { return noise_norm_; }
  const std::string& normalization() const { return normalization_; }

  Hermitian<S> operator_at(Eigen::Index i) const {
    require_dims(i >= 0 && i < size(), "operator index out of range");
    return unpack<S>(design_.row(i).transpose(), dim_);
  }

  /// (A(X))_i = Re trace(E_i X).
  Eigen::VectorXd apply(const Hermitian<S>& x) const {
    require_dims(x.rows() == dim_ && x.cols() == dim_, "matrix dimension does not match the ensemble");
    return design_ * pack<S>(x);
  }

  /// A*(z) = sum_i z_i E_i.
  Hermitian<S> adjoint(const Eigen::VectorXd& z) const {
    require_dims(z.size() == size(), "adjoint input length must equal the number of operators");
    return unpack<S>(design_.transpose() * z, dim_);
  }

  MeasurementEnsemble with_observations(Eigen::VectorXd y, double noise_norm) const {
    return MeasurementEnsemble(dim_, design_, std::move(y), noise_norm, normalization_);
  }

private:
  Eigen::Index dim_;
  Eigen::MatrixXd design_;
  Eigen::VectorXd y_;
  double noise_norm_;
  std::string normalization_;
};

namespace detail {

// Largest eigenvalue of the Gram form M^T M by power iteration on the smaller side.
inline double gram_lambda_max_power(const Eigen::MatrixXd& m, double rel_tol = 1e-12, int max_iters = 20000) {
  const bool rows_side = m.rows() <= m.cols();
  const Eigen::Index len = rows_side ? m.rows() : m.cols();
  Rng rng(0x5EEDULL);
  Eigen::VectorXd v(len);
  for (Eigen::Index i = 0; i < len; ++i) v(i) = rng.normal();
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd w = rows_side ? Eigen::VectorXd(m * (m.transpose() * v)) : Eigen::VectorXd(m.transpose() * (m * v));
    const double next = v.dot(w);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    // Rayleigh quotients increase monotonically; stop once they stall.
    if (it > 0 && std::abs(next - lambda) <= rel_tol * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

}  // namespace detail

/// f(X) = ||A(X) - y||^2 with gradient 2 A*(A(X) - y). Immutable; the
/// smoothness estimate L_hat = 2 lambda_max(A* A) is computed once at construction.
template <Field S> class Objective {
public:
  explicit Objective(std::shared_ptr<const MeasurementEnsemble<S>> ensemble) : ensemble_(std::move(ensemble)) {
    require(ensemble_ != nullptr, "objective needs an ensemble");
    require(ensemble_->size() > 0, "cannot estimate smoothness of an empty ensemble");
    smoothness_ = 2.0 * detail::gram_lambda_max_power(ensemble_->design());
  }
  explicit Objective(MeasurementEnsemble<S> ensemble)
      : Objective(std::make_shared<const MeasurementEnsemble<S>>(std::move(ensemble))) {}

  const MeasurementEnsemble<S>& ensemble() const { return *ensemble_; }
  std::shared_ptr<const MeasurementEnsemble<S>> ensemble_ptr() const { return ensemble_; }
  Eigen::Index dim() const { return ensemble_->dim(); }

  /// L_hat, an estimate of the gradient Lipschitz constant.
  double smoothness() const { return smoothness_; }

  Eigen::VectorXd residual(const Hermitian<S>& x) const { return ensemble_->apply(x) - ensemble_->observations(); }

  double eval(const Hermitian<S>& x) const { return residual(x).squaredNorm(); }

  Hermitian<S> grad(const Hermitian<S>& x) const { return ensemble_->adjoint(2.0 * residual(x)); }

  /// grad(U U^H) U; the factor-2 convention of the symmetric case lives in grad().
  Factor<S> factored_grad(const Factor<S>& u) const {
    require_dims(u.rows() == dim(), "factor row count does not match the dimension");
    return grad(to_x<S>(u)) * u;
  }

  Hermitian<S> grad_from_residual(const Eigen::VectorXd& res) const { return ensemble_->adjoint(2.0 * res); }

  /// Same objective with different observations (shares the operators).
  Objective with_observations(Eigen::VectorXd y, double noise_norm) const {
    return Objective(std::make_shared<const MeasurementEnsemble<S>>(ensemble_->with_observations(std::move(y), noise_norm)),
                     smoothness_);
  }

private:
  Objective(std::shared_ptr<const MeasurementEnsemble<S>> ensemble, double smoothness)
      : ensemble_(std::move(ensemble)), smoothness_(smoothness) {}

  std::shared_ptr<const MeasurementEnsemble<S>> ensemble_;
  double smoothness_ = 0.0;
};

template <Field S> double estimate_smoothness(const Objective<S>& obj) { return obj.smoothness(); }

/// 2 * min ||A(D)||^2 / ||D||_F^2 over random rank-r Hermitian directions D.
/// Diagnostics only; the solver never uses it.
template <Field S>
double estimate_restricted_strong_convexity(const Objective<S>& obj, Eigen::Index rank, int directions = 50,
                                            std::uint64_t seed = 0xC0FFEEULL) {
  require(rank >= 1 && rank <= obj.dim(), "rank must satisfy 1 <= r <= n");
  require(directions >= 1, "need at least one direction");
  Rng rng(seed);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < directions; ++k) {
    const Factor<S> g = rng.gaussian_matrix<S>(obj.dim(), rank);
    Eigen::VectorXd signs(rank);
    for (Eigen::Index j = 0; j < rank; ++j) signs(j) = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const Hermitian<S> d = hermitian_part<S>(g * signs.template cast<S>().asDiagonal() * g.adjoint());
    const double nd = d.squaredNorm();
    if (nd == 0.0) continue;
    best = std::min(best, obj.ensemble().apply(d).squaredNorm() / nd);
  }
  return 2.0 * best;
}

struct CurvatureBounds {
  double mu = 0.0;  // 2 lambda_min(A* A) over the whole Hermitian space (0 if A has a kernel)
  double L = 0.0;   // 2 lambda_max(A* A)
};

/// Exact curvature constants from the dense Gram matrix; desk-scale problems only.
template <Field S> CurvatureBounds exact_curvature(const MeasurementEnsemble<S>& ens) {
  const Eigen::MatrixXd& m = ens.design();
  const Eigen::Index smaller = std::min(m.rows(), m.cols());
  require(smaller <= 4096, "dense Gram eigendecomposition is limited to 4096 x 4096");
  CurvatureBounds out;
  if (m.rows() >= m.cols()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.transpose() * m, Eigen::EigenvaluesOnly);
    out.mu = 2.0 * std::max(es.eigenvalues()(0), 0.0);
    out.L = 2.0 * es.eigenvalues()(es.eigenvalues().size() - 1);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m * m.transpose(), Eigen::EigenvaluesOnly);
    out.mu = 0.0;
    out.L = 2.0 * es.eigenvalues()(es.eigenvalues().size() - 1);
  }
  return out;
}

}  // namespace projfgd
