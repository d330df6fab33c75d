#pragma once

// Dense Hermitian eigendecomposition, Procrustes alignment and the factor-space
// projections shared by the solver and the diagnostics.

#include "projfgd/types.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace projfgd {

/// Eigenvalues below this are treated as zero when building factors.
inline constexpr double kRankCutoff = 1e-12;

template <Field S> struct EigPair {
  Eigen::VectorXd values;  // descending
  Matrix<S> vectors;       // n x r, orthonormal columns
};

template <Field S> double max_abs_entry(const Matrix<S>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

template <Field S> void check_hermitian(const Matrix<S>& m, const char* what = "matrix") {
  require_dims(m.rows() == m.cols(), std::string(what) + " must be square");
  const double scale = max_abs_entry<S>(m);
  const double asym = m.size() == 0 ? 0.0 : (m - m.adjoint()).cwiseAbs().maxCoeff();
  require(asym <= 1e-12 * scale, std::string(what) + " is not Hermitian");
}

namespace detail {

// Makes the largest-modulus entry of every column real and positive.
template <Field S> void fix_phases(Matrix<S>& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const double a = std::abs(v(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (best_abs > 0.0) {
      const S pivot = v(best, j);
      if constexpr (is_complex_v<S>) {
        v.col(j) *= std::conj(pivot) / best_abs;
      } else {
        if (pivot < 0.0) v.col(j) = -v.col(j);
      }
    }
  }
}

}  // namespace detail

/// Full spectrum, eigenvalues in descending order.
template <Field S> EigPair<S> hermitian_eig(const Hermitian<S>& m) {
  check_hermitian<S>(m);
  Eigen::SelfAdjointEigenSolver<Matrix<S>> es(m);
  if (es.info() != Eigen::Success) throw Error("Hermitian eigendecomposition did not converge");
  EigPair<S> out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  detail::fix_phases<S>(out.vectors);
  return out;
}

/// Top-r eigenpairs by algebraic value.
template <Field S> EigPair<S> hermitian_eig_top_r(const Hermitian<S>& m, Eigen::Index r) {
  require_dims(m.rows() == m.cols(), "eigendecomposition needs a square matrix");
  require(r >= 1, "requested rank must be positive");
  require_dims(r <= m.rows(), "requested rank exceeds the matrix dimension");
  EigPair<S> full = hermitian_eig<S>(m);
  EigPair<S> out;
  out.values = full.values.head(r);
  out.vectors = full.vectors.leftCols(r);
  return out;
}

template <Field S> Eigen::VectorXd hermitian_eigenvalues(const Hermitian<S>& m) {
  check_hermitian<S>(m);
  Eigen::SelfAdjointEigenSolver<Matrix<S>> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("Hermitian eigendecomposition did not converge");
  return es.eigenvalues().reverse();
}

/// ||m||_2 for Hermitian m, i.e. the largest eigenvalue modulus.
template <Field S> double spectral_norm_hermitian(const Hermitian<S>& m) {
  if (m.size() == 0) return 0.0;
  const Eigen::VectorXd ev = hermitian_eigenvalues<S>(m);
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// Singular values of an arbitrary (typically thin) matrix, descending.
template <Field S> Eigen::VectorXd singular_values(const Matrix<S>& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  Eigen::JacobiSVD<Matrix<S>> svd(m);
  return svd.singularValues();
}

template <Field S> double spectral_norm(const Matrix<S>& m) {
  if (m.size() == 0) return 0.0;
  return singular_values<S>(m)(0);
}

/// r-th (smallest of the top r) singular value of an n x r factor.
template <Field S> double sigma_r(const Factor<S>& u) {
  const Eigen::VectorXd sv = singular_values<S>(u);
  return sv.size() == 0 ? 0.0 : sv(sv.size() - 1);
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues clipped to zero.
template <Field S> Hermitian<S> psd_project(const Hermitian<S>& m) {
  const EigPair<S> e = hermitian_eig<S>(m);
  const Eigen::VectorXd clipped = e.values.cwiseMax(0.0);
  Hermitian<S> out = e.vectors * clipped.template cast<S>().asDiagonal() * e.vectors.adjoint();
  return hermitian_part<S>(out);
}

/// Factor whose Gram matrix is the best rank-r PSD approximation of m.
/// Columns for eigenvalues at or below kRankCutoff are zero.
template <Field S> Factor<S> psd_factor_top_r(const Hermitian<S>& m, Eigen::Index r) {
  const EigPair<S> e = hermitian_eig_top_r<S>(m, r);
  Factor<S> u = Factor<S>::Zero(m.rows(), r);
  for (Eigen::Index j = 0; j < r; ++j) {
    if (e.values(j) > kRankCutoff) u.col(j) = e.vectors.col(j) * std::sqrt(e.values(j));
  }
  return u;
}

template <Field S> struct ProcrustesResult {
  double dist = 0.0;
  Matrix<S> rotation;  // r x r orthogonal (real) or unitary (complex)
};

/// min over orthonormal R of ||u - v R||_F, via the polar factor of v^H u.
template <Field S> ProcrustesResult<S> procrustes(const Factor<S>& u, const Factor<S>& v) {
  require_dims(u.rows() == v.rows() && u.cols() == v.cols(), "procrustes: factor shapes differ");
  const Matrix<S> cross = v.adjoint() * u;
  Eigen::JacobiSVD<Matrix<S>> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ProcrustesResult<S> out;
  out.rotation = svd.matrixU() * svd.matrixV().adjoint();
  out.dist = (u - v * out.rotation).norm();
  return out;
}

template <Field S> double procrustes_dist(const Factor<S>& u, const Factor<S>& v) {
  return procrustes<S>(u, v).dist;
}

template <Field S> struct ScaledFactor {
  Factor<S> factor;
  double xi = 1.0;
};

/// Projection onto {||U||_F <= lambda}; an entrywise scaling by xi = lambda/||v||_F when v is outside.
template <Field S> ScaledFactor<S> project_frobenius_ball(const Factor<S>& v, double lambda) {
  require(lambda > 0.0, "Frobenius-ball radius must be positive");
  const double nrm = v.norm();
  if (nrm <= lambda) return {v, 1.0};
  const double xi = lambda / nrm;
  return {v * xi, xi};
}

/// Euclidean projection onto {sum |U_ij| <= lambda} by the sorted-threshold rule.
/// Complex entries keep their phase; only the moduli are thresholded.
template <Field S> Factor<S> project_l1_ball(const Factor<S>& v, double lambda) {
  require(lambda > 0.0, "l1-ball radius must be positive");
  const Eigen::Index size = v.size();
  std::vector<double> mod(static_cast<size_t>(size));
  for (Eigen::Index k = 0; k < size; ++k) mod[static_cast<size_t>(k)] = std::abs(v.data()[k]);
  const double total = std::accumulate(mod.begin(), mod.end(), 0.0);
  if (total <= lambda) return v;

  std::vector<double> sorted = mod;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (size_t j = 0; j < sorted.size(); ++j) {
    cumsum += sorted[j];
    const double candidate = (cumsum - lambda) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }

  Factor<S> out(v.rows(), v.cols());
  for (Eigen::Index k = 0; k < size; ++k) {
    const double m = mod[static_cast<size_t>(k)];
    const double shrunk = std::max(m - theta, 0.0);
    out.data()[k] = (m > 0.0) ? v.data()[k] * (shrunk / m) : S(0);
  }
  return out;
}

/// Orthonormal basis of the column space of u (numerical rank decided by pivoted QR).
template <Field S> Matrix<S> column_basis(const Factor<S>& u) {
  Eigen::ColPivHouseholderQR<Matrix<S>> qr(u);
  qr.setThreshold(1e-12);
  const Eigen::Index rank = qr.rank();
  Matrix<S> q = qr.householderQ() * Matrix<S>::Identity(u.rows(), rank);
  return q;
}

/// Stable rank ||X||_F / ||X||_2.
template <Field S> double stable_rank(const Hermitian<S>& x) {
  const double s1 = spectral_norm_hermitian<S>(x);
  require(s1 > 0.0, "stable rank of the zero matrix is undefined");
  return x.norm() / s1;
}

}  // namespace projfgd
