#pragma once

// Problem generators with known ground truth: Pauli-measurement quantum state
// tomography, sparse phase retrieval, and Gaussian matrix sensing.

#include "projfgd/constraint.hpp"
#include "projfgd/objective.hpp"
#include "projfgd/rng.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace projfgd {

template <Field S> struct ProblemInstance {
  Objective<S> objective;
  Hermitian<S> truth_x;
  Factor<S> truth_factor;
  ConstraintSet constraint;
  Eigen::Index rank = 1;
  std::uint64_t seed = 0;
  std::string kind;
};

// Independent random streams used by every generator.
namespace stream {
inline constexpr std::uint64_t kOperators = 1;
inline constexpr std::uint64_t kTruth = 2;
inline constexpr std::uint64_t kNoise = 3;
}  // namespace stream

/// Gaussian noise vector rescaled to exactly the requested Euclidean norm.
inline Eigen::VectorXd noise_vector(Rng& rng, Eigen::Index m, double norm) {
  require(norm >= 0.0, "noise norm must be non-negative");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
  if (norm == 0.0 || m == 0) return e;
  for (Eigen::Index i = 0; i < m; ++i) e(i) = rng.normal();
  return e * (norm / e.norm());
}

// ---------------------------------------------------------------------------
// Pauli operators

inline constexpr int kMaxQubits = 12;

enum class PauliScaling {
  Raw,            // plain tensor product, eigenvalues +-1
  UnitFrobenius,  // divided by sqrt(n)
};

inline const char* to_string(PauliScaling s) {
  return s == PauliScaling::Raw ? "pauli_raw" : "pauli_unit_frobenius";
}

inline PauliScaling pauli_scaling_from_string(const std::string& s) {
  if (s == "raw" || s == "pauli_raw") return PauliScaling::Raw;
  if (s == "unit_frobenius" || s == "pauli_unit_frobenius") return PauliScaling::UnitFrobenius;
  throw InvalidArgument("unknown Pauli scaling '" + s + "'");
}

/// Base-4 digits of a Pauli index, most significant (first tensor factor) first.
inline std::vector<int> pauli_digits(int qubits, std::uint64_t index) {
  std::vector<int> d(static_cast<size_t>(qubits));
  for (int j = qubits - 1; j >= 0; --j) {
    d[static_cast<size_t>(j)] = static_cast<int>(index & 3U);
    index >>= 2;
  }
  return d;
}

/// Tensor product of single-qubit Paulis, digit 0..3 -> I, sigma_x, sigma_y, sigma_z.
inline Hermitian<Complex> pauli_operator(int qubits, const std::vector<int>& digits,
                                         PauliScaling scaling = PauliScaling::Raw) {
  require(qubits >= 1, "need at least one qubit");
  require(qubits <= kMaxQubits, "more than 12 qubits exceeds the dense memory budget");
  require(static_cast<int>(digits.size()) == qubits, "one Pauli digit per qubit is required");
  for (int d : digits) require(d >= 0 && d <= 3, "Pauli digits must be in {0,1,2,3}");

  const Eigen::Index n = Eigen::Index{1} << qubits;
  std::uint64_t xmask = 0;
  for (int j = 0; j < qubits; ++j) {
    const int d = digits[static_cast<size_t>(j)];
    if (d == 1 || d == 2) xmask |= std::uint64_t{1} << (qubits - 1 - j);
  }
  const double scale = scaling == PauliScaling::Raw ? 1.0 : 1.0 / std::sqrt(static_cast<double>(n));
  Hermitian<Complex> p = Hermitian<Complex>::Zero(n, n);
  for (Eigen::Index row = 0; row < n; ++row) {
    Complex value(scale, 0.0);
    for (int j = 0; j < qubits; ++j) {
      const bool bit = ((static_cast<std::uint64_t>(row) >> (qubits - 1 - j)) & 1U) != 0;
      switch (digits[static_cast<size_t>(j)]) {
        case 2: value *= bit ? Complex(0.0, 1.0) : Complex(0.0, -1.0); break;
        case 3: value *= bit ? -1.0 : 1.0; break;
        default: break;
      }
    }
    p(row, static_cast<Eigen::Index>(static_cast<std::uint64_t>(row) ^ xmask)) = value;
  }
  return p;
}

inline Hermitian<Complex> pauli_operator(int qubits, const std::string& digits,
                                         PauliScaling scaling = PauliScaling::Raw) {
  std::vector<int> d;
  d.reserve(digits.size());
  for (char c : digits) {
    require(c >= '0' && c <= '3', std::string("invalid Pauli digit '") + c + "'");
    d.push_back(c - '0');
  }
  return pauli_operator(qubits, d, scaling);
}

/// m = round(c_sam * r * n * ln n).
inline Eigen::Index qst_measurement_count(int qubits, Eigen::Index rank, double c_sam) {
  const double n = std::ldexp(1.0, qubits);
  return static_cast<Eigen::Index>(std::llround(c_sam * static_cast<double>(rank) * n * std::log(n)));
}

struct QstParams {
  int qubits = 6;
  Eigen::Index rank = 1;
  double c_sam = 3.0;
  double noise_norm = 1e-3;
  std::uint64_t seed = 0;
  PauliScaling scaling = PauliScaling::Raw;
};

/// Low-rank density matrix (trace one) observed through distinct random Pauli
/// measurements; the factor lives in the unit Frobenius ball.
inline ProblemInstance<Complex> gen_qst(const QstParams& p) {
  require(p.qubits >= 1 && p.qubits <= kMaxQubits, "qubit count must be in [1, 12]");
  const Eigen::Index n = Eigen::Index{1} << p.qubits;
  require(p.rank >= 1 && p.rank <= n, "rank must satisfy 1 <= r <= n");
  require(p.c_sam > 0.0, "c_sam must be positive");
  const Eigen::Index m = qst_measurement_count(p.qubits, p.rank, p.c_sam);
  const std::uint64_t population = std::uint64_t{1} << (2 * p.qubits);
  require(m >= 1, "measurement count rounds to zero");
  require(static_cast<std::uint64_t>(m) <= population, "not enough distinct Pauli operators for the requested m");

  Rng op_rng(p.seed, stream::kOperators);
  const std::vector<std::uint64_t> indices = op_rng.sample_without_replacement(population, static_cast<std::uint64_t>(m));
  Eigen::MatrixXd design(m, packed_size<Complex>(n));
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto digits = pauli_digits(p.qubits, indices[static_cast<size_t>(i)]);
    design.row(i) = pack<Complex>(pauli_operator(p.qubits, digits, p.scaling)).transpose();
  }

  Rng truth_rng(p.seed, stream::kTruth);
  const Matrix<Complex> basis = random_orthonormal<Complex>(truth_rng, n, p.rank);
  const Eigen::VectorXd weights = truth_rng.dirichlet_flat(p.rank);
  Factor<Complex> u_star = basis * weights.cwiseSqrt().cast<Complex>().asDiagonal();
  Hermitian<Complex> x_star = hermitian_part<Complex>(to_x<Complex>(u_star));

  Rng noise_rng(p.seed, stream::kNoise);
  const Eigen::VectorXd clean = design * pack<Complex>(x_star);
  Eigen::VectorXd y = clean + noise_vector(noise_rng, m, p.noise_norm);

  MeasurementEnsemble<Complex> ens(n, std::move(design), std::move(y), p.noise_norm, to_string(p.scaling));
  return ProblemInstance<Complex>{Objective<Complex>(std::move(ens)), std::move(x_star), std::move(u_star),
                                  ConstraintSet::frobenius_ball(1.0), p.rank, p.seed, "qst"};
}

// ---------------------------------------------------------------------------
// Synthetic Gaussian matrix sensing

struct SyntheticParams {
  Eigen::Index n = 32;
  Eigen::Index rank = 2;
  Eigen::Index m = 384;
  double condition_number = 2.0;
  double noise_norm = 0.0;
  std::uint64_t seed = 0;
};

/// Real symmetric Gaussian operators E = (G + G^T) / (2 sqrt(m)), so that
/// E||A(X)||^2 = ||X||_F^2. X* has a geometric spectrum from 1 down to
/// 1/condition_number, rescaled to unit trace.
inline ProblemInstance<double> gen_synthetic(const SyntheticParams& p) {
  require(p.n >= 1, "dimension must be positive");
  require(p.rank >= 1 && p.rank <= p.n, "rank must satisfy 1 <= r <= n");
  require(p.m >= 1, "need at least one measurement");
  require(p.condition_number >= 1.0, "condition number must be at least 1");

  Rng op_rng(p.seed, stream::kOperators);
  Eigen::MatrixXd design(p.m, packed_size<double>(p.n));
  const double scale = 0.5 / std::sqrt(static_cast<double>(p.m));
  for (Eigen::Index i = 0; i < p.m; ++i) {
    const Matrix<double> g = op_rng.gaussian_matrix<double>(p.n, p.n);
    const Hermitian<double> e = (g + g.transpose()) * scale;
    design.row(i) = pack<double>(e).transpose();
  }

  Rng truth_rng(p.seed, stream::kTruth);
  const Matrix<double> basis = random_orthonormal<double>(truth_rng, p.n, p.rank);
  Eigen::VectorXd spectrum(p.rank);
  for (Eigen::Index k = 0; k < p.rank; ++k) {
    const double t = p.rank == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(p.rank - 1);
    spectrum(k) = std::pow(p.condition_number, -t);
  }
  spectrum /= spectrum.sum();
  Factor<double> u_star = basis * spectrum.cwiseSqrt().asDiagonal();
  Hermitian<double> x_star = hermitian_part<double>(to_x<double>(u_star));

  Rng noise_rng(p.seed, stream::kNoise);
  Eigen::VectorXd y = design * pack<double>(x_star) + noise_vector(noise_rng, p.m, p.noise_norm);

  MeasurementEnsemble<double> ens(p.n, std::move(design), std::move(y), p.noise_norm, "gaussian_symmetric");
  return ProblemInstance<double>{Objective<double>(std::move(ens)), std::move(x_star), std::move(u_star),
                                 ConstraintSet::frobenius_ball(1.0), p.rank, p.seed, "synthetic"};
}

// ---------------------------------------------------------------------------
// Sparse phase retrieval

enum class PhaseRetrievalDesign { Gaussian, OctanaryCdp };

struct PhaseRetrievalParams {
  Eigen::Index n = 32;
  Eigen::Index sparsity = 4;
  Eigen::Index m = 256;
  double noise_norm = 0.0;
  /// l1 radius on the factor; when <= 0 it is lambda_factor * ||x*||_1.
  double lambda = 0.0;
  double lambda_factor = 1.2;
  std::uint64_t seed = 0;
  PhaseRetrievalDesign design = PhaseRetrievalDesign::Gaussian;
};

/// Ensemble with rank-one operators a_i a_i^H (columns of `vectors`), so (A(X))_i = a_i^H X a_i.
inline MeasurementEnsemble<Complex> phase_retrieval_ensemble(const Matrix<Complex>& vectors, const Vector<Complex>& x,
                                                             const Eigen::VectorXd& noise, double noise_norm,
                                                             const std::string& label = "rank_one") {
  const Eigen::Index n = vectors.rows();
  const Eigen::Index m = vectors.cols();
  require_dims(x.size() == n, "signal length must match the measurement vectors");
  require_dims(noise.size() == m, "noise length must match the number of measurements");
  Eigen::MatrixXd design(m, packed_size<Complex>(n));
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vector<Complex> a = vectors.col(i);
    design.row(i) = pack<Complex>(hermitian_part<Complex>(a * a.adjoint())).transpose();
    y(i) = std::norm(a.dot(x)) + noise(i);
  }
  return MeasurementEnsemble<Complex>(n, std::move(design), std::move(y), noise_norm, label);
}

/// Coded diffraction vectors: a_{l,k} = conj(d_l) .* f_k with octanary masks d_l
/// (phase uniform in {1,-1,i,-i}, modulus sqrt(2)/2 w.p. 4/5 and sqrt(3) w.p. 1/5).
inline Matrix<Complex> octanary_cdp_vectors(Rng& rng, Eigen::Index n, Eigen::Index patterns) {
  Matrix<Complex> a(n, n * patterns);
  const Complex phases[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (Eigen::Index l = 0; l < patterns; ++l) {
    Vector<Complex> mask(n);
    for (Eigen::Index t = 0; t < n; ++t) {
      const Complex b1 = phases[rng.below(4)];
      const double b2 = rng.uniform() < 0.8 ? std::sqrt(2.0) / 2.0 : std::sqrt(3.0);
      mask(t) = b1 * b2;
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index t = 0; t < n; ++t) {
        const double ang = 2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n);
        a(t, l * n + k) = std::conj(mask(t)) * Complex(std::cos(ang), std::sin(ang));
      }
    }
  }
  return a;
}

/// k-sparse unit-norm complex signal observed through |<a_i, x>|^2. The
/// factor-space l1 ball is not faithful, so theory-backed checks skip these instances.
inline ProblemInstance<Complex> gen_phase_retrieval(const PhaseRetrievalParams& p) {
  require(p.n >= 1, "dimension must be positive");
  require(p.sparsity >= 1 && p.sparsity <= p.n, "sparsity must satisfy 1 <= k <= n");
  require(p.m >= 1, "need at least one measurement");

  Rng op_rng(p.seed, stream::kOperators);
  Matrix<Complex> vectors;
  std::string label;
  if (p.design == PhaseRetrievalDesign::Gaussian) {
    vectors = op_rng.gaussian_matrix<Complex>(p.n, p.m);
    label = "complex_gaussian";
  } else {
    require(p.m % p.n == 0, "coded diffraction patterns need m to be a multiple of n");
    vectors = octanary_cdp_vectors(op_rng, p.n, p.m / p.n);
    label = "octanary_cdp";
  }

  Rng truth_rng(p.seed, stream::kTruth);
  const auto support = truth_rng.sample_without_replacement(static_cast<std::uint64_t>(p.n),
                                                            static_cast<std::uint64_t>(p.sparsity));
  Vector<Complex> x = Vector<Complex>::Zero(p.n);
  for (std::uint64_t idx : support) x(static_cast<Eigen::Index>(idx)) = truth_rng.gaussian<Complex>();
  x.normalize();

  Rng noise_rng(p.seed, stream::kNoise);
  const Eigen::VectorXd noise = noise_vector(noise_rng, p.m, p.noise_norm);
  MeasurementEnsemble<Complex> ens = phase_retrieval_ensemble(vectors, x, noise, p.noise_norm, label);

  const double lambda = p.lambda > 0.0 ? p.lambda : p.lambda_factor * l1_norm(x);
  Factor<Complex> u_star = x;
  Hermitian<Complex> x_star = hermitian_part<Complex>(to_x<Complex>(u_star));
  return ProblemInstance<Complex>{Objective<Complex>(std::move(ens)), std::move(x_star), std::move(u_star),
                                  ConstraintSet::l1_ball(lambda), 1, p.seed, "phase_retrieval"};
}

}  // namespace projfgd
