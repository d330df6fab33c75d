#pragma once

// Counter-based random numbers. Draw k of stream (seed, id) depends only on
// (seed, id, k), so sweep cells and trials can be generated in any order or
// in parallel and still reproduce bit-for-bit.

#include "projfgd/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <unordered_set>
#include <vector>

namespace projfgd {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of an independent sub-stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream * kGolden + 0x632BE59BD9B4E019ULL));
}

class Rng {
public:
  explicit Rng(std::uint64_t seed) : key_(mix64(seed)) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : Rng(derive_seed(seed, stream)) {}

  std::uint64_t next_u64() { return mix64(key_ + kGolden * (++counter_)); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    require(bound > 0, "Rng::below needs a positive bound");
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % bound;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % bound;
  }

  /// Standard normal by Box-Muller; both variates of a pair are used.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open0();
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = rad * std::sin(ang);
    has_spare_ = true;
    return rad * std::cos(ang);
  }

  /// Standard normal of the field: real N(0,1), or complex with independent
  /// real and imaginary parts of variance 1/2 (E|z|^2 = 1).
  template <Field S> S gaussian() {
    if constexpr (is_complex_v<S>) {
      const double re = normal() * std::numbers::sqrt2 * 0.5;
      const double im = normal() * std::numbers::sqrt2 * 0.5;
      return S(re, im);
    } else {
      return normal();
    }
  }

  template <Field S> Matrix<S> gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix<S> m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = gaussian<S>();
    return m;
  }

  /// k distinct values from [0, n), in ascending order (Floyd's algorithm).
  std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::uint64_t k) {
    require(k <= n, "cannot sample more distinct values than the population size");
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(static_cast<size_t>(k) * 2);
    for (std::uint64_t j = n - k; j < n; ++j) {
      const std::uint64_t t = below(j + 1);
      if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Flat Dirichlet(1, ..., 1) draw of length k.
  Eigen::VectorXd dirichlet_flat(Eigen::Index k) {
    Eigen::VectorXd w(k);
    for (Eigen::Index i = 0; i < k; ++i) w(i) = -std::log(uniform_open0());
    return w / w.sum();
  }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// n x r matrix with orthonormal columns, Haar-distributed up to the QR sign convention.
template <Field S> Matrix<S> random_orthonormal(Rng& rng, Eigen::Index n, Eigen::Index r) {
  require(r <= n, "cannot draw more orthonormal columns than the dimension");
  const Matrix<S> g = rng.gaussian_matrix<S>(n, r);
  Eigen::HouseholderQR<Matrix<S>> qr(g);
  Matrix<S> q = qr.householderQ() * Matrix<S>::Identity(n, r);
  // Fix the R-diagonal phases so the distribution does not depend on Householder conventions.
  const Matrix<S> rmat = qr.matrixQR().topLeftCorner(r, r).template triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < r; ++j) {
    const double a = std::abs(rmat(j, j));
    if (a > 0.0) q.col(j) *= rmat(j, j) / a;
  }
  return q;
}

}  // namespace projfgd
