#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace projfgd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

inline void require_dims(bool cond, const std::string& msg) {
  if (!cond) throw DimensionMismatch(msg);
}

using Complex = std::complex<double>;

template <typename T> struct is_complex : std::false_type {};
template <typename T> struct is_complex<std::complex<T>> : std::true_type {};
template <typename T> inline constexpr bool is_complex_v = is_complex<T>::value;

/// Scalar fields supported by the solver: real (double) and complex (std::complex<double>).
template <typename T>
concept Field = std::is_same_v<T, double> || std::is_same_v<T, Complex>;

template <Field S> using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <Field S> using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// Dense Hermitian (real-symmetric for S = double) n x n matrix; the X-space variable.
template <Field S> using Hermitian = Matrix<S>;

/// n x r factor U with X = U U^H.
template <Field S> using Factor = Matrix<S>;

template <Field S> constexpr const char* field_name() {
  return is_complex_v<S> ? "complex" : "real";
}

/// <X, Y> = Re trace(X^H Y).
template <typename DerivedA, typename DerivedB>
double inner(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  return std::real(a.conjugate().cwiseProduct(b).sum());
}

template <Field S> Hermitian<S> to_x(const Factor<S>& u) { return u * u.adjoint(); }

template <Field S> Hermitian<S> hermitian_part(const Matrix<S>& m) {
  return (m + m.adjoint()) * 0.5;
}

/// Sum of entry moduli.
template <typename Derived> double l1_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().sum();
}

}  // namespace projfgd
