#pragma once

#include "projfgd/linalg.hpp"

#include <limits>
#include <string>

namespace projfgd {

enum class ConstraintKind { Unconstrained, FrobeniusBall, L1Ball };

inline const char* to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::Unconstrained: return "unconstrained";
    case ConstraintKind::FrobeniusBall: return "frobenius_ball";
    case ConstraintKind::L1Ball: return "l1_ball";
  }
  return "unknown";
}

inline ConstraintKind constraint_kind_from_string(const std::string& s) {
  if (s == "unconstrained" || s == "none") return ConstraintKind::Unconstrained;
  if (s == "frobenius_ball" || s == "frobenius") return ConstraintKind::FrobeniusBall;
  if (s == "l1_ball" || s == "l1") return ConstraintKind::L1Ball;
  throw InvalidArgument("unknown constraint kind '" + s + "'");
}

/// Factor-space constraint set C together with its Euclidean projection.
///
/// The Frobenius ball {||U||_F <= lambda} maps one-to-one onto the trace
/// constraint trace(U U^H) <= lambda^2 and contains every factorization of a
/// feasible X, so it is faithful. The l1 ball on the factor does not preserve
/// that correspondence and is flagged unfaithful; theory-backed checks skip it.
class ConstraintSet {
public:
  static ConstraintSet unconstrained() { return ConstraintSet(ConstraintKind::Unconstrained, 0.0); }
  static ConstraintSet frobenius_ball(double lambda) {
    require(lambda > 0.0, "Frobenius-ball radius must be positive");
    return ConstraintSet(ConstraintKind::FrobeniusBall, lambda);
  }
  static ConstraintSet l1_ball(double lambda) {
    require(lambda > 0.0, "l1-ball radius must be positive");
    return ConstraintSet(ConstraintKind::L1Ball, lambda);
  }
  static ConstraintSet make(ConstraintKind kind, double lambda) {
    switch (kind) {
      case ConstraintKind::Unconstrained: return unconstrained();
      case ConstraintKind::FrobeniusBall: return frobenius_ball(lambda);
      case ConstraintKind::L1Ball: return l1_ball(lambda);
    }
    throw InvalidArgument("unknown constraint kind");
  }

  ConstraintKind kind() const { return kind_; }
  double radius() const { return radius_; }
  bool faithful() const { return kind_ != ConstraintKind::L1Ball; }
  /// True when the projection acts as an entrywise scaling of its input.
  bool scaling_projection() const { return kind_ != ConstraintKind::L1Ball; }

  /// Projects v onto the set. xi is the scaling factor for the Frobenius ball;
  /// for the l1 ball it is reported as ||Pi(v)||_F / ||v||_F. xi = 1 whenever v is feasible.
  template <Field S> ScaledFactor<S> project(const Factor<S>& v) const {
    switch (kind_) {
      case ConstraintKind::Unconstrained: return {v, 1.0};
      case ConstraintKind::FrobeniusBall: return project_frobenius_ball<S>(v, radius_);
      case ConstraintKind::L1Ball: {
        if (l1_norm(v) <= radius_) return {v, 1.0};
        Factor<S> p = project_l1_ball<S>(v, radius_);
        const double nv = v.norm();
        const double xi = nv > 0.0 ? p.norm() / nv : 1.0;
        return {std::move(p), xi};
      }
    }
    throw InvalidArgument("unknown constraint kind");
  }

  template <Field S> bool contains(const Factor<S>& u, double tol = 1e-10) const {
    switch (kind_) {
      case ConstraintKind::Unconstrained: return true;
      case ConstraintKind::FrobeniusBall: return u.norm() <= radius_ + tol;
      case ConstraintKind::L1Ball: return l1_norm(u) <= radius_ + tol;
    }
    return false;
  }

  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;

private:
  ConstraintSet(ConstraintKind kind, double radius) : kind_(kind), radius_(radius) {}

  ConstraintKind kind_;
  double radius_;
};

}  // namespace projfgd
