#include "oracles.hpp"
#include "projfgd/objective.hpp"
#include "projfgd/problems.hpp"

#include <gtest/gtest.h>

using namespace projfgd;

namespace {

template <Field S> std::vector<Hermitian<S>> random_operators(Rng& rng, Eigen::Index n, int m) {
  std::vector<Hermitian<S>> ops;
  for (int i = 0; i < m; ++i) ops.push_back(hermitian_part<S>(Matrix<S>(rng.gaussian_matrix<S>(n, n))));
  return ops;
}

template <Field S> Hermitian<S> random_hermitian(Rng& rng, Eigen::Index n) {
  return hermitian_part<S>(Matrix<S>(rng.gaussian_matrix<S>(n, n)));
}

Eigen::VectorXd random_vector(Rng& rng, Eigen::Index m) {
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) y(i) = rng.normal();
  return y;
}

}  // namespace

TEST(Packing, IsometricAndInvertible) {
  Rng rng(201);
  const Eigen::MatrixXcd a = random_hermitian<Complex>(rng, 4);
  const Eigen::MatrixXcd b = random_hermitian<Complex>(rng, 4);
  EXPECT_NEAR(pack<Complex>(a).dot(pack<Complex>(b)), oracle::trace_product(a, b), 1e-12);
  EXPECT_LT((unpack<Complex>(pack<Complex>(a), 4) - a).norm(), 1e-14);
  const Eigen::MatrixXd c = random_hermitian<double>(rng, 5);
  EXPECT_EQ(pack<double>(c).size(), 15);
  EXPECT_NEAR(pack<double>(c).squaredNorm(), c.squaredNorm(), 1e-12);
}

TEST(Eval, ZeroWhenObservationsAreExact) {
  Rng rng(202);
  const auto ops = random_operators<Complex>(rng, 3, 7);
  const Eigen::MatrixXcd x = random_hermitian<Complex>(rng, 3);
  Eigen::VectorXd y(7);
  for (int i = 0; i < 7; ++i) y(i) = oracle::trace_product(ops[static_cast<size_t>(i)], x);
  const Objective<Complex> obj(MeasurementEnsemble<Complex>::from_operators(ops, y, 0.0));
  EXPECT_NEAR(obj.eval(x), 0.0, 1e-24);
  EXPECT_LT(obj.grad(x).norm(), 1e-12);
}

TEST(Eval, IdentityOperatorArithmetic) {
  const std::vector<Eigen::MatrixXd> ops = {Eigen::MatrixXd::Identity(2, 2)};
  const Objective<double> obj(MeasurementEnsemble<double>::from_operators(ops, Eigen::VectorXd::Zero(1), 0.0));
  EXPECT_DOUBLE_EQ(obj.eval(Eigen::MatrixXd::Identity(2, 2)), 4.0);
}

TEST(Eval, MatchesTermByTermSummation) {
  Rng rng(203);
  const auto ops = random_operators<Complex>(rng, 4, 20);
  const Eigen::VectorXd y = random_vector(rng, 20);
  const Objective<Complex> obj(MeasurementEnsemble<Complex>::from_operators(ops, y, 0.0));
  for (int k = 0; k < 5; ++k) {
    const Eigen::MatrixXcd x = random_hermitian<Complex>(rng, 4);
    const double want = oracle::naive_eval(ops, y, x);
    EXPECT_NEAR(obj.eval(x), want, 1e-12 * want);
  }
}

TEST(Eval, RejectsDimensionMismatch) {
  Rng rng(204);
  const auto ops = random_operators<double>(rng, 3, 4);
  const Objective<double> obj(MeasurementEnsemble<double>::from_operators(ops, Eigen::VectorXd::Zero(4), 0.0));
  EXPECT_THROW(obj.eval(Eigen::MatrixXd::Zero(2, 2)), DimensionMismatch);
  EXPECT_THROW(obj.factored_grad(Eigen::MatrixXd::Zero(2, 1)), DimensionMismatch);
}

TEST(Grad, AtOriginIsMinusTwoAdjointY) {
  Rng rng(205);
  const auto ops = random_operators<Complex>(rng, 3, 6);
  const Eigen::VectorXd y = random_vector(rng, 6);
  const Objective<Complex> obj(MeasurementEnsemble<Complex>::from_operators(ops, y, 0.0));
  Eigen::MatrixXcd want = Eigen::MatrixXcd::Zero(3, 3);
  for (int i = 0; i < 6; ++i) want -= 2.0 * y(i) * ops[static_cast<size_t>(i)];
  EXPECT_LT((obj.grad(Eigen::MatrixXcd::Zero(3, 3)) - want).norm(), 1e-12 * want.norm());
}

TEST(Grad, MatchesDirectionalFiniteDifferences) {
  Rng rng(206);
  const auto ops = random_operators<Complex>(rng, 3, 12);
  const Eigen::VectorXd y = random_vector(rng, 12);
  const Objective<Complex> obj(MeasurementEnsemble<Complex>::from_operators(ops, y, 0.0));
  const double h = 1e-5;
  for (int k = 0; k < 20; ++k) {
    const Eigen::MatrixXcd x = random_hermitian<Complex>(rng, 3);
    const Eigen::MatrixXcd g = obj.grad(x);
    EXPECT_LT((g - g.adjoint()).norm(), 1e-12 * g.norm());
    const Eigen::MatrixXcd d = random_hermitian<Complex>(rng, 3);
    const double fd = (oracle::naive_eval(ops, y, Eigen::MatrixXcd(x + h * d)) -
                       oracle::naive_eval(ops, y, Eigen::MatrixXcd(x - h * d))) / (2.0 * h);
    const double analytic = oracle::trace_product(g, d);
    EXPECT_NEAR(fd, analytic, 1e-6 * std::abs(analytic));
  }
}

TEST(FactoredGrad, ZeroAtZeroFactor) {
  Rng rng(207);
  const auto ops = random_operators<double>(rng, 4, 10);
  const Objective<double> obj(MeasurementEnsemble<double>::from_operators(ops, random_vector(rng, 10), 0.0));
  EXPECT_EQ(obj.factored_grad(Eigen::MatrixXd::Zero(4, 2)).norm(), 0.0);
}

TEST(FactoredGrad, ZeroAtNoiselessOptimum) {
  QstParams p;
  p.qubits = 3;
  p.rank = 2;
  p.c_sam = 1.0;
  p.noise_norm = 0.0;
  const auto inst = gen_qst(p);
  EXPECT_LT(inst.objective.factored_grad(inst.truth_factor).norm(), 1e-12);
}

TEST(FactoredGrad, HalfTheFiniteDifferenceGradientOfTheFactorObjective) {
  Rng rng(208);
  const auto ops = random_operators<Complex>(rng, 3, 15);
  const Eigen::VectorXd y = random_vector(rng, 15);
  const Objective<Complex> obj(MeasurementEnsemble<Complex>::from_operators(ops, y, 0.0));
  auto g = [&](const Eigen::MatrixXcd& u) { return oracle::naive_eval(ops, y, Eigen::MatrixXcd(u * u.adjoint())); };
  const double h = 1e-5;
  for (int k = 0; k < 10; ++k) {
    const Eigen::MatrixXcd u = rng.gaussian_matrix<Complex>(3, 2);
    const Eigen::MatrixXcd analytic = 2.0 * obj.factored_grad(u);
    Eigen::MatrixXcd fd(3, 2);
    for (Eigen::Index i = 0; i < 3; ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) {
        Eigen::MatrixXcd p = u, m = u;
        p(i, j) += h;
        m(i, j) -= h;
        const double re = (g(p) - g(m)) / (2.0 * h);
        p = u;
        m = u;
        p(i, j) += Complex(0, h);
        m(i, j) -= Complex(0, h);
        const double im = (g(p) - g(m)) / (2.0 * h);
        fd(i, j) = Complex(re, im);
      }
    }
    EXPECT_LT((fd - analytic).norm(), 1e-6 * analytic.norm());
  }
}

TEST(Smoothness, ScalarIdentityOperator) {
  const std::vector<Eigen::MatrixXd> ops = {Eigen::MatrixXd::Identity(1, 1)};
  const Objective<double> obj(MeasurementEnsemble<double>::from_operators(ops, Eigen::VectorXd::Ones(1), 0.0));
  EXPECT_NEAR(estimate_smoothness(obj), 2.0, 1e-12);
}

TEST(Smoothness, OrthonormalFamilyGivesTwo) {
  std::vector<Eigen::MatrixXcd> ops;
  for (std::uint64_t idx = 0; idx < 16; ++idx)
    ops.push_back(pauli_operator(2, pauli_digits(2, idx), PauliScaling::UnitFrobenius));
  const Objective<Complex> obj(MeasurementEnsemble<Complex>::from_operators(ops, Eigen::VectorXd::Zero(16), 0.0));
  EXPECT_NEAR(obj.smoothness(), 2.0, 1e-3);
  EXPECT_NEAR(oracle::gram_smoothness(ops), 2.0, 1e-12);
}

TEST(Smoothness, MatchesDenseGramEigenvalue) {
  Rng rng(209);
  for (int trial = 0; trial < 3; ++trial) {
    const auto ops = random_operators<Complex>(rng, 3, 25);
    const Objective<Complex> obj(MeasurementEnsemble<Complex>::from_operators(ops, Eigen::VectorXd::Zero(25), 0.0));
    const double ref = oracle::gram_smoothness(ops);
    EXPECT_NEAR(obj.smoothness(), ref, 1e-3 * ref);
    EXPECT_GE(obj.smoothness(), ref * (1.0 - 1e-3));
    const auto exact = exact_curvature(obj.ensemble());
    EXPECT_NEAR(exact.L, ref, 1e-10 * ref);
  }
}

TEST(Smoothness, GradientLipschitzCertificate) {
  Rng rng(210);
  const auto ops = random_operators<double>(rng, 4, 30);
  const Objective<double> obj(MeasurementEnsemble<double>::from_operators(ops, random_vector(rng, 30), 0.0));
  for (int k = 0; k < 500; ++k) {
    const Eigen::MatrixXd a = random_hermitian<double>(rng, 4);
    const Eigen::MatrixXd b = random_hermitian<double>(rng, 4);
    EXPECT_LE((obj.grad(a) - obj.grad(b)).norm(), obj.smoothness() * (1.0 + 1e-3) * (a - b).norm());
  }
}

TEST(Smoothness, EmptyEnsembleRejected) {
  MeasurementEnsemble<double> empty(2, Eigen::MatrixXd(0, 3), Eigen::VectorXd(0), 0.0);
  EXPECT_THROW(Objective<double>{empty}, InvalidArgument);
  EXPECT_THROW(MeasurementEnsemble<double>::from_operators({}, Eigen::VectorXd(0), 0.0), InvalidArgument);
}

TEST(Adjoint, ConsistentWithForwardMap) {
  Rng rng(211);
  const auto ops = random_operators<Complex>(rng, 4, 18);
  const MeasurementEnsemble<Complex> ens = MeasurementEnsemble<Complex>::from_operators(ops, Eigen::VectorXd::Zero(18), 0.0);
  for (int k = 0; k < 20; ++k) {
    const Eigen::MatrixXcd x = random_hermitian<Complex>(rng, 4);
    const Eigen::VectorXd z = random_vector(rng, 18);
    const double lhs = ens.apply(x).dot(z);
    const double rhs = oracle::trace_product(x, ens.adjoint(z));
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
  }
  for (int i = 0; i < 18; ++i) EXPECT_LT((ens.operator_at(i) - ops[static_cast<size_t>(i)]).norm(), 1e-14);
}

TEST(Curvature, RestrictedEstimateBracketedByExactBounds) {
  SyntheticParams p;
  p.n = 6;
  p.rank = 2;
  p.m = 126;
  const auto inst = gen_synthetic(p);
  const auto exact = exact_curvature(inst.objective.ensemble());
  const double mu = estimate_restricted_strong_convexity(inst.objective, 2);
  EXPECT_GT(exact.mu, 0.0);
  EXPECT_GE(mu, exact.mu * (1.0 - 1e-9));
  EXPECT_LE(mu, exact.L * (1.0 + 1e-9));
}
