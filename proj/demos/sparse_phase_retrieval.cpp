// Sparse phase retrieval: rank one, with the factor kept in an l1 ball.
#include "projfgd/diagnostics.hpp"
#include "projfgd/problems.hpp"
#include "projfgd/solver.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

using namespace projfgd;

int main(int argc, char** argv) {
  PhaseRetrievalParams p;
  p.n = argc > 1 ? std::atoi(argv[1]) : 32;
  p.sparsity = argc > 2 ? std::atoi(argv[2]) : 4;
  p.m = argc > 3 ? std::atoi(argv[3]) : 8 * p.n;
  const auto inst = gen_phase_retrieval(p);

  SolverConfig cfg = SolverConfig::projfgd(1);
  cfg.step_constant = 0.5;
  const auto res = projfgd_solve(inst, cfg);

  // Align the global phase before comparing entries.
  const Complex ip = (inst.truth_factor.adjoint() * res.factor)(0, 0);
  const Eigen::MatrixXcd u = res.factor * (std::abs(ip) > 0.0 ? std::conj(ip) / std::abs(ip) : Complex(1.0));

  std::printf("%s after %d iterations; rel error %.3e; ||u||_1 %.4f (radius %.4f)\n", to_string(res.trace.status),
              res.trace.iterations(), relative_error<Complex>(to_x<Complex>(res.factor), inst.truth_x),
              l1_norm(res.factor), inst.constraint.radius());
  std::printf("  idx        truth              recovered\n");
  for (Eigen::Index i = 0; i < inst.truth_factor.rows(); ++i) {
    if (std::abs(inst.truth_factor(i)) == 0.0 && std::abs(u(i)) < 1e-3) continue;
    std::printf("  %3lld  %+.4f%+.4fi   %+.4f%+.4fi\n", static_cast<long long>(i), inst.truth_factor(i).real(),
                inst.truth_factor(i).imag(), u(i).real(), u(i).imag());
  }
  return 0;
}
