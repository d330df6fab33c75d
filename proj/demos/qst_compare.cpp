// Recover a low-rank density matrix from random Pauli measurements with
// ProjFGD and with plain FGD, printing the error every few iterations.
#include "projfgd/diagnostics.hpp"
#include "projfgd/problems.hpp"
#include "projfgd/solver.hpp"

#include <cstdio>
#include <cstdlib>

using namespace projfgd;

namespace {

template <class Solve>
void run(const char* name, const ProblemInstance<Complex>& inst, SolverConfig cfg, Solve solve) {
  SolveOptions<Complex> opts;
  opts.on_record = [](const IterationRecord& r) {
    if (r.iter % 25 == 0) std::printf("  %4d  f=%.3e  change=%.3e\n", r.iter, r.objective, r.rel_change);
  };
  const auto res = solve(inst, cfg, opts);
  const double err = relative_error<Complex>(to_x<Complex>(res.factor), inst.truth_x);
  std::printf("%s: %s after %d iterations, rel error %.3e, ||U||_F %.6f\n", name, to_string(res.trace.status),
              res.trace.iterations(), err, res.factor.norm());
}

}  // namespace

int main(int argc, char** argv) {
  QstParams p;
  p.qubits = argc > 1 ? std::atoi(argv[1]) : 5;
  p.rank = argc > 2 ? std::atoi(argv[2]) : 1;
  p.seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;
  const auto inst = gen_qst(p);
  std::printf("n=%lld r=%lld m=%lld L=%.3f\n", static_cast<long long>(inst.objective.dim()),
              static_cast<long long>(p.rank), static_cast<long long>(inst.objective.ensemble().size()),
              inst.objective.smoothness());

  SolverConfig proj = SolverConfig::projfgd(p.rank);
  proj.step_constant = 0.5;
  run("projfgd", inst, proj, [](auto& i, auto& c, auto& o) { return projfgd_solve(i, c, o); });

  SolverConfig fgd = SolverConfig::fgd(p.rank);
  fgd.step_constant = 0.5;
  run("fgd", inst, fgd, [](auto& i, auto& c, auto& o) { return fgd_solve(i, c, o); });
  return 0;
}
