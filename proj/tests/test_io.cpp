#include "projfgd/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace projfgd;

namespace {

RunConfig unusual_config() {
  RunConfig c;
  c.command = "sweep";
  c.seed = 18446744073709551557ULL;
  c.out_dir = "runs/a b";
  c.suite = "xi";
  c.problem.kind = "synthetic";
  c.problem.qubits = 5;
  c.problem.n = 17;
  c.problem.rank = 3;
  c.problem.c_sam = 1.0 / 3.0;
  c.problem.m = 99;
  c.problem.noise_norm = 0.1 + 0.2;
  c.problem.condition_number = std::sqrt(2.0);
  c.problem.sparsity = 5;
  c.problem.lambda = 1e-300;
  c.problem.lambda_factor = 1.2000000000000002;
  c.problem.pauli_scaling = "unit_frobenius";
  c.problem.design = "octanary_cdp";
  c.problem.ensemble_path = "e.json";
  c.problem.instance_path = "i.json";
  c.solver.algorithm = "fgd";
  c.solver.tol = 5e-6;
  c.solver.max_iters = 123;
  c.solver.step_mode = "adaptive_per_iter";
  c.solver.step_constant = 1.0 / 7.0;
  c.solver.record_truth_dist = false;
  c.sweep.qubits = {4, 6};
  c.sweep.ranks = {1, 2};
  c.sweep.c_sam = {3.0, 6.5, 0.1};
  c.sweep.seeds = {0, 1, 9007199254740993ULL};
  return c;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("projfgd_test_io_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST(RunConfig, RoundTripsBitExactly) {
  for (const RunConfig& c : {RunConfig{}, unusual_config()}) {
    const std::string text = dump_run_config(c);
    const RunConfig back = run_config_from_json(Json::parse(text));
    EXPECT_TRUE(back == c);
    EXPECT_EQ(dump_run_config(back), text);
  }
}

TEST(RunConfig, RoundTripsThroughFile) {
  const auto dir = temp_dir("config");
  const RunConfig c = unusual_config();
  write_text_file((dir / "c.json").string(), dump_run_config(c));
  EXPECT_TRUE(read_run_config((dir / "c.json").string()) == c);
}

TEST(RunConfig, MissingKeysKeepDefaults) {
  const RunConfig c = run_config_from_json(Json::parse(R"({"problem": {"qubits": 4}})"));
  EXPECT_EQ(c.problem.qubits, 4);
  EXPECT_EQ(c.problem.noise_norm, 1e-3);
  EXPECT_EQ(c.solver.tol, 5e-6);
  EXPECT_FALSE(c.solver.step_constant.has_value());
}

TEST(RunConfig, RejectsUnknownKeysAndWrongTypes) {
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"bogus": 1})")), ConfigError);
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"solver": {"tolerance": 1}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"solver": {"tol": "small"}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(Json::parse(R"([1, 2])")), ConfigError);
  EXPECT_THROW(read_run_config("/nonexistent/config.json"), ConfigError);
}

TEST(RunConfig, SolverDefaultsFollowAlgorithm) {
  RunConfig c;
  EXPECT_EQ(solver_config(c, 2).step_constant, 1.0 / 128.0);
  c.solver.algorithm = "fgd";
  EXPECT_EQ(solver_config(c, 2).step_constant, 1.0 / 16.0);
  c.solver.step_constant = 0.5;
  EXPECT_EQ(solver_config(c, 2).step_constant, 0.5);
  c.solver.step_mode = "sideways";
  EXPECT_THROW(solver_config(c, 2), ConfigError);
  c.solver.step_mode = "fixed";
  c.solver.step_constant = 2.0;
  EXPECT_THROW(solver_config(c, 2), ConfigError);
}

TEST(Ensemble, ComplexRoundTrip) {
  QstParams p;
  p.qubits = 2;
  p.c_sam = 1.0;
  const auto inst = gen_qst(p);
  const Json j = Json::parse(ensemble_to_json(inst.objective.ensemble()).dump());
  EXPECT_EQ(ensemble_field(j), "complex");
  const auto back = ensemble_from_json<Complex>(j);
  const auto& orig = inst.objective.ensemble();
  EXPECT_EQ(back.observations(), orig.observations());
  EXPECT_LT((back.design() - orig.design()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(back.normalization(), orig.normalization());
  EXPECT_EQ(back.noise_norm(), orig.noise_norm());
  EXPECT_THROW(ensemble_from_json<double>(j), ConfigError);
}

TEST(Ensemble, RealRoundTripAndValidation) {
  SyntheticParams p;
  p.n = 3;
  p.m = 5;
  p.rank = 1;
  const auto inst = gen_synthetic(p);
  Json j = ensemble_to_json(inst.objective.ensemble());
  const auto back = ensemble_from_json<double>(j);
  EXPECT_LT((back.design() - inst.objective.ensemble().design()).cwiseAbs().maxCoeff(), 1e-15);
  j["y"].erase(0);
  EXPECT_THROW(ensemble_from_json<double>(j), ConfigError);
  j = ensemble_to_json(inst.objective.ensemble());
  j["operators"][0][1] = 123.0;  // breaks symmetry
  EXPECT_THROW(ensemble_from_json<double>(j), ConfigError);
  j["field"] = "quaternion";
  EXPECT_THROW(ensemble_field(j), ConfigError);
}

TEST(Instance, RoundTripPreservesSolveInputs) {
  QstParams p;
  p.qubits = 3;
  p.seed = 4;
  const auto inst = gen_qst(p);
  const auto back = instance_from_json<Complex>(ensemble_to_json(inst.objective.ensemble()), instance_to_json(inst));
  EXPECT_EQ(back.truth_factor, inst.truth_factor);
  EXPECT_TRUE(back.constraint == inst.constraint);
  EXPECT_EQ(back.rank, inst.rank);
  EXPECT_EQ(back.seed, inst.seed);
  EXPECT_EQ(back.kind, "qst");
  EXPECT_NEAR(back.objective.smoothness(), inst.objective.smoothness(), 1e-12);
}

TEST(Constraint, JsonRoundTrip) {
  for (const auto& c : {ConstraintSet::unconstrained(), ConstraintSet::frobenius_ball(0.7), ConstraintSet::l1_ball(2.5)})
    EXPECT_TRUE(constraint_from_json(constraint_to_json(c)) == c);
  EXPECT_THROW(constraint_from_json(Json::parse(R"({"kind": "frobenius_ball", "radius": -1})")), ConfigError);
  EXPECT_THROW(constraint_from_json(Json::parse(R"({"kind": "box"})")), ConfigError);
}

TEST(TraceCsv, FixedHeaderAndRoundTripDoubles) {
  SolveTrace t;
  IterationRecord a;
  a.iter = 0;
  a.objective = 0.1;
  a.dist = 1.0 / 3.0;
  IterationRecord b;
  b.iter = 1;
  b.objective = 1e-300;
  b.rel_change = 2.5;
  b.xi = 0.75;
  b.grad_norm = 3.0;
  t.records = {a, b};
  const std::string csv = trace_to_csv(t);
  EXPECT_EQ(csv, "iter,objective,rel_change,xi,dist,grad_norm\n"
                 "0,0.10000000000000001,0,1,0.33333333333333331,0\n"
                 "1,1e-300,2.5,0.75,,3\n");
  EXPECT_EQ(std::strtod(format_double(1.0 / 3.0).c_str(), nullptr), 1.0 / 3.0);
}

TEST(Summary, KeysInOrder) {
  SolveSummary s;
  s.status = SolveStatus::Converged;
  s.iters = 12;
  s.final_objective = 0.5;
  s.final_rel_error = 1e-5;
  RunConfig rc;
  const Json j = summary_to_json(s, solver_config(rc, 1), rc);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"status", "iters", "final_objective", "final_rel_error", "elapsed_ms", "tol",
                                            "max_iters", "step_constant", "step_mode", "algorithm", "rank", "seed"}));
  EXPECT_EQ(j["tol"].get<double>(), 5e-6);
  EXPECT_EQ(j["status"], "converged");
  s.error = "boom";
  s.final_objective = std::numeric_limits<double>::quiet_NaN();
  const Json e = summary_to_json(s, solver_config(rc, 1), rc);
  EXPECT_EQ(e["status"], "error");
  EXPECT_TRUE(e["final_objective"].is_null());
  EXPECT_EQ(e["error"], "boom");
}

TEST(Report, NonFiniteMarginsBecomeNull) {
  LemmaReport r("empty");
  r.context["x"] = 2.0;
  const Json j = report_to_json(r);
  EXPECT_TRUE(j["worst_margin"].is_null());
  EXPECT_EQ(j["context"]["x"], 2.0);
  SuiteResult s{"tu", {r}};
  EXPECT_EQ(suite_to_json(s)["passed"], true);
}
