#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gha/solver.hpp"

using namespace gha;

TEST_CASE("verdict tokens classify as documented") {
  auto v = classify_solver_output("unsat\n", "", 0, false);
  CHECK(v.kind == SolverVerdict::Kind::Unsat);

  v = classify_solver_output("delta-sat with delta = 0.00100000000000000\n", "", 0, false);
  CHECK(v.kind == SolverVerdict::Kind::DeltaSat);
  REQUIRE(v.delta.has_value());
  CHECK(*v.delta == 0.001);

  v = classify_solver_output("sat\n", "", 0, false);
  CHECK(v.kind == SolverVerdict::Kind::DeltaSat);
  CHECK_FALSE(v.delta.has_value());

  v = classify_solver_output("unknown\n", "", 0, false);
  CHECK(v.kind == SolverVerdict::Kind::Unknown);

  v = classify_solver_output("", "boom", 137, false);
  CHECK(v.kind == SolverVerdict::Kind::Failure);
  CHECK(v.exit_code == 137);
  CHECK(v.stderr_excerpt == "boom");

  v = classify_solver_output("", "", 0, true);
  CHECK(v.kind == SolverVerdict::Kind::Unknown);
  CHECK(v.raw == "timeout");
}

TEST_CASE("witness interval lines are harvested") {
  std::string out =
      "delta-sat with delta = 0.001\n"
      "Solution:\n"
      "x_0_0 : [ -5, 5 ] = [0.25, 0.5]\n"
      "d_0 : [1.5, 1.5]\n"
      "mode_0 : [0]\n"
      "garbage line\n"
      ": [1, 2]\n";
  auto v = classify_solver_output(out, "", 0, false);
  REQUIRE(v.kind == SolverVerdict::Kind::DeltaSat);
  REQUIRE(v.witness.count("x_0_0"));
  CHECK(v.witness.at("x_0_0") == std::make_pair(0.25, 0.5));
  REQUIRE(v.witness.count("d_0"));
  CHECK(v.witness.at("d_0") == std::make_pair(1.5, 1.5));
  REQUIRE(v.witness.count("mode_0"));
  CHECK(v.witness.at("mode_0").first == 0.0);
  CHECK(v.witness.size() == 3);
}

TEST_CASE("classification is total over arbitrary bytes") {
  std::mt19937_64 rng(0xfadedcafe);
  for (int i = 0; i < 10000; ++i) {
    size_t len = rng() % 200;
    std::string bytes;
    for (size_t j = 0; j < len; ++j) bytes += static_cast<char>(rng() & 0xff);
    int code = static_cast<int>(rng() % 256);
    auto v = classify_solver_output(bytes, bytes, code, false);
    bool one_of = v.kind == SolverVerdict::Kind::Unsat ||
                  v.kind == SolverVerdict::Kind::DeltaSat ||
                  v.kind == SolverVerdict::Kind::Unknown ||
                  v.kind == SolverVerdict::Kind::Failure;
    REQUIRE(one_of);
  }
}

TEST_CASE("verdict interpretation never strengthens delta-sat") {
  SolverVerdict unsat;
  unsat.kind = SolverVerdict::Kind::Unsat;
  CHECK(interpret(unsat) == BmcAnswer::HoldsUpTo);

  SolverVerdict dsat;
  dsat.kind = SolverVerdict::Kind::DeltaSat;
  dsat.witness["x_0_0"] = {0.0, 1.0};
  CHECK(interpret(dsat) == BmcAnswer::CandidateCounterexample);

  SolverVerdict unknown;
  unknown.kind = SolverVerdict::Kind::Unknown;
  CHECK(interpret(unknown) == BmcAnswer::Inconclusive);

  SolverVerdict fail;
  fail.kind = SolverVerdict::Kind::Failure;
  CHECK(interpret(fail) == BmcAnswer::Inconclusive);
}

TEST_CASE("subprocess runs classify real process output") {
  auto v = run_solver("/dev/null", "sh", {"-c", "echo unsat #"}, 10.0);
  CHECK(v.kind == SolverVerdict::Kind::Unsat);

  v = run_solver("/dev/null", "sh", {"-c", "echo delta-sat with delta = 0.5 #"}, 10.0);
  CHECK(v.kind == SolverVerdict::Kind::DeltaSat);
  REQUIRE(v.delta.has_value());
  CHECK(*v.delta == 0.5);

  v = run_solver("/dev/null", "sh", {"-c", "exit 3 #"}, 10.0);
  CHECK(v.kind == SolverVerdict::Kind::Failure);
  CHECK(v.exit_code == 3);
}

TEST_CASE("a hung solver is killed and reported unknown") {
  auto v = run_solver("/dev/null", "sh", {"-c", "sleep 30 #"}, 0.3);
  CHECK(v.kind == SolverVerdict::Kind::Unknown);
  CHECK(v.raw == "timeout");
}
