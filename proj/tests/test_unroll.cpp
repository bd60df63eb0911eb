#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "gha/check.hpp"
#include "gha/unroll.hpp"
#include "support/genmodel.hpp"
#include "support/testutil.hpp"

using namespace gha;

namespace {

const char* kRampOnly =
    "outputs {\n  w\n}\ninitial Only\n"
    "state Only {\n"
    "  block one kind=Constant value=1\n"
    "  block Int kind=Integrator init=0\n"
    "  block w kind=Outport\n"
    "  line one.1 -> Int.1\n"
    "  line Int.1 -> w.1\n"
    "}\n";

}  // namespace

TEST_CASE("bound zero yields declarations and init only") {
  auto l = testutil::load_checked(kRampOnly);
  ConstraintSystem cs = unroll(l.flat, l.frs, 0, UnrollConfig{10.0});
  REQUIRE(cs.assertions.size() == 1);
  CHECK(cs.assertions[0].cls == AssertClass::Init);
}

TEST_CASE("the k-step system forces the closed-form endpoint") {
  auto l = testutil::load_checked(kRampOnly);
  // dwell cap 1 s: a two-second run must map onto two unit dwells, so any
  // consistent assignment ends with w_2_t = 2
  ConstraintSystem cs = unroll(l.flat, l.frs, 2, UnrollConfig{1.0});

  SimOptions so;
  so.horizon = 2.0;
  so.dt = 1e-3;
  Trace tr = simulate(l.model, {}, so);
  StepAssignment a = map_trace_to_steps(tr, cs, l.flat);
  CHECK(a.dwells[0] == Catch::Approx(1.0).margin(1e-12));
  CHECK(a.dwells[1] == Catch::Approx(1.0).margin(1e-12));
  CHECK(a.env.at("w_2_t") == Catch::Approx(2.0).margin(1e-9).epsilon(0));
  CheckReport rep = check_assignment(a, cs, 1e-9, 1e-3);
  CHECK(rep.satisfied);

  // breaking the terminal snapshot must be flagged
  StepAssignment bad = a;
  bad.env["w_2_t"] = 3.0;
  CheckReport rep2 = check_assignment(bad, cs, 1e-9, 1e-3);
  CHECK_FALSE(rep2.satisfied);
}

TEST_CASE("assertion inventory is exhaustive and mutually exclusive") {
  Gha m = testutil::load_model("fig1.gha");
  auto l = testutil::load_checked(testutil::read_file(testutil::model_path("fig1.gha")));
  const int k = 3;
  ConstraintSystem cs = unroll(l.flat, l.frs, k, UnrollConfig{10.0});

  // per (step, var, state): exactly one of {flow membership, algebraic, frame}
  for (int i = 0; i < k; ++i) {
    for (size_t si = 0; si < cs.states.size(); ++si) {
      const FlowSystem& fs = cs.flows.at(cs.states[si]);
      for (const auto& v : cs.step_vars) {
        int covered = 0;
        if (std::count(fs.state_vars.begin(), fs.state_vars.end(), v)) covered++;
        for (const auto& a : cs.assertions) {
          if (a.step != i || a.state_idx != static_cast<int>(si)) continue;
          if (a.cls == AssertClass::AlgebraicUpdate && a.var == v) covered++;
          if (a.cls == AssertClass::Frame && a.var == v) covered++;
        }
        CAPTURE(i, cs.states[si], v);
        CHECK(covered == 1);
      }
    }
    // one continuous-update per (step, state with flows)
    for (size_t si = 0; si < cs.states.size(); ++si) {
      int n = 0;
      for (const auto& a : cs.assertions)
        if (a.cls == AssertClass::ContinuousUpdate && a.step == i &&
            a.state_idx == static_cast<int>(si))
          ++n;
      CHECK(n == (cs.flows.at(cs.states[si]).state_vars.empty() ? 0 : 1));
    }
    // one assertion per (step, transition) and one stutter per (step, state)
    int trans = 0, stutters = 0;
    for (const auto& a : cs.assertions) {
      if (a.step != i) continue;
      if (a.cls == AssertClass::Transition) ++trans;
      if (a.cls == AssertClass::Stutter) ++stutters;
    }
    CHECK(trans == static_cast<int>(m.transitions.size()));
    CHECK(stutters == static_cast<int>(cs.states.size()));
  }

  // terminal snapshot once per variable
  int closing = 0;
  for (const auto& a : cs.assertions)
    if (a.cls == AssertClass::Frame && a.step == k) ++closing;
  CHECK(closing == static_cast<int>(cs.step_vars.size()));
}

TEST_CASE("untouched variables stay framed through every step") {
  // y2 appears in no transition and only in S1; under an S0-only run it must
  // carry its initial value through all steps
  auto l = testutil::load_checked(testutil::read_file(testutil::model_path("fig1.gha")));
  ConstraintSystem cs = unroll(l.flat, l.frs, 3, UnrollConfig{10.0});
  InputMap in{{"x1", InputSignal::constant(0.1)}, {"x2", InputSignal::constant(0.1)}};
  SimOptions so;
  so.horizon = 2.0;  // y1 stays below the guard
  Trace tr = simulate(l.model, in, so);
  StepAssignment a = map_trace_to_steps(tr, cs, l.flat);
  for (int i = 0; i <= 3; ++i) {
    CHECK(a.env.at(step_begin_var("y2", i)) == 0.0);
    CHECK(a.env.at(step_end_var("y2", i)) == 0.0);
  }
  CHECK(check_assignment(a, cs, 1e-6, 1e-3).satisfied);
}

TEST_CASE("trace soundness holds across generated deterministic models") {
  std::mt19937_64 rng(555);
  int checked = 0;
  for (int i = 0; i < 12; ++i) {
    testutil::GenOptions opt;
    opt.n_states = testutil::gen_int(rng, 1, 3);
    opt.subsystem_depth = testutil::gen_int(rng, 0, 1);
    std::string text = testutil::gen_model_text(rng, opt);
    auto l = testutil::load_checked(text);
    ConstraintSystem cs = unroll(l.flat, l.frs, 5, UnrollConfig{10.0});

    InputMap in{{"u", InputSignal::constant(testutil::gen_uniform(rng, 0.5, 1.5))}};
    SimOptions so;
    so.horizon = 2.5;
    so.dt = 1e-3;
    Trace tr = simulate(l.model, in, so);
    CheckReport rep = check_trace(tr, cs, l.flat, 1e-4, so.dt);
    CAPTURE(i, text);
    if (!rep.violations.empty())
      CAPTURE(rep.violations[0].what, rep.violations[0].step, rep.violations[0].residual);
    CHECK(rep.satisfied);
    ++checked;
  }
  CHECK(checked == 12);
}

TEST_CASE("corrupted carry assertions show up as violations") {
  auto l = testutil::load_checked(testutil::read_file(testutil::model_path("fig1.gha")));
  ConstraintSystem cs = unroll(l.flat, l.frs, 3, UnrollConfig{10.0});
  InputMap in{{"x1", InputSignal::constant(1.0)}, {"x2", InputSignal::constant(2.0)}};
  SimOptions so;
  so.horizon = 4.0;
  Trace tr = simulate(l.model, in, so);

  // corrupt one stutter body: v_{i+1}_0 = v_i_t + 1
  ConstraintSystem bad = cs;
  for (auto& a : bad.assertions) {
    if (a.cls != AssertClass::Stutter || a.step != 2) continue;
    a.body = ex::eq(ex::var(step_begin_var("y1", 3)),
                    ex::add(ex::var(step_end_var("y1", 2)), ex::num(1.0)));
    break;
  }
  CheckReport ok = check_trace(tr, cs, l.flat, 1e-4, so.dt);
  CHECK(ok.satisfied);
  CheckReport broken = check_trace(tr, bad, l.flat, 1e-4, so.dt);
  REQUIRE_FALSE(broken.satisfied);
  CHECK(broken.violations[0].residual == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("empty trace against bound zero is vacuously satisfied") {
  auto l = testutil::load_checked(kRampOnly);
  ConstraintSystem cs = unroll(l.flat, l.frs, 0, UnrollConfig{10.0});
  SimOptions so;
  so.horizon = 0.0;
  Trace tr = simulate(l.model, {}, so);
  CheckReport rep = check_trace(tr, cs, l.flat, 1e-4, 1e-3);
  CHECK(rep.satisfied);
}

TEST_CASE("a trace longer than the bound is rejected") {
  auto l = testutil::load_checked(kRampOnly);
  ConstraintSystem cs = unroll(l.flat, l.frs, 1, UnrollConfig{0.5});
  SimOptions so;
  so.horizon = 2.0;  // needs four half-second chunks
  Trace tr = simulate(l.model, {}, so);
  CHECK_THROWS_AS(map_trace_to_steps(tr, cs, l.flat), check_error);
}

TEST_CASE("transition actions compose sequentially") {
  std::string text =
      "outputs {\n  w\n  z\n}\ninitial A\n"
      "state A {\n"
      "  block one kind=Constant value=1\n"
      "  block Int kind=Integrator init=0\n"
      "  block w kind=Outport\n"
      "  line one.1 -> Int.1\n"
      "  line Int.1 -> w.1\n"
      "}\n"
      "state B {\n"
      "  block zero kind=Constant value=0\n"
      "  block Int kind=Integrator init=0\n"
      "  block w kind=Outport\n"
      "  line zero.1 -> Int.1\n"
      "  line Int.1 -> w.1\n"
      "}\n"
      "transition A -> B when w >= 0.25 do z := w + 1; z := z * 2\n";
  auto l = testutil::load_checked(text);
  ConstraintSystem cs = unroll(l.flat, l.frs, 2, UnrollConfig{10.0});
  SimOptions so;
  so.horizon = 1.0;
  Trace tr = simulate(l.model, {}, so);
  REQUIRE(tr.events.size() == 1);
  // z := (w+1)*2 at w = 0.25
  CHECK(tr.events[0].post_action_vals.at("z") ==
        Catch::Approx(2.5).margin(1e-6).epsilon(0));
  CHECK(check_trace(tr, cs, l.flat, 1e-4, so.dt).satisfied);
}
