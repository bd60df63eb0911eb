#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gha/sim.hpp"
#include "support/testutil.hpp"

using namespace gha;

namespace {

const char* kDecay =
    "outputs {\n  w\n}\ninitial A\n"
    "state A {\n"
    "  block G kind=Gain gain=-1\n"
    "  block Int kind=Integrator init=1\n"
    "  block w kind=Outport\n"
    "  line Int.1 -> G.1, w.1\n"
    "  line G.1 -> Int.1\n"
    "}\n";

const char* kRamp =
    "outputs {\n  w\n}\ninitial A\n"
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
    "transition A -> B when w >= 0.5\n";

double final_value(const Trace& tr, const std::string& var) {
  return tr.segments.back().samples.back().vals.at(var);
}

}  // namespace

TEST_CASE("exponential decay lands on the closed form") {
  auto l = testutil::load_checked(kDecay);
  SimOptions so;
  so.horizon = 5.0;
  so.dt = 1e-3;
  Trace tr = simulate(l.model, {}, so);
  CHECK(final_value(tr, "w") == Catch::Approx(std::exp(-5.0)).margin(1e-6).epsilon(0));

  so.horizon = 10.0;
  so.dt = 0.01;
  tr = simulate(l.model, {}, so);
  CHECK(final_value(tr, "w") == Catch::Approx(std::exp(-10.0)).margin(1e-6).epsilon(0));
}

TEST_CASE("halving the step shrinks the endpoint error at fourth order") {
  auto l = testutil::load_checked(kDecay);
  double exact = std::exp(-5.0);
  std::vector<double> errs;
  for (double dt : {0.1, 0.05, 0.025}) {
    SimOptions so;
    so.horizon = 5.0;
    so.dt = dt;
    errs.push_back(std::fabs(final_value(simulate(l.model, {}, so), "w") - exact));
  }
  REQUIRE(errs[0] > 0);
  REQUIRE(errs[1] > 0);
  CHECK(errs[0] / errs[1] >= 8.0);
  CHECK(errs[1] / errs[2] >= 8.0);
}

TEST_CASE("a linear integrand accumulates exactly") {
  Gha m = testutil::load_model("fig1.gha");
  InputMap in{{"x1", InputSignal::constant(1.0)}, {"x2", InputSignal::constant(2.0)}};
  SimOptions so;
  so.horizon = 4.0;
  so.dt = 1e-3;
  so.max_transitions = 0;  // hold the chart in its initial mode
  Trace tr = simulate(m, in, so);
  REQUIRE(tr.segments.size() == 1);
  CHECK(tr.segments[0].state == "S0");
  CHECK(final_value(tr, "y1") == Catch::Approx(12.0).margin(1e-9).epsilon(0));
}

TEST_CASE("guard crossings are bisected to nanosecond resolution") {
  auto l = testutil::load_checked(kRamp);
  SimOptions so;
  so.horizon = 2.0;
  so.dt = 1e-3;
  Trace tr = simulate(l.model, {}, so);
  REQUIRE(tr.events.size() == 1);
  CHECK(tr.events[0].t == Catch::Approx(0.5).margin(1e-9).epsilon(0));

  // dense-sampling oracle: locate the crossing bracket at dt = 1e-6
  SimOptions dense;
  dense.horizon = 0.6;
  dense.dt = 1e-6;
  dense.max_transitions = 0;
  Trace dt6 = simulate(l.model, {}, dense);
  double lo = 0, hi = 0.6;
  for (const auto& s : dt6.segments[0].samples) {
    if (s.vals.at("w") < 0.5) lo = s.t;
    else {
      hi = s.t;
      break;
    }
  }
  CHECK(tr.events[0].t >= lo - 1e-9);
  CHECK(tr.events[0].t <= hi + 1e-9);
}

TEST_CASE("constant dynamics hold bit-identically") {
  std::string text =
      "outputs {\n  w\n}\ninit w = 0.3\ninitial A\n"
      "state A {\n"
      "  block zero kind=Constant value=0\n"
      "  block Int kind=Integrator init=0.3\n"
      "  block w kind=Outport\n"
      "  line zero.1 -> Int.1\n"
      "  line Int.1 -> w.1\n"
      "}\n";
  auto l = testutil::load_checked(text);
  SimOptions so;
  so.horizon = 3.0;
  so.dt = 1e-3;
  Trace tr = simulate(l.model, {}, so);
  for (const auto& s : tr.segments[0].samples) CHECK(s.vals.at("w") == 0.3);
}

TEST_CASE("identical options give bit-identical traces") {
  Gha m = testutil::load_model("usv_desk.gha");
  SimOptions so;
  so.horizon = 5.0;
  so.dt = 1e-3;
  so.seed = 11;
  Trace a = simulate(m, {}, so);
  Trace b = simulate(m, {}, so);
  REQUIRE(a.segments.size() == b.segments.size());
  CHECK(a.param_values == b.param_values);
  for (size_t i = 0; i < a.segments.size(); ++i) {
    REQUIRE(a.segments[i].samples.size() == b.segments[i].samples.size());
    for (size_t j = 0; j < a.segments[i].samples.size(); ++j) {
      CHECK(a.segments[i].samples[j].t == b.segments[i].samples[j].t);
      CHECK(a.segments[i].samples[j].vals == b.segments[i].samples[j].vals);
    }
  }
}

TEST_CASE("different seeds draw different ranged parameters") {
  Gha m = testutil::load_model("usv_desk.gha");
  SimOptions a, b;
  a.horizon = b.horizon = 0.1;
  a.seed = 1;
  b.seed = 2;
  Trace ta = simulate(m, {}, a);
  Trace tb = simulate(m, {}, b);
  CHECK(ta.param_values.at("wind") != tb.param_values.at("wind"));
  CHECK(ta.param_values.at("psi_des") == tb.param_values.at("psi_des"));
}

TEST_CASE("non-finite dynamics are reported with the offending expression") {
  // dw/dt = w^2 with w(0)=10 blows up before t=1
  std::string blowup =
      "outputs {\n  w\n}\ninitial A\n"
      "state A {\n"
      "  block q kind=Product ops=**\n"
      "  block Int kind=Integrator init=10\n"
      "  block w kind=Outport\n"
      "  line Int.1 -> q.1, q.2, w.1\n"
      "  line q.1 -> Int.1\n"
      "}\n";
  auto l = testutil::load_checked(blowup);
  SimOptions so;
  so.horizon = 2.0;
  so.dt = 0.01;
  CHECK_THROWS_WITH(simulate(l.model, {}, so),
                    Catch::Matchers::ContainsSubstring("non-finite value"));
}

TEST_CASE("simultaneous guards need an explicit tie-break") {
  std::string text =
      "outputs {\n  w\n}\ninitial A\n"
      "state A {\n"
      "  block one kind=Constant value=1\n"
      "  block Int kind=Integrator init=0\n"
      "  block w kind=Outport\n"
      "  line one.1 -> Int.1\n"
      "  line Int.1 -> w.1\n"
      "}\n"
      "state B {\n  vars { }\n"
      "  block zero kind=Constant value=0\n"
      "  block Int kind=Integrator init=0\n"
      "  block w kind=Outport\n"
      "  line zero.1 -> Int.1\n"
      "  line Int.1 -> w.1\n"
      "}\n"
      "state C {\n"
      "  block zero kind=Constant value=0\n"
      "  block Int kind=Integrator init=0\n"
      "  block w kind=Outport\n"
      "  line zero.1 -> Int.1\n"
      "  line Int.1 -> w.1\n"
      "}\n"
      "transition A -> B when w >= 0.5\n"
      "transition A -> C when w >= 0.5\n";
  auto l = testutil::load_checked(text);
  SimOptions so;
  so.horizon = 1.0;
  CHECK_THROWS_WITH(simulate(l.model, {}, so),
                    Catch::Matchers::ContainsSubstring("nondeterministic choice"));
  so.choose_first = true;
  Trace tr = simulate(l.model, {}, so);
  REQUIRE(tr.events.size() == 1);
  CHECK(tr.events[0].dst == "B");
}

TEST_CASE("piecewise-constant inputs switch at their breakpoints") {
  Gha m = testutil::load_model("fig1.gha");
  InputMap in{{"x1", InputSignal{{{0.0, 1.0}, {1.0, 0.0}}}},
              {"x2", InputSignal::constant(0.0)}};
  SimOptions so;
  so.horizon = 2.0;
  so.dt = 1e-3;
  so.max_transitions = 0;
  Trace tr = simulate(m, in, so);
  // y1 integrates 1 for one second, then holds
  CHECK(final_value(tr, "y1") == Catch::Approx(1.0).margin(1e-6).epsilon(0));
}

TEST_CASE("trace CSV carries a stable header and one row per sample") {
  Gha m = testutil::load_model("fig1.gha");
  SimOptions so;
  so.horizon = 0.01;
  Trace tr = simulate(m, {}, so);
  std::string csv = trace_to_csv(tr);
  CHECK(csv.rfind("t,state,", 0) == 0);
  size_t rows = std::count(csv.begin(), csv.end(), '\n');
  size_t samples = 0;
  for (const auto& seg : tr.segments) samples += seg.samples.size();
  CHECK(rows == samples + 1);
}
