#include <catch2/catch_amalgamated.hpp>

#include "gha/parse.hpp"
#include "gha/print.hpp"
#include "gha/validate.hpp"
#include "support/genmodel.hpp"
#include "support/testutil.hpp"

using namespace gha;

TEST_CASE("the two-mode fixture parses into the expected structure") {
  Gha m = testutil::load_model("fig1.gha");
  CHECK(m.states.size() == 2);
  CHECK(m.transitions.size() == 1);
  CHECK(m.inputs.size() == 2);
  CHECK(m.outputs.size() == 2);
  CHECK(m.initial == "S0");
  const SlState* s1 = m.state("S1");
  REQUIRE(s1 != nullptr);
  CHECK(s1->vars.count("I"));  // named integrator joins the state vars
  CHECK(s1->vars.count("y2"));
  const Transition& t = m.transitions[0];
  CHECK(t.src == "S0");
  CHECK(t.dst == "S1");
  REQUIRE(t.actions.size() == 1);
  CHECK(t.actions[0].first == "y1");
}

TEST_CASE("degenerate document parses and fails validation later") {
  Gha m = parse_model("outputs {\n  y\n}\n");
  CHECK(m.states.empty());
  CHECK(m.transitions.empty());
  auto diags = validate_model(m);
  CHECK(has_errors(diags));  // no initial state
}

TEST_CASE("unknown block kind is a parse error") {
  std::string text =
      "outputs { y }\ninitial A\nstate A {\n  block D kind=Derivative\n}\n";
  CHECK_THROWS_WITH(parse_model(text),
                    Catch::Matchers::ContainsSubstring("unknown block kind"));
}

TEST_CASE("duplicate parameter key is a parse error") {
  std::string text =
      "outputs { y }\ninitial A\nstate A {\n  block g kind=Gain gain=1 gain=2\n}\n";
  CHECK_THROWS_WITH(parse_model(text), Catch::Matchers::ContainsSubstring("duplicate key"));
}

TEST_CASE("validation flags dangling and duplicate declarations") {
  std::string text =
      "inputs {\n  x1\n}\noutputs {\n  x1\n}\ninitial A\n"
      "state A {\n  block c kind=Constant value=1\n  block o kind=Outport\n"
      "  line c.1 -> o.1\n}\n"
      "transition A -> S9 when x1 > 0\n";
  Gha m = parse_model(text);
  auto diags = validate_model(m);
  REQUIRE(has_errors(diags));
  bool saw_dup = false, saw_unresolved = false;
  for (const auto& d : diags) {
    if (d.message.find("duplicate declaration") != std::string::npos) saw_dup = true;
    if (d.message.find("unresolved state S9") != std::string::npos) saw_unresolved = true;
  }
  CHECK(saw_dup);
  CHECK(saw_unresolved);
}

TEST_CASE("validation is deterministic and ordered") {
  std::string text =
      "inputs {\n  a\n}\noutputs {\n  a\n  b\n}\ninitial Z\n"
      "transition Z -> W when a/b > 0\n";
  Gha m = parse_model(text);
  auto d1 = validate_model(m);
  auto d2 = validate_model(m);
  CHECK(d1 == d2);
  for (size_t i = 1; i < d1.size(); ++i) CHECK(d1[i - 1].line <= d1[i].line);
}

TEST_CASE("division and log warnings") {
  std::string text =
      "inputs {\n  a\n}\noutputs {\n  y\n}\ninitial A\n"
      "state A {\n  block c kind=Constant value=1\n  block y kind=Outport\n"
      "  line c.1 -> y.1\n}\n"
      "transition A -> A when 1/a > log(a)\n";
  auto diags = validate_model(parse_model(text));
  int warnings = 0;
  for (const auto& d : diags)
    if (d.severity == Severity::Warning) ++warnings;
  CHECK(warnings >= 2);  // division, log, self-loop
}

TEST_CASE("the shipped fixtures validate cleanly") {
  for (const char* name : {"fig1.gha", "usv_desk.gha"}) {
    Gha m = testutil::load_model(name);
    auto diags = validate_model(m);
    CAPTURE(name);
    CHECK_FALSE(has_errors(diags));
  }
}

TEST_CASE("parse of print is identity on fixtures and generated models") {
  auto roundtrip = [](const Gha& m) {
    std::string text = print_model(m);
    Gha back = parse_model(text);
    bool eq = struct_equal(m, back);
    if (!eq) {
      CAPTURE(text);
      CHECK(struct_equal(m, back));
    }
    // the canonical form is a fixed point
    CHECK(print_model(back) == text);
    return eq;
  };

  roundtrip(testutil::load_model("fig1.gha"));
  roundtrip(testutil::load_model("usv_desk.gha"));

  std::mt19937_64 rng(2024);
  for (int i = 0; i < 40; ++i) {
    testutil::GenOptions opt;
    opt.n_states = testutil::gen_int(rng, 1, 3);
    opt.subsystem_depth = testutil::gen_int(rng, 0, 2);
    Gha m = parse_model(testutil::gen_model_text(rng, opt));
    CAPTURE(i);
    roundtrip(m);
  }
}
