#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <set>

#include "gha/emit.hpp"
#include "gha/props.hpp"
#include "gha/smtread.hpp"
#include "gha/unroll.hpp"
#include "support/testutil.hpp"

using namespace gha;

namespace {

std::string emit_fixture(const std::string& model, int k, double delta) {
  auto l = testutil::load_checked(testutil::read_file(testutil::model_path(model)));
  ConstraintSystem cs = unroll(l.flat, l.frs, k, UnrollConfig{10.0});
  return emit_smt(cs, nullptr, delta);
}

}  // namespace

TEST_CASE("documents carry the flow declarations and the precision option") {
  std::string doc = emit_fixture("fig1.gha", 1, 0.001);
  CHECK(doc.find("(define-ode flow_S0 ((= d/dt[y1] (+ x1 x2))))") != std::string::npos);
  CHECK(doc.find("(define-ode flow_S1 ((= d/dt[I] x1)))") != std::string::npos);
  CHECK(doc.find("(set-option :precision 0.001)") != std::string::npos);
  CHECK(doc.find("(integral 0. d_0 [y1_0_0] flow_S0)") != std::string::npos);
  CHECK(doc.find("(set-logic QF_NRA_ODE)") != std::string::npos);
}

TEST_CASE("emission matches the frozen goldens byte for byte") {
  std::string fig1 = emit_fixture("fig1.gha", 1, 0.001);
  std::string usv = emit_fixture("usv_desk.gha", 5, 0.001);
  CHECK(fig1 == testutil::read_file(testutil::source_dir() + "/tests/golden/fig1_k1.smt2"));
  CHECK(usv == testutil::read_file(testutil::source_dir() + "/tests/golden/usv_desk_k5.smt2"));
}

TEST_CASE("emission is deterministic") {
  CHECK(emit_fixture("usv_desk.gha", 3, 0.001) == emit_fixture("usv_desk.gha", 3, 0.001));
}

TEST_CASE("bound zero emits declarations, check-sat and exit only") {
  std::string doc = emit_fixture("fig1.gha", 0, 0.1);
  CHECK(doc.find("(check-sat)\n(exit)\n") != std::string::npos);
  CHECK(doc.find("integral") == std::string::npos);
  CHECK(doc.find("(=>") == std::string::npos);  // no conditional updates at all
}

TEST_CASE("every emitted document is accepted by the bundled reader") {
  for (const auto& [model, k] : std::vector<std::pair<std::string, int>>{
           {"fig1.gha", 0}, {"fig1.gha", 1}, {"fig1.gha", 4}, {"usv_desk.gha", 5}}) {
    auto l = testutil::load_checked(testutil::read_file(testutil::model_path(model)));
    ConstraintSystem cs = unroll(l.flat, l.frs, k, UnrollConfig{10.0});
    PropertyFile pf = parse_properties("reach mode=" + cs.states[0] + " true\n");
    CompiledProperty cp = compile_property(pf.constraints[0], pf, cs);
    std::string doc = emit_smt(cs, negate_for_bmc(cp.expr), 0.001);

    std::vector<SExpr> forms = read_smt(doc);
    REQUIRE_FALSE(forms.empty());
    CHECK(forms.back().items[0].atom == "exit");

    // round-trip: render and re-read, trees must match
    std::string rendered;
    for (const auto& f : forms) {
      rendered += render_sexpr(f);
      rendered += "\n";
    }
    std::vector<SExpr> again = read_smt(rendered);
    REQUIRE(again.size() == forms.size());
    for (size_t i = 0; i < forms.size(); ++i) CHECK(sexpr_equal(forms[i], again[i]));

    // symbol audit: everything referenced is declared
    std::set<std::string> declared{"true", "false"};
    static const std::set<std::string> builtins{
        "assert", "and", "or", "not", "=>", "=",  "<=", ">=", "<",  ">",  "+",
        "-",      "*",   "/",  "^",   "min", "max", "abs", "sin", "cos", "tan",
        "exp",    "log", "sqrt", "ite", "integral", "d/dt"};
    std::function<void(const SExpr&)> check_syms = [&](const SExpr& e) {
      if (e.kind == SExpr::Kind::Atom) {
        const std::string& a = e.atom;
        if (a.empty() || builtins.count(a) || declared.count(a)) return;
        if (a.find_first_not_of("0123456789.-") == std::string::npos) return;  // numeral
        if (a.rfind("d/dt[", 0) == 0) return;
        CAPTURE(a);
        CHECK(declared.count(a));
        return;
      }
      for (const auto& c : e.items) check_syms(c);
    };
    for (const auto& f : forms) {
      if (f.kind == SExpr::Kind::List && !f.items.empty()) {
        const std::string& head = f.items[0].atom;
        if (head == "declare-fun") declared.insert(f.items[1].atom);
        if (head == "define-ode") {
          declared.insert(f.items[1].atom);
          continue;  // flow bodies bind their own variables
        }
        if (head == "assert") check_syms(f.items[1]);
      }
    }
  }
}

TEST_CASE("assertion classes appear exactly once per slot in the output") {
  auto l = testutil::load_checked(testutil::read_file(testutil::model_path("fig1.gha")));
  const int k = 2;
  ConstraintSystem cs = unroll(l.flat, l.frs, k, UnrollConfig{10.0});
  std::string doc = emit_smt(cs, nullptr, 0.001);

  size_t asserts_in_doc = 0;
  for (const auto& f : read_smt(doc))
    if (f.kind == SExpr::Kind::List && !f.items.empty() && f.items[0].atom == "assert")
      ++asserts_in_doc;

  // constraint asserts + bounds asserts (inputs per instance, mode/d/tau per step)
  size_t bounds = 0;
  for (int i = 0; i <= k; ++i) {
    bounds += 2;  // mode
    bounds += 2;  // tau
    if (i < k) bounds += 2;  // dwell
    for (const auto& v : cs.step_vars) {
      auto it = cs.input_ranges.find(v);
      if (it != cs.input_ranges.end() && it->second) bounds += 4;
    }
  }
  CHECK(asserts_in_doc == cs.assertions.size() + bounds);

  // and the constraint-system side carries the expected slot counts
  size_t expected = 1;                                  // init
  expected += static_cast<size_t>(k);                   // clock chain
  for (int i = 0; i < k; ++i) {
    for (const auto& sn : cs.states) {
      const FlowSystem& fs = cs.flows.at(sn);
      if (!fs.state_vars.empty()) expected += 1;        // continuous
      for (const auto& [v, e] : fs.algebraic) {
        (void)e;
        if (!std::count(fs.state_vars.begin(), fs.state_vars.end(), v)) expected += 1;
      }
      size_t covered = fs.state_vars.size();
      for (const auto& [v, e] : fs.algebraic) {
        (void)e;
        if (!std::count(fs.state_vars.begin(), fs.state_vars.end(), v)) ++covered;
      }
      expected += cs.step_vars.size() - covered;        // frames
    }
    expected += l.flat.transitions.size();
    expected += cs.states.size();                       // stutters
  }
  expected += cs.step_vars.size();                      // terminal snapshot
  CHECK(cs.assertions.size() == expected);
}
