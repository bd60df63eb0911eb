#include <catch2/catch_amalgamated.hpp>

#include "gha/exprio.hpp"

using namespace gha;

TEST_CASE("expression parsing and evaluation") {
  VarMap env{{"x", 2.0}, {"y", -3.0}};

  CHECK(eval(parse_expr("1 + 2*x"), env) == 5.0);
  CHECK(eval(parse_expr("-x^2"), env) == -4.0);
  CHECK(eval(parse_expr("sin(0)"), env) == 0.0);
  CHECK(eval(parse_expr("abs(y)"), env) == 3.0);
  CHECK(eval(parse_expr("min(x, y)"), env) == -3.0);
  CHECK(eval(parse_expr("max(x, y)"), env) == 2.0);
  CHECK(eval_bool(parse_expr("x >= 2 && y < 0"), env));
  CHECK(eval_bool(parse_expr("x != y"), env));
  CHECK_FALSE(eval_bool(parse_expr("x != 2"), env));
  CHECK(eval_bool(parse_expr("!(x < 0)"), env));
  CHECK(eval(parse_expr("ite(x > 0, 1, 2)"), env) == 1.0);
  CHECK(eval_bool(parse_expr("true"), env));
  CHECK_FALSE(eval_bool(parse_expr("false"), env));
}

TEST_CASE("parse errors carry position and message") {
  CHECK_THROWS_AS(parse_expr("1 +"), parse_error);
  CHECK_THROWS_AS(parse_expr("foo(1)"), parse_error);
  CHECK_THROWS_AS(parse_expr("(x"), parse_error);
  CHECK_THROWS_WITH(parse_expr("always (x > 0)"),
                    Catch::Matchers::ContainsSubstring("temporal-logic"));
  CHECK_THROWS_WITH(parse_expr("x until y"),
                    Catch::Matchers::ContainsSubstring("temporal-logic"));
}

TEST_CASE("infix printing round-trips through the parser") {
  std::mt19937_64 rng(42);
  const char* samples[] = {
      "1 + 2*x - y/4",       "sin(x) * cos(y) + sqrt(abs(x))",
      "(x + y)^2 - min(x, 3)", "x > 0 && (y <= 2 || !(x == y))",
      "ite(x >= 0, x, -x)",  "exp(x) - log(2 + abs(y))",
  };
  for (const char* s : samples) {
    ExprPtr e = parse_expr(s);
    ExprPtr back = parse_expr(to_infix(e));
    CHECK(equal(e, back));
    for (int i = 0; i < 50; ++i) {
      VarMap env{{"x", static_cast<double>(rng() % 13) - 6.0},
                 {"y", static_cast<double>(rng() % 13) - 6.0}};
      CHECK(eval(e, env) == eval(back, env));
    }
  }
}

TEST_CASE("prefix rendering") {
  CHECK(to_prefix(parse_expr("x1 + x2")) == "(+ x1 x2)");
  CHECK(to_prefix(parse_expr("2 * x")) == "(* 2. x)");
  CHECK(to_prefix(parse_expr("x <= 0.8")) == "(<= x 0.8)");
  CHECK(to_prefix(ex::imp(parse_expr("x > 1"), parse_expr("y > 0"))) ==
        "(=> (> x 1.) (> y 0.))");
}

TEST_CASE("real formatting is plain decimal") {
  CHECK(format_real_smt(0.001) == "0.001");
  CHECK(format_real_smt(0.0) == "0.");
  CHECK(format_real_smt(10.0) == "10.");
  CHECK(format_real_smt(-2.5) == "-2.5");
  CHECK(format_real_smt(1e-8).find('e') == std::string::npos);
  CHECK(format_real_smt(1e12).find('e') == std::string::npos);
  CHECK(format_real_short(0.8) == "0.8");
  CHECK(format_real_short(1e-9).find('e') == std::string::npos);
}

TEST_CASE("substitution and free variables") {
  ExprPtr e = parse_expr("a + b * a");
  auto fv = free_vars(e);
  CHECK(fv == std::set<std::string>{"a", "b"});
  ExprPtr s = substitute(e, {{"a", parse_expr("c + 1")}});
  CHECK(free_vars(s) == std::set<std::string>{"b", "c"});
  CHECK(eval(s, {{"b", 2.0}, {"c", 3.0}}) == 4.0 + 2.0 * 4.0);
}

TEST_CASE("constant folding only touches constant subtrees") {
  ExprPtr e = fold_constants(parse_expr("2 * 3 + x"));
  REQUIRE(e->kind == ExprKind::Binary);
  CHECK(e->args[0]->kind == ExprKind::Const);
  CHECK(e->args[0]->value == 6.0);
  ExprPtr keep = fold_constants(parse_expr("50 - x"));
  CHECK(keep->kind == ExprKind::Binary);  // not folded
}

TEST_CASE("type inference rejects boolean operands in real positions") {
  CHECK(infer_type(parse_expr("x + 1")) == ExprType::Real);
  CHECK(infer_type(parse_expr("x > 1")) == ExprType::Boolean);
  CHECK(infer_type(ex::add(ex::var("x"), parse_expr("y > 0"))) == ExprType::Invalid);
  CHECK(infer_type(ex::logic(LogicOp::And, {ex::var("x")})) == ExprType::Invalid);
  CHECK(infer_type(parse_expr("ite(x > 0, y > 1, y < 1)")) == ExprType::Boolean);
}
