#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gha {

// Symbolic expression tree over reals and booleans. Nodes are immutable and
// shared; every transformation builds a new tree.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind {
  Const,      // real literal
  IntConst,   // integer literal (mode indices, exact counters)
  BoolConst,  // true / false
  Var,
  Unary,
  Binary,
  Cmp,
  Logic,
  Ite,
};

enum class UnaryOp { Neg, Sin, Cos, Tan, Exp, Log, Sqrt, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Pow, Min, Max };
enum class CmpOp { Lt, Le, Eq, Ge, Gt };
enum class LogicOp { And, Or, Not, Imp };

struct Expr {
  ExprKind kind;
  double value = 0.0;          // Const
  long long ivalue = 0;        // IntConst
  bool bvalue = false;         // BoolConst
  std::string name;            // Var
  UnaryOp uop = UnaryOp::Neg;
  BinaryOp bop = BinaryOp::Add;
  CmpOp cop = CmpOp::Lt;
  LogicOp lop = LogicOp::And;
  std::vector<ExprPtr> args;
};

class eval_error : public std::runtime_error {
 public:
  explicit eval_error(const std::string& what) : std::runtime_error(what) {}
};

namespace ex {

inline ExprPtr num(double v) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Const;
  e->value = v;
  return e;
}

inline ExprPtr intc(long long v) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::IntConst;
  e->ivalue = v;
  return e;
}

inline ExprPtr boolc(bool v) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::BoolConst;
  e->bvalue = v;
  return e;
}

inline ExprPtr var(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Var;
  e->name = std::move(name);
  return e;
}

inline ExprPtr unary(UnaryOp op, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Unary;
  e->uop = op;
  e->args = {std::move(a)};
  return e;
}

inline ExprPtr binary(BinaryOp op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Binary;
  e->bop = op;
  e->args = {std::move(l), std::move(r)};
  return e;
}

inline ExprPtr cmp(CmpOp op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Cmp;
  e->cop = op;
  e->args = {std::move(l), std::move(r)};
  return e;
}

inline ExprPtr logic(LogicOp op, std::vector<ExprPtr> args) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Logic;
  e->lop = op;
  e->args = std::move(args);
  return e;
}

inline ExprPtr ite(ExprPtr c, ExprPtr t, ExprPtr f) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Ite;
  e->args = {std::move(c), std::move(t), std::move(f)};
  return e;
}

inline ExprPtr add(ExprPtr l, ExprPtr r) { return binary(BinaryOp::Add, std::move(l), std::move(r)); }
inline ExprPtr sub(ExprPtr l, ExprPtr r) { return binary(BinaryOp::Sub, std::move(l), std::move(r)); }
inline ExprPtr mul(ExprPtr l, ExprPtr r) { return binary(BinaryOp::Mul, std::move(l), std::move(r)); }
inline ExprPtr div(ExprPtr l, ExprPtr r) { return binary(BinaryOp::Div, std::move(l), std::move(r)); }
inline ExprPtr neg(ExprPtr a) { return unary(UnaryOp::Neg, std::move(a)); }
inline ExprPtr land(ExprPtr l, ExprPtr r) { return logic(LogicOp::And, {std::move(l), std::move(r)}); }
inline ExprPtr lor(ExprPtr l, ExprPtr r) { return logic(LogicOp::Or, {std::move(l), std::move(r)}); }
inline ExprPtr lnot(ExprPtr a) { return logic(LogicOp::Not, {std::move(a)}); }
inline ExprPtr imp(ExprPtr l, ExprPtr r) { return logic(LogicOp::Imp, {std::move(l), std::move(r)}); }
inline ExprPtr eq(ExprPtr l, ExprPtr r) { return cmp(CmpOp::Eq, std::move(l), std::move(r)); }
inline ExprPtr le(ExprPtr l, ExprPtr r) { return cmp(CmpOp::Le, std::move(l), std::move(r)); }
inline ExprPtr ge(ExprPtr l, ExprPtr r) { return cmp(CmpOp::Ge, std::move(l), std::move(r)); }

// n-ary conjunction; empty list is `true`.
inline ExprPtr conj(std::vector<ExprPtr> args) {
  if (args.empty()) return boolc(true);
  if (args.size() == 1) return args[0];
  return logic(LogicOp::And, std::move(args));
}

inline ExprPtr disj(std::vector<ExprPtr> args) {
  if (args.empty()) return boolc(false);
  if (args.size() == 1) return args[0];
  return logic(LogicOp::Or, std::move(args));
}

}  // namespace ex

using VarMap = std::unordered_map<std::string, double>;

// Numeric evaluation. Booleans evaluate to 0/1. Unknown variables throw.
inline double eval(const ExprPtr& e, const VarMap& env) {
  switch (e->kind) {
    case ExprKind::Const: return e->value;
    case ExprKind::IntConst: return static_cast<double>(e->ivalue);
    case ExprKind::BoolConst: return e->bvalue ? 1.0 : 0.0;
    case ExprKind::Var: {
      auto it = env.find(e->name);
      if (it == env.end()) throw eval_error("unbound variable " + e->name);
      return it->second;
    }
    case ExprKind::Unary: {
      double a = eval(e->args[0], env);
      switch (e->uop) {
        case UnaryOp::Neg: return -a;
        case UnaryOp::Sin: return std::sin(a);
        case UnaryOp::Cos: return std::cos(a);
        case UnaryOp::Tan: return std::tan(a);
        case UnaryOp::Exp: return std::exp(a);
        case UnaryOp::Log: return std::log(a);
        case UnaryOp::Sqrt: return std::sqrt(a);
        case UnaryOp::Abs: return std::fabs(a);
      }
      return 0;
    }
    case ExprKind::Binary: {
      double l = eval(e->args[0], env);
      double r = eval(e->args[1], env);
      switch (e->bop) {
        case BinaryOp::Add: return l + r;
        case BinaryOp::Sub: return l - r;
        case BinaryOp::Mul: return l * r;
        case BinaryOp::Div: return l / r;
        case BinaryOp::Pow: return std::pow(l, r);
        case BinaryOp::Min: return std::fmin(l, r);
        case BinaryOp::Max: return std::fmax(l, r);
      }
      return 0;
    }
    case ExprKind::Cmp: {
      double l = eval(e->args[0], env);
      double r = eval(e->args[1], env);
      bool b = false;
      switch (e->cop) {
        case CmpOp::Lt: b = l < r; break;
        case CmpOp::Le: b = l <= r; break;
        case CmpOp::Eq: b = l == r; break;
        case CmpOp::Ge: b = l >= r; break;
        case CmpOp::Gt: b = l > r; break;
      }
      return b ? 1.0 : 0.0;
    }
    case ExprKind::Logic: {
      switch (e->lop) {
        case LogicOp::And: {
          for (const auto& a : e->args)
            if (eval(a, env) == 0.0) return 0.0;
          return 1.0;
        }
        case LogicOp::Or: {
          for (const auto& a : e->args)
            if (eval(a, env) != 0.0) return 1.0;
          return 0.0;
        }
        case LogicOp::Not: return eval(e->args[0], env) == 0.0 ? 1.0 : 0.0;
        case LogicOp::Imp:
          return (eval(e->args[0], env) == 0.0 || eval(e->args[1], env) != 0.0) ? 1.0 : 0.0;
      }
      return 0;
    }
    case ExprKind::Ite:
      return eval(e->args[0], env) != 0.0 ? eval(e->args[1], env) : eval(e->args[2], env);
  }
  return 0;
}

inline bool eval_bool(const ExprPtr& e, const VarMap& env) { return eval(e, env) != 0.0; }

inline void collect_vars(const ExprPtr& e, std::set<std::string>& out) {
  if (e->kind == ExprKind::Var) {
    out.insert(e->name);
    return;
  }
  for (const auto& a : e->args) collect_vars(a, out);
}

inline std::set<std::string> free_vars(const ExprPtr& e) {
  std::set<std::string> out;
  collect_vars(e, out);
  return out;
}

// Replaces variables by expressions. Variables absent from the map stay.
inline ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& sub) {
  if (e->kind == ExprKind::Var) {
    auto it = sub.find(e->name);
    return it == sub.end() ? e : it->second;
  }
  if (e->args.empty()) return e;
  bool changed = false;
  std::vector<ExprPtr> args;
  args.reserve(e->args.size());
  for (const auto& a : e->args) {
    args.push_back(substitute(a, sub));
    if (args.back() != a) changed = true;
  }
  if (!changed) return e;
  auto n = std::make_shared<Expr>(*e);
  n->args = std::move(args);
  return n;
}

// Variable-to-variable renaming via callback; used to instance model
// variables into per-step solver variables.
template <typename F>
inline ExprPtr rename_vars(const ExprPtr& e, F&& f) {
  if (e->kind == ExprKind::Var) {
    std::string n = f(e->name);
    if (n == e->name) return e;
    return ex::var(std::move(n));
  }
  if (e->args.empty()) return e;
  bool changed = false;
  std::vector<ExprPtr> args;
  args.reserve(e->args.size());
  for (const auto& a : e->args) {
    args.push_back(rename_vars(a, f));
    if (args.back() != a) changed = true;
  }
  if (!changed) return e;
  auto n = std::make_shared<Expr>(*e);
  n->args = std::move(args);
  return n;
}

inline bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprKind::Const: return a->value == b->value;
    case ExprKind::IntConst: return a->ivalue == b->ivalue;
    case ExprKind::BoolConst: return a->bvalue == b->bvalue;
    case ExprKind::Var: return a->name == b->name;
    case ExprKind::Unary:
      if (a->uop != b->uop) return false;
      break;
    case ExprKind::Binary:
      if (a->bop != b->bop) return false;
      break;
    case ExprKind::Cmp:
      if (a->cop != b->cop) return false;
      break;
    case ExprKind::Logic:
      if (a->lop != b->lop) return false;
      break;
    case ExprKind::Ite:
      break;
  }
  if (a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!equal(a->args[i], b->args[i])) return false;
  return true;
}

// Folds operator nodes whose children are all literal constants. Anything
// non-constant is preserved untouched.
inline ExprPtr fold_constants(const ExprPtr& e) {
  if (e->args.empty()) return e;
  std::vector<ExprPtr> args;
  args.reserve(e->args.size());
  bool all_const = true;
  bool changed = false;
  for (const auto& a : e->args) {
    args.push_back(fold_constants(a));
    if (args.back() != a) changed = true;
    if (args.back()->kind != ExprKind::Const && args.back()->kind != ExprKind::IntConst)
      all_const = false;
  }
  ExprPtr n = e;
  if (changed) {
    auto m = std::make_shared<Expr>(*e);
    m->args = std::move(args);
    n = m;
  }
  if (all_const && (n->kind == ExprKind::Unary || n->kind == ExprKind::Binary)) {
    static const VarMap kEmpty;
    double v = eval(n, kEmpty);
    if (std::isfinite(v)) return ex::num(v);
  }
  return n;
}

enum class ExprType { Real, Boolean, Invalid };

// Static sort check: comparisons and connectives are boolean and may not sit
// in real-valued operand positions; ite branches must agree.
inline ExprType infer_type(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::Const:
    case ExprKind::IntConst:
    case ExprKind::Var:
      return ExprType::Real;
    case ExprKind::BoolConst:
      return ExprType::Boolean;
    case ExprKind::Unary:
    case ExprKind::Binary: {
      for (const auto& a : e->args)
        if (infer_type(a) != ExprType::Real) return ExprType::Invalid;
      return ExprType::Real;
    }
    case ExprKind::Cmp: {
      for (const auto& a : e->args)
        if (infer_type(a) != ExprType::Real) return ExprType::Invalid;
      return ExprType::Boolean;
    }
    case ExprKind::Logic: {
      for (const auto& a : e->args)
        if (infer_type(a) != ExprType::Boolean) return ExprType::Invalid;
      return ExprType::Boolean;
    }
    case ExprKind::Ite: {
      if (infer_type(e->args[0]) != ExprType::Boolean) return ExprType::Invalid;
      ExprType t = infer_type(e->args[1]);
      if (t == ExprType::Invalid || infer_type(e->args[2]) != t) return ExprType::Invalid;
      return t;
    }
  }
  return ExprType::Invalid;
}

}  // namespace gha
