#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <sstream>
#include <string>
#include <string_view>

#include "gha/expr.hpp"

namespace gha {

// Shortest decimal that round-trips; used by the canonical model printer.
inline std::string format_real_short(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  // to_chars may pick exponent form; expand it so model documents stay plain.
  if (s.find('e') == std::string::npos && s.find('E') == std::string::npos) return s;
  char fixed[512];
  std::snprintf(fixed, sizeof(fixed), "%.17f", v);
  std::string t(fixed);
  size_t dot = t.find('.');
  size_t last = t.find_last_not_of('0');
  if (last == dot) last = dot + 1;
  return t.substr(0, last + 1);
}

// 17-significant-digit decimal, no exponent, explicit point. Used for every
// real literal in emitted solver documents so goldens stay byte-stable.
inline std::string format_real_smt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  std::string s(buf);
  if (s.find('e') != std::string::npos || s.find('E') != std::string::npos) {
    char fixed[1024];
    std::snprintf(fixed, sizeof(fixed), "%.*f", 340, v);
    std::string t(fixed);
    size_t dot = t.find('.');
    size_t last = t.find_last_not_of('0');
    if (last == dot) last = dot + 1;
    s = t.substr(0, last + 1);
  }
  if (s.find('.') == std::string::npos) s += ".";
  return s;
}

inline const char* unary_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "-";
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Tan: return "tan";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Log: return "log";
    case UnaryOp::Sqrt: return "sqrt";
    case UnaryOp::Abs: return "abs";
  }
  return "?";
}

inline const char* cmp_name(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Eq: return "=";
    case CmpOp::Ge: return ">=";
    case CmpOp::Gt: return ">";
  }
  return "?";
}

// Prefix (solver-syntax) rendering: `(+ x1 x2)`, `(ite (>= u 0.) a b)`.
inline void to_prefix(const ExprPtr& e, std::string& out) {
  switch (e->kind) {
    case ExprKind::Const: out += format_real_smt(e->value); return;
    case ExprKind::IntConst: out += std::to_string(e->ivalue); return;
    case ExprKind::BoolConst: out += e->bvalue ? "true" : "false"; return;
    case ExprKind::Var: out += e->name; return;
    case ExprKind::Unary: {
      out += '(';
      out += unary_name(e->uop);
      out += ' ';
      to_prefix(e->args[0], out);
      out += ')';
      return;
    }
    case ExprKind::Binary: {
      static const char* names[] = {"+", "-", "*", "/", "^", "min", "max"};
      out += '(';
      out += names[static_cast<int>(e->bop)];
      out += ' ';
      to_prefix(e->args[0], out);
      out += ' ';
      to_prefix(e->args[1], out);
      out += ')';
      return;
    }
    case ExprKind::Cmp: {
      out += '(';
      out += cmp_name(e->cop);
      out += ' ';
      to_prefix(e->args[0], out);
      out += ' ';
      to_prefix(e->args[1], out);
      out += ')';
      return;
    }
    case ExprKind::Logic: {
      static const char* names[] = {"and", "or", "not", "=>"};
      out += '(';
      out += names[static_cast<int>(e->lop)];
      for (const auto& a : e->args) {
        out += ' ';
        to_prefix(a, out);
      }
      out += ')';
      return;
    }
    case ExprKind::Ite: {
      out += "(ite ";
      to_prefix(e->args[0], out);
      out += ' ';
      to_prefix(e->args[1], out);
      out += ' ';
      to_prefix(e->args[2], out);
      out += ')';
      return;
    }
  }
}

inline std::string to_prefix(const ExprPtr& e) {
  std::string out;
  to_prefix(e, out);
  return out;
}

namespace detail {

// Binding power of an operator node for infix printing.
inline int infix_prec(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::Logic:
      switch (e->lop) {
        case LogicOp::Imp: return 1;
        case LogicOp::Or: return 2;
        case LogicOp::And: return 3;
        case LogicOp::Not: return 8;
      }
      return 8;
    case ExprKind::Cmp: return 4;
    case ExprKind::Binary:
      switch (e->bop) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 5;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 6;
        case BinaryOp::Pow: return 7;
        default: return 9;  // min/max print as calls
      }
    case ExprKind::Unary: return e->uop == UnaryOp::Neg ? 8 : 9;
    default: return 10;
  }
}

inline void to_infix(const ExprPtr& e, std::string& out, int parent_prec) {
  int prec = infix_prec(e);
  auto child = [&](const ExprPtr& c, int p) { to_infix(c, out, p); };
  bool paren = prec < parent_prec;
  switch (e->kind) {
    case ExprKind::Const: out += format_real_short(e->value); return;
    case ExprKind::IntConst: out += std::to_string(e->ivalue); return;
    case ExprKind::BoolConst: out += e->bvalue ? "true" : "false"; return;
    case ExprKind::Var: out += e->name; return;
    case ExprKind::Unary:
      if (e->uop == UnaryOp::Neg) {
        if (paren) out += '(';
        out += '-';
        child(e->args[0], prec + 1);
        if (paren) out += ')';
      } else {
        out += unary_name(e->uop);
        out += '(';
        child(e->args[0], 0);
        out += ')';
      }
      return;
    case ExprKind::Binary: {
      if (e->bop == BinaryOp::Min || e->bop == BinaryOp::Max) {
        out += e->bop == BinaryOp::Min ? "min(" : "max(";
        child(e->args[0], 0);
        out += ", ";
        child(e->args[1], 0);
        out += ')';
        return;
      }
      static const char* names[] = {"+", "-", "*", "/", "^"};
      if (paren) out += '(';
      child(e->args[0], prec);
      out += names[static_cast<int>(e->bop)];
      child(e->args[1], prec + 1);
      if (paren) out += ')';
      return;
    }
    case ExprKind::Cmp: {
      if (paren) out += '(';
      child(e->args[0], prec + 1);
      out += e->cop == CmpOp::Eq ? "==" : cmp_name(e->cop);
      child(e->args[1], prec + 1);
      if (paren) out += ')';
      return;
    }
    case ExprKind::Logic: {
      if (e->lop == LogicOp::Not) {
        if (paren) out += '(';
        out += '!';
        child(e->args[0], prec + 1);
        if (paren) out += ')';
        return;
      }
      if (e->lop == LogicOp::Imp) {
        if (paren) out += '(';
        child(e->args[0], prec + 1);
        out += " -> ";
        child(e->args[1], prec);
        if (paren) out += ')';
        return;
      }
      const char* sep = e->lop == LogicOp::And ? " && " : " || ";
      if (paren) out += '(';
      for (size_t i = 0; i < e->args.size(); ++i) {
        if (i) out += sep;
        child(e->args[i], prec + (e->args.size() > 1 ? 1 : 0));
      }
      if (paren) out += ')';
      return;
    }
    case ExprKind::Ite:
      out += "ite(";
      child(e->args[0], 0);
      out += ", ";
      child(e->args[1], 0);
      out += ", ";
      child(e->args[2], 0);
      out += ')';
      return;
  }
}

}  // namespace detail

inline std::string to_infix(const ExprPtr& e) {
  std::string out;
  detail::to_infix(e, out, 0);
  return out;
}

class parse_error : public std::runtime_error {
 public:
  parse_error(int line, int col, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line(line),
        col(col),
        message(msg) {}
  int line;
  int col;
  std::string message;
};

// Recursive-descent parser for the infix expression syntax used by model
// guards, actions and property predicates.
//
//   expr    := or
//   or      := and (('||' | 'or') and)*
//   and     := not (('&&' | 'and') not)*
//   not     := ('!' | 'not') not | cmp
//   cmp     := sum (('<'|'<='|'=='|'='|'>='|'>'|'!=') sum)?
//   sum     := term (('+'|'-') term)*
//   term    := pow (('*'|'/') pow)*
//   pow     := unary ('^' pow)?
//   unary   := '-' unary | atom
//   atom    := number | 'true' | 'false' | ident | ident '(' args ')' | '(' expr ')'
//
// `!=` desugars to `a < b || a > b` since the comparison set has no
// disequality.
class ExprParser {
 public:
  ExprParser(std::string_view text, int line_no = 1)
      : text_(text), line_(line_no) {}

  ExprPtr parse() {
    ExprPtr e = parse_or();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  std::string_view text_;
  size_t pos_ = 0;
  int line_;

  [[noreturn]] void fail(const std::string& msg) {
    throw parse_error(line_, static_cast<int>(pos_) + 1, msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool eat(std::string_view tok) {
    skip_ws();
    if (text_.substr(pos_, tok.size()) == tok) {
      // keyword tokens must not swallow an identifier prefix
      if (std::isalpha(static_cast<unsigned char>(tok[0]))) {
        size_t end = pos_ + tok.size();
        if (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) ||
                                   text_[end] == '_' || text_[end] == '.'))
          return false;
      }
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  char peek() { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  ExprPtr parse_or() {
    ExprPtr l = parse_and();
    for (;;) {
      if (eat("||") || eat("or")) {
        ExprPtr r = parse_and();
        l = ex::lor(std::move(l), std::move(r));
      } else {
        return l;
      }
    }
  }

  ExprPtr parse_and() {
    ExprPtr l = parse_not();
    for (;;) {
      if (eat("&&") || eat("and")) {
        ExprPtr r = parse_not();
        l = ex::land(std::move(l), std::move(r));
      } else {
        return l;
      }
    }
  }

  ExprPtr parse_not() {
    skip_ws();
    if (peek() == '!' && (pos_ + 1 >= text_.size() || text_[pos_ + 1] != '=')) {
      ++pos_;
      return ex::lnot(parse_not());
    }
    if (eat("not")) return ex::lnot(parse_not());
    return parse_cmp();
  }

  ExprPtr parse_cmp() {
    ExprPtr l = parse_sum();
    skip_ws();
    CmpOp op;
    if (eat("<=")) op = CmpOp::Le;
    else if (eat(">=")) op = CmpOp::Ge;
    else if (eat("==")) op = CmpOp::Eq;
    else if (eat("!=")) {
      ExprPtr r = parse_sum();
      return ex::lor(ex::cmp(CmpOp::Lt, l, r), ex::cmp(CmpOp::Gt, l, r));
    } else if (eat("<")) op = CmpOp::Lt;
    else if (eat(">")) op = CmpOp::Gt;
    else if (eat("=")) op = CmpOp::Eq;
    else return l;
    ExprPtr r = parse_sum();
    return ex::cmp(op, std::move(l), std::move(r));
  }

  ExprPtr parse_sum() {
    ExprPtr l = parse_term();
    for (;;) {
      skip_ws();
      if (eat("+")) l = ex::add(std::move(l), parse_term());
      else if (peek() == '-' && text_.substr(pos_, 2) != "->") {
        ++pos_;
        l = ex::sub(std::move(l), parse_term());
      } else return l;
    }
  }

  ExprPtr parse_term() {
    ExprPtr l = parse_pow();
    for (;;) {
      skip_ws();
      if (eat("*")) l = ex::mul(std::move(l), parse_pow());
      else if (eat("/")) l = ex::div(std::move(l), parse_pow());
      else return l;
    }
  }

  ExprPtr parse_pow() {
    ExprPtr l = parse_unary();
    skip_ws();
    if (eat("^")) return ex::binary(BinaryOp::Pow, std::move(l), parse_pow());
    return l;
  }

  ExprPtr parse_unary() {
    skip_ws();
    if (peek() == '-' && text_.substr(pos_, 2) != "->") {
      ++pos_;
      return ex::neg(parse_unary());
    }
    return parse_atom();
  }

  ExprPtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("expected expression");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_or();
      skip_ws();
      if (!eat(")")) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    fail(std::string("unexpected character '") + c + "'");
  }

  ExprPtr parse_number() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
            text_[pos_] == 'e' || text_[pos_] == 'E' ||
            ((text_[pos_] == '+' || text_[pos_] == '-') && pos_ > start &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
      ++pos_;
    double v = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc{} || res.ptr != text_.data() + pos_) fail("malformed number");
    return ex::num(v);
  }

  ExprPtr parse_ident() {
    size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '_' || text_[pos_] == '.'))
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    if (name == "true") return ex::boolc(true);
    if (name == "false") return ex::boolc(false);
    // Temporal operators have no transition semantics here; reject by name so
    // the diagnostic is specific.
    if (name == "always" || name == "eventually" || name == "until" || name == "next" ||
        name == "release")
      fail("temporal-logic conditions are not supported (operator '" + name + "')");
    skip_ws();
    if (peek() == '(') {
      ++pos_;
      std::vector<ExprPtr> args;
      skip_ws();
      if (!eat(")")) {
        for (;;) {
          args.push_back(parse_or());
          skip_ws();
          if (eat(")")) break;
          if (!eat(",")) fail("expected ',' or ')'");
        }
      }
      return make_call(name, std::move(args));
    }
    return ex::var(std::move(name));
  }

  ExprPtr make_call(const std::string& name, std::vector<ExprPtr> args) {
    auto need = [&](size_t n) {
      if (args.size() != n)
        fail(name + " takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s"));
    };
    if (name == "sin" || name == "cos" || name == "tan" || name == "exp" || name == "log" ||
        name == "sqrt" || name == "abs" || name == "neg") {
      need(1);
      UnaryOp op = UnaryOp::Neg;
      if (name == "sin") op = UnaryOp::Sin;
      else if (name == "cos") op = UnaryOp::Cos;
      else if (name == "tan") op = UnaryOp::Tan;
      else if (name == "exp") op = UnaryOp::Exp;
      else if (name == "log") op = UnaryOp::Log;
      else if (name == "sqrt") op = UnaryOp::Sqrt;
      else if (name == "abs") op = UnaryOp::Abs;
      return ex::unary(op, args[0]);
    }
    if (name == "min" || name == "max" || name == "pow") {
      need(2);
      BinaryOp op = name == "min" ? BinaryOp::Min
                  : name == "max" ? BinaryOp::Max
                                  : BinaryOp::Pow;
      return ex::binary(op, args[0], args[1]);
    }
    if (name == "ite") {
      need(3);
      return ex::ite(args[0], args[1], args[2]);
    }
    fail("unknown function '" + name + "'");
  }
};

inline ExprPtr parse_expr(std::string_view text, int line_no = 1) {
  return ExprParser(text, line_no).parse();
}

}  // namespace gha
