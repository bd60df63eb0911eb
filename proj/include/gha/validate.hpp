#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "gha/diagnostics.hpp"
#include "gha/model.hpp"
#include "gha/parse.hpp"

namespace gha {

namespace detail {

inline void err(std::vector<Diagnostic>& out, int line, std::string msg) {
  out.push_back({Severity::Error, line, 0, std::move(msg)});
}

inline void warn(std::vector<Diagnostic>& out, int line, std::string msg) {
  out.push_back({Severity::Warning, line, 0, std::move(msg)});
}

inline bool is_const_nonzero(const ExprPtr& e) {
  return (e->kind == ExprKind::Const && e->value != 0.0) ||
         (e->kind == ExprKind::IntConst && e->ivalue != 0);
}

inline bool is_const_positive(const ExprPtr& e) {
  return (e->kind == ExprKind::Const && e->value > 0.0) ||
         (e->kind == ExprKind::IntConst && e->ivalue > 0);
}

// Flags divisions and log arguments that cannot be shown safe syntactically.
inline void check_partial_ops(const ExprPtr& e, int line, const std::string& where,
                              std::vector<Diagnostic>& out) {
  if (e->kind == ExprKind::Binary && e->bop == BinaryOp::Div &&
      !is_const_nonzero(e->args[1]))
    warn(out, line, "possible division by zero in " + where);
  if (e->kind == ExprKind::Unary && e->uop == UnaryOp::Log && !is_const_positive(e->args[0]))
    warn(out, line, "possible log of non-positive value in " + where);
  for (const auto& a : e->args) check_partial_ops(a, line, where, out);
}

inline void check_expr_vars(const ExprPtr& e, const std::set<std::string>& declared, int line,
                            const std::string& where, std::vector<Diagnostic>& out) {
  for (const auto& v : free_vars(e))
    if (!declared.count(v)) err(out, line, "unresolved variable " + v + " in " + where);
}

struct BlockContext {
  const Gha* model;
  bool inside_subsystem;
};

inline void validate_block_params(const Block& b, std::vector<Diagnostic>& out) {
  auto need_real = [&](const char* key) {
    if (!b.param_real(key))
      err(out, b.line_no,
          "block " + b.id + " (" + block_kind_name(b.kind) + ") requires numeric param '" +
              key + "'");
  };
  std::set<std::string> known;
  switch (b.kind) {
    case BlockKind::Constant:
      need_real("value");
      known = {"value"};
      break;
    case BlockKind::Gain:
      need_real("gain");
      known = {"gain"};
      break;
    case BlockKind::Sum: {
      known = {"signs"};
      auto s = b.param_str("signs");
      if (!s) {
        err(out, b.line_no, "block " + b.id + " (Sum) requires param 'signs'");
      } else {
        for (char c : *s)
          if (c != '+' && c != '-') {
            err(out, b.line_no, "block " + b.id + ": bad sign character '" +
                                    std::string(1, c) + "' (want + or -)");
            break;
          }
        if (s->empty()) err(out, b.line_no, "block " + b.id + ": empty sign string");
      }
      break;
    }
    case BlockKind::Product: {
      known = {"ops"};
      auto s = b.param_str("ops");
      if (s) {
        for (char c : *s)
          if (c != '*' && c != '/') {
            err(out, b.line_no, "block " + b.id + ": bad op character '" + std::string(1, c) +
                                    "' (want * or /)");
            break;
          }
        if (!s->empty() && (*s)[0] == '/')
          warn(out, b.line_no, "block " + b.id + ": leading '/' divides 1 by the first input");
      }
      break;
    }
    case BlockKind::Integrator:
      need_real("init");
      known = {"init", "out"};
      break;
    case BlockKind::Trigonometry: {
      known = {"function"};
      auto f = b.param_str("function");
      if (!f || (*f != "sin" && *f != "cos" && *f != "tan"))
        err(out, b.line_no,
            "block " + b.id + " (Trigonometry) requires function=sin|cos|tan");
      break;
    }
    case BlockKind::Sqrt:
    case BlockKind::Exp:
      break;
    case BlockKind::Saturation: {
      need_real("lower");
      need_real("upper");
      known = {"lower", "upper"};
      auto lo = b.param_real("lower");
      auto hi = b.param_real("upper");
      if (lo && hi && *lo > *hi)
        err(out, b.line_no, "block " + b.id + ": lower > upper");
      break;
    }
    case BlockKind::Switch:
      need_real("threshold");
      known = {"threshold"};
      break;
    case BlockKind::Relational: {
      known = {"op"};
      auto op = b.param_str("op");
      static const std::set<std::string> ops = {"<", "<=", "==", ">=", ">"};
      if (!op || !ops.count(*op))
        err(out, b.line_no, "block " + b.id + " (Relational) requires op=<|<=|==|>=|>");
      break;
    }
    case BlockKind::Logical: {
      known = {"op", "inputs"};
      auto op = b.param_str("op");
      if (!op || (*op != "and" && *op != "or" && *op != "not"))
        err(out, b.line_no, "block " + b.id + " (Logical) requires op=and|or|not");
      break;
    }
    case BlockKind::Inport:
    case BlockKind::Outport:
      known = {"port"};
      break;
    case BlockKind::Subsystem:
      break;
  }
  for (const auto& [k, v] : b.params)
    if (!known.count(k))
      warn(out, b.line_no,
           "block " + b.id + ": unknown parameter '" + k + "' for kind " +
               block_kind_name(b.kind));
}

// Structural wiring checks shared by states and subsystem bodies.
inline void validate_diagram(const std::vector<Block>& blocks, const std::vector<Line>& lines,
                             const std::string& scope, const BlockContext& ctx,
                             std::vector<Diagnostic>& out) {
  std::map<std::string, const Block*> by_id;
  for (const auto& b : blocks) {
    if (b.id.find('/') != std::string::npos)
      err(out, b.line_no, "block id '" + b.id + "' contains reserved character '/'");
    if (!by_id.emplace(b.id, &b).second)
      err(out, b.line_no, "duplicate block id '" + b.id + "' in " + scope);
    validate_block_params(b, out);
    if (b.kind != BlockKind::Integrator && b.param("out"))
      warn(out, b.line_no, "block " + b.id + ": 'out' is only meaningful on Integrator");
    if (b.kind == BlockKind::Subsystem) {
      // nested boundary ports must be dense and unique
      std::set<int> in_ports, out_ports;
      for (const auto& inner : b.blocks) {
        if (inner.kind == BlockKind::Inport) {
          auto p = inner.param_real("port");
          if (!p || !in_ports.insert(static_cast<int>(*p)).second)
            err(out, inner.line_no, "subsystem " + b.id + ": bad or duplicate Inport port");
        }
        if (inner.kind == BlockKind::Outport) {
          auto p = inner.param_real("port");
          if (!p || !out_ports.insert(static_cast<int>(*p)).second)
            err(out, inner.line_no, "subsystem " + b.id + ": bad or duplicate Outport port");
        }
      }
      for (int i = 1; i <= static_cast<int>(in_ports.size()); ++i)
        if (!in_ports.count(i))
          err(out, b.line_no, "subsystem " + b.id + ": Inport ports are not dense");
      for (int i = 1; i <= static_cast<int>(out_ports.size()); ++i)
        if (!out_ports.count(i))
          err(out, b.line_no, "subsystem " + b.id + ": Outport ports are not dense");
      BlockContext inner_ctx{ctx.model, true};
      validate_diagram(b.blocks, b.lines, "subsystem " + b.id, inner_ctx, out);
    }
    if (!ctx.inside_subsystem) {
      if (b.kind == BlockKind::Inport) {
        if (!ctx.model->is_input(b.id) && !ctx.model->is_param(b.id))
          err(out, b.line_no, "Inport '" + b.id + "' does not name an input or parameter");
      }
      if (b.kind == BlockKind::Outport) {
        if (ctx.model->is_input(b.id))
          err(out, b.line_no, "Outport '" + b.id + "' writes input variable");
        if (ctx.model->is_param(b.id))
          err(out, b.line_no, "Outport '" + b.id + "' writes parameter");
      }
    }
  }

  // every in-port driven by exactly one source
  std::map<std::pair<std::string, int>, int> drivers;
  for (const auto& l : lines) {
    auto src_it = by_id.find(l.src.block);
    if (src_it == by_id.end()) {
      err(out, l.line_no, "line references unknown block '" + l.src.block + "'");
    } else if (l.src.port < 1 || l.src.port > block_out_arity(*src_it->second)) {
      err(out, l.line_no,
          "line source " + l.src.block + "." + std::to_string(l.src.port) +
              " is out of range");
    }
    for (const auto& d : l.dsts) {
      auto dst_it = by_id.find(d.block);
      if (dst_it == by_id.end()) {
        err(out, l.line_no, "line references unknown block '" + d.block + "'");
        continue;
      }
      if (d.port < 1 || d.port > block_in_arity(*dst_it->second)) {
        err(out, l.line_no,
            "line destination " + d.block + "." + std::to_string(d.port) + " is out of range");
        continue;
      }
      ++drivers[{d.block, d.port}];
    }
  }
  for (const auto& [port, count] : drivers)
    if (count > 1)
      err(out, 0,
          "in-port " + port.first + "." + std::to_string(port.second) + " in " + scope +
              " has " + std::to_string(count) + " drivers");
  for (const auto& b : blocks) {
    int arity = block_in_arity(b);
    for (int p = 1; p <= arity; ++p)
      if (!drivers.count({b.id, p}))
        err(out, b.line_no,
            "in-port " + b.id + "." + std::to_string(p) + " in " + scope + " is undriven");
  }
}

}  // namespace detail

// Structural validation per the model invariants. Diagnostics come back
// sorted by location; an empty error set means the model is well-formed.
inline std::vector<Diagnostic> validate_model(const Gha& m) {
  using namespace detail;
  std::vector<Diagnostic> out;

  std::map<std::string, int> first_decl;
  auto declare = [&](const std::string& name, int line) {
    auto [it, fresh] = first_decl.emplace(name, line);
    if (!fresh) err(out, line, "duplicate declaration of '" + name + "'");
  };
  for (const auto& i : m.inputs) declare(i.name, i.line_no);
  for (const auto& o : m.outputs) declare(o, 0);
  for (const auto& p : m.params) declare(p.name, p.line_no);

  static const std::set<std::string> reserved = {"mode", "d", "tau"};
  for (const auto& [name, line] : first_decl) {
    if (reserved.count(name)) err(out, line, "variable name '" + name + "' is reserved");
    if (name.find('.') != std::string::npos)
      err(out, line, "variable name '" + name + "' contains reserved character '.'");
    if (name.find('/') != std::string::npos)
      err(out, line, "variable name '" + name + "' contains reserved character '/'");
  }

  for (const auto& i : m.inputs)
    if (i.range && i.range->first > i.range->second)
      err(out, i.line_no, "input " + i.name + ": empty range");
  for (const auto& p : m.params) {
    if (p.range && p.range->first > p.range->second)
      err(out, p.line_no, "param " + p.name + ": empty range");
    if (!p.range && !p.value) err(out, p.line_no, "param " + p.name + ": no value or range");
  }

  std::set<std::string> state_names;
  for (const auto& s : m.states)
    if (!state_names.insert(s.name).second)
      err(out, s.line_no, "duplicate state name '" + s.name + "'");

  if (m.initial.empty()) {
    err(out, 0, "missing initial state declaration");
  } else if (!state_names.count(m.initial)) {
    err(out, m.initial_line_no, "unresolved state " + m.initial);
  }

  for (const auto& s : m.states) {
    BlockContext ctx{&m, false};
    validate_diagram(s.blocks, s.lines, "state " + s.name, ctx, out);
  }

  std::set<std::string> declared = m.all_vars();
  for (const auto& p : m.params) declared.insert(p.name);

  for (const auto& t : m.transitions) {
    if (!state_names.count(t.src)) err(out, t.line_no, "unresolved state " + t.src);
    if (!state_names.count(t.dst)) err(out, t.line_no, "unresolved state " + t.dst);
    if (t.src == t.dst)
      warn(out, t.line_no, "self-loop transition on state " + t.src);
    if (infer_type(t.cond) != ExprType::Boolean)
      err(out, t.line_no, "transition condition must be boolean-typed");
    check_expr_vars(t.cond, declared, t.line_no, "transition condition", out);
    check_partial_ops(t.cond, t.line_no, "transition condition", out);
    for (const auto& [v, e] : t.actions) {
      if (!declared.count(v)) {
        err(out, t.line_no, "unresolved variable " + v + " in action target");
      } else if (m.is_input(v)) {
        err(out, t.line_no, "action assigns input variable " + v);
      } else if (m.is_param(v)) {
        err(out, t.line_no, "action assigns parameter " + v);
      }
      if (infer_type(e) != ExprType::Real)
        err(out, t.line_no, "action expression for " + v + " must be real-typed");
      check_expr_vars(e, declared, t.line_no, "action expression", out);
      check_partial_ops(e, t.line_no, "action expression", out);
    }
  }

  for (const auto& [v, c] : m.init_values) {
    (void)c;
    if (!declared.count(v)) err(out, 0, "init declaration for undeclared variable " + v);
    if (m.is_input(v)) err(out, 0, "init declaration targets input variable " + v);
  }

  sort_diagnostics(out);
  return out;
}

}  // namespace gha
