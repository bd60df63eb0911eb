#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gha/expr.hpp"
#include "gha/model.hpp"
#include "gha/parse.hpp"

namespace gha {

class fr_error : public std::runtime_error {
 public:
  explicit fr_error(const std::string& what) : std::runtime_error(what) {}
};

// Per-state continuous semantics: the integrator state variables with their
// derivative and initial expressions, plus the fully substituted update
// expression of every port-named output.
struct FlowSystem {
  std::string state_name;
  std::vector<std::string> state_vars;      // sorted
  std::map<std::string, ExprPtr> derivs;    // state var -> d/dt expression
  std::map<std::string, ExprPtr> init;      // state var -> initial value
  std::map<std::string, ExprPtr> algebraic; // output var -> expression
};

// Topological order of the block dataflow graph. Integrator outputs count as
// sources (feedback through an integrator is legal); any remaining cycle is
// an algebraic loop.
inline std::vector<std::string> block_order(const SlState& s) {
  std::map<std::string, std::set<std::string>> succ;
  std::map<std::string, int> indeg;
  for (const auto& b : s.blocks) {
    if (b.kind == BlockKind::Subsystem)
      throw fr_error("state " + s.name + " is not flat (subsystem " + b.id + ")");
    indeg[b.id] = 0;
  }
  for (const auto& l : s.lines) {
    const Block* src = s.block(l.src.block);
    if (!src) throw fr_error("line references unknown block '" + l.src.block + "'");
    if (src->kind == BlockKind::Integrator) continue;  // cut feedback edges
    for (const auto& d : l.dsts) {
      if (!s.block(d.block)) throw fr_error("line references unknown block '" + d.block + "'");
      if (succ[l.src.block].insert(d.block).second) ++indeg[d.block];
    }
  }

  std::set<std::string> ready;
  for (const auto& [id, n] : indeg)
    if (n == 0) ready.insert(id);
  std::vector<std::string> order;
  while (!ready.empty()) {
    std::string id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (const auto& nxt : succ[id])
      if (--indeg[nxt] == 0) ready.insert(nxt);
  }
  if (order.size() != s.blocks.size()) {
    // find one cycle among the leftovers for the message
    std::set<std::string> left;
    for (const auto& [id, n] : indeg)
      if (n > 0) left.insert(id);
    std::vector<std::string> cycle(left.begin(), left.end());
    std::string msg = "algebraic loop [";
    for (size_t i = 0; i < cycle.size(); ++i) {
      if (i) msg += ", ";
      msg += cycle[i];
    }
    msg += "] in state " + s.name;
    throw fr_error(msg);
  }
  return order;
}

namespace detail {

inline ExprPtr block_output_expr(const Block& b, const std::vector<ExprPtr>& in) {
  using namespace ex;
  switch (b.kind) {
    case BlockKind::Constant:
      return num(b.param_real("value").value_or(0.0));
    case BlockKind::Gain:
      return mul(num(b.param_real("gain").value_or(1.0)), in[0]);
    case BlockKind::Sum: {
      std::string signs = b.param_str("signs").value_or("++");
      ExprPtr acc = signs[0] == '+' ? in[0] : neg(in[0]);
      for (size_t i = 1; i < signs.size(); ++i)
        acc = signs[i] == '+' ? add(acc, in[i]) : sub(acc, in[i]);
      return acc;
    }
    case BlockKind::Product: {
      std::string ops = b.param_str("ops").value_or("**");
      ExprPtr acc = ops[0] == '*' ? in[0] : div(num(1.0), in[0]);
      for (size_t i = 1; i < ops.size(); ++i)
        acc = ops[i] == '*' ? mul(acc, in[i]) : div(acc, in[i]);
      return acc;
    }
    case BlockKind::Trigonometry: {
      std::string f = b.param_str("function").value_or("sin");
      UnaryOp op = f == "cos" ? UnaryOp::Cos : f == "tan" ? UnaryOp::Tan : UnaryOp::Sin;
      return unary(op, in[0]);
    }
    case BlockKind::Sqrt:
      return unary(UnaryOp::Sqrt, in[0]);
    case BlockKind::Exp:
      return unary(UnaryOp::Exp, in[0]);
    case BlockKind::Saturation:
      return binary(BinaryOp::Min, num(b.param_real("upper").value_or(0.0)),
                    binary(BinaryOp::Max, num(b.param_real("lower").value_or(0.0)), in[0]));
    case BlockKind::Switch:
      // pass input 1 while input 2 clears the threshold, else input 3
      return ite(ge(in[1], num(b.param_real("threshold").value_or(0.0))), in[0], in[2]);
    case BlockKind::Relational: {
      std::string op = b.param_str("op").value_or("<");
      CmpOp c = op == "<=" ? CmpOp::Le
              : op == "==" ? CmpOp::Eq
              : op == ">=" ? CmpOp::Ge
              : op == ">"  ? CmpOp::Gt
                           : CmpOp::Lt;
      return ite(cmp(c, in[0], in[1]), num(1.0), num(0.0));
    }
    case BlockKind::Logical: {
      std::string op = b.param_str("op").value_or("and");
      auto truthy = [](const ExprPtr& u) { return lnot(eq(u, num(0.0))); };
      ExprPtr cond;
      if (op == "not") {
        cond = logic(LogicOp::Not, {truthy(in[0])});
      } else {
        std::vector<ExprPtr> args;
        for (const auto& u : in) args.push_back(truthy(u));
        cond = logic(op == "or" ? LogicOp::Or : LogicOp::And, std::move(args));
      }
      return ite(cond, num(1.0), num(0.0));
    }
    case BlockKind::Inport:
      return var(b.id);
    case BlockKind::Integrator:
    case BlockKind::Outport:
    case BlockKind::Subsystem:
      break;
  }
  throw fr_error("block " + b.id + ": unsupported kind in expression derivation");
}

}  // namespace detail

// Walks the flat diagram in dataflow order, building every block's output
// expression from its inputs until only inputs, parameters and integrator
// state variables remain free.
inline FlowSystem derive_fr(const SlState& s) {
  std::vector<std::string> order = block_order(s);

  std::map<std::pair<std::string, int>, std::pair<std::string, int>> driver;
  for (const auto& l : s.lines)
    for (const auto& d : l.dsts) driver[{d.block, d.port}] = {l.src.block, l.src.port};

  FlowSystem fs;
  fs.state_name = s.name;
  std::map<std::pair<std::string, int>, ExprPtr> port_expr;

  // integrator outputs are sources: their expressions exist before the walk
  std::map<std::string, std::string> integ_var;
  for (const auto& b : s.blocks) {
    if (b.kind != BlockKind::Integrator) continue;
    std::string sv = integrator_state_var(s, b);
    if (integ_var.count(b.id) || fs.derivs.count(sv) ||
        std::count(fs.state_vars.begin(), fs.state_vars.end(), sv))
      throw fr_error("state " + s.name + ": duplicate state variable '" + sv + "'");
    integ_var[b.id] = sv;
    fs.state_vars.push_back(sv);
    port_expr[{b.id, 1}] = ex::var(sv);
  }

  for (const auto& id : order) {
    const Block& b = *s.block(id);
    int arity = block_in_arity(b);
    std::vector<ExprPtr> in;
    in.reserve(arity);
    for (int p = 1; p <= arity; ++p) {
      auto it = driver.find({id, p});
      if (it == driver.end())
        throw fr_error("in-port " + id + "." + std::to_string(p) + " in state " + s.name +
                       " is undriven");
      auto src = port_expr.find(it->second);
      if (src == port_expr.end())
        throw fr_error("internal: source expression for " + it->second.first + " not ready");
      in.push_back(src->second);
    }

    if (b.kind == BlockKind::Outport) {
      fs.algebraic[b.id] = fold_constants(in[0]);
      continue;
    }
    if (b.kind == BlockKind::Integrator) {
      const std::string& sv = integ_var.at(id);
      fs.derivs[sv] = fold_constants(in[0]);
      fs.init[sv] = ex::num(b.param_real("init").value_or(0.0));
      continue;  // output expression was pre-seeded
    }
    port_expr[{id, 1}] = fold_constants(detail::block_output_expr(b, in));
  }

  std::sort(fs.state_vars.begin(), fs.state_vars.end());
  return fs;
}

inline std::map<std::string, FlowSystem> derive_all_frs(const Gha& m) {
  std::map<std::string, FlowSystem> out;
  for (const auto& s : m.states) out[s.name] = derive_fr(s);
  return out;
}

// Human-readable rendering used by the `frs` subcommand and golden tests.
inline std::string render_flow_system(const FlowSystem& fs) {
  std::string out = "state " + fs.state_name + "\n";
  for (const auto& v : fs.state_vars) {
    out += "  d/dt[" + v + "] = " + to_prefix(fs.derivs.at(v)) + "\n";
    out += "  init[" + v + "] = " + to_prefix(fs.init.at(v)) + "\n";
  }
  for (const auto& [v, e] : fs.algebraic) out += "  " + v + " = " + to_prefix(e) + "\n";
  return out;
}

}  // namespace gha
