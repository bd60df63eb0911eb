#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gha/expr.hpp"
#include "gha/flatten.hpp"
#include "gha/fr.hpp"
#include "gha/model.hpp"

namespace gha {

class unroll_error : public std::runtime_error {
 public:
  explicit unroll_error(const std::string& what) : std::runtime_error(what) {}
};

// Solver-variable naming scheme. `v_i_0` / `v_i_t` are the values of v at the
// beginning and end of step i; `mode_i` the active state index; `d_i` the
// dwell duration; `tau_i` the global clock at the beginning of step i.
inline std::string step_begin_var(const std::string& v, int i) {
  return v + "_" + std::to_string(i) + "_0";
}
inline std::string step_end_var(const std::string& v, int i) {
  return v + "_" + std::to_string(i) + "_t";
}
inline std::string mode_var(int i) { return "mode_" + std::to_string(i); }
inline std::string dwell_var(int i) { return "d_" + std::to_string(i); }
inline std::string tau_var(int i) { return "tau_" + std::to_string(i); }
inline std::string clock_step_var(const std::string& c, int i) {
  return c + "_" + std::to_string(i);
}

enum class AssertClass {
  Init,
  Clock,
  ContinuousUpdate,
  AlgebraicUpdate,
  Frame,
  Transition,
  Stutter,
};

inline const char* assert_class_name(AssertClass c) {
  switch (c) {
    case AssertClass::Init: return "init";
    case AssertClass::Clock: return "clock";
    case AssertClass::ContinuousUpdate: return "continuous-update";
    case AssertClass::AlgebraicUpdate: return "algebraic-update";
    case AssertClass::Frame: return "frame";
    case AssertClass::Transition: return "transition";
    case AssertClass::Stutter: return "stutter";
  }
  return "?";
}

// One constraint. Updates and stutters carry a mode hypothesis via
// `state_idx`; transitions additionally carry the instanced guard. The
// continuous-update payload is structural (the flow group), everything else
// is an explicit expression.
struct Assertion {
  AssertClass cls = AssertClass::Init;
  int step = 0;
  int state_idx = -1;       // mode hypothesis on mode_step, -1 = unconditional
  int succ_state_idx = -1;  // asserted successor mode (transition/stutter)
  int transition_idx = -1;
  ExprPtr guard;            // extra hypothesis, already step-instanced
  ExprPtr body;             // conjunction of equalities, step-instanced
  std::string var;          // algebraic/frame: the variable updated
};

enum class ClockKind { Elapsed, Since, At };

struct ClockDef {
  std::string name;
  ClockKind kind = ClockKind::Elapsed;
  ExprPtr expr;  // trigger/event over model variables; null for Elapsed
};

struct UnrollConfig {
  double dwell_max = 10.0;
};

struct ConstraintSystem {
  int k = 0;
  double dwell_max = 10.0;
  std::vector<std::string> states;     // sorted; position = mode index
  std::vector<std::string> step_vars;  // sorted model variables
  std::map<std::string, FlowSystem> flows;
  std::vector<ParamDecl> params;       // sorted by name
  std::map<std::string, std::optional<std::pair<double, double>>> input_ranges;
  std::map<std::string, double> init_vals;  // resolved begin-of-run values
  std::vector<ClockDef> clocks;             // injected by property compilation
  std::vector<Assertion> assertions;

  int state_index(const std::string& name) const {
    auto it = std::find(states.begin(), states.end(), name);
    return it == states.end() ? -1 : static_cast<int>(it - states.begin());
  }
  bool is_input(const std::string& v) const { return input_ranges.count(v) != 0; }
};

namespace detail {

inline ExprPtr instance_end(const ExprPtr& e, int step, const std::set<std::string>& step_vars) {
  return rename_vars(e, [&](const std::string& v) {
    return step_vars.count(v) ? step_end_var(v, step) : v;
  });
}

// Sequential action semantics: later actions see the effects of earlier
// ones, so earlier assignments are substituted into later expressions.
inline std::map<std::string, ExprPtr> compose_actions(const Transition& t) {
  std::map<std::string, ExprPtr> acc;
  for (const auto& [v, e] : t.actions) acc[v] = substitute(e, acc);
  return acc;
}

}  // namespace detail

// Produces the k-step constraint system over step variables: per-step update
// assertions under each mode hypothesis, transition and stutter relations
// linking consecutive steps, initial-value pins and the dwell clock chain.
// Step k is a terminal snapshot whose end values equal its begin values, so
// bound-k properties can reference end-of-run values.
inline ConstraintSystem unroll(const Gha& m, const std::map<std::string, FlowSystem>& frs,
                               int k, const UnrollConfig& cfg = {}) {
  if (!is_flat(m)) throw unroll_error("model must be flattened before unrolling");
  if (k < 0) throw unroll_error("negative bound");

  ConstraintSystem cs;
  cs.k = k;
  cs.dwell_max = cfg.dwell_max;
  for (const auto& s : m.states) {
    cs.states.push_back(s.name);
    auto it = frs.find(s.name);
    if (it == frs.end()) throw unroll_error("missing flow system for state " + s.name);
    cs.flows[s.name] = it->second;
  }
  std::sort(cs.states.begin(), cs.states.end());

  cs.params.assign(m.params.begin(), m.params.end());
  std::sort(cs.params.begin(), cs.params.end(),
            [](const ParamDecl& a, const ParamDecl& b) { return a.name < b.name; });
  std::set<std::string> param_names;
  for (const auto& p : cs.params) param_names.insert(p.name);

  std::set<std::string> vars;
  for (const auto& v : m.all_vars())
    if (!param_names.count(v)) vars.insert(v);
  cs.step_vars.assign(vars.begin(), vars.end());

  for (const auto& i : m.inputs) cs.input_ranges[i.name] = i.range;

  // begin-of-run values: explicit init declaration, else integrator initial
  // condition, else zero; inputs stay free
  for (const auto& v : cs.step_vars) {
    if (cs.is_input(v)) continue;
    auto it = m.init_values.find(v);
    if (it != m.init_values.end()) {
      cs.init_vals[v] = it->second;
      continue;
    }
    double val = 0.0;
    for (const auto& sn : cs.states) {
      const FlowSystem& fs = cs.flows.at(sn);
      auto init_it = fs.init.find(v);
      if (init_it != fs.init.end()) {
        static const VarMap kEmpty;
        val = eval(init_it->second, kEmpty);
        break;
      }
    }
    cs.init_vals[v] = val;
  }

  for (const auto& t : m.transitions) {
    for (const auto& [v, e] : t.actions) {
      (void)e;
      if (!vars.count(v))
        throw unroll_error("transition action assigns undeclared variable " + v);
    }
  }

  const int initial_idx = cs.state_index(m.initial);
  if (initial_idx < 0) throw unroll_error("unresolved initial state " + m.initial);

  using namespace ex;

  // init
  {
    Assertion a;
    a.cls = AssertClass::Init;
    a.step = 0;
    std::vector<ExprPtr> parts;
    parts.push_back(eq(var(mode_var(0)), intc(initial_idx)));
    parts.push_back(eq(var(tau_var(0)), num(0.0)));
    for (const auto& v : cs.step_vars) {
      if (cs.is_input(v)) continue;
      parts.push_back(eq(var(step_begin_var(v, 0)), num(cs.init_vals.at(v))));
    }
    a.body = conj(std::move(parts));
    cs.assertions.push_back(std::move(a));
  }

  // clock chain
  for (int i = 0; i < k; ++i) {
    Assertion a;
    a.cls = AssertClass::Clock;
    a.step = i;
    a.body = eq(var(tau_var(i + 1)), add(var(tau_var(i)), var(dwell_var(i))));
    cs.assertions.push_back(std::move(a));
  }

  // per-step updates, transition and stutter relations
  for (int i = 0; i < k; ++i) {
    for (size_t si = 0; si < cs.states.size(); ++si) {
      const FlowSystem& fs = cs.flows.at(cs.states[si]);
      if (fs.state_vars.empty()) continue;
      Assertion a;
      a.cls = AssertClass::ContinuousUpdate;
      a.step = i;
      a.state_idx = static_cast<int>(si);
      cs.assertions.push_back(std::move(a));
    }
    for (size_t si = 0; si < cs.states.size(); ++si) {
      const FlowSystem& fs = cs.flows.at(cs.states[si]);
      for (const auto& [v, phi] : fs.algebraic) {
        if (std::count(fs.state_vars.begin(), fs.state_vars.end(), v)) continue;
        Assertion a;
        a.cls = AssertClass::AlgebraicUpdate;
        a.step = i;
        a.state_idx = static_cast<int>(si);
        a.var = v;
        a.body = eq(var(step_end_var(v, i)), detail::instance_end(phi, i, vars));
        cs.assertions.push_back(std::move(a));
      }
    }
    for (size_t si = 0; si < cs.states.size(); ++si) {
      const FlowSystem& fs = cs.flows.at(cs.states[si]);
      for (const auto& v : cs.step_vars) {
        if (std::count(fs.state_vars.begin(), fs.state_vars.end(), v)) continue;
        if (fs.algebraic.count(v)) continue;
        Assertion a;
        a.cls = AssertClass::Frame;
        a.step = i;
        a.state_idx = static_cast<int>(si);
        a.var = v;
        a.body = eq(var(step_end_var(v, i)), var(step_begin_var(v, i)));
        cs.assertions.push_back(std::move(a));
      }
    }
    for (size_t ti = 0; ti < m.transitions.size(); ++ti) {
      const Transition& t = m.transitions[ti];
      Assertion a;
      a.cls = AssertClass::Transition;
      a.step = i;
      a.state_idx = cs.state_index(t.src);
      a.succ_state_idx = cs.state_index(t.dst);
      if (a.state_idx < 0 || a.succ_state_idx < 0)
        throw unroll_error("transition " + t.src + " -> " + t.dst + " references unknown state");
      a.transition_idx = static_cast<int>(ti);
      a.guard = detail::instance_end(t.cond, i, vars);
      auto pi = detail::compose_actions(t);
      std::vector<ExprPtr> parts;
      for (const auto& v : cs.step_vars) {
        auto it = pi.find(v);
        ExprPtr rhs = it != pi.end() ? detail::instance_end(it->second, i, vars)
                                     : var(step_end_var(v, i));
        parts.push_back(eq(var(step_begin_var(v, i + 1)), rhs));
      }
      a.body = conj(std::move(parts));
      cs.assertions.push_back(std::move(a));
    }
    for (size_t si = 0; si < cs.states.size(); ++si) {
      Assertion a;
      a.cls = AssertClass::Stutter;
      a.step = i;
      a.state_idx = static_cast<int>(si);
      a.succ_state_idx = static_cast<int>(si);
      std::vector<ExprPtr> out_conds;
      for (const auto& t : m.transitions)
        if (t.src == cs.states[si]) out_conds.push_back(detail::instance_end(t.cond, i, vars));
      if (!out_conds.empty()) a.guard = lnot(disj(std::move(out_conds)));
      std::vector<ExprPtr> parts;
      for (const auto& v : cs.step_vars)
        parts.push_back(eq(var(step_begin_var(v, i + 1)), var(step_end_var(v, i))));
      a.body = conj(std::move(parts));
      cs.assertions.push_back(std::move(a));
    }
  }

  // terminal snapshot: step k ends where it begins
  if (k >= 1) {
    for (const auto& v : cs.step_vars) {
      Assertion a;
      a.cls = AssertClass::Frame;
      a.step = k;
      a.var = v;
      a.body = eq(var(step_end_var(v, k)), var(step_begin_var(v, k)));
      cs.assertions.push_back(std::move(a));
    }
  }

  return cs;
}

// Appends a monitor clock's step variables and update assertions.
inline void inject_clock(ConstraintSystem& cs, const ClockDef& c) {
  for (const auto& existing : cs.clocks)
    if (existing.name == c.name) return;
  if (c.kind == ClockKind::Elapsed) return;  // pure alias of tau
  cs.clocks.push_back(c);
  std::set<std::string> vars(cs.step_vars.begin(), cs.step_vars.end());
  using namespace ex;
  {
    Assertion a;
    a.cls = AssertClass::Clock;
    a.step = 0;
    a.body = eq(var(clock_step_var(c.name, 0)), num(0.0));
    cs.assertions.push_back(std::move(a));
  }
  for (int i = 0; i < cs.k; ++i) {
    ExprPtr cond = detail::instance_end(c.expr, i, vars);
    ExprPtr next;
    if (c.kind == ClockKind::Since) {
      // accumulates while the trigger holds at step boundaries
      next = ite(cond, add(var(clock_step_var(c.name, i)), var(dwell_var(i))), num(0.0));
    } else {
      // latches the global clock when the event holds
      next = ite(cond, var(tau_var(i + 1)), var(clock_step_var(c.name, i)));
    }
    Assertion a;
    a.cls = AssertClass::Clock;
    a.step = i;
    a.body = eq(var(clock_step_var(c.name, i + 1)), next);
    cs.assertions.push_back(std::move(a));
  }
}

}  // namespace gha
