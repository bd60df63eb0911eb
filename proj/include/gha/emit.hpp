#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

#include "gha/exprio.hpp"
#include "gha/unroll.hpp"

namespace gha {

class emit_error : public std::runtime_error {
 public:
  explicit emit_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string flow_name(const std::string& state) { return "flow_" + state; }

inline std::string render_hyp(const Assertion& a, int /*k*/) {
  std::string mode_eq;
  if (a.state_idx >= 0)
    mode_eq = "(= " + mode_var(a.step) + " " + std::to_string(a.state_idx) + ")";
  if (!a.guard) return mode_eq;
  std::string g = to_prefix(a.guard);
  if (mode_eq.empty()) return g;
  return "(and " + mode_eq + " " + g + ")";
}

inline std::string render_consequence(const Assertion& a, const ConstraintSystem& cs) {
  if (a.cls == AssertClass::ContinuousUpdate) {
    const FlowSystem& fs = cs.flows.at(cs.states[a.state_idx]);
    std::string ends, begins;
    for (const auto& sv : fs.state_vars) {
      if (!ends.empty()) {
        ends += " ";
        begins += " ";
      }
      ends += step_end_var(sv, a.step);
      begins += step_begin_var(sv, a.step);
    }
    return "(= [" + ends + "] (integral 0. " + dwell_var(a.step) + " [" + begins + "] " +
           flow_name(cs.states[a.state_idx]) + "))";
  }
  std::string body = a.body ? to_prefix(a.body) : "";
  if (a.succ_state_idx >= 0) {
    std::string mode_eq =
        "(= " + mode_var(a.step + 1) + " " + std::to_string(a.succ_state_idx) + ")";
    if (body.empty()) return mode_eq;
    // splice the successor-mode equality into the body conjunction
    if (a.body->kind == ExprKind::Logic && a.body->lop == LogicOp::And) {
      std::string parts = mode_eq;
      for (const auto& child : a.body->args) parts += " " + to_prefix(child);
      return "(and " + parts + ")";
    }
    return "(and " + mode_eq + " " + body + ")";
  }
  return body;
}

}  // namespace detail

// Serializes a constraint system plus an optional property expression into
// the ODE-extended SMT-LIB2 dialect. Output is byte-stable: states sorted by
// name, variables lexicographic, steps ascending, reals printed with up to
// 17 significant digits and an explicit decimal point.
inline std::string emit_smt(const ConstraintSystem& cs, const ExprPtr& property, double delta) {
  if (!(delta > 0)) throw emit_error("precision must be positive");
  std::ostringstream os;
  const int k = cs.k;

  os << "(set-logic QF_NRA_ODE)\n";
  os << "(set-option :precision " << format_real_smt(delta) << ")\n";

  if (!cs.params.empty()) {
    os << "; parameters\n";
    for (const auto& p : cs.params) {
      os << "(declare-fun " << p.name << " () Real)\n";
      if (p.value) {
        os << "(assert (= " << p.name << " " << format_real_smt(*p.value) << "))\n";
      } else if (p.range) {
        os << "(assert (<= " << format_real_smt(p.range->first) << " " << p.name << "))\n";
        os << "(assert (<= " << p.name << " " << format_real_smt(p.range->second) << "))\n";
      }
    }
  }

  bool any_flow = false;
  for (const auto& sn : cs.states)
    if (!cs.flows.at(sn).state_vars.empty()) any_flow = true;
  if (any_flow) {
    os << "; flows\n";
    for (const auto& sn : cs.states) {
      const FlowSystem& fs = cs.flows.at(sn);
      if (fs.state_vars.empty()) continue;
      os << "(define-ode " << detail::flow_name(sn) << " (";
      bool first = true;
      for (const auto& sv : fs.state_vars) {
        if (!first) os << " ";
        first = false;
        os << "(= d/dt[" << sv << "] " << to_prefix(fs.derivs.at(sv)) << ")";
      }
      os << "))\n";
    }
  }

  const double tau_max = k * cs.dwell_max;
  for (int i = 0; i <= k; ++i) {
    os << "; step " << i << " variables\n";
    os << "(declare-fun " << mode_var(i) << " () Int)\n";
    os << "(assert (<= 0 " << mode_var(i) << "))\n";
    os << "(assert (<= " << mode_var(i) << " " << cs.states.size() - 1 << "))\n";
    if (i < k) {
      os << "(declare-fun " << dwell_var(i) << " () Real)\n";
      os << "(assert (<= 0. " << dwell_var(i) << "))\n";
      os << "(assert (<= " << dwell_var(i) << " " << format_real_smt(cs.dwell_max) << "))\n";
    }
    os << "(declare-fun " << tau_var(i) << " () Real)\n";
    os << "(assert (<= 0. " << tau_var(i) << "))\n";
    os << "(assert (<= " << tau_var(i) << " " << format_real_smt(tau_max) << "))\n";
    for (const auto& v : cs.step_vars) {
      for (const std::string& inst : {step_begin_var(v, i), step_end_var(v, i)}) {
        os << "(declare-fun " << inst << " () Real)\n";
        auto rit = cs.input_ranges.find(v);
        if (rit != cs.input_ranges.end() && rit->second) {
          os << "(assert (<= " << format_real_smt(rit->second->first) << " " << inst << "))\n";
          os << "(assert (<= " << inst << " " << format_real_smt(rit->second->second)
             << "))\n";
        }
      }
    }
    for (const auto& c : cs.clocks)
      os << "(declare-fun " << clock_step_var(c.name, i) << " () Real)\n";
  }

  os << "; constraints\n";
  for (const auto& a : cs.assertions) {
    std::string hyp = detail::render_hyp(a, k);
    std::string con = detail::render_consequence(a, cs);
    if (con.empty()) throw emit_error("assertion with empty consequence");
    if (hyp.empty()) os << "(assert " << con << ")\n";
    else os << "(assert (=> " << hyp << " " << con << "))\n";
  }

  if (property) {
    os << "; property\n";
    os << "(assert " << to_prefix(property) << ")\n";
  }
  os << "(check-sat)\n";
  os << "(exit)\n";
  return os.str();
}

}  // namespace gha
