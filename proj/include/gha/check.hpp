#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gha/sim.hpp"
#include "gha/unroll.hpp"

namespace gha {

class check_error : public std::runtime_error {
 public:
  explicit check_error(const std::string& what) : std::runtime_error(what) {}
};

// A concrete valuation of the whole step-variable space, produced either
// from a simulated trace or from a solver witness.
struct StepAssignment {
  int k = 0;
  VarMap env;                       // step-instanced variables + parameters
  std::vector<int> modes;           // per step 0..k
  std::vector<double> dwells;       // d_0..d_{k-1}
  std::vector<double> taus;         // tau_0..tau_k
  std::vector<VarMap> begin_vals;   // model-named values at step begins
  std::vector<VarMap> end_vals;     // model-named values at step ends
};

namespace detail {

struct Chunk {
  std::string state;
  double dur = 0;
  VarMap begin;
  VarMap end;
};

// Slices trace segments into dwell-sized chunks on the sample grid.
inline std::vector<Chunk> chunk_trace(const Trace& tr, double dwell_max) {
  std::vector<Chunk> out;
  for (size_t si = 0; si < tr.segments.size(); ++si) {
    const TraceSegment& seg = tr.segments[si];
    if (seg.samples.empty()) continue;
    VarMap begin = si == 0 ? tr.initial_values : tr.events[si - 1].post_action_vals;
    size_t start = 0;
    for (size_t j = 1; j < seg.samples.size(); ++j) {
      bool last = j + 1 == seg.samples.size();
      bool over = seg.samples[j].t - seg.samples[start].t > dwell_max + 1e-12;
      if (over) {
        // close at the previous sample
        size_t prev = j - 1;
        out.push_back({seg.state, seg.samples[prev].t - seg.samples[start].t, begin,
                       seg.samples[prev].vals});
        begin = seg.samples[prev].vals;
        start = prev;
      }
      if (last)
        out.push_back(
            {seg.state, seg.samples[j].t - seg.samples[start].t, begin, seg.samples[j].vals});
    }
    if (seg.samples.size() == 1) out.push_back({seg.state, 0.0, begin, seg.samples[0].vals});
  }
  return out;
}

inline VarMap merge_params(const VarMap& vals, const VarMap& params) {
  VarMap out = vals;
  for (const auto& [k, v] : params) out.emplace(k, v);
  return out;
}

}  // namespace detail

// Chains the clock, flattens per-step maps into instanced variable names and
// computes monitor-clock sequences. Fields modes/dwells/begin/end must be
// filled; parameter values must already sit in env.
inline void finalize_step_env(StepAssignment& a, const ConstraintSystem& cs) {
  const int k = a.k;
  a.taus.assign(k + 1, 0.0);
  for (int i = 0; i < k; ++i) a.taus[i + 1] = a.taus[i] + a.dwells[i];

  for (int i = 0; i <= k; ++i) {
    a.env[mode_var(i)] = a.modes[i];
    a.env[tau_var(i)] = a.taus[i];
    if (i < k) a.env[dwell_var(i)] = a.dwells[i];
    for (const auto& v : cs.step_vars) {
      auto bit = a.begin_vals[i].find(v);
      auto eit = a.end_vals[i].find(v);
      a.env[step_begin_var(v, i)] = bit == a.begin_vals[i].end() ? 0.0 : bit->second;
      a.env[step_end_var(v, i)] = eit == a.end_vals[i].end() ? 0.0 : eit->second;
    }
  }

  for (const auto& c : cs.clocks) {
    a.env[clock_step_var(c.name, 0)] = 0.0;
    double val = 0.0;
    for (int i = 0; i < k; ++i) {
      VarMap env = detail::merge_params(a.end_vals[i], a.env);
      bool cond = c.expr && eval_bool(c.expr, env);
      if (c.kind == ClockKind::Since) val = cond ? val + a.dwells[i] : 0.0;
      else if (c.kind == ClockKind::At) val = cond ? a.taus[i + 1] : val;
      a.env[clock_step_var(c.name, i + 1)] = val;
    }
  }
}

// Maps a simulated trace onto the step space of a constraint system: one
// step per dwell chunk, the remaining steps padded by zero-length stutters
// (or zero-length fires when a guard holds at the frozen point), plus the
// terminal snapshot at step k.
inline StepAssignment map_trace_to_steps(const Trace& tr, const ConstraintSystem& cs,
                                         const Gha& flat_model) {
  std::vector<detail::Chunk> chunks = detail::chunk_trace(tr, cs.dwell_max);
  const int k = cs.k;
  if (static_cast<int>(chunks.size()) > k)
    throw check_error("trace needs " + std::to_string(chunks.size()) +
                      " steps, exceeding bound " + std::to_string(k));

  StepAssignment a;
  a.k = k;
  a.modes.resize(k + 1);
  a.dwells.assign(std::max(k, 0), 0.0);
  a.taus.assign(k + 1, 0.0);
  a.begin_vals.resize(k + 1);
  a.end_vals.resize(k + 1);
  for (const auto& [p, v] : tr.param_values) a.env[p] = v;

  auto state_idx = [&](const std::string& n) {
    int idx = cs.state_index(n);
    if (idx < 0) throw check_error("trace state " + n + " not in constraint system");
    return idx;
  };

  VarMap cur;
  int cur_mode = 0;
  if (!chunks.empty()) {
    cur = chunks.back().end;
    cur_mode = state_idx(chunks.back().state);
  } else {
    cur = tr.initial_values;
    cur_mode = state_idx(flat_model.initial);
  }

  for (int i = 0; i < k; ++i) {
    if (i < static_cast<int>(chunks.size())) {
      const detail::Chunk& c = chunks[i];
      a.modes[i] = state_idx(c.state);
      a.dwells[i] = c.dur;
      a.begin_vals[i] = c.begin;
      a.end_vals[i] = c.end;
      continue;
    }
    // pad: values frozen; fire eagerly if some guard holds, else stutter
    a.modes[i] = cur_mode;
    a.dwells[i] = 0.0;
    a.begin_vals[i] = cur;
    a.end_vals[i] = cur;
    VarMap env = detail::merge_params(cur, a.env);
    int fired = -1;
    for (size_t ti = 0; ti < flat_model.transitions.size(); ++ti) {
      const Transition& t = flat_model.transitions[ti];
      if (cs.state_index(t.src) != cur_mode) continue;
      if (eval_bool(t.cond, env)) {
        fired = static_cast<int>(ti);
        break;
      }
    }
    if (fired >= 0) {
      const Transition& t = flat_model.transitions[fired];
      VarMap post = env;
      for (const auto& [v, e] : t.actions) post[v] = eval(e, post);
      for (const auto& [p, _] : tr.param_values) post.erase(p);
      cur = post;
      cur_mode = state_idx(t.dst);
    }
  }
  a.modes[k] = cur_mode;
  a.begin_vals[k] = cur;
  a.end_vals[k] = cur;

  finalize_step_env(a, cs);
  return a;
}

struct Violation {
  size_t assertion_idx = 0;
  int step = 0;
  double residual = 0;
  std::string what;
};

struct CheckReport {
  bool satisfied = true;
  double max_residual = 0;
  std::vector<Violation> violations;
};

namespace detail {

// residual of a body expression: equalities contribute |lhs-rhs|, other
// boolean forms contribute 0/1
inline double body_residual(const ExprPtr& e, const VarMap& env) {
  if (e->kind == ExprKind::Logic && e->lop == LogicOp::And) {
    double r = 0;
    for (const auto& a : e->args) r = std::max(r, body_residual(a, env));
    return r;
  }
  if (e->kind == ExprKind::Cmp && e->cop == CmpOp::Eq)
    return std::fabs(eval(e->args[0], env) - eval(e->args[1], env));
  return eval_bool(e, env) ? 0.0 : 1.0;
}

// replays one dwell of a flow with the same integrator and grid the
// simulator uses
inline void reintegrate(const FlowSystem& fs, VarMap& env, double dur, double dt) {
  const auto& svs = fs.state_vars;
  size_t n = svs.size();
  std::vector<double> y(n), k1(n), k2(n), k3(n), k4(n), yt(n);
  for (size_t i = 0; i < n; ++i) y[i] = env.at(svs[i]);
  auto f = [&](const std::vector<double>& yy, std::vector<double>& out) {
    for (size_t i = 0; i < n; ++i) env[svs[i]] = yy[i];
    for (size_t i = 0; i < n; ++i) out[i] = eval(fs.derivs.at(svs[i]), env);
  };
  double left = dur;
  while (left > 1e-12) {
    double h = std::min(dt, left);
    f(y, k1);
    for (size_t i = 0; i < n; ++i) yt[i] = y[i] + 0.5 * h * k1[i];
    f(yt, k2);
    for (size_t i = 0; i < n; ++i) yt[i] = y[i] + 0.5 * h * k2[i];
    f(yt, k3);
    for (size_t i = 0; i < n; ++i) yt[i] = y[i] + h * k3[i];
    f(yt, k4);
    for (size_t i = 0; i < n; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    left -= h;
  }
  for (size_t i = 0; i < n; ++i) env[svs[i]] = y[i];
}

}  // namespace detail

// Evaluates every assertion of the constraint system against a step
// assignment. Continuous updates are checked by replaying the flow over the
// dwell; everything else evaluates numerically. Satisfied iff every residual
// stays within eps.
inline CheckReport check_assignment(const StepAssignment& a, const ConstraintSystem& cs,
                                    double eps, double dt) {
  CheckReport rep;
  for (size_t idx = 0; idx < cs.assertions.size(); ++idx) {
    const Assertion& as = cs.assertions[idx];
    if (as.step > a.k) continue;
    bool hyp = true;
    if (as.state_idx >= 0) hyp = a.modes[as.step] == as.state_idx;
    if (hyp && as.guard) hyp = eval_bool(as.guard, a.env);
    if (!hyp) continue;

    double residual = 0;
    std::string what;
    if (as.cls == AssertClass::ContinuousUpdate) {
      const FlowSystem& fs = cs.flows.at(cs.states[as.state_idx]);
      VarMap env = detail::merge_params(a.begin_vals[as.step], a.env);
      detail::reintegrate(fs, env, as.step < a.k ? a.dwells[as.step] : 0.0, dt);
      for (const auto& sv : fs.state_vars) {
        double got = a.env.at(step_end_var(sv, as.step));
        residual = std::max(residual, std::fabs(env.at(sv) - got));
      }
      what = "flow " + cs.states[as.state_idx];
    } else {
      if (as.succ_state_idx >= 0 && as.step + 1 <= a.k &&
          a.modes[as.step + 1] != as.succ_state_idx)
        residual = 1.0;
      if (as.body) residual = std::max(residual, detail::body_residual(as.body, a.env));
      what = assert_class_name(as.cls);
      if (!as.var.empty()) what += " " + as.var;
    }
    rep.max_residual = std::max(rep.max_residual, residual);
    if (residual > eps) {
      rep.satisfied = false;
      rep.violations.push_back({idx, as.step, residual, what});
    }
  }
  return rep;
}

inline CheckReport check_trace(const Trace& tr, const ConstraintSystem& cs,
                               const Gha& flat_model, double eps, double dt = 1e-3) {
  return check_assignment(map_trace_to_steps(tr, cs, flat_model), cs, eps, dt);
}

}  // namespace gha
