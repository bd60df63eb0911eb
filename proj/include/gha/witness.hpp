#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "gha/check.hpp"
#include "gha/props.hpp"
#include "gha/sim.hpp"

namespace gha {

struct WitnessCheck {
  enum class Status { Confirmed, Spurious, Incomplete };
  Status status = Status::Incomplete;
  double max_residual = 0;   // schedule mismatch or property margin
  std::string missing;       // Incomplete: the absent variable
  std::string note;
  StepAssignment assignment;
  Trace trace;               // replayed run, for CSV output
};

// Replays a solver witness with the numeric oracle: parameters, inputs,
// dwell durations and the mode schedule are fixed from interval midpoints,
// modes are not chosen by guards. Confirmed iff the replay gives the verdict
// the witness claims (violation for a negated property, satisfaction for a
// positive query).
inline WitnessCheck validate_witness(
    const std::map<std::string, std::pair<double, double>>& witness, const Gha& flat_model,
    const ConstraintSystem& cs, const TimingConstraint& tc, const PropertyFile& pf,
    bool property_expected_true, double dt = 1e-3) {
  WitnessCheck wc;
  const int k = cs.k;

  auto mid = [&](const std::string& name) -> std::optional<double> {
    auto it = witness.find(name);
    if (it == witness.end()) return std::nullopt;
    return 0.5 * (it->second.first + it->second.second);
  };
  auto require = [&](const std::string& name, double& out) {
    auto v = mid(name);
    if (!v) {
      wc.missing = name;
      return false;
    }
    out = *v;
    return true;
  };

  VarMap params;
  for (const auto& p : cs.params) {
    if (p.value) {
      params[p.name] = *p.value;
    } else {
      double v;
      if (auto w = mid(p.name)) v = *w;
      else if (!require(p.name, v)) return wc;
      params[p.name] = v;
    }
  }

  VarMap inputs;
  for (const auto& [name, range] : cs.input_ranges) {
    auto v = mid(step_begin_var(name, 0));
    if (!v && range) {
      wc.missing = step_begin_var(name, 0);
      return wc;
    }
    inputs[name] = v ? *v : 0.0;
  }

  std::vector<int> modes(k + 1);
  std::vector<double> dwells(std::max(k, 0));
  for (int i = 0; i <= k; ++i) {
    double v;
    if (!require(mode_var(i), v)) return wc;
    modes[i] = static_cast<int>(std::lround(v));
    if (modes[i] < 0 || modes[i] >= static_cast<int>(cs.states.size())) {
      wc.missing = mode_var(i);
      wc.note = "mode index out of range";
      return wc;
    }
  }
  for (int i = 0; i < k; ++i)
    if (!require(dwell_var(i), dwells[i])) return wc;

  std::map<std::string, FlowSystem> frs;
  for (const auto& [n, f] : cs.flows) frs[n] = f;

  // forced replay
  StepAssignment a;
  a.k = k;
  a.modes = modes;
  a.dwells = dwells;
  a.begin_vals.resize(k + 1);
  a.end_vals.resize(k + 1);
  for (const auto& [p, v] : params) a.env[p] = v;

  VarMap cur;
  for (const auto& [v, val] : resolve_initial_values(flat_model, frs)) cur[v] = val;
  for (const auto& [v, val] : inputs) cur[v] = val;
  wc.trace.initial_values = cur;
  wc.trace.param_values = params;

  double residual = 0;
  if (modes[0] != cs.state_index(flat_model.initial)) residual = std::max(residual, 1.0);

  double t = 0;
  for (int i = 0; i <= k; ++i) {
    const std::string& state = cs.states[modes[i]];
    const FlowSystem& fs = cs.flows.at(state);
    a.begin_vals[i] = cur;

    TraceSegment seg;
    seg.state = state;
    seg.t_start = t;
    double dur = i < k ? dwells[i] : 0.0;

    VarMap env = detail::merge_params(cur, a.env);
    double left = dur;
    auto sample = [&](double tt) {
      VarMap vals = env;
      for (const auto& [p, _] : params) vals.erase(p);
      for (const auto& [v, e] : fs.algebraic) vals[v] = eval(e, env);
      seg.samples.push_back({tt, vals});
    };
    sample(t);
    while (left > 1e-12) {
      double h = std::min(dt, left);
      detail::reintegrate(fs, env, h, h);
      left -= h;
      t += h;
      sample(t);
    }
    for (const auto& [v, e] : fs.algebraic) env[v] = eval(e, env);
    cur = env;
    for (const auto& [p, _] : params) cur.erase(p);
    a.end_vals[i] = cur;
    seg.t_end = t;
    wc.trace.segments.push_back(std::move(seg));

    if (i == k) break;
    if (modes[i + 1] != modes[i]) {
      int fired = -1;
      double best = std::numeric_limits<double>::infinity();
      for (size_t ti = 0; ti < flat_model.transitions.size(); ++ti) {
        const Transition& tr = flat_model.transitions[ti];
        if (cs.state_index(tr.src) != modes[i] || cs.state_index(tr.dst) != modes[i + 1])
          continue;
        double m = detail::bool_margin(tr.cond, env);
        if (m < best) {
          best = m;
          fired = static_cast<int>(ti);
        }
        if (m == 0.0) break;
      }
      if (fired < 0) {
        residual = std::max(residual, 1.0);
        wc.note = "mode change without matching transition at step " + std::to_string(i);
      } else {
        residual = std::max(residual, best);
        const Transition& tr = flat_model.transitions[fired];
        VarMap post = detail::merge_params(cur, a.env);
        for (const auto& [v, e] : tr.actions) post[v] = eval(e, post);
        for (const auto& [p, _] : params) post.erase(p);
        wc.trace.events.push_back({t, fired, tr.src, tr.dst, post});
        cur = post;
      }
    } else {
      // stutter step: consistent only while no outgoing guard fires
      for (const auto& tr : flat_model.transitions) {
        if (cs.state_index(tr.src) != modes[i]) continue;
        if (eval_bool(tr.cond, detail::merge_params(cur, a.env))) {
          residual = std::max(residual, 1.0);
          if (wc.note.empty())
            wc.note = "stutter at step " + std::to_string(i) + " with an enabled guard";
        }
      }
    }
  }

  finalize_step_env(a, cs);
  wc.assignment = a;

  MonitorResult mon = monitor_constraint(tc, pf, a, cs);
  bool as_claimed = property_expected_true ? mon.holds : !mon.holds;
  if (as_claimed && residual == 0.0) {
    wc.status = WitnessCheck::Status::Confirmed;
    wc.max_residual = 0;
  } else {
    wc.status = WitnessCheck::Status::Spurious;
    double prop_gap = mon.margin;
    if (!property_expected_true && mon.holds) {
      // distance from producing the claimed violation
      ExprPtr neg = negate_for_bmc(compile_property(tc, pf, cs).expr);
      prop_gap = detail::bool_margin(neg, a.env);
    }
    wc.max_residual = std::max(residual, prop_gap);
    if (wc.note.empty()) wc.note = mon.detail;
  }
  return wc;
}

}  // namespace gha
