#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gha/exprio.hpp"
#include "gha/flatten.hpp"
#include "gha/fr.hpp"
#include "gha/model.hpp"

namespace gha {

class sim_error : public std::runtime_error {
 public:
  explicit sim_error(const std::string& what) : std::runtime_error(what) {}
};

// Piecewise-constant input signal: value of the last breakpoint at or before t.
struct InputSignal {
  std::vector<std::pair<double, double>> steps;  // (from_time, value), times ascending

  static InputSignal constant(double v) { return InputSignal{{{0.0, v}}}; }

  double at(double t) const {
    double v = steps.empty() ? 0.0 : steps.front().second;
    for (const auto& [from, val] : steps) {
      if (from <= t) v = val;
      else break;
    }
    return v;
  }
};

using InputMap = std::map<std::string, InputSignal>;

struct SimOptions {
  double horizon = 10.0;
  double dt = 1e-3;
  int max_transitions = 200;
  std::uint64_t seed = 0;
  bool choose_first = false;
  std::map<std::string, double> param_overrides;
};

struct TraceSample {
  double t = 0;
  VarMap vals;
};

struct TraceSegment {
  std::string state;
  double t_start = 0;
  double t_end = 0;
  std::vector<TraceSample> samples;
};

struct TraceEvent {
  double t = 0;
  int transition_idx = -1;
  std::string src;
  std::string dst;
  VarMap post_action_vals;  // values carried into the next segment, before
                            // the destination's algebraic maps re-evaluate
};

struct Trace {
  VarMap initial_values;  // begin-of-run values before any algebraic update
  VarMap param_values;
  std::vector<TraceSegment> segments;
  std::vector<TraceEvent> events;

  double end_time() const { return segments.empty() ? 0.0 : segments.back().t_end; }
};

// Begin-of-run value per non-input variable: explicit init declaration wins,
// then an integrator's initial condition (states scanned in name order),
// then zero.
inline std::map<std::string, double> resolve_initial_values(
    const Gha& m, const std::map<std::string, FlowSystem>& frs) {
  std::map<std::string, double> out;
  static const VarMap kEmpty;
  for (const auto& v : m.all_vars()) {
    if (m.is_input(v) || m.is_param(v)) continue;
    auto it = m.init_values.find(v);
    if (it != m.init_values.end()) {
      out[v] = it->second;
      continue;
    }
    double val = 0.0;
    for (const auto& [sn, fs] : frs) {
      (void)sn;
      auto init_it = fs.init.find(v);
      if (init_it != fs.init.end()) {
        val = eval(init_it->second, kEmpty);
        break;
      }
    }
    out[v] = val;
  }
  return out;
}

namespace detail {

// deterministic uniform draw, independent of the standard library's
// distribution implementation
inline double uniform_draw(std::mt19937_64& rng, double lo, double hi) {
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

class Simulator {
 public:
  Simulator(const Gha& model, const InputMap& inputs, const SimOptions& opt)
      : model_(flatten_gha(model)), inputs_(inputs), opt_(opt) {
    frs_ = derive_all_frs(model_);
  }

  Trace run() {
    Trace tr;
    init_values(tr);
    std::string state = model_.initial;
    if (!model_.state(state)) throw sim_error("unresolved initial state " + state);
    double t = 0.0;
    int fired = 0;

    while (true) {
      const FlowSystem& fs = frs_.at(state);
      TraceSegment seg;
      seg.state = state;
      seg.t_start = t;
      set_inputs(t);
      apply_algebraic(fs, t);
      seg.samples.push_back({t, vals_});

      const bool may_fire = fired < opt_.max_transitions && t < opt_.horizon - 1e-15;
      int crossing = may_fire ? check_guards(state) : -1;

      if (crossing < 0) {
        while (t < opt_.horizon - 1e-15) {
          double h = std::min(opt_.dt, opt_.horizon - t);
          VarMap begin = vals_;
          double t0 = t;
          rk4_step(fs, t0, h);
          t = t0 + h;
          set_inputs(t);
          apply_algebraic(fs, t);
          if (may_fire && any_guard(state)) {
            t = bisect_crossing(fs, state, begin, t0, t);
            crossing = check_guards(state);
            seg.samples.push_back({t, vals_});
            break;
          }
          seg.samples.push_back({t, vals_});
        }
      }

      seg.t_end = t;
      tr.segments.push_back(std::move(seg));
      if (crossing < 0) return tr;

      const Transition& tt = model_.transitions[crossing];
      VarMap post = vals_;
      for (const auto& [v, e] : tt.actions) post[v] = eval_checked(e, post, t, v);
      tr.events.push_back({t, crossing, tt.src, tt.dst, post});
      vals_ = std::move(post);
      state = tt.dst;
      ++fired;
    }
  }

 private:
  Gha model_;
  InputMap inputs_;
  SimOptions opt_;
  std::map<std::string, FlowSystem> frs_;
  VarMap vals_;

  void init_values(Trace& tr) {
    std::mt19937_64 rng(opt_.seed);
    for (const auto& p : model_.params) {
      double v = 0.0;
      auto ov = opt_.param_overrides.find(p.name);
      if (ov != opt_.param_overrides.end()) v = ov->second;
      else if (p.value) v = *p.value;
      else if (p.range) v = uniform_draw(rng, p.range->first, p.range->second);
      vals_[p.name] = v;
      tr.param_values[p.name] = v;
    }
    for (const auto& [v, val] : resolve_initial_values(model_, frs_)) vals_[v] = val;
    set_inputs(0.0);
    tr.initial_values = vals_;
  }

  void set_inputs(double t) {
    for (const auto& i : model_.inputs) {
      auto it = inputs_.find(i.name);
      vals_[i.name] = it == inputs_.end() ? 0.0 : it->second.at(t);
    }
  }

  double eval_checked(const ExprPtr& e, const VarMap& env, double t, const std::string& who) {
    double v = eval(e, env);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite value of " << who << " = " << to_prefix(e) << " at t=" << t;
      throw sim_error(os.str());
    }
    return v;
  }

  void apply_algebraic(const FlowSystem& fs, double t) {
    for (const auto& [v, e] : fs.algebraic) vals_[v] = eval_checked(e, vals_, t, v);
  }

  void rk4_step(const FlowSystem& fs, double t0, double h) {
    const auto& svs = fs.state_vars;
    size_t n = svs.size();
    if (n == 0) return;
    std::vector<double> y0(n), k1(n), k2(n), k3(n), k4(n), yt(n);
    for (size_t i = 0; i < n; ++i) y0[i] = vals_.at(svs[i]);
    VarMap env = vals_;
    auto f = [&](double tt, const std::vector<double>& y, std::vector<double>& out) {
      for (const auto& in : model_.inputs) {
        auto it = inputs_.find(in.name);
        env[in.name] = it == inputs_.end() ? 0.0 : it->second.at(tt);
      }
      for (size_t i = 0; i < n; ++i) env[svs[i]] = y[i];
      for (size_t i = 0; i < n; ++i) out[i] = eval_checked(fs.derivs.at(svs[i]), env, tt, svs[i]);
    };
    f(t0, y0, k1);
    for (size_t i = 0; i < n; ++i) yt[i] = y0[i] + 0.5 * h * k1[i];
    f(t0 + 0.5 * h, yt, k2);
    for (size_t i = 0; i < n; ++i) yt[i] = y0[i] + 0.5 * h * k2[i];
    f(t0 + 0.5 * h, yt, k3);
    for (size_t i = 0; i < n; ++i) yt[i] = y0[i] + h * k3[i];
    f(t0 + h, yt, k4);
    for (size_t i = 0; i < n; ++i) {
      double v = y0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(v))
        throw sim_error("non-finite value of " + svs[i] + " = " +
                        to_prefix(fs.derivs.at(svs[i])) + " at t=" + std::to_string(t0 + h));
      vals_[svs[i]] = v;
    }
  }

  bool any_guard(const std::string& state) {
    for (const auto& t : model_.transitions)
      if (t.src == state && eval_bool(t.cond, vals_)) return true;
    return false;
  }

  // index of the first enabled outgoing transition, -1 when none; throws on
  // a tie unless configured to pick the first
  int check_guards(const std::string& state) {
    int found = -1;
    for (size_t i = 0; i < model_.transitions.size(); ++i) {
      const Transition& t = model_.transitions[i];
      if (t.src != state) continue;
      if (eval_bool(t.cond, vals_)) {
        if (found >= 0) {
          if (opt_.choose_first) continue;
          throw sim_error("nondeterministic choice: transitions " + std::to_string(found) +
                          " and " + std::to_string(i) + " both enabled");
        }
        found = static_cast<int>(i);
      }
    }
    return found;
  }

  // Localizes the first instant in (t0, t1] where some guard becomes true.
  // Probes integrate a single partial step from the stored begin state, so
  // the result lands exactly on the numeric trajectory. Leaves vals_ at the
  // crossing point.
  double bisect_crossing(const FlowSystem& fs, const std::string& state, const VarMap& begin,
                         double t0, double t1) {
    auto probe = [&](double tm) {
      vals_ = begin;
      if (tm > t0) rk4_step(fs, t0, tm - t0);
      set_inputs(tm);
      apply_algebraic(fs, tm);
      bool any = false;
      for (const auto& t : model_.transitions)
        if (t.src == state && eval_bool(t.cond, vals_)) any = true;
      return any;
    };
    double lo = t0, hi = t1;
    for (int iter = 0; iter < 80 && hi - lo > 1e-9; ++iter) {
      double mid = 0.5 * (lo + hi);
      if (probe(mid)) hi = mid;
      else lo = mid;
    }
    probe(hi);
    return hi;
  }
};

}  // namespace detail

// Reference semantics: RK4 on the active mode's flow, eager transitions with
// bisection-localized guard crossings, actions applied in order.
inline Trace simulate(const Gha& model, const InputMap& inputs, const SimOptions& opt) {
  return detail::Simulator(model, inputs, opt).run();
}

inline std::string trace_to_csv(const Trace& tr) {
  std::vector<std::string> cols;
  if (!tr.segments.empty() && !tr.segments.front().samples.empty())
    for (const auto& [k, v] : std::map<std::string, double>(
             tr.segments.front().samples.front().vals.begin(),
             tr.segments.front().samples.front().vals.end()))
      cols.push_back(k);
  std::string out = "t,state";
  for (const auto& c : cols) out += "," + c;
  out += "\n";
  for (const auto& seg : tr.segments) {
    for (const auto& s : seg.samples) {
      out += format_real_short(s.t);
      out += "," + seg.state;
      for (const auto& c : cols) {
        auto it = s.vals.find(c);
        out += ",";
        out += it == s.vals.end() ? "0" : format_real_short(it->second);
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace gha
