#pragma once

#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gha/check.hpp"
#include "gha/exprio.hpp"
#include "gha/unroll.hpp"

namespace gha {

class props_error : public std::runtime_error {
 public:
  explicit props_error(const std::string& what) : std::runtime_error(what) {}
};

// The three timing-constraint shapes: bounded reachability of a target
// configuration, bounded response to a trigger, and bounded inter-event
// gaps of a timestamp clock.
struct ReachShape {
  std::optional<std::string> mode;
  ExprPtr predicate;
  std::optional<double> deadline;
};

struct RespondShape {
  ExprPtr trigger;
  ExprPtr response;
  double deadline = 0;
  std::string clock_name = "reactT";
};

struct PeriodicShape {
  std::string event_clock;
  double min_gap = 0;
  double max_gap = 0;
};

struct TimingConstraint {
  std::string name;
  std::variant<ReachShape, RespondShape, PeriodicShape> shape;
  int line_no = 0;
};

struct PropertyFile {
  std::vector<ClockDef> clocks;
  std::vector<TimingConstraint> constraints;
};

namespace detail {

inline std::string trim_copy(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline bool take_kv(std::string& rest, const std::string& key, std::string& out) {
  std::string probe = key + "=";
  if (rest.rfind(probe, 0) != 0) return false;
  size_t sp = rest.find(' ');
  out = sp == std::string::npos ? rest.substr(probe.size())
                                : rest.substr(probe.size(), sp - probe.size());
  rest = sp == std::string::npos ? "" : trim_copy(rest.substr(sp));
  return true;
}

}  // namespace detail

// One constraint or clock declaration per line:
//   clock NAME elapsed | clock NAME since EXPR | clock NAME at EXPR
//   reach [name=N] [mode=STATE] EXPR [within SEC]
//   respond [name=N] (EXPR) -> (EXPR) within SEC
//   periodic [name=N] CLOCK in [MIN,MAX]
inline PropertyFile parse_properties(std::string_view text) {
  PropertyFile out;
  int auto_idx = 0;
  int line_no = 0;
  std::string cur;
  std::istringstream is{std::string(text)};
  while (std::getline(is, cur)) {
    ++line_no;
    size_t hash = cur.find('#');
    if (hash != std::string::npos) cur.erase(hash);
    std::string line = detail::trim_copy(cur);
    if (line.empty()) continue;

    size_t sp = line.find(' ');
    std::string head = line.substr(0, sp);
    std::string rest = sp == std::string::npos ? "" : detail::trim_copy(line.substr(sp));

    if (head == "clock") {
      size_t sp2 = rest.find(' ');
      if (sp2 == std::string::npos) throw parse_error(line_no, 1, "expected 'clock NAME kind'");
      ClockDef c;
      c.name = rest.substr(0, sp2);
      std::string kind_rest = detail::trim_copy(rest.substr(sp2));
      size_t sp3 = kind_rest.find(' ');
      std::string kind = sp3 == std::string::npos ? kind_rest : kind_rest.substr(0, sp3);
      std::string expr_text =
          sp3 == std::string::npos ? "" : detail::trim_copy(kind_rest.substr(sp3));
      if (kind == "elapsed") {
        c.kind = ClockKind::Elapsed;
      } else if (kind == "since" || kind == "at") {
        c.kind = kind == "since" ? ClockKind::Since : ClockKind::At;
        if (expr_text.empty())
          throw parse_error(line_no, 1, "clock '" + c.name + "' needs an expression");
        c.expr = parse_expr(expr_text, line_no);
      } else {
        throw parse_error(line_no, 1, "unknown clock kind '" + kind + "'");
      }
      out.clocks.push_back(std::move(c));
      continue;
    }

    TimingConstraint tc;
    tc.line_no = line_no;
    std::string nm;
    if (detail::take_kv(rest, "name", nm)) tc.name = nm;
    else tc.name = "p" + std::to_string(auto_idx);
    ++auto_idx;

    if (head == "reach") {
      ReachShape sh;
      std::string mode;
      if (detail::take_kv(rest, "mode", mode)) sh.mode = mode;
      size_t w = rest.rfind(" within ");
      std::string pred_text = rest;
      if (w != std::string::npos) {
        pred_text = detail::trim_copy(rest.substr(0, w));
        double dl;
        if (!detail::trim_copy(rest.substr(w + 8)).empty() &&
            detail::parse_number(detail::trim_copy(rest.substr(w + 8)), dl))
          sh.deadline = dl;
        else
          throw parse_error(line_no, 1, "malformed deadline");
      }
      if (pred_text.empty()) throw parse_error(line_no, 1, "reach needs a predicate");
      sh.predicate = parse_expr(pred_text, line_no);
      tc.shape = std::move(sh);
    } else if (head == "respond") {
      RespondShape sh;
      size_t arrow = rest.find(" -> ");
      if (arrow == std::string::npos)
        throw parse_error(line_no, 1, "expected 'respond (EXPR) -> (EXPR) within SEC'");
      sh.trigger = parse_expr(detail::trim_copy(rest.substr(0, arrow)), line_no);
      std::string rhs = detail::trim_copy(rest.substr(arrow + 4));
      size_t w = rhs.rfind(" within ");
      if (w == std::string::npos) throw parse_error(line_no, 1, "respond needs 'within SEC'");
      sh.response = parse_expr(detail::trim_copy(rhs.substr(0, w)), line_no);
      double dl;
      if (!detail::parse_number(detail::trim_copy(rhs.substr(w + 8)), dl))
        throw parse_error(line_no, 1, "malformed deadline");
      sh.deadline = dl;
      tc.shape = std::move(sh);
    } else if (head == "periodic") {
      PeriodicShape sh;
      size_t sp2 = rest.find(' ');
      if (sp2 == std::string::npos)
        throw parse_error(line_no, 1, "expected 'periodic CLOCK in [MIN,MAX]'");
      sh.event_clock = rest.substr(0, sp2);
      std::string tail = detail::trim_copy(rest.substr(sp2));
      if (tail.rfind("in ", 0) != 0 && tail.rfind("in[", 0) != 0)
        throw parse_error(line_no, 1, "expected 'in [MIN,MAX]'");
      std::pair<double, double> r;
      if (!detail::parse_range(detail::trim_copy(tail.substr(2)), r))
        throw parse_error(line_no, 1, "malformed interval");
      sh.min_gap = r.first;
      sh.max_gap = r.second;
      tc.shape = std::move(sh);
    } else {
      throw parse_error(line_no, 1, "unknown constraint shape '" + head + "'");
    }
    out.constraints.push_back(std::move(tc));
  }
  return out;
}

struct CompiledProperty {
  std::string name;
  ExprPtr expr;                  // over the step-variable space
  std::vector<ClockDef> clocks;  // monitor clocks the property relies on
  std::vector<std::string> warnings;
};

namespace detail {

struct PropContext {
  const ConstraintSystem* cs;
  std::vector<ClockDef> clocks;  // declared + auto-injected
  std::vector<ClockDef> used;

  const ClockDef* clock(const std::string& n) const {
    for (const auto& c : clocks)
      if (c.name == n) return &c;
    return nullptr;
  }

  void mark_used(const ClockDef& c) {
    for (const auto& u : used)
      if (u.name == c.name) return;
    used.push_back(c);
  }

  bool is_step_var(const std::string& v) const {
    return std::find(cs->step_vars.begin(), cs->step_vars.end(), v) != cs->step_vars.end();
  }
  bool is_param(const std::string& v) const {
    for (const auto& p : cs->params)
      if (p.name == v) return true;
    return false;
  }

  // Instance a model-level expression: model variables read step `var_step`
  // (its end when at_end), clocks read instance `clock_idx`.
  ExprPtr instance(const ExprPtr& e, int var_step, bool at_end, int clock_idx) {
    return rename_vars(e, [&](const std::string& v) -> std::string {
      if (is_step_var(v))
        return at_end ? step_end_var(v, var_step) : step_begin_var(v, var_step);
      if (is_param(v)) return v;
      if (const ClockDef* c = clock(v)) {
        if (c->kind == ClockKind::Elapsed) return tau_var(clock_idx);
        mark_used(*c);
        return clock_step_var(v, clock_idx);
      }
      throw props_error("unknown variable " + v);
    });
  }
};

}  // namespace detail

// Compiles a timing constraint into a single expression over the step space,
// recording the monitor clocks whose update assertions must be injected.
inline CompiledProperty compile_property(const TimingConstraint& tc, const PropertyFile& pf,
                                         const ConstraintSystem& cs) {
  using namespace ex;
  detail::PropContext ctx{&cs, pf.clocks, {}};
  CompiledProperty out;
  out.name = tc.name;
  const int k = cs.k;

  if (const ReachShape* sh = std::get_if<ReachShape>(&tc.shape)) {
    std::vector<ExprPtr> parts;
    if (sh->mode) {
      int idx = cs.state_index(*sh->mode);
      if (idx < 0) throw props_error("unknown state " + *sh->mode);
      parts.push_back(eq(var(mode_var(k)), intc(idx)));
    }
    if (infer_type(sh->predicate) != ExprType::Boolean)
      throw props_error("reach predicate must be boolean-typed");
    // the terminal step's end equals its beginning, so end-of-run values and
    // the final clock value line up
    parts.push_back(ctx.instance(sh->predicate, k, /*at_end=*/k >= 1, k));
    if (sh->deadline) {
      if (*sh->deadline <= 0) throw props_error("deadline must be positive");
      if (*sh->deadline > k * cs.dwell_max)
        out.warnings.push_back("bound cannot witness the deadline: " +
                               format_real_short(*sh->deadline) + " exceeds k*dwell_max");
      parts.push_back(le(var(tau_var(k)), num(*sh->deadline)));
    }
    out.expr = conj(std::move(parts));
  } else if (const RespondShape* sh = std::get_if<RespondShape>(&tc.shape)) {
    if (k < 1) throw props_error("respond needs bound k >= 1");
    if (sh->deadline <= 0) throw props_error("deadline must be positive");
    if (infer_type(sh->trigger) != ExprType::Boolean ||
        infer_type(sh->response) != ExprType::Boolean)
      throw props_error("respond trigger and response must be boolean-typed");
    ClockDef rc;
    if (const ClockDef* c = ctx.clock(sh->clock_name)) {
      if (c->kind != ClockKind::Since)
        throw props_error("clock " + sh->clock_name + " is not a reaction clock");
      rc = *c;
    } else {
      rc = ClockDef{sh->clock_name, ClockKind::Since, sh->trigger};
      ctx.clocks.push_back(rc);
    }
    ctx.mark_used(rc);
    std::vector<ExprPtr> parts;
    for (int i = 0; i < k; ++i) {
      ExprPtr lhs = ctx.instance(sh->trigger, i, /*at_end=*/true, i + 1);
      ExprPtr rhs = land(ctx.instance(sh->response, i + 1, /*at_end=*/false, i + 1),
                         le(var(clock_step_var(rc.name, i + 1)), num(sh->deadline)));
      parts.push_back(imp(std::move(lhs), std::move(rhs)));
    }
    out.expr = conj(std::move(parts));
  } else {
    const PeriodicShape& psh = std::get<PeriodicShape>(tc.shape);
    if (k < 1) throw props_error("periodic needs bound k >= 1");
    if (!(0 <= psh.min_gap && psh.min_gap <= psh.max_gap))
      throw props_error("periodic interval must satisfy 0 <= min <= max");
    const ClockDef* c = ctx.clock(psh.event_clock);
    if (!c) throw props_error("unknown clock " + psh.event_clock);
    if (c->kind != ClockKind::At)
      throw props_error("periodic needs an event-timestamp clock, got " + psh.event_clock);
    ctx.mark_used(*c);
    std::vector<ExprPtr> parts;
    for (int i = 0; i < k; ++i) {
      ExprPtr gap = sub(var(clock_step_var(psh.event_clock, i + 1)),
                        var(clock_step_var(psh.event_clock, i)));
      parts.push_back(land(ge(gap, num(psh.min_gap)), le(gap, num(psh.max_gap))));
    }
    out.expr = conj(std::move(parts));
  }

  // validate clock event expressions against the model too
  for (const auto& c : ctx.used) {
    if (!c.expr) continue;
    for (const auto& v : free_vars(c.expr))
      if (!ctx.is_step_var(v) && !ctx.is_param(v))
        throw props_error("unknown variable " + v + " in clock " + c.name);
  }
  out.clocks = ctx.used;
  return out;
}

// Negation pushed to negation normal form: connectives dualized, comparisons
// flipped, equalities split; no negation survives above atom level.
inline ExprPtr nnf(const ExprPtr& e, bool positive) {
  using namespace ex;
  switch (e->kind) {
    case ExprKind::BoolConst:
      return positive ? e : boolc(!e->bvalue);
    case ExprKind::Cmp: {
      if (positive) return e;
      switch (e->cop) {
        case CmpOp::Lt: return cmp(CmpOp::Ge, e->args[0], e->args[1]);
        case CmpOp::Le: return cmp(CmpOp::Gt, e->args[0], e->args[1]);
        case CmpOp::Ge: return cmp(CmpOp::Lt, e->args[0], e->args[1]);
        case CmpOp::Gt: return cmp(CmpOp::Le, e->args[0], e->args[1]);
        case CmpOp::Eq:
          return lor(cmp(CmpOp::Lt, e->args[0], e->args[1]),
                     cmp(CmpOp::Gt, e->args[0], e->args[1]));
      }
      return e;
    }
    case ExprKind::Logic: {
      switch (e->lop) {
        case LogicOp::Not:
          return nnf(e->args[0], !positive);
        case LogicOp::And:
        case LogicOp::Or: {
          bool is_and = e->lop == LogicOp::And;
          std::vector<ExprPtr> args;
          for (const auto& a : e->args) args.push_back(nnf(a, positive));
          bool out_and = positive ? is_and : !is_and;
          return logic(out_and ? LogicOp::And : LogicOp::Or, std::move(args));
        }
        case LogicOp::Imp: {
          if (positive) return lor(nnf(e->args[0], false), nnf(e->args[1], true));
          return land(nnf(e->args[0], true), nnf(e->args[1], false));
        }
      }
      return e;
    }
    case ExprKind::Ite:
      return ite(nnf(e->args[0], true), nnf(e->args[1], positive), nnf(e->args[2], positive));
    default:
      throw props_error("cannot negate a non-boolean expression");
  }
}

inline ExprPtr negate_for_bmc(const ExprPtr& p) { return nnf(p, false); }

// ---- trace-level property monitor ----

struct MonitorResult {
  bool holds = true;
  double margin = 0;  // how far the verdict is from flipping (crude)
  std::string detail;
};

namespace detail {

// distance-to-truth of a boolean expression; 0 iff it holds
inline double bool_margin(const ExprPtr& e, const VarMap& env) {
  switch (e->kind) {
    case ExprKind::BoolConst:
      return e->bvalue ? 0.0 : 1.0;
    case ExprKind::Cmp: {
      double l = eval(e->args[0], env), r = eval(e->args[1], env);
      switch (e->cop) {
        case CmpOp::Lt: return l < r ? 0.0 : l - r + 1e-300;
        case CmpOp::Le: return l <= r ? 0.0 : l - r;
        case CmpOp::Ge: return l >= r ? 0.0 : r - l;
        case CmpOp::Gt: return l > r ? 0.0 : r - l + 1e-300;
        case CmpOp::Eq: return std::fabs(l - r);
      }
      return 0;
    }
    case ExprKind::Logic: {
      switch (e->lop) {
        case LogicOp::And: {
          double m = 0;
          for (const auto& a : e->args) m = std::max(m, bool_margin(a, env));
          return m;
        }
        case LogicOp::Or: {
          double m = std::numeric_limits<double>::infinity();
          for (const auto& a : e->args) m = std::min(m, bool_margin(a, env));
          return m;
        }
        case LogicOp::Not:
          return bool_margin(e->args[0], env) > 0 ? 0.0 : 1.0;
        case LogicOp::Imp:
          return bool_margin(e->args[0], env) > 0 ? 0.0 : bool_margin(e->args[1], env);
      }
      return 0;
    }
    case ExprKind::Ite:
      return bool_margin(e->args[0], env) == 0.0 ? bool_margin(e->args[1], env)
                                                 : bool_margin(e->args[2], env);
    default:
      return 0;
  }
}

}  // namespace detail

// Direct shape-level verdict on a mapped trace; the compiled expression must
// agree with this on every assignment.
inline MonitorResult monitor_constraint(const TimingConstraint& tc, const PropertyFile& pf,
                                        const StepAssignment& a, const ConstraintSystem& cs) {
  MonitorResult res;
  const int k = a.k;
  VarMap params;
  for (const auto& p : cs.params) {
    auto it = a.env.find(p.name);
    if (it != a.env.end()) params[p.name] = it->second;
  }
  auto env_at = [&](const VarMap& vals) { return detail::merge_params(vals, params); };

  auto clock_series = [&](const ClockDef& c) {
    std::vector<double> vals(k + 1, 0.0);
    for (int i = 0; i < k; ++i) {
      bool cond = c.expr && eval_bool(c.expr, env_at(a.end_vals[i]));
      if (c.kind == ClockKind::Since) vals[i + 1] = cond ? vals[i] + a.dwells[i] : 0.0;
      else if (c.kind == ClockKind::At) vals[i + 1] = cond ? a.taus[i + 1] : vals[i];
      else vals[i + 1] = a.taus[i + 1];
    }
    return vals;
  };
  auto find_clock = [&](const std::string& n) -> std::optional<ClockDef> {
    for (const auto& c : pf.clocks)
      if (c.name == n) return c;
    for (const auto& c : cs.clocks)
      if (c.name == n) return c;
    return std::nullopt;
  };

  if (const ReachShape* sh = std::get_if<ReachShape>(&tc.shape)) {
    double m = 0;
    if (sh->mode) {
      int idx = cs.state_index(*sh->mode);
      if (a.modes[k] != idx) m = std::max(m, 1.0);
    }
    m = std::max(m, detail::bool_margin(sh->predicate, env_at(a.end_vals[k])));
    if (sh->deadline && a.taus[k] > *sh->deadline) m = std::max(m, a.taus[k] - *sh->deadline);
    res.holds = m == 0.0;
    res.margin = m;
    if (!res.holds) res.detail = "reach target missed";
  } else if (const RespondShape* sh = std::get_if<RespondShape>(&tc.shape)) {
    ClockDef rc{sh->clock_name, ClockKind::Since, sh->trigger};
    if (auto c = find_clock(sh->clock_name)) rc = *c;
    std::vector<double> clock = clock_series(rc);
    double m = 0;
    for (int i = 0; i < k; ++i) {
      if (!eval_bool(sh->trigger, env_at(a.end_vals[i]))) continue;
      double mi = detail::bool_margin(sh->response, env_at(a.begin_vals[i + 1]));
      if (clock[i + 1] > sh->deadline) mi = std::max(mi, clock[i + 1] - sh->deadline);
      if (mi > 0 && res.detail.empty()) res.detail = "response missed at step " + std::to_string(i);
      m = std::max(m, mi);
    }
    res.holds = m == 0.0;
    res.margin = m;
  } else {
    const PeriodicShape& psh = std::get<PeriodicShape>(tc.shape);
    auto c = find_clock(psh.event_clock);
    if (!c) throw props_error("unknown clock " + psh.event_clock);
    std::vector<double> clock = clock_series(*c);
    double m = 0;
    for (int i = 0; i < k; ++i) {
      double gap = clock[i + 1] - clock[i];
      if (gap < psh.min_gap) m = std::max(m, psh.min_gap - gap);
      if (gap > psh.max_gap) m = std::max(m, gap - psh.max_gap);
      if (m > 0 && res.detail.empty()) res.detail = "gap violated at step " + std::to_string(i);
    }
    res.holds = m == 0.0;
    res.margin = m;
  }
  return res;
}

}  // namespace gha
