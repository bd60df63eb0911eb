#pragma once

#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gha/diagnostics.hpp"
#include "gha/emit.hpp"
#include "gha/flatten.hpp"
#include "gha/parse.hpp"
#include "gha/print.hpp"
#include "gha/props.hpp"
#include "gha/sim.hpp"
#include "gha/solver.hpp"
#include "gha/validate.hpp"
#include "gha/witness.hpp"

namespace gha {

// Pipeline failures carry the stage they came from so the CLI can print
// stage-tagged diagnostics.
class stage_error : public std::runtime_error {
 public:
  stage_error(std::string stage, const std::string& msg)
      : std::runtime_error(msg), stage(std::move(stage)) {}
  std::string stage;
};

struct RunConfig {
  std::string model_path;
  std::string property_path;
  int k = 20;
  double delta = 0.001;
  double dwell_max = 10.0;
  std::string solver_path;  // empty: emit-only + simulation falsification
  std::vector<std::string> solver_args = {"--model"};
  double solver_timeout = 300.0;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool choose_first = false;
  bool positive = false;  // assert the property instead of its negation
  double sim_dt = 1e-3;
  double falsify_horizon = 0;  // 0: derived from k * dwell_max, capped
  int falsify_trials = 32;
};

// exit-code contract
inline constexpr int kExitHolds = 0;
inline constexpr int kExitCounterexample = 1;
inline constexpr int kExitCandidate = 2;
inline constexpr int kExitInconclusive = 3;
inline constexpr int kExitUsage = 4;

inline std::string read_file(const std::string& path, const std::string& stage) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw stage_error(stage, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content,
                       const std::string& stage) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw stage_error(stage, "cannot write " + path);
  out << content;
}

struct PreparedModel {
  Gha model;       // as parsed
  Gha flat;        // flattened
  std::map<std::string, FlowSystem> frs;
  std::vector<Diagnostic> diagnostics;
};

inline PreparedModel prepare_model(const std::string& text) {
  PreparedModel pm;
  try {
    pm.model = parse_model(text);
  } catch (const parse_error& e) {
    throw stage_error("parse", e.what());
  }
  pm.diagnostics = validate_model(pm.model);
  if (has_errors(pm.diagnostics)) {
    std::string msg = "model is not well-formed";
    for (const auto& d : pm.diagnostics)
      if (d.severity == Severity::Error) {
        msg += "\n  " + render(d);
      }
    throw stage_error("validate", msg);
  }
  try {
    pm.flat = flatten_gha(pm.model);
  } catch (const flatten_error& e) {
    throw stage_error("flatten", e.what());
  }
  try {
    pm.frs = derive_all_frs(pm.flat);
  } catch (const fr_error& e) {
    throw stage_error("fr", e.what());
  }
  return pm;
}

struct PropertyRun {
  std::string name;
  int exit_code = kExitInconclusive;
  std::string verdict;  // holds-up-to-k | counterexample | candidate | inconclusive
  std::string detail;
  std::string smt_path;
  std::string trace_path;
  double wall_ms = 0;
};

namespace detail {

// Randomized falsification when no solver is configured: corner cases of
// every declared range first, then seeded uniform draws.
struct FalsifySearch {
  const Gha& model;
  const ConstraintSystem& cs;
  const TimingConstraint& tc;
  const PropertyFile& pf;
  const RunConfig& cfg;

  struct Hit {
    bool found = false;
    Trace trace;
    StepAssignment assignment;
  };

  Hit run() {
    Hit hit;
    std::vector<std::pair<std::string, std::pair<double, double>>> dims;
    for (const auto& i : model.inputs)
      if (i.range) dims.push_back({i.name, *i.range});
    for (const auto& p : model.params)
      if (p.range) dims.push_back({p.name, *p.range});

    std::mt19937_64 rng(cfg.seed);
    double horizon = cfg.falsify_horizon > 0
                         ? cfg.falsify_horizon
                         : std::min(cs.k * cs.dwell_max, 60.0);

    int trials = std::max(cfg.falsify_trials, 1);
    size_t corners = dims.empty() ? 1 : (size_t{1} << std::min(dims.size(), size_t{5}));
    for (int trial = 0; trial < trials; ++trial) {
      InputMap inputs;
      std::map<std::string, double> params;
      if (static_cast<size_t>(trial) < corners) {
        for (size_t d = 0; d < dims.size(); ++d) {
          bool hi = (static_cast<size_t>(trial) >> std::min(d, size_t{63})) & 1u;
          double v = hi ? dims[d].second.second : dims[d].second.first;
          assign(dims[d].first, v, inputs, params);
        }
      } else {
        for (const auto& [name, range] : dims)
          assign(name, gha::detail::uniform_draw(rng, range.first, range.second), inputs,
                 params);
      }
      SimOptions so;
      so.horizon = horizon;
      so.dt = cfg.sim_dt;
      so.seed = cfg.seed + static_cast<std::uint64_t>(trial);
      so.max_transitions = 10 * std::max(cs.k, 1);
      so.choose_first = cfg.choose_first;
      so.param_overrides = params;
      Trace tr;
      try {
        tr = simulate(model, inputs, so);
      } catch (const sim_error&) {
        continue;  // numerically degenerate draw
      }
      StepAssignment a;
      try {
        a = map_trace_to_steps(tr, cs, model);
      } catch (const check_error&) {
        continue;
      }
      MonitorResult mon = monitor_constraint(tc, pf, a, cs);
      bool target = cfg.positive ? mon.holds : !mon.holds;
      if (target) {
        hit.found = true;
        hit.trace = std::move(tr);
        hit.assignment = std::move(a);
        return hit;
      }
    }
    return hit;
  }

  void assign(const std::string& name, double v, InputMap& inputs,
              std::map<std::string, double>& params) {
    if (model.is_input(name)) inputs[name] = InputSignal::constant(v);
    else params[name] = v;
  }
};

inline std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += (isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
  return out;
}

}  // namespace detail

// Full pipeline for one property file: validate, flatten, derive, unroll,
// compile, emit, then solve or search. Returns one entry per constraint in
// the file; the process exit code is the worst one.
inline std::vector<PropertyRun> cmd_check(const RunConfig& cfg, std::ostream& report) {
  namespace fs = std::filesystem;
  auto t_start = std::chrono::steady_clock::now();

  std::string model_text = read_file(cfg.model_path, "parse");
  PreparedModel pm = prepare_model(model_text);

  PropertyFile pf;
  try {
    pf = parse_properties(read_file(cfg.property_path, "props"));
  } catch (const parse_error& e) {
    throw stage_error("props", e.what());
  }
  if (pf.constraints.empty()) throw stage_error("props", "property file declares no constraint");
  for (const auto& c : pf.clocks) {
    auto vars = pm.flat.all_vars();
    if (vars.count(c.name))
      throw stage_error("props", "clock " + c.name + " collides with a model variable");
  }

  ConstraintSystem base;
  try {
    base = unroll(pm.flat, pm.frs, cfg.k, UnrollConfig{cfg.dwell_max});
  } catch (const unroll_error& e) {
    throw stage_error("unroll", e.what());
  }

  fs::create_directories(cfg.out_dir);
  std::string model_stem = fs::path(cfg.model_path).stem().string();

  std::vector<PropertyRun> runs;
  for (const auto& tc : pf.constraints) {
    PropertyRun run;
    run.name = tc.name;
    auto t_prop = std::chrono::steady_clock::now();

    ConstraintSystem cs = base;
    CompiledProperty cp;
    try {
      cp = compile_property(tc, pf, cs);
      for (const auto& c : cp.clocks) inject_clock(cs, c);
    } catch (const props_error& e) {
      throw stage_error("props", e.what());
    }
    for (const auto& w : cp.warnings) report << "# warning: " << w << "\n";

    ExprPtr goal = cfg.positive ? cp.expr : negate_for_bmc(cp.expr);
    std::string smt;
    try {
      smt = emit_smt(cs, goal, cfg.delta);
    } catch (const emit_error& e) {
      throw stage_error("emit", e.what());
    }
    run.smt_path = (fs::path(cfg.out_dir) /
                    (model_stem + "_" + detail::sanitize(tc.name) + ".smt2"))
                       .string();
    write_file(run.smt_path, smt, "emit");

    if (!cfg.solver_path.empty()) {
      SolverVerdict v;
      try {
        v = run_solver(run.smt_path, cfg.solver_path, cfg.solver_args, cfg.solver_timeout);
      } catch (const process_error& e) {
        throw stage_error("solve", e.what());
      }
      switch (interpret(v)) {
        case BmcAnswer::HoldsUpTo:
          if (cfg.positive) {
            run.exit_code = kExitInconclusive;
            run.verdict = "unreachable";
            run.detail = "positive query unsat: no run satisfies the property within bound";
          } else {
            run.exit_code = kExitHolds;
            run.verdict = "holds-up-to-" + std::to_string(cfg.k);
          }
          break;
        case BmcAnswer::CandidateCounterexample: {
          WitnessCheck wc = validate_witness(v.witness, pm.flat, cs, tc, pf, cfg.positive,
                                             cfg.sim_dt);
          if (wc.status == WitnessCheck::Status::Confirmed) {
            run.exit_code = cfg.positive ? kExitHolds : kExitCounterexample;
            run.verdict = cfg.positive ? "reach-confirmed" : "counterexample";
            run.trace_path = (fs::path(cfg.out_dir) /
                              (model_stem + "_" + detail::sanitize(tc.name) + "_trace.csv"))
                                 .string();
            write_file(run.trace_path, trace_to_csv(wc.trace), "witness");
          } else {
            run.exit_code = kExitCandidate;
            run.verdict = "candidate";
            std::ostringstream os;
            os << "delta-sat witness ";
            if (wc.status == WitnessCheck::Status::Incomplete)
              os << "missing variable " << wc.missing;
            else
              os << "spurious, max residual " << wc.max_residual;
            run.detail = os.str();
          }
          break;
        }
        case BmcAnswer::Inconclusive:
          run.exit_code = kExitInconclusive;
          run.verdict = "inconclusive";
          run.detail = v.raw.empty() ? "solver gave no verdict" : v.raw;
          break;
      }
    } else {
      // no solver: emit-only plus simulation-based search
      detail::FalsifySearch search{pm.flat, cs, tc, pf, cfg};
      auto hit = search.run();
      if (hit.found) {
        run.exit_code = kExitCandidate;
        run.verdict = "candidate";
        run.detail = cfg.positive ? "simulation reaches the target"
                                  : "simulation violates the property";
        run.trace_path = (fs::path(cfg.out_dir) /
                          (model_stem + "_" + detail::sanitize(tc.name) + "_trace.csv"))
                             .string();
        write_file(run.trace_path, trace_to_csv(hit.trace), "witness");
      } else {
        run.exit_code = kExitInconclusive;
        run.verdict = "inconclusive";
        run.detail = "no solver configured; search budget exhausted";
      }
    }

    run.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            t_prop)
                      .count();
    runs.push_back(run);
  }

  double total_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
          .count();

  report << "model=" << cfg.model_path << "\n";
  report << "properties=" << cfg.property_path << "\n";
  report << "k=" << cfg.k << "\n";
  report << "delta=" << format_real_short(cfg.delta) << "\n";
  report << "dwell_max=" << format_real_short(cfg.dwell_max) << "\n";
  report << "solver=" << (cfg.solver_path.empty() ? "absent" : cfg.solver_path) << "\n";
  report << "seed=" << cfg.seed << "\n";
  for (const auto& r : runs) {
    report << "property=" << r.name << " verdict=" << r.verdict << " exit=" << r.exit_code
           << " smt2=" << r.smt_path;
    if (!r.trace_path.empty()) report << " trace=" << r.trace_path;
    report << " wall_ms=" << static_cast<long>(r.wall_ms) << "\n";
  }
  report << "total_wall_ms=" << static_cast<long>(total_ms) << "\n";
  report << "---\n";
  for (const auto& r : runs) {
    report << "property '" << r.name << "': " << r.verdict;
    if (!r.detail.empty()) report << " (" << r.detail << ")";
    report << "\n";
  }
  return runs;
}

inline int worst_exit_code(const std::vector<PropertyRun>& runs) {
  int worst = kExitHolds;
  for (const auto& r : runs) worst = std::max(worst, r.exit_code);
  return worst;
}

}  // namespace gha
