#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gha/pipeline.hpp"

namespace {

int fail(const std::string& stage, const std::string& msg) {
  std::cerr << "[" << stage << "] " << msg << "\n";
  return gha::kExitUsage;
}

gha::PreparedModel load_model(const std::string& path) {
  return gha::prepare_model(gha::read_file(path, "parse"));
}

void write_or_print(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  gha::write_file(out_path, content, "emit");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid-automata timing analysis: translate block-diagram state machines "
               "to ODE-extended SMT-LIB2 and check timing constraints"};
  app.require_subcommand(1);

  std::string model_path, property_path, out_path, inputs_path, solver_path, choose;
  std::string out_dir = "out";
  int bound = 20;
  double delta = 0.001, dwell_max = 10.0, horizon = 10.0, dt = 1e-3, timeout = 300.0;
  double falsify_horizon = 0;
  int trials = 32, max_transitions = -1;
  std::uint64_t seed = 0;
  bool positive = false;
  std::vector<std::string> solver_args;

  auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("model", model_path, "model document")->required();
  };

  CLI::App* validate = app.add_subcommand("validate", "check a model document");
  add_model(validate);

  CLI::App* flatten = app.add_subcommand("flatten", "remove subsystem hierarchy");
  add_model(flatten);
  flatten->add_option("-o,--out", out_path, "output file (default stdout)");

  CLI::App* frs = app.add_subcommand("frs", "print per-state flow systems");
  add_model(frs);

  CLI::App* translate = app.add_subcommand("translate", "emit the k-step SMT document");
  add_model(translate);
  translate->add_option("-k,--bound", bound, "unrolling bound")->check(CLI::NonNegativeNumber);
  translate->add_option("--dwell-max", dwell_max, "max dwell per step (s)");
  translate->add_option("--precision", delta, "solver precision (delta)");
  translate->add_option("-p,--property", property_path, "property file (negated and asserted)");
  translate->add_flag("--positive", positive, "assert the property instead of its negation");
  translate->add_option("-o,--out", out_path, "output file (default stdout)");

  CLI::App* simulate = app.add_subcommand("simulate", "run the numeric oracle");
  add_model(simulate);
  simulate->add_option("--horizon", horizon, "simulation horizon (s)");
  simulate->add_option("--dt", dt, "integration step (s)");
  simulate->add_option("--inputs", inputs_path, "input assignment file");
  simulate->add_option("--seed", seed, "seed for ranged parameters");
  simulate->add_option("--max-transitions", max_transitions, "transition cap");
  simulate->add_option("--choose", choose, "tie-break rule for simultaneous guards (first)");
  simulate->add_option("-o,--out", out_path, "trace CSV output (default stdout)");

  CLI::App* check = app.add_subcommand("check", "bounded model checking of a property file");
  add_model(check);
  check->add_option("property", property_path, "property file")->required();
  check->add_option("-k,--bound", bound, "unrolling bound")->check(CLI::NonNegativeNumber);
  check->add_option("--precision", delta, "solver precision (delta)");
  check->add_option("--dwell-max", dwell_max, "max dwell per step (s)");
  check->add_option("--solver-path", solver_path,
                    "delta-complete solver executable (env GHA2SMT_SOLVER)");
  check->add_option("--solver-arg", solver_args, "extra solver argument (repeatable)");
  check->add_option("--timeout", timeout, "solver timeout (s)");
  check->add_option("--out", out_dir, "artifact directory");
  check->add_option("--seed", seed, "seed for the falsification search");
  check->add_option("--choose", choose, "tie-break rule for simultaneous guards (first)");
  check->add_flag("--positive", positive, "assert the property instead of its negation");
  check->add_option("--dt", dt, "oracle integration step (s)");
  check->add_option("--trials", trials, "falsification search budget");
  check->add_option("--horizon", falsify_horizon, "falsification sim horizon (s)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(validate)) {
      gha::Gha m;
      try {
        m = gha::parse_model(gha::read_file(model_path, "parse"));
      } catch (const gha::parse_error& e) {
        return fail("parse", e.what());
      }
      auto diags = gha::validate_model(m);
      for (const auto& d : diags) std::cout << gha::render(d) << "\n";
      return gha::has_errors(diags) ? gha::kExitUsage : 0;
    }

    if (app.got_subcommand(flatten)) {
      auto pm = load_model(model_path);
      write_or_print(out_path, gha::print_model(pm.flat));
      return 0;
    }

    if (app.got_subcommand(frs)) {
      auto pm = load_model(model_path);
      for (const auto& name : [&] {
             std::vector<std::string> names;
             for (const auto& s : pm.flat.states) names.push_back(s.name);
             std::sort(names.begin(), names.end());
             return names;
           }())
        std::cout << gha::render_flow_system(pm.frs.at(name));
      return 0;
    }

    if (app.got_subcommand(translate)) {
      auto pm = load_model(model_path);
      gha::ConstraintSystem cs;
      try {
        cs = gha::unroll(pm.flat, pm.frs, bound, gha::UnrollConfig{dwell_max});
      } catch (const gha::unroll_error& e) {
        return fail("unroll", e.what());
      }
      gha::ExprPtr goal;
      if (!property_path.empty()) {
        try {
          auto pf = gha::parse_properties(gha::read_file(property_path, "props"));
          if (pf.constraints.empty()) return fail("props", "property file declares no constraint");
          auto cp = gha::compile_property(pf.constraints.front(), pf, cs);
          for (const auto& c : cp.clocks) gha::inject_clock(cs, c);
          goal = positive ? cp.expr : gha::negate_for_bmc(cp.expr);
        } catch (const gha::parse_error& e) {
          return fail("props", e.what());
        } catch (const gha::props_error& e) {
          return fail("props", e.what());
        }
      }
      try {
        write_or_print(out_path, gha::emit_smt(cs, goal, delta));
      } catch (const gha::emit_error& e) {
        return fail("emit", e.what());
      }
      return 0;
    }

    if (app.got_subcommand(simulate)) {
      auto pm = load_model(model_path);
      gha::InputMap inputs;
      if (!inputs_path.empty()) {
        std::string text = gha::read_file(inputs_path, "parse");
        std::istringstream is(text);
        std::string line;
        int ln = 0;
        while (std::getline(is, line)) {
          ++ln;
          size_t hash = line.find('#');
          if (hash != std::string::npos) line.erase(hash);
          std::istringstream ls(line);
          std::string name;
          if (!(ls >> name)) continue;
          gha::InputSignal sig;
          std::string tok;
          while (ls >> tok) {
            size_t colon = tok.find(':');
            double from = 0, val = 0;
            if (colon == std::string::npos) {
              if (!gha::detail::parse_number(tok, val))
                return fail("parse", "inputs line " + std::to_string(ln) + ": bad value");
            } else {
              if (!gha::detail::parse_number(tok.substr(0, colon), from) ||
                  !gha::detail::parse_number(tok.substr(colon + 1), val))
                return fail("parse", "inputs line " + std::to_string(ln) + ": bad t:value");
            }
            sig.steps.emplace_back(from, val);
          }
          if (sig.steps.empty())
            return fail("parse", "inputs line " + std::to_string(ln) + ": no value");
          inputs[name] = sig;
        }
      }
      gha::SimOptions so;
      so.horizon = horizon;
      so.dt = dt;
      so.seed = seed;
      so.choose_first = choose == "first";
      if (max_transitions > 0) so.max_transitions = max_transitions;
      try {
        gha::Trace tr = gha::simulate(pm.model, inputs, so);
        write_or_print(out_path, gha::trace_to_csv(tr));
      } catch (const gha::sim_error& e) {
        return fail("sim", e.what());
      }
      return 0;
    }

    if (app.got_subcommand(check)) {
      gha::RunConfig cfg;
      cfg.model_path = model_path;
      cfg.property_path = property_path;
      cfg.k = bound;
      cfg.delta = delta;
      cfg.dwell_max = dwell_max;
      cfg.solver_path = solver_path;
      if (cfg.solver_path.empty())
        if (const char* env = std::getenv("GHA2SMT_SOLVER")) cfg.solver_path = env;
      if (!solver_args.empty()) cfg.solver_args = solver_args;
      cfg.solver_timeout = timeout;
      cfg.out_dir = out_dir;
      cfg.seed = seed;
      cfg.choose_first = choose == "first";
      cfg.positive = positive;
      cfg.sim_dt = dt;
      cfg.falsify_trials = trials;
      cfg.falsify_horizon = falsify_horizon;
      auto runs = gha::cmd_check(cfg, std::cout);
      return gha::worst_exit_code(runs);
    }
  } catch (const gha::stage_error& e) {
    return fail(e.stage, e.what());
  } catch (const std::exception& e) {
    return fail("parse", e.what());
  }
  return gha::kExitUsage;
}
