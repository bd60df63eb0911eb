#pragma once

#include <charconv>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gha/subprocess.hpp"

namespace gha {

// Classified answer from one external-solver run.
struct SolverVerdict {
  enum class Kind { Unsat, DeltaSat, Unknown, Failure };
  Kind kind = Kind::Unknown;
  std::optional<double> delta;  // from "delta-sat with delta = ..."
  std::map<std::string, std::pair<double, double>> witness;  // var -> [lo, hi]
  std::string raw;              // classified line or an output excerpt
  int exit_code = 0;
  std::string stderr_excerpt;
};

enum class BmcAnswer { HoldsUpTo, CandidateCounterexample, Inconclusive };

namespace detail {

inline std::string_view trim_view(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline bool parse_double_view(std::string_view s, double& out) {
  s = trim_view(s);
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

// `name : ... [lo, hi]` (or `[v]`); returns false on anything else
inline bool parse_witness_line(std::string_view line, std::string& name,
                               std::pair<double, double>& iv) {
  size_t colon = line.find(" : ");
  if (colon == std::string::npos) return false;
  std::string_view sym = trim_view(line.substr(0, colon));
  if (sym.empty() || sym.find(' ') != std::string_view::npos) return false;
  size_t close = line.rfind(']');
  if (close == std::string::npos || close < colon) return false;
  size_t open = line.rfind('[', close);
  if (open == std::string::npos || open < colon) return false;
  std::string_view body = line.substr(open + 1, close - open - 1);
  size_t comma = body.find(',');
  double lo, hi;
  if (comma == std::string_view::npos) {
    if (!parse_double_view(body, lo)) return false;
    hi = lo;
  } else {
    if (!parse_double_view(body.substr(0, comma), lo)) return false;
    if (!parse_double_view(body.substr(comma + 1), hi)) return false;
  }
  if (!(lo <= hi)) return false;
  name = std::string(sym);
  iv = {lo, hi};
  return true;
}

}  // namespace detail

// Total classification of solver output: every byte string maps to exactly
// one verdict. The first recognized verdict token wins; interval lines
// anywhere in the output populate the witness.
inline SolverVerdict classify_solver_output(std::string_view out, std::string_view err,
                                            int exit_code, bool timed_out) {
  SolverVerdict v;
  v.exit_code = exit_code;
  v.stderr_excerpt = std::string(err.substr(0, 400));
  if (timed_out) {
    v.kind = SolverVerdict::Kind::Unknown;
    v.raw = "timeout";
    return v;
  }

  bool classified = false;
  size_t pos = 0;
  while (pos <= out.size()) {
    size_t nl = out.find('\n', pos);
    std::string_view line =
        detail::trim_view(out.substr(pos, nl == std::string_view::npos ? out.size() - pos
                                                                       : nl - pos));
    pos = nl == std::string_view::npos ? out.size() + 1 : nl + 1;
    if (line.empty()) continue;

    if (!classified) {
      if (line == "unsat" || line.rfind("unsat", 0) == 0) {
        v.kind = SolverVerdict::Kind::Unsat;
        v.raw = std::string(line);
        classified = true;
        continue;
      }
      if (line.rfind("delta-sat", 0) == 0) {
        v.kind = SolverVerdict::Kind::DeltaSat;
        v.raw = std::string(line);
        size_t eq = line.rfind('=');
        double d;
        if (eq != std::string_view::npos && detail::parse_double_view(line.substr(eq + 1), d))
          v.delta = d;
        classified = true;
        continue;
      }
      if (line == "sat" || line.rfind("sat ", 0) == 0) {
        v.kind = SolverVerdict::Kind::DeltaSat;
        v.raw = std::string(line);
        classified = true;
        continue;
      }
      if (line == "unknown") {
        v.kind = SolverVerdict::Kind::Unknown;
        v.raw = std::string(line);
        classified = true;
        continue;
      }
    }
    std::string name;
    std::pair<double, double> iv;
    if (detail::parse_witness_line(line, name, iv)) v.witness[name] = iv;
  }

  if (!classified) {
    if (exit_code != 0) {
      v.kind = SolverVerdict::Kind::Failure;
      v.raw = std::string(detail::trim_view(out.substr(0, 200)));
    } else {
      v.kind = SolverVerdict::Kind::Unknown;
      v.raw = std::string(detail::trim_view(out.substr(0, 200)));
    }
  }
  return v;
}

// Drives the external delta-complete solver on a document and classifies the
// outcome. A timeout yields Unknown, a crash without verdict yields Failure.
inline SolverVerdict run_solver(const std::string& doc_path, const std::string& exe,
                                const std::vector<std::string>& extra_args,
                                double timeout_s) {
  std::vector<std::string> argv;
  argv.push_back(exe);
  for (const auto& a : extra_args) argv.push_back(a);
  argv.push_back(doc_path);
  ProcessResult pr = run_process(argv, timeout_s);
  return classify_solver_output(pr.out, pr.err, pr.exit_code, pr.timed_out);
}

// Unsat of (model AND NOT property) means the property holds up to the
// bound. delta-sat is only a candidate until a simulation confirms it.
inline BmcAnswer interpret(const SolverVerdict& v) {
  switch (v.kind) {
    case SolverVerdict::Kind::Unsat: return BmcAnswer::HoldsUpTo;
    case SolverVerdict::Kind::DeltaSat: return BmcAnswer::CandidateCounterexample;
    case SolverVerdict::Kind::Unknown:
    case SolverVerdict::Kind::Failure: return BmcAnswer::Inconclusive;
  }
  return BmcAnswer::Inconclusive;
}

}  // namespace gha
