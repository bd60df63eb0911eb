#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace gha {

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  int line = 0;  // 0 = whole-model scope
  int col = 0;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

inline void sort_diagnostics(std::vector<Diagnostic>& ds) {
  std::stable_sort(ds.begin(), ds.end(), [](const Diagnostic& a, const Diagnostic& b) {
    if (a.line != b.line) return a.line < b.line;
    if (a.col != b.col) return a.col < b.col;
    if (a.severity != b.severity) return a.severity < b.severity;
    return a.message < b.message;
  });
}

inline bool has_errors(const std::vector<Diagnostic>& ds) {
  for (const auto& d : ds)
    if (d.severity == Severity::Error) return true;
  return false;
}

inline std::string render(const Diagnostic& d) {
  std::string s = d.severity == Severity::Error ? "error" : "warning";
  if (d.line > 0) s += " (line " + std::to_string(d.line) + ")";
  s += ": " + d.message;
  return s;
}

}  // namespace gha
