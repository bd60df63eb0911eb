#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "gha/exprio.hpp"
#include "gha/model.hpp"

namespace gha {

namespace detail {

inline std::string param_to_string(const ParamValue& v) {
  if (const double* d = std::get_if<double>(&v)) return format_real_short(*d);
  return std::get<std::string>(v);
}

inline void print_block(std::ostringstream& os, const Block& b, int indent);

inline void print_lines(std::ostringstream& os, std::vector<Line> lines, int indent) {
  for (auto& l : lines) std::sort(l.dsts.begin(), l.dsts.end());
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    return std::tie(a.src, a.dsts) < std::tie(b.src, b.dsts);
  });
  std::string pad(indent, ' ');
  for (const auto& l : lines) {
    os << pad << "line " << l.src.block << "." << l.src.port << " -> ";
    for (size_t i = 0; i < l.dsts.size(); ++i) {
      if (i) os << ", ";
      os << l.dsts[i].block << "." << l.dsts[i].port;
    }
    os << "\n";
  }
}

inline void print_blocks(std::ostringstream& os, const std::vector<Block>& blocks, int indent) {
  std::vector<const Block*> sorted;
  for (const auto& b : blocks) sorted.push_back(&b);
  std::sort(sorted.begin(), sorted.end(),
            [](const Block* a, const Block* b) { return a->id < b->id; });
  for (const Block* b : sorted) print_block(os, *b, indent);
}

inline void print_block(std::ostringstream& os, const Block& b, int indent) {
  std::string pad(indent, ' ');
  os << pad << "block " << b.id << " kind=" << block_kind_name(b.kind);
  for (const auto& [k, v] : b.params) os << " " << k << "=" << param_to_string(v);
  if (b.kind == BlockKind::Subsystem) {
    os << " {\n";
    print_blocks(os, b.blocks, indent + 2);
    print_lines(os, b.lines, indent + 2);
    os << pad << "}\n";
  } else {
    os << "\n";
  }
}

}  // namespace detail

// Canonical document form: sections in fixed order, sets sorted, transitions
// in declaration order. parse_model(print_model(m)) is structurally equal to
// m for every valid m.
inline std::string print_model(const Gha& m) {
  std::ostringstream os;

  std::vector<InputDecl> inputs = m.inputs;
  std::sort(inputs.begin(), inputs.end(),
            [](const InputDecl& a, const InputDecl& b) { return a.name < b.name; });
  os << "inputs {\n";
  for (const auto& i : inputs) {
    os << "  " << i.name;
    if (i.range)
      os << " in [" << format_real_short(i.range->first) << ", "
         << format_real_short(i.range->second) << "]";
    os << "\n";
  }
  os << "}\n";

  std::vector<std::string> outputs = m.outputs;
  std::sort(outputs.begin(), outputs.end());
  os << "outputs {\n";
  for (const auto& o : outputs) os << "  " << o << "\n";
  os << "}\n";

  std::vector<ParamDecl> params = m.params;
  std::sort(params.begin(), params.end(),
            [](const ParamDecl& a, const ParamDecl& b) { return a.name < b.name; });
  os << "params {\n";
  for (const auto& p : params) {
    os << "  " << p.name;
    if (p.value) os << " = " << format_real_short(*p.value);
    else if (p.range)
      os << " in [" << format_real_short(p.range->first) << ", "
         << format_real_short(p.range->second) << "]";
    os << "\n";
  }
  os << "}\n";

  for (const auto& [v, c] : m.init_values)
    os << "init " << v << " = " << format_real_short(c) << "\n";
  if (!m.initial.empty()) os << "initial " << m.initial << "\n";

  std::vector<const SlState*> states;
  for (const auto& s : m.states) states.push_back(&s);
  std::sort(states.begin(), states.end(),
            [](const SlState* a, const SlState* b) { return a->name < b->name; });
  for (const SlState* s : states) {
    os << "state " << s->name << " {\n";
    if (!s->vars.empty()) {
      os << "  vars {";
      for (const auto& v : s->vars) os << " " << v;
      os << " }\n";
    }
    detail::print_blocks(os, s->blocks, 2);
    detail::print_lines(os, s->lines, 2);
    os << "}\n";
  }

  for (const auto& t : m.transitions) {
    os << "transition " << t.src << " -> " << t.dst << " when " << to_infix(t.cond);
    if (!t.actions.empty()) {
      os << " do ";
      for (size_t i = 0; i < t.actions.size(); ++i) {
        if (i) os << "; ";
        os << t.actions[i].first << " := " << to_infix(t.actions[i].second);
      }
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace gha
