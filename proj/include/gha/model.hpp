#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "gha/expr.hpp"

namespace gha {

// Block parameters hold either a numeric value or an opaque token (sign
// strings like "+-", trig function names).
using ParamValue = std::variant<double, std::string>;

enum class BlockKind {
  Constant,
  Gain,
  Sum,
  Product,
  Integrator,
  Trigonometry,
  Sqrt,
  Exp,
  Saturation,
  Switch,
  Relational,
  Logical,
  Inport,
  Outport,
  Subsystem,
};

inline const char* block_kind_name(BlockKind k) {
  switch (k) {
    case BlockKind::Constant: return "Constant";
    case BlockKind::Gain: return "Gain";
    case BlockKind::Sum: return "Sum";
    case BlockKind::Product: return "Product";
    case BlockKind::Integrator: return "Integrator";
    case BlockKind::Trigonometry: return "Trigonometry";
    case BlockKind::Sqrt: return "Sqrt";
    case BlockKind::Exp: return "Exp";
    case BlockKind::Saturation: return "Saturation";
    case BlockKind::Switch: return "Switch";
    case BlockKind::Relational: return "Relational";
    case BlockKind::Logical: return "Logical";
    case BlockKind::Inport: return "Inport";
    case BlockKind::Outport: return "Outport";
    case BlockKind::Subsystem: return "Subsystem";
  }
  return "?";
}

inline std::optional<BlockKind> block_kind_from_name(const std::string& s) {
  static const std::map<std::string, BlockKind> table = {
      {"Constant", BlockKind::Constant},       {"Gain", BlockKind::Gain},
      {"Sum", BlockKind::Sum},                 {"Product", BlockKind::Product},
      {"Integrator", BlockKind::Integrator},   {"Trigonometry", BlockKind::Trigonometry},
      {"Sqrt", BlockKind::Sqrt},               {"Exp", BlockKind::Exp},
      {"Saturation", BlockKind::Saturation},   {"Switch", BlockKind::Switch},
      {"Relational", BlockKind::Relational},   {"Logical", BlockKind::Logical},
      {"Inport", BlockKind::Inport},           {"Outport", BlockKind::Outport},
      {"Subsystem", BlockKind::Subsystem},
  };
  auto it = table.find(s);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

struct Line;

struct Block {
  std::string id;
  BlockKind kind = BlockKind::Constant;
  std::map<std::string, ParamValue> params;
  // Subsystem contents; empty for atomic blocks.
  std::vector<Block> blocks;
  std::vector<Line> lines;
  int line_no = 0;

  const ParamValue* param(const std::string& name) const {
    auto it = params.find(name);
    return it == params.end() ? nullptr : &it->second;
  }
  std::optional<double> param_real(const std::string& name) const {
    const ParamValue* p = param(name);
    if (!p) return std::nullopt;
    if (const double* d = std::get_if<double>(p)) return *d;
    return std::nullopt;
  }
  std::optional<std::string> param_str(const std::string& name) const {
    const ParamValue* p = param(name);
    if (!p) return std::nullopt;
    if (const std::string* s = std::get_if<std::string>(p)) return *s;
    if (const double* d = std::get_if<double>(p)) return std::to_string(*d);
    return std::nullopt;
  }
};

// One endpoint of a connection: a block port, 1-based.
struct PortRef {
  std::string block;
  int port = 1;
  bool operator==(const PortRef&) const = default;
  auto operator<=>(const PortRef&) const = default;
};

// A signal line from one source out-port to one or more in-ports.
struct Line {
  PortRef src;
  std::vector<PortRef> dsts;
  int line_no = 0;
};

struct SlState {
  std::string name;
  std::set<std::string> vars;  // declared + Inport/Outport/Integrator names
  std::vector<Block> blocks;
  std::vector<Line> lines;
  int line_no = 0;

  const Block* block(const std::string& id) const {
    for (const auto& b : blocks)
      if (b.id == id) return &b;
    return nullptr;
  }
};

struct Transition {
  std::string src;
  std::string dst;
  ExprPtr cond;
  std::vector<std::pair<std::string, ExprPtr>> actions;  // applied in order
  int line_no = 0;

  std::set<std::string> action_targets() const {
    std::set<std::string> out;
    for (const auto& [v, _] : actions) out.insert(v);
    return out;
  }
};

struct InputDecl {
  std::string name;
  std::optional<std::pair<double, double>> range;
  int line_no = 0;
};

struct ParamDecl {
  std::string name;
  // Either a fixed value or a closed range the environment may pick from.
  std::optional<double> value;
  std::optional<std::pair<double, double>> range;
  int line_no = 0;
};

struct Gha {
  std::vector<InputDecl> inputs;
  std::vector<std::string> outputs;
  std::vector<ParamDecl> params;
  std::vector<SlState> states;
  std::vector<Transition> transitions;  // declaration order is significant
  std::string initial;
  std::map<std::string, double> init_values;  // explicit `init v = c` lines
  int initial_line_no = 0;

  const SlState* state(const std::string& name) const {
    for (const auto& s : states)
      if (s.name == name) return &s;
    return nullptr;
  }
  const InputDecl* input(const std::string& name) const {
    for (const auto& i : inputs)
      if (i.name == name) return &i;
    return nullptr;
  }
  const ParamDecl* param(const std::string& name) const {
    for (const auto& p : params)
      if (p.name == name) return &p;
    return nullptr;
  }
  bool is_input(const std::string& n) const { return input(n) != nullptr; }
  bool is_param(const std::string& n) const { return param(n) != nullptr; }
  bool is_output(const std::string& n) const {
    for (const auto& o : outputs)
      if (o == n) return true;
    return false;
  }

  // All declared variable names: inputs, outputs and state-local vars.
  std::set<std::string> all_vars() const {
    std::set<std::string> out;
    for (const auto& i : inputs) out.insert(i.name);
    for (const auto& o : outputs) out.insert(o);
    for (const auto& s : states) out.insert(s.vars.begin(), s.vars.end());
    return out;
  }
};

// ---- structural equality (order-insensitive where the model is a set) ----

inline bool equal_param(const ParamValue& a, const ParamValue& b) {
  if (a.index() != b.index()) return false;
  if (const double* d = std::get_if<double>(&a)) return *d == std::get<double>(b);
  return std::get<std::string>(a) == std::get<std::string>(b);
}

inline bool struct_equal(const Block& a, const Block& b);

inline bool struct_equal_blocks(const std::vector<Block>& a, const std::vector<Block>& b) {
  if (a.size() != b.size()) return false;
  auto by_id = [](const Block* x, const Block* y) { return x->id < y->id; };
  std::vector<const Block*> as, bs;
  for (const auto& x : a) as.push_back(&x);
  for (const auto& x : b) bs.push_back(&x);
  std::sort(as.begin(), as.end(), by_id);
  std::sort(bs.begin(), bs.end(), by_id);
  for (size_t i = 0; i < as.size(); ++i)
    if (!struct_equal(*as[i], *bs[i])) return false;
  return true;
}

inline bool struct_equal_lines(std::vector<Line> a, std::vector<Line> b) {
  if (a.size() != b.size()) return false;
  auto norm = [](std::vector<Line>& ls) {
    for (auto& l : ls) std::sort(l.dsts.begin(), l.dsts.end());
    std::sort(ls.begin(), ls.end(),
              [](const Line& x, const Line& y) { return x.src < y.src; });
  };
  norm(a);
  norm(b);
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].src != b[i].src || a[i].dsts != b[i].dsts) return false;
  return true;
}

inline bool struct_equal(const Block& a, const Block& b) {
  if (a.id != b.id || a.kind != b.kind) return false;
  if (a.params.size() != b.params.size()) return false;
  for (const auto& [k, v] : a.params) {
    auto it = b.params.find(k);
    if (it == b.params.end() || !equal_param(v, it->second)) return false;
  }
  return struct_equal_blocks(a.blocks, b.blocks) && struct_equal_lines(a.lines, b.lines);
}

inline bool struct_equal(const SlState& a, const SlState& b) {
  return a.name == b.name && a.vars == b.vars && struct_equal_blocks(a.blocks, b.blocks) &&
         struct_equal_lines(a.lines, b.lines);
}

inline bool struct_equal(const Gha& a, const Gha& b) {
  auto input_key = [](const InputDecl& i) { return std::tuple(i.name, i.range); };
  auto param_key = [](const ParamDecl& p) { return std::tuple(p.name, p.value, p.range); };
  std::vector<std::tuple<std::string, std::optional<std::pair<double, double>>>> ia, ib;
  for (const auto& i : a.inputs) ia.push_back(input_key(i));
  for (const auto& i : b.inputs) ib.push_back(input_key(i));
  std::sort(ia.begin(), ia.end());
  std::sort(ib.begin(), ib.end());
  if (ia != ib) return false;

  std::set<std::string> oa(a.outputs.begin(), a.outputs.end());
  std::set<std::string> ob(b.outputs.begin(), b.outputs.end());
  if (oa != ob) return false;

  std::vector<std::tuple<std::string, std::optional<double>, std::optional<std::pair<double, double>>>>
      pa, pb;
  for (const auto& p : a.params) pa.push_back(param_key(p));
  for (const auto& p : b.params) pb.push_back(param_key(p));
  std::sort(pa.begin(), pa.end());
  std::sort(pb.begin(), pb.end());
  if (pa != pb) return false;

  if (a.initial != b.initial || a.init_values != b.init_values) return false;

  if (a.states.size() != b.states.size()) return false;
  for (const auto& s : a.states) {
    const SlState* t = b.state(s.name);
    if (!t || !struct_equal(s, *t)) return false;
  }

  if (a.transitions.size() != b.transitions.size()) return false;
  for (size_t i = 0; i < a.transitions.size(); ++i) {
    const Transition& x = a.transitions[i];
    const Transition& y = b.transitions[i];
    if (x.src != y.src || x.dst != y.dst || !equal(x.cond, y.cond)) return false;
    if (x.actions.size() != y.actions.size()) return false;
    for (size_t j = 0; j < x.actions.size(); ++j)
      if (x.actions[j].first != y.actions[j].first ||
          !equal(x.actions[j].second, y.actions[j].second))
        return false;
  }
  return true;
}

// Port arity by kind. Sum/Product/Logical have configurable input counts;
// -1 marks them.
inline int block_in_arity(const Block& b) {
  switch (b.kind) {
    case BlockKind::Constant: return 0;
    case BlockKind::Gain: return 1;
    case BlockKind::Sum: {
      auto s = b.param_str("signs");
      return s ? static_cast<int>(s->size()) : 2;
    }
    case BlockKind::Product: {
      auto s = b.param_str("ops");
      return s ? static_cast<int>(s->size()) : 2;
    }
    case BlockKind::Integrator: return 1;
    case BlockKind::Trigonometry: return 1;
    case BlockKind::Sqrt: return 1;
    case BlockKind::Exp: return 1;
    case BlockKind::Saturation: return 1;
    case BlockKind::Switch: return 3;
    case BlockKind::Relational: return 2;
    case BlockKind::Logical: {
      auto s = b.param_str("op");
      if (s && *s == "not") return 1;
      auto n = b.param_real("inputs");
      return n ? static_cast<int>(*n) : 2;
    }
    case BlockKind::Inport: return 0;
    case BlockKind::Outport: return 1;
    case BlockKind::Subsystem: {
      int n = 0;
      for (const auto& inner : b.blocks)
        if (inner.kind == BlockKind::Inport) ++n;
      return n;
    }
  }
  return 0;
}

inline int block_out_arity(const Block& b) {
  switch (b.kind) {
    case BlockKind::Outport: return 0;
    case BlockKind::Subsystem: {
      int n = 0;
      for (const auto& inner : b.blocks)
        if (inner.kind == BlockKind::Outport) ++n;
      return n;
    }
    default: return 1;
  }
}

}  // namespace gha
