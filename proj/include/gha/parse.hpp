#pragma once

#include <charconv>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gha/exprio.hpp"
#include "gha/model.hpp"

namespace gha {

// Name of the continuous state variable an Integrator contributes. Explicit
// `out=` wins; a direct wire into an Outport names it after that port;
// otherwise a path-qualified fallback keeps it unique.
inline std::string integrator_state_var(const SlState& s, const Block& b) {
  if (auto n = b.param_str("out")) return *n;
  for (const auto& l : s.lines) {
    if (l.src.block != b.id) continue;
    for (const auto& d : l.dsts) {
      const Block* dst = s.block(d.block);
      if (dst && dst->kind == BlockKind::Outport) return dst->id;
    }
  }
  return s.name + "." + b.id + ".x";
}

// Recomputes the state's variable set from its declared list plus the names
// contributed by ports and integrators. Only top-level blocks contribute;
// subsystem innards surface after flattening.
inline void augment_state_vars(SlState& s) {
  for (const auto& b : s.blocks) {
    if (b.kind == BlockKind::Inport || b.kind == BlockKind::Outport) s.vars.insert(b.id);
    if (b.kind == BlockKind::Integrator) s.vars.insert(integrator_state_var(s, b));
  }
}

namespace detail {

struct DocCursor {
  std::vector<std::string> lines;
  size_t idx = 0;

  explicit DocCursor(std::string_view text) {
    std::string cur;
    for (char c : text) {
      if (c == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    if (!cur.empty()) lines.push_back(cur);
  }

  int line_no() const { return static_cast<int>(idx); }  // 1-based after next()

  // Next significant line, stripped of comments and surrounding blanks.
  bool next(std::string& out) {
    while (idx < lines.size()) {
      std::string s = lines[idx++];
      size_t hash = s.find('#');
      if (hash != std::string::npos) s.erase(hash);
      size_t b = s.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      size_t e = s.find_last_not_of(" \t");
      out = s.substr(b, e - b + 1);
      return true;
    }
    return false;
  }
};

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline bool parse_number(const std::string& s, double& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

// "[lo, hi]" possibly with internal spaces.
inline bool parse_range(const std::string& s, std::pair<double, double>& out) {
  std::string t;
  for (char c : s)
    if (c != ' ' && c != '\t') t += c;
  if (t.size() < 5 || t.front() != '[' || t.back() != ']') return false;
  size_t comma = t.find(',');
  if (comma == std::string::npos) return false;
  double lo, hi;
  if (!parse_number(t.substr(1, comma - 1), lo)) return false;
  if (!parse_number(t.substr(comma + 1, t.size() - comma - 2), hi)) return false;
  out = {lo, hi};
  return true;
}

inline PortRef parse_port_ref(const std::string& tok, int line_no) {
  size_t dot = tok.rfind('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 >= tok.size())
    throw parse_error(line_no, 1, "expected block.port reference, got '" + tok + "'");
  int port = 0;
  auto res = std::from_chars(tok.data() + dot + 1, tok.data() + tok.size(), port);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || port < 1)
    throw parse_error(line_no, 1, "bad port index in '" + tok + "'");
  return PortRef{tok.substr(0, dot), port};
}

}  // namespace detail

class ModelParser {
 public:
  explicit ModelParser(std::string_view text) : cur_(text) {}

  Gha parse() {
    Gha m;
    std::string line;
    while (cur_.next(line)) {
      int ln = cur_.line_no();
      auto toks = detail::split_ws(line);
      const std::string& head = toks[0];
      if (head == "inputs") {
        require_section_once(m_seen_inputs_, ln, "inputs");
        parse_brace_entries(line, ln, [&](const std::string& entry, int eln) {
          parse_input_entry(m, entry, eln);
        });
      } else if (head == "outputs") {
        require_section_once(m_seen_outputs_, ln, "outputs");
        parse_brace_entries(line, ln, [&](const std::string& entry, int eln) {
          for (const auto& t : detail::split_ws(entry)) {
            m.outputs.push_back(t);
            (void)eln;
          }
        });
      } else if (head == "params") {
        require_section_once(m_seen_params_, ln, "params");
        parse_brace_entries(line, ln, [&](const std::string& entry, int eln) {
          parse_param_entry(m, entry, eln);
        });
      } else if (head == "init") {
        // init NAME = value
        size_t eq = line.find('=');
        if (toks.size() < 4 || eq == std::string::npos)
          throw parse_error(ln, 1, "expected 'init NAME = value'");
        double v;
        if (!detail::parse_number(trim(line.substr(eq + 1)), v))
          throw parse_error(ln, 1, "malformed init value");
        if (m.init_values.count(toks[1]))
          throw parse_error(ln, 1, "duplicate init for '" + toks[1] + "'");
        m.init_values[toks[1]] = v;
      } else if (head == "initial") {
        if (toks.size() != 2) throw parse_error(ln, 1, "expected 'initial NAME'");
        if (!m.initial.empty()) throw parse_error(ln, 1, "duplicate initial declaration");
        m.initial = toks[1];
        m.initial_line_no = ln;
      } else if (head == "state") {
        if (toks.size() != 3 || toks[2] != "{")
          throw parse_error(ln, 1, "expected 'state NAME {'");
        m.states.push_back(parse_state(toks[1], ln));
      } else if (head == "transition") {
        m.transitions.push_back(parse_transition(line, ln));
      } else {
        throw parse_error(ln, 1, "unexpected directive '" + head + "'");
      }
    }
    for (auto& s : m.states) augment_state_vars(s);
    return m;
  }

 private:
  detail::DocCursor cur_;
  bool m_seen_inputs_ = false;
  bool m_seen_outputs_ = false;
  bool m_seen_params_ = false;

  static std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
  }

  void require_section_once(bool& seen, int ln, const char* what) {
    if (seen) throw parse_error(ln, 1, std::string("duplicate section '") + what + "'");
    seen = true;
  }

  // Handles both `name { a b }` inline and multi-line brace bodies, invoking
  // the callback once per entry line (or once per inline body).
  template <typename F>
  void parse_brace_entries(const std::string& first_line, int first_ln, F&& on_entry) {
    size_t open = first_line.find('{');
    if (open == std::string::npos)
      throw parse_error(first_ln, 1, "expected '{'");
    std::string rest = trim(first_line.substr(open + 1));
    if (!rest.empty()) {
      if (rest.back() == '}') {
        std::string body = trim(rest.substr(0, rest.size() - 1));
        if (!body.empty()) on_entry(body, first_ln);
        return;
      }
      on_entry(rest, first_ln);
    }
    std::string line;
    while (cur_.next(line)) {
      if (line == "}") return;
      on_entry(line, cur_.line_no());
    }
    throw parse_error(first_ln, 1, "unterminated '{'");
  }

  void parse_input_entry(Gha& m, const std::string& entry, int ln) {
    auto toks = detail::split_ws(entry);
    InputDecl d;
    d.name = toks[0];
    d.line_no = ln;
    if (toks.size() > 1) {
      if (toks[1] != "in") throw parse_error(ln, 1, "expected 'NAME in [lo, hi]'");
      std::string range = trim(entry.substr(entry.find(" in ") + 4));
      std::pair<double, double> r;
      if (!detail::parse_range(range, r)) throw parse_error(ln, 1, "malformed range");
      d.range = r;
    }
    m.inputs.push_back(std::move(d));
  }

  void parse_param_entry(Gha& m, const std::string& entry, int ln) {
    auto toks = detail::split_ws(entry);
    ParamDecl d;
    d.name = toks[0];
    d.line_no = ln;
    if (toks.size() >= 3 && toks[1] == "=") {
      double v;
      if (!detail::parse_number(toks[2], v)) throw parse_error(ln, 1, "malformed param value");
      d.value = v;
    } else if (toks.size() >= 2 && toks[1] == "in") {
      std::string range = trim(entry.substr(entry.find(" in ") + 4));
      std::pair<double, double> r;
      if (!detail::parse_range(range, r)) throw parse_error(ln, 1, "malformed range");
      d.range = r;
    } else {
      throw parse_error(ln, 1, "expected 'NAME = value' or 'NAME in [lo, hi]'");
    }
    m.params.push_back(std::move(d));
  }

  SlState parse_state(const std::string& name, int ln) {
    SlState s;
    s.name = name;
    s.line_no = ln;
    std::string line;
    while (cur_.next(line)) {
      int lln = cur_.line_no();
      if (line == "}") return s;
      auto toks = detail::split_ws(line);
      const std::string& head = toks[0];
      if (head == "vars") {
        parse_brace_entries(line, lln, [&](const std::string& entry, int) {
          for (const auto& t : detail::split_ws(entry)) s.vars.insert(t);
        });
      } else if (head == "block") {
        s.blocks.push_back(parse_block(line, lln));
      } else if (head == "line") {
        s.lines.push_back(parse_line(line, lln));
      } else {
        throw parse_error(lln, 1, "unexpected directive '" + head + "' in state " + name);
      }
    }
    throw parse_error(ln, 1, "unterminated state '" + name + "'");
  }

  Block parse_block(const std::string& line, int ln) {
    auto toks = detail::split_ws(line);
    if (toks.size() < 3) throw parse_error(ln, 1, "expected 'block ID kind=KIND ...'");
    Block b;
    b.id = toks[1];
    b.line_no = ln;
    bool kind_seen = false;
    bool opens_subsystem = false;
    for (size_t i = 2; i < toks.size(); ++i) {
      const std::string& t = toks[i];
      if (t == "{") {
        opens_subsystem = true;
        if (i + 1 != toks.size()) throw parse_error(ln, 1, "'{' must end the block line");
        break;
      }
      size_t eq = t.find('=');
      if (eq == std::string::npos || eq == 0)
        throw parse_error(ln, 1, "expected key=value, got '" + t + "'");
      std::string key = t.substr(0, eq);
      std::string val = t.substr(eq + 1);
      if (key == "kind") {
        auto k = block_kind_from_name(val);
        if (!k) throw parse_error(ln, 1, "unknown block kind '" + val + "'");
        b.kind = *k;
        kind_seen = true;
        continue;
      }
      if (b.params.count(key)) throw parse_error(ln, 1, "duplicate key '" + key + "'");
      double num;
      if (detail::parse_number(val, num))
        b.params[key] = num;
      else
        b.params[key] = val;
    }
    if (!kind_seen) throw parse_error(ln, 1, "block '" + b.id + "' is missing kind=");
    if (b.kind == BlockKind::Subsystem) {
      if (!opens_subsystem)
        throw parse_error(ln, 1, "Subsystem block must open a '{' body");
      parse_subsystem_body(b, ln);
    } else if (opens_subsystem) {
      throw parse_error(ln, 1, "only Subsystem blocks take a '{' body");
    }
    return b;
  }

  void parse_subsystem_body(Block& b, int ln) {
    std::string line;
    int inport_order = 0;
    int outport_order = 0;
    while (cur_.next(line)) {
      int lln = cur_.line_no();
      if (line == "}") {
        return;
      }
      auto toks = detail::split_ws(line);
      if (toks[0] == "block") {
        Block inner = parse_block(line, lln);
        // boundary ports are positional; materialize the position so block
        // order stops mattering afterwards
        if (inner.kind == BlockKind::Inport && !inner.param("port"))
          inner.params["port"] = static_cast<double>(++inport_order);
        else if (inner.kind == BlockKind::Inport)
          inport_order = std::max(inport_order, static_cast<int>(*inner.param_real("port")));
        if (inner.kind == BlockKind::Outport && !inner.param("port"))
          inner.params["port"] = static_cast<double>(++outport_order);
        else if (inner.kind == BlockKind::Outport)
          outport_order = std::max(outport_order, static_cast<int>(*inner.param_real("port")));
        b.blocks.push_back(std::move(inner));
      } else if (toks[0] == "line") {
        b.lines.push_back(parse_line(line, lln));
      } else {
        throw parse_error(lln, 1, "unexpected directive '" + toks[0] + "' in subsystem " + b.id);
      }
    }
    throw parse_error(ln, 1, "unterminated subsystem '" + b.id + "'");
  }

  Line parse_line(const std::string& line, int ln) {
    size_t arrow = line.find("->");
    if (arrow == std::string::npos) throw parse_error(ln, 1, "expected 'line SRC.P -> DST.P'");
    std::string lhs = trim(line.substr(4, arrow - 4));
    std::string rhs = trim(line.substr(arrow + 2));
    Line l;
    l.line_no = ln;
    l.src = detail::parse_port_ref(lhs, ln);
    size_t start = 0;
    while (start <= rhs.size()) {
      size_t comma = rhs.find(',', start);
      std::string tok = trim(comma == std::string::npos ? rhs.substr(start)
                                                        : rhs.substr(start, comma - start));
      if (tok.empty()) throw parse_error(ln, 1, "empty destination in line");
      l.dsts.push_back(detail::parse_port_ref(tok, ln));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (l.dsts.empty()) throw parse_error(ln, 1, "line needs at least one destination");
    return l;
  }

  Transition parse_transition(const std::string& line, int ln) {
    // transition SRC -> DST when EXPR [do VAR := EXPR; ...]
    auto toks = detail::split_ws(line);
    if (toks.size() < 6 || toks[2] != "->" || toks[4] != "when")
      throw parse_error(ln, 1, "expected 'transition SRC -> DST when EXPR [do ...]'");
    Transition t;
    t.src = toks[1];
    t.dst = toks[3];
    t.line_no = ln;
    size_t when_pos = line.find(" when ");
    std::string rest = line.substr(when_pos + 6);
    std::string cond_text = rest;
    std::string actions_text;
    size_t do_pos = find_do_keyword(rest);
    if (do_pos != std::string::npos) {
      cond_text = trim(rest.substr(0, do_pos));
      actions_text = trim(rest.substr(do_pos + 4));
    }
    t.cond = parse_expr(trim(cond_text), ln);
    if (!actions_text.empty()) {
      size_t start = 0;
      while (start < actions_text.size()) {
        size_t semi = actions_text.find(';', start);
        std::string stmt = trim(semi == std::string::npos
                                    ? actions_text.substr(start)
                                    : actions_text.substr(start, semi - start));
        if (!stmt.empty()) {
          size_t assign = stmt.find(":=");
          if (assign == std::string::npos)
            throw parse_error(ln, 1, "expected 'VAR := EXPR' in action");
          std::string var = trim(stmt.substr(0, assign));
          ExprPtr e = parse_expr(trim(stmt.substr(assign + 2)), ln);
          t.actions.emplace_back(var, e);
        }
        if (semi == std::string::npos) break;
        start = semi + 1;
      }
    }
    return t;
  }

  // first whitespace-delimited `do` token
  static size_t find_do_keyword(const std::string& s) { return s.find(" do "); }
};

inline Gha parse_model(std::string_view text) { return ModelParser(text).parse(); }

}  // namespace gha
