#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gha {

class smt_read_error : public std::runtime_error {
 public:
  explicit smt_read_error(const std::string& what) : std::runtime_error(what) {}
};

// Minimal s-expression reader for the emitted dialect, including the `[...]`
// vector form used by integral terms. Used as a self-check that every
// emitted document tokenizes and round-trips without an external solver.
struct SExpr {
  enum class Kind { Atom, List, Vec };
  Kind kind = Kind::Atom;
  std::string atom;
  std::vector<SExpr> items;
};

namespace detail {

struct SmtReader {
  std::string_view text;
  size_t pos = 0;

  void skip() {
    while (pos < text.size()) {
      char c = text[pos];
      if (c == ';') {
        while (pos < text.size() && text[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos;
      } else {
        return;
      }
    }
  }

  SExpr read() {
    skip();
    if (pos >= text.size()) throw smt_read_error("unexpected end of input");
    char c = text[pos];
    if (c == '(' || c == '[') {
      char close = c == '(' ? ')' : ']';
      SExpr e;
      e.kind = c == '(' ? SExpr::Kind::List : SExpr::Kind::Vec;
      ++pos;
      for (;;) {
        skip();
        if (pos >= text.size()) throw smt_read_error("unterminated list");
        if (text[pos] == close) {
          ++pos;
          return e;
        }
        if (text[pos] == ')' || text[pos] == ']')
          throw smt_read_error("mismatched bracket at offset " + std::to_string(pos));
        e.items.push_back(read());
      }
    }
    if (c == ')' || c == ']')
      throw smt_read_error("unexpected '" + std::string(1, c) + "' at offset " +
                           std::to_string(pos));
    SExpr e;
    size_t start = pos;
    while (pos < text.size() && !strchr_tok(text[pos])) ++pos;
    e.atom = std::string(text.substr(start, pos - start));
    return e;
  }

  static bool strchr_tok(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '(' || c == ')' ||
           c == '[' || c == ']' || c == ';';
  }
};

}  // namespace detail

inline std::vector<SExpr> read_smt(std::string_view text) {
  detail::SmtReader r{text};
  std::vector<SExpr> out;
  for (;;) {
    r.skip();
    if (r.pos >= text.size()) return out;
    out.push_back(r.read());
  }
}

inline void render_sexpr(const SExpr& e, std::string& out) {
  if (e.kind == SExpr::Kind::Atom) {
    out += e.atom;
    return;
  }
  out += e.kind == SExpr::Kind::List ? '(' : '[';
  for (size_t i = 0; i < e.items.size(); ++i) {
    if (i) out += ' ';
    render_sexpr(e.items[i], out);
  }
  out += e.kind == SExpr::Kind::List ? ')' : ']';
}

inline std::string render_sexpr(const SExpr& e) {
  std::string out;
  render_sexpr(e, out);
  return out;
}

inline bool sexpr_equal(const SExpr& a, const SExpr& b) {
  if (a.kind != b.kind || a.atom != b.atom || a.items.size() != b.items.size()) return false;
  for (size_t i = 0; i < a.items.size(); ++i)
    if (!sexpr_equal(a.items[i], b.items[i])) return false;
  return true;
}

}  // namespace gha
