#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gha/model.hpp"
#include "gha/parse.hpp"

namespace gha {

class flatten_error : public std::runtime_error {
 public:
  explicit flatten_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// Endpoint key in the global net namespace: direction, full block id, port.
inline std::string ep(char dir, const std::string& block, int port) {
  return std::string(1, dir) + ":" + block + ":" + std::to_string(port);
}

struct NetBuilder {
  std::map<std::string, std::string> parent;

  std::string find(const std::string& k) {
    auto it = parent.find(k);
    if (it == parent.end()) {
      parent[k] = k;
      return k;
    }
    if (it->second == k) return k;
    std::string root = find(it->second);
    parent[k] = root;
    return root;
  }

  void unite(const std::string& a, const std::string& b) {
    std::string ra = find(a), rb = find(b);
    if (ra != rb) parent[ra] = rb;
  }
};

struct FlattenWork {
  std::vector<Block> atoms;
  NetBuilder nets;
  // full id -> block, for arity lookups during wiring
  std::map<std::string, const Block*> by_full_id;
  std::map<std::string, char> kind_of;  // 'a'=atom, 's'=subsystem, 'i'/'o'=shell

  void collect(const std::vector<Block>& blocks, const std::string& prefix, int depth) {
    for (const Block& b : blocks) {
      std::string full = prefix + b.id;
      by_full_id[full] = &b;
      if (b.kind == BlockKind::Subsystem) {
        kind_of[full] = 's';
        collect(b.blocks, full + "/", depth + 1);
        wire(b.lines, full + "/");
        // splice boundaries: outer subsystem port <-> inner shell port
        for (const Block& inner : b.blocks) {
          std::string inner_full = full + "/" + inner.id;
          if (inner.kind == BlockKind::Inport) {
            int j = static_cast<int>(inner.param_real("port").value_or(0));
            nets.unite(ep('i', full, j), ep('o', inner_full, 1));
          } else if (inner.kind == BlockKind::Outport) {
            int j = static_cast<int>(inner.param_real("port").value_or(0));
            nets.unite(ep('i', inner_full, 1), ep('o', full, j));
          }
        }
      } else if (depth > 0 && (b.kind == BlockKind::Inport || b.kind == BlockKind::Outport)) {
        kind_of[full] = b.kind == BlockKind::Inport ? 'i' : 'o';
      } else {
        kind_of[full] = 'a';
        Block copy = b;
        copy.id = full;
        atoms.push_back(std::move(copy));
      }
    }
  }

  void wire(const std::vector<Line>& lines, const std::string& prefix) {
    for (const Line& l : lines) {
      std::string src_full = prefix + l.src.block;
      check_boundary(src_full, l.src.port, /*is_src=*/true);
      for (const PortRef& d : l.dsts) {
        std::string dst_full = prefix + d.block;
        check_boundary(dst_full, d.port, /*is_src=*/false);
        nets.unite(ep('o', src_full, l.src.port), ep('i', dst_full, d.port));
      }
    }
  }

  // A line touching a subsystem port must match an inner boundary block.
  void check_boundary(const std::string& full, int port, bool is_src) {
    auto it = by_full_id.find(full);
    if (it == by_full_id.end())
      throw flatten_error("line references unknown block '" + full + "'");
    const Block& b = *it->second;
    if (b.kind != BlockKind::Subsystem) return;
    int arity = is_src ? block_out_arity(b) : block_in_arity(b);
    if (port < 1 || port > arity)
      throw flatten_error("port-arity mismatch: subsystem " + full + " has no " +
                          (is_src ? "out" : "in") + "-port " + std::to_string(port));
  }
};

}  // namespace detail

// Removes Subsystem blocks at any nesting depth. Inner block ids get the
// subsystem path as a `/`-separated prefix; boundary Inport/Outport shells
// are spliced out so every surviving line runs source-to-final-destination.
inline SlState flatten_state(const SlState& s) {
  bool has_sub = false;
  for (const auto& b : s.blocks)
    if (b.kind == BlockKind::Subsystem) has_sub = true;
  if (!has_sub) return s;

  detail::FlattenWork w;
  w.collect(s.blocks, "", 0);
  w.wire(s.lines, "");

  // group endpoints by net root
  std::map<std::string, std::vector<std::string>> nets;
  std::vector<std::string> keys;
  for (const auto& [k, v] : w.nets.parent) keys.push_back(k);
  for (const auto& k : keys) nets[w.nets.find(k)].push_back(k);

  SlState out;
  out.name = s.name;
  out.line_no = s.line_no;
  for (const auto& v : s.vars)
    if (v.find('.') == std::string::npos) out.vars.insert(v);
  out.blocks = std::move(w.atoms);

  auto decode = [](const std::string& key) {
    size_t c1 = key.find(':');
    size_t c2 = key.rfind(':');
    return std::tuple<char, std::string, int>(key[0], key.substr(c1 + 1, c2 - c1 - 1),
                                              std::stoi(key.substr(c2 + 1)));
  };

  for (auto& [root, members] : nets) {
    PortRef driver;
    int n_drivers = 0;
    std::vector<PortRef> consumers;
    for (const auto& k : members) {
      auto [dir, block, port] = decode(k);
      auto kind_it = w.kind_of.find(block);
      if (kind_it == w.kind_of.end() || kind_it->second != 'a') continue;
      if (dir == 'o') {
        driver = PortRef{block, port};
        ++n_drivers;
      } else {
        consumers.push_back(PortRef{block, port});
      }
    }
    if (consumers.empty()) continue;
    if (n_drivers == 0)
      throw flatten_error("state " + s.name + ": net feeding " + consumers[0].block + "." +
                          std::to_string(consumers[0].port) +
                          " has no driver after subsystem splicing");
    if (n_drivers > 1)
      throw flatten_error("state " + s.name + ": net driving " + consumers[0].block +
                          " has multiple sources after subsystem splicing");
    std::sort(consumers.begin(), consumers.end());
    out.lines.push_back(Line{driver, std::move(consumers), 0});
  }
  std::sort(out.lines.begin(), out.lines.end(),
            [](const Line& a, const Line& b) { return a.src < b.src; });

  augment_state_vars(out);
  return out;
}

inline Gha flatten_gha(const Gha& m) {
  Gha out = m;
  for (auto& s : out.states) s = flatten_state(s);
  return out;
}

inline bool is_flat(const SlState& s) {
  for (const auto& b : s.blocks)
    if (b.kind == BlockKind::Subsystem) return false;
  return true;
}

inline bool is_flat(const Gha& m) {
  for (const auto& s : m.states)
    if (!is_flat(s)) return false;
  return true;
}

}  // namespace gha
