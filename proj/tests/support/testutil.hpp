#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "gha/flatten.hpp"
#include "gha/fr.hpp"
#include "gha/parse.hpp"
#include "gha/validate.hpp"

namespace testutil {

inline std::string source_dir() { return GHA_SOURCE_DIR; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::string model_path(const std::string& name) {
  return source_dir() + "/models/" + name;
}

inline gha::Gha load_model(const std::string& name) {
  return gha::parse_model(read_file(model_path(name)));
}

// parse + expect a clean validation, returning the flattened model and FRs
struct Loaded {
  gha::Gha model;
  gha::Gha flat;
  std::map<std::string, gha::FlowSystem> frs;
};

inline Loaded load_checked(const std::string& text) {
  Loaded l;
  l.model = gha::parse_model(text);
  auto diags = gha::validate_model(l.model);
  if (gha::has_errors(diags)) {
    std::string msg = "fixture fails validation:";
    for (const auto& d : diags) msg += "\n  " + gha::render(d);
    throw std::runtime_error(msg);
  }
  l.flat = gha::flatten_gha(l.model);
  l.frs = gha::derive_all_frs(l.flat);
  return l;
}

}  // namespace testutil
