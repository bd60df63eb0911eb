#pragma once

// Random model generation for the soundness and flattening suites. Models
// are deterministic by construction: one monotone clock integrator per run,
// ascending guard thresholds, a single outgoing transition per state.

#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testutil {

struct GenOptions {
  int n_states = 3;
  int subsystem_depth = 0;  // wrap each state's compute chain this deep
  bool with_actions = true;
  bool lean = false;  // cap at six blocks per state
};

inline double gen_uniform(std::mt19937_64& rng, double lo, double hi) {
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

inline int gen_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

namespace gendetail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// A chain of 1-3 compute blocks from the feed signal, ending in `last`
// (the block whose out-port feeds the consumer), optionally nested inside
// subsystems. Emits into `body`. Returns the port reference feeding out.
struct Chain {
  std::string text;
  std::string out_ref;  // "block.port"
};

inline Chain gen_chain(std::mt19937_64& rng, const std::string& feed_ref,
                       const std::string& tag, int depth, const std::string& indent,
                       int n_blocks, bool lean = false) {
  std::ostringstream body;
  std::string cur = feed_ref;
  for (int b = 0; b < n_blocks; ++b) {
    std::string id = tag + "b" + std::to_string(b);
    switch (lean ? (gen_int(rng, 0, 1) * 2) : gen_int(rng, 0, 3)) {
      case 0:
        body << indent << "block " << id << " kind=Gain gain="
             << fmt(gen_uniform(rng, -0.9, 0.9)) << "\n";
        body << indent << "line " << cur << " -> " << id << ".1\n";
        break;
      case 1: {
        std::string cid = id + "c";
        body << indent << "block " << cid << " kind=Constant value="
             << fmt(gen_uniform(rng, -1.0, 1.0)) << "\n";
        body << indent << "block " << id << " kind=Sum signs="
             << (gen_int(rng, 0, 1) ? "+-" : "++") << "\n";
        body << indent << "line " << cur << " -> " << id << ".1\n";
        body << indent << "line " << cid << ".1 -> " << id << ".2\n";
        break;
      }
      case 2:
        body << indent << "block " << id << " kind=Trigonometry function="
             << (gen_int(rng, 0, 1) ? "sin" : "cos") << "\n";
        body << indent << "line " << cur << " -> " << id << ".1\n";
        break;
      case 3: {
        std::string cid = id + "c";
        body << indent << "block " << cid << " kind=Constant value="
             << fmt(gen_uniform(rng, 0.2, 1.2)) << "\n";
        body << indent << "block " << id << " kind=Product ops=**\n";
        body << indent << "line " << cur << " -> " << id << ".1\n";
        body << indent << "line " << cid << ".1 -> " << id << ".2\n";
        break;
      }
    }
    cur = id + ".1";
  }

  if (depth > 0) {
    // wrap: the chain consumed `feed_ref`; rebuild it inside a subsystem
    Chain inner =
        gen_chain(rng, "In1.1", tag + "i", depth - 1, indent + "  ", n_blocks, lean);
    std::ostringstream wrapped;
    std::string sub = tag + "sub";
    wrapped << indent << "block " << sub << " kind=Subsystem {\n";
    wrapped << indent << "  block In1 kind=Inport\n";
    wrapped << inner.text;
    wrapped << indent << "  block Out1 kind=Outport\n";
    wrapped << indent << "  line " << inner.out_ref << " -> Out1.1\n";
    wrapped << indent << "}\n";
    wrapped << indent << "line " << feed_ref << " -> " << sub << ".1\n";
    return {wrapped.str(), sub + ".1"};
  }
  return {body.str(), cur};
}

}  // namespace gendetail

// Deterministic chained model: states S0..S{n-1}; a run clock `c` advances
// in every state and guards fire at ascending thresholds. Each state also
// integrates a generated dataflow into its own accumulator and exposes
// output `o`.
inline std::string gen_model_text(std::mt19937_64& rng, const GenOptions& opt) {
  std::ostringstream os;
  os << "inputs {\n  u in [0.5, 1.5]\n}\n";
  os << "outputs {\n  o\n}\n";
  os << "initial S0\n";

  std::vector<double> thresholds;
  for (int j = 0; j < opt.n_states - 1; ++j)
    thresholds.push_back(0.5 + 0.45 * j + gen_uniform(rng, 0.0, 0.1));

  for (int j = 0; j < opt.n_states; ++j) {
    std::string sname = "S" + std::to_string(j);
    os << "state " << sname << " {\n";
    os << "  block u kind=Inport\n";
    os << "  block Clk kind=Integrator init=0 out=c\n";
    os << "  block rate kind=Constant value=" << gendetail::fmt(gen_uniform(rng, 0.8, 1.2))
       << "\n";
    os << "  line rate.1 -> Clk.1\n";

    std::string w = "w" + std::to_string(j);
    os << "  block Acc kind=Integrator init=" << gendetail::fmt(gen_uniform(rng, -0.5, 0.5))
       << " out=" << w << "\n";
    gendetail::Chain accum =
        gendetail::gen_chain(rng, gen_int(rng, 0, 1) ? "u.1" : "Acc.1", "a", 0, "  ",
                             opt.lean ? 1 : gen_int(rng, 1, 3), opt.lean);
    os << accum.text;
    os << "  line " << accum.out_ref << " -> Acc.1\n";

    gendetail::Chain out = gendetail::gen_chain(
        rng, gen_int(rng, 0, 1) ? "Acc.1" : "Clk.1", "o", opt.subsystem_depth, "  ",
        opt.lean ? 0 : gen_int(rng, 1, 3), opt.lean);
    os << out.text;
    os << "  block o kind=Outport\n";
    os << "  line " << out.out_ref << " -> o.1\n";
    os << "}\n";
  }

  for (int j = 0; j + 1 < opt.n_states; ++j) {
    os << "transition S" << j << " -> S" << j + 1 << " when c >= "
       << gendetail::fmt(thresholds[j]);
    if (opt.with_actions && gen_int(rng, 0, 1))
      os << " do w" << j + 1 << " := " << gendetail::fmt(gen_uniform(rng, -0.5, 0.5));
    os << "\n";
  }
  return os.str();
}

}  // namespace testutil
