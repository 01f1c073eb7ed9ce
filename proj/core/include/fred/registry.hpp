#pragma once

// String-keyed construction of models from JSON parameters, with a uniform
// decomposition entry point.  This is the layer the command line sits on.

#include <functional>
#include <string>
#include <vector>

#include "fred/simulate.hpp"
#include "fred/table.hpp"
#include "fred/types.hpp"

namespace fred {

// What to decompose.  Field use depends on the kind:
//   feld: argument = transform argument (length state_dim), state = Y_t
//   fekd: argument = density evaluation point,             state = Y_t
//   fevd: argument = projection direction (optional when the state is
//         scalar; required otherwise),                     state = Y_t
// Chains take state indices, the matrix model takes row-major flattenings.
struct DecomposeRequest {
  Kind kind = Kind::feld;
  int max_h = 10;
  Vec argument;
  Vec state;
};

struct ModelHandle {
  std::string id;         // canonical id, aliases resolved
  int state_dim = 0;
  int matrix_n = 0;       // order of the matrix state, when there is one
  std::vector<Kind> capabilities;
  std::function<DecompositionTable(const DecomposeRequest&)> decompose;
  StochasticProcess process;
};

// Canonical ids accepted by make_model.
std::vector<std::string> registry_ids();

bool model_supports(const ModelHandle& handle, Kind kind);

// Builds a model from its id and a JSON parameter object.  Accepted ids and
// parameter fields:
//   gauss-var    {"phi": [...row-major...], "sigma": [...row-major...]}
//   cauchy       {"phi": x, "sigma": s}
//   markov       {"p": [...column-major...], "n": n}
//   binary-chain {"pi": p, "lambda": l}    (two-state chain shorthand)
//   inar         {"p": p, "lambda": l}
//   nbar         {"rho": r, "delta": d}
//   nbar2        {"alpha1": ..., ..., "sigma2": ..., "delta": ...}
//   arg          {"beta": b, "delta": d}
//   war          {"m": [...row-major...], "sigma": [...], "k_dof": k}
ModelHandle make_model(const std::string& id, const std::string& params_json);

}  // namespace fred
