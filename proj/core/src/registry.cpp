#include "fred/registry.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

#include "fred/affine.hpp"
#include "fred/cauchy.hpp"
#include "fred/counts.hpp"
#include "fred/gaussian_var.hpp"
#include "fred/markov.hpp"
#include "fred/positive.hpp"

namespace fred {

namespace {

using nlohmann::json;

[[noreturn]] void unsupported(const std::string& id, Kind kind) {
  throw std::invalid_argument("model '" + id + "' does not support " +
                              to_string(kind));
}

double get_number(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_number())
    throw std::invalid_argument(std::string("model parameters: missing numeric field '") +
                                field + "'");
  return j[field].get<double>();
}

std::vector<double> get_array(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_array())
    throw std::invalid_argument(std::string("model parameters: missing array field '") +
                                field + "'");
  std::vector<double> out;
  for (const auto& v : j[field]) {
    if (!v.is_number())
      throw std::invalid_argument(std::string("model parameters: field '") + field +
                                  "' must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

// Row-major square matrix with the order inferred from the length.
Mat get_square(const json& j, const char* field) {
  const std::vector<double> flat = get_array(j, field);
  const int n = static_cast<int>(std::lround(std::sqrt(double(flat.size()))));
  if (n < 1 || static_cast<std::size_t>(n) * n != flat.size())
    throw std::invalid_argument(std::string("model parameters: field '") + field +
                                "' must flatten a square matrix");
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) m(i, k) = flat[i * n + k];
  return m;
}

void need_size(const Vec& v, int n, const char* what, const std::string& id) {
  if (v.size() != n)
    throw std::invalid_argument(id + ": " + what + " must have length " +
                                std::to_string(n) + ", got " +
                                std::to_string(v.size()));
}

int state_index_of(const Vec& v, int n, const char* what, const std::string& id) {
  need_size(v, 1, what, id);
  const int idx = static_cast<int>(std::lround(v[0]));
  if (std::abs(v[0] - idx) > 1e-9 || idx < 0 || idx >= n)
    throw std::invalid_argument(id + ": " + what + " must be a state index in 0.." +
                                std::to_string(n - 1));
  return idx;
}

// Scalar FEVD table for an affine model through a projection direction.
// Totals come from the curvature of the h-step transform and terms from the
// propagated one-step curvature, so the additivity check is against two
// finite-difference routes; the tolerance reflects that.
DecompositionTable affine_fevd_table(const AffineModel& model, const Vec& y0,
                                     const Vec& direction, int max_h) {
  Vec w = direction;
  if (w.size() == 0 && model.dim == 1) w = scalar_vec(1.0);
  if (w.size() != model.dim)
    throw std::invalid_argument(model.name +
                                ": fevd direction must have length " +
                                std::to_string(model.dim));
  if (w.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument(model.name + ": fevd direction is zero");

  std::map<std::pair<int, int>, double> terms;
  std::map<int, double> totals;
  for (int h = 1; h <= max_h; ++h) {
    totals[h] = w.dot(fevd_affine_total(model, y0, h) * w);
    for (int k = 0; k < h; ++k)
      terms[{h, k}] = w.dot(fevd_affine_term(model, y0, h, k) * w);
  }
  return assemble_table(Kind::fevd, terms, totals, w, y0, 0, 1e-5);
}

ModelHandle gauss_var_handle(const json& params) {
  const GaussianVarModel model =
      make_gaussian_var(get_square(params, "phi"), get_square(params, "sigma"));
  const int n = model.dim();

  ModelHandle handle;
  handle.id = "gauss-var";
  handle.state_dim = n;
  handle.capabilities = {Kind::fekd, Kind::feld, Kind::fevd};
  handle.process = gauss_var_process(model);
  handle.decompose = [model, n](const DecomposeRequest& req) {
    switch (req.kind) {
      case Kind::fekd:
        need_size(req.argument, n, "evaluation point", "gauss-var");
        need_size(req.state, n, "state", "gauss-var");
        return var_fekd(model, req.argument, req.state, req.max_h);
      case Kind::feld:
        need_size(req.argument, n, "argument", "gauss-var");
        return var_feld(model, req.argument, req.max_h);
      case Kind::fevd: {
        Vec w = req.argument;
        if (w.size() == 0 && n == 1) w = scalar_vec(1.0);
        need_size(w, n, "direction", "gauss-var");
        std::map<std::pair<int, int>, double> terms;
        std::map<int, double> totals;
        for (int h = 1; h <= req.max_h; ++h) {
          totals[h] = w.dot(sigma_h(model, h) * w);
          const std::vector<Mat> parts = var_fevd(model, h);
          for (int k = 0; k < h; ++k) terms[{h, k}] = w.dot(parts[k] * w);
        }
        return assemble_table(Kind::fevd, terms, totals, w,
                              req.state.size() == n ? req.state : Vec::Zero(n));
      }
    }
    unsupported("gauss-var", req.kind);
  };
  return handle;
}

ModelHandle cauchy_handle(const json& params) {
  const CauchyArModel model =
      make_cauchy_ar(get_number(params, "phi"), get_number(params, "sigma"));

  ModelHandle handle;
  handle.id = "cauchy";
  handle.state_dim = 1;
  handle.capabilities = {Kind::fekd};
  handle.process = cauchy_process(model);
  handle.decompose = [model](const DecomposeRequest& req) {
    switch (req.kind) {
      case Kind::fekd:
        need_size(req.argument, 1, "evaluation point", "cauchy");
        need_size(req.state, 1, "state", "cauchy");
        return cauchy_fekd(model, req.argument[0], req.state[0], req.max_h);
      case Kind::feld:
        throw std::invalid_argument(
            "cauchy: the Laplace transform of this heavy-tailed law is infinite");
      case Kind::fevd:
        throw std::invalid_argument(
            "cauchy: the variance decomposition needs a square-integrable process");
    }
    unsupported("cauchy", req.kind);
  };
  return handle;
}

ModelHandle markov_handle_from(const MarkovChain& chain, const std::string& id) {
  const int n = chain.n();
  ModelHandle handle;
  handle.id = id;
  handle.state_dim = 1;
  handle.capabilities = {Kind::fekd, Kind::feld};
  handle.process = markov_process(chain);
  handle.decompose = [chain, n, id](const DecomposeRequest& req) {
    switch (req.kind) {
      case Kind::fekd: {
        const int y = state_index_of(req.argument, n, "evaluation state", id);
        const int x0 = state_index_of(req.state, n, "state", id);
        return mc_fekd(chain, y, x0, req.max_h);
      }
      case Kind::feld: {
        need_size(req.argument, n, "argument", id);
        const int x0 = state_index_of(req.state, n, "state", id);
        return mc_feld(chain, req.argument, x0, req.max_h);
      }
      case Kind::fevd:
        break;
    }
    unsupported(id, req.kind);
  };
  return handle;
}

ModelHandle binary_chain_handle(const json& params) {
  const BinaryChainParams bin =
      make_binary_chain(get_number(params, "pi"), get_number(params, "lambda"));
  ModelHandle handle = markov_handle_from(binary_to_transition(bin), "binary-chain");
  handle.capabilities = {Kind::fekd, Kind::feld, Kind::fevd};
  const auto chain_decompose = handle.decompose;
  handle.decompose = [bin, chain_decompose](const DecomposeRequest& req) {
    if (req.kind != Kind::fevd) return chain_decompose(req);
    const int y0 = state_index_of(req.state, 2, "state", "binary-chain");
    return mc_fevd_binary_table(bin, y0, req.max_h);
  };
  return handle;
}

ModelHandle inar_handle(const json& params) {
  const InarParams inar =
      make_inar(get_number(params, "p"), get_number(params, "lambda"));
  ModelHandle handle;
  handle.id = "inar";
  handle.state_dim = 1;
  handle.capabilities = {Kind::feld, Kind::fevd};
  handle.process = inar_process(inar);
  handle.decompose = [inar](const DecomposeRequest& req) {
    switch (req.kind) {
      case Kind::feld:
        need_size(req.argument, 1, "argument", "inar");
        need_size(req.state, 1, "state", "inar");
        return inar_feld(inar, req.argument[0], req.state[0], req.max_h);
      case Kind::fevd:
        need_size(req.state, 1, "state", "inar");
        return affine_fevd_table(inar_affine(inar), req.state, req.argument,
                                 req.max_h);
      case Kind::fekd:
        break;
    }
    unsupported("inar", req.kind);
  };
  return handle;
}

ModelHandle nbar_handle(const json& params) {
  const NbarParams nbar =
      make_nbar(get_number(params, "rho"), get_number(params, "delta"));
  ModelHandle handle;
  handle.id = "nbar";
  handle.state_dim = 1;
  handle.capabilities = {Kind::feld, Kind::fevd};
  handle.process = nbar_process(nbar);
  handle.decompose = [nbar](const DecomposeRequest& req) {
    switch (req.kind) {
      case Kind::feld:
        need_size(req.argument, 1, "argument", "nbar");
        need_size(req.state, 1, "state", "nbar");
        return nbar_feld(nbar, req.argument[0], req.state[0], req.max_h);
      case Kind::fevd:
        need_size(req.state, 1, "state", "nbar");
        return affine_fevd_table(nbar_affine(nbar), req.state, req.argument,
                                 req.max_h);
      case Kind::fekd:
        break;
    }
    unsupported("nbar", req.kind);
  };
  return handle;
}

ModelHandle arg_handle(const json& params) {
  const ArgParams arg =
      make_arg(get_number(params, "beta"), get_number(params, "delta"));
  ModelHandle handle;
  handle.id = "arg";
  handle.state_dim = 1;
  handle.capabilities = {Kind::feld, Kind::fevd};
  handle.process = arg_process(arg);
  handle.decompose = [arg](const DecomposeRequest& req) {
    switch (req.kind) {
      case Kind::feld:
        need_size(req.argument, 1, "argument", "arg");
        need_size(req.state, 1, "state", "arg");
        return arg_feld(arg, req.argument[0], req.state[0], req.max_h);
      case Kind::fevd:
        need_size(req.state, 1, "state", "arg");
        return affine_fevd_table(arg_affine(arg), req.state, req.argument,
                                 req.max_h);
      case Kind::fekd:
        break;
    }
    unsupported("arg", req.kind);
  };
  return handle;
}

ModelHandle nbar2_handle(const json& params) {
  const BinbarParams q = make_binbar(BinbarParams{
      get_number(params, "alpha1"), get_number(params, "alpha2"),
      get_number(params, "beta1"), get_number(params, "beta2"),
      get_number(params, "delta1"), get_number(params, "delta2"),
      get_number(params, "sigma1"), get_number(params, "sigma2"),
      get_number(params, "delta")});
  ModelHandle handle;
  handle.id = "nbar2";
  handle.state_dim = 2;
  handle.capabilities = {Kind::feld, Kind::fevd};
  handle.process = binbar_process(q);
  handle.decompose = [q](const DecomposeRequest& req) {
    switch (req.kind) {
      case Kind::feld:
        need_size(req.argument, 2, "argument", "nbar2");
        need_size(req.state, 2, "state", "nbar2");
        return binbar_feld(q, req.argument, req.state, req.max_h);
      case Kind::fevd:
        need_size(req.state, 2, "state", "nbar2");
        return affine_fevd_table(binbar_affine(q), req.state, req.argument,
                                 req.max_h);
      case Kind::fekd:
        break;
    }
    unsupported("nbar2", req.kind);
  };
  return handle;
}

ModelHandle war_handle(const json& params) {
  const WarParams war = make_war(get_square(params, "m"),
                                 get_square(params, "sigma"),
                                 get_number(params, "k_dof"));
  const int n = static_cast<int>(war.m.rows());

  ModelHandle handle;
  handle.id = "war";
  handle.state_dim = n * n;
  handle.matrix_n = n;
  handle.capabilities = {Kind::feld};
  handle.process = war_process(war);
  handle.decompose = [war, n](const DecomposeRequest& req) {
    if (req.kind != Kind::feld) unsupported("war", req.kind);
    need_size(req.argument, n * n, "argument", "war");
    need_size(req.state, n * n, "state", "war");
    const auto unflatten = [n](const Vec& v) {
      Mat m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = v[i * n + j];
      return m;
    };
    return war_feld(war, unflatten(req.argument), unflatten(req.state),
                    req.max_h);
  };
  return handle;
}

ModelHandle markov_handle(const json& params) {
  if (!params.contains("n") || !params["n"].is_number_integer())
    throw std::invalid_argument("model parameters: missing integer field 'n'");
  const int n = params["n"].get<int>();
  const std::vector<double> flat = get_array(params, "p");
  if (n < 1 || static_cast<std::size_t>(n) * n != flat.size())
    throw std::invalid_argument(
        "model parameters: field 'p' must hold n*n entries");
  Mat p(n, n);
  for (int col = 0; col < n; ++col)
    for (int row = 0; row < n; ++row) p(row, col) = flat[col * n + row];
  return markov_handle_from(make_markov_chain(p), "markov");
}

}  // namespace

std::vector<std::string> registry_ids() {
  return {"gauss-var", "cauchy",  "markov", "binary-chain", "inar",
          "nbar",      "nbar2",   "arg",    "war"};
}

bool model_supports(const ModelHandle& handle, Kind kind) {
  for (const Kind k : handle.capabilities)
    if (k == kind) return true;
  return false;
}

ModelHandle make_model(const std::string& id, const std::string& params_json) {
  json params;
  try {
    params = json::parse(params_json);
  } catch (const json::parse_error& err) {
    throw std::invalid_argument(std::string("model parameters are not valid JSON: ") +
                                err.what());
  }
  if (!params.is_object())
    throw std::invalid_argument("model parameters must be a JSON object");

  if (id == "gauss-var") return gauss_var_handle(params);
  if (id == "cauchy") return cauchy_handle(params);
  if (id == "markov") return markov_handle(params);
  if (id == "binary-chain") return binary_chain_handle(params);
  if (id == "inar") return inar_handle(params);
  if (id == "nbar") return nbar_handle(params);
  if (id == "nbar2") return nbar2_handle(params);
  if (id == "arg") return arg_handle(params);
  if (id == "war") return war_handle(params);

  std::string known;
  for (const auto& name : registry_ids()) known += (known.empty() ? "" : ", ") + name;
  throw std::invalid_argument("unknown model id '" + id + "' (known: " + known + ")");
}

}  // namespace fred
