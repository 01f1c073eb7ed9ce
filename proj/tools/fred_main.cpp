// Command line front end: CSV ingestion, decomposition tables, estimation,
// scenario bundles, Gaussian-rank exports, the limiting-FELD grid, and path
// simulation.  Exit codes: 0 success, 2 input/validation error, 3 numerical
// failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fred/counts.hpp"
#include "fred/estimate.hpp"
#include "fred/registry.hpp"
#include "fred/series.hpp"
#include "fred/simulate.hpp"
#include "fred/table.hpp"

namespace {

using fred::Vec;
using nlohmann::json;

Vec parse_vec(const std::string& text) {
  Vec out(0);
  if (text.empty()) return out;
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("could not parse '" + cell + "' as a number");
    }
    if (used != cell.size())
      throw std::invalid_argument("could not parse '" + cell + "' as a number");
    vals.push_back(v);
  }
  out.resize(static_cast<int>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) out[static_cast<int>(i)] = vals[i];
  return out;
}

// Relative output paths land in FRED_OUTPUT_DIR when that is set.
std::string resolve_output(const std::string& path) {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  const char* base = std::getenv("FRED_OUTPUT_DIR");
  if (base == nullptr || *base == '\0') return path;
  return (std::filesystem::path(base) / p).string();
}

void write_text(const std::string& path, const std::string& text) {
  const std::string resolved = resolve_output(path);
  std::ofstream out(resolved);
  if (!out) throw std::invalid_argument("cannot open output file: " + resolved);
  out << text;
  if (!out.good()) throw std::runtime_error("write failed: " + resolved);
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty())
    std::cout << text;
  else
    write_text(out_path, text);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void log_config(const std::string& command,
                const std::vector<std::pair<std::string, std::string>>& kv) {
  std::cerr << "# config: command=" << command;
  for (const auto& [k, v] : kv) std::cerr << " " << k << "=" << v;
  std::cerr << "\n";
}

std::string shares_csv(const fred::DecompositionTable& table) {
  const auto shares = fred::normalized_shares(table);
  std::string out = "h,k,share\n";
  char buf[64];
  for (const auto& [hk, s] : shares) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", hk.first, hk.second, s);
    out += buf;
  }
  return out;
}

// Rebuilds a params JSON string from a saved estimation result, so tables can
// be produced directly from a fit.  The fitted parameter names must cover the
// model's parameter list (nbar: ols/mle output; nbar2: gmm output).
std::string params_from_fit(const std::string& model, const std::string& fit_path) {
  const json fit = json::parse(read_file(fit_path));
  if (!fit.contains("theta") || !fit["theta"].is_object())
    throw std::invalid_argument("fit file has no theta object: " + fit_path);
  const json& theta = fit["theta"];

  std::vector<std::string> needed;
  if (model == "nbar") {
    needed = {"rho", "delta"};
  } else if (model == "nbar2") {
    needed = {"alpha1", "alpha2", "beta1", "beta2", "delta1",
              "delta2", "sigma1", "sigma2", "delta"};
  } else {
    throw std::invalid_argument("--fit supports models nbar and nbar2, not " + model);
  }
  json params;
  for (const auto& name : needed) {
    if (!theta.contains(name))
      throw std::invalid_argument("fit theta is missing '" + name +
                                  "' needed by model " + model);
    params[name] = theta[name];
  }
  return params.dump();
}

// ---------------------------------------------------------------- ingest

int run_ingest(const std::string& input, const std::string& frequency,
               const std::string& out) {
  const fred::SeriesTable series = fred::ingest_csv(input, frequency);
  // Count models require nonnegative integer observations; enforce here so a
  // bad file fails at ingestion, not mid-estimation.
  for (int j = 0; j < series.values.cols(); ++j)
    for (int i = 0; i < series.values.rows(); ++i) {
      const double v = series.values(i, j);
      if (v < 0.0)
        throw std::invalid_argument("negative cell at data row " +
                                    std::to_string(i + 1) + ", column " +
                                    series.components[j]);
      if (std::abs(v - std::round(v)) > 1e-9)
        throw std::invalid_argument("non-integer cell at data row " +
                                    std::to_string(i + 1) + ", column " +
                                    series.components[j]);
    }

  log_config("ingest", {{"input", input},
                        {"frequency", frequency},
                        {"rows", std::to_string(series.values.rows())},
                        {"columns", std::to_string(series.values.cols())}});

  std::string text = "component,n,mean,variance,skewness,kurtosis,min,max\n";
  char buf[256];
  for (int j = 0; j < series.values.cols(); ++j) {
    const fred::SummaryStats s = fred::summarize(series.column(j));
    std::snprintf(buf, sizeof(buf), "%s,%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  series.components[j].c_str(), s.n, s.mean, s.variance,
                  s.skewness, s.kurtosis, s.minimum, s.maximum);
    text += buf;
  }
  emit(out, text);
  return 0;
}

// ------------------------------------------------------------- decompose

int run_decompose(const std::string& model_id, const std::string& params,
                  const std::string& fit, const std::string& kind_name,
                  const std::string& arg_text, const std::string& state_text,
                  int horizon, const std::string& format, bool shares,
                  const std::string& out) {
  const std::string params_json =
      fit.empty() ? params : params_from_fit(model_id, fit);
  if (params_json.empty())
    throw std::invalid_argument("one of --params or --fit is required");

  const fred::ModelHandle model = fred::make_model(model_id, params_json);
  fred::DecomposeRequest req;
  req.kind = fred::kind_from_string(kind_name);
  req.max_h = horizon;
  req.argument = parse_vec(arg_text);
  req.state = parse_vec(state_text);
  if (horizon < 1) throw std::invalid_argument("--horizon must be >= 1");

  log_config("decompose", {{"model", model_id},
                           {"kind", kind_name},
                           {"horizon", std::to_string(horizon)},
                           {"arg", arg_text.empty() ? "(none)" : arg_text},
                           {"state", state_text.empty() ? "(none)" : state_text},
                           {"format", format}});

  const fred::DecompositionTable table = model.decompose(req);
  if (shares) {
    emit(out, shares_csv(table));
  } else if (format == "json") {
    emit(out, table.to_json());
  } else if (format == "csv") {
    emit(out, table.to_csv());
  } else {
    throw std::invalid_argument("--format must be csv or json");
  }
  return 0;
}

// -------------------------------------------------------------- estimate

int run_estimate(const std::string& input, const std::string& frequency,
                 const std::string& model, const std::string& method,
                 const std::string& out_json, const std::string& out_csv) {
  const fred::SeriesTable series = fred::ingest_csv(input, frequency);
  const int cols = static_cast<int>(series.values.cols());

  fred::EstimationResult result;
  if (model == "nbar") {
    if (cols != 1)
      throw std::invalid_argument("model nbar needs a univariate series, got " +
                                  std::to_string(cols) + " columns");
    if (method == "ols")
      result = fred::nbar_ols(series.column(0));
    else if (method == "mle")
      result = fred::nbar_mle(series.column(0));
    else
      throw std::invalid_argument("model nbar supports methods ols and mle, not " +
                                  method);
  } else if (model == "nbar2") {
    if (cols != 2)
      throw std::invalid_argument("model nbar2 needs a bivariate series, got " +
                                  std::to_string(cols) + " columns");
    if (method == "ols")
      result = fred::binbar_ols(series.values);
    else if (method == "gmm")
      result = fred::binbar_gmm(series.values);
    else
      throw std::invalid_argument("model nbar2 supports methods ols and gmm, not " +
                                  method);
  } else {
    throw std::invalid_argument("estimation supports models nbar and nbar2, not " +
                                model);
  }

  log_config("estimate", {{"input", input},
                          {"frequency", frequency},
                          {"model", model},
                          {"method", method},
                          {"n", std::to_string(series.values.rows())}});

  std::string csv = "parameter,estimate,std_error\n";
  char buf[160];
  for (std::size_t i = 0; i < result.names.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g\n", result.names[i].c_str(),
                  result.theta[static_cast<int>(i)], result.se[static_cast<int>(i)]);
    csv += buf;
  }
  if (out_json.empty() && out_csv.empty()) {
    std::cout << result.to_json() << "\n";
  } else {
    if (!out_json.empty()) write_text(out_json, result.to_json() + "\n");
    if (!out_csv.empty()) write_text(out_csv, csv);
  }
  return 0;
}

// -------------------------------------------------------------- scenario

struct ScenarioCell {
  std::string label;
  Vec argument;
  Vec state;
};

int run_scenario(const std::string& spec_path, const std::string& out_dir_flag,
                 int horizon_flag, const std::string& kind_flag) {
  const json spec = json::parse(read_file(spec_path));
  if (!spec.is_object()) throw std::invalid_argument("scenario spec must be a JSON object");
  for (const char* field : {"model", "params", "arguments", "states"})
    if (!spec.contains(field))
      throw std::invalid_argument(std::string("scenario spec is missing '") +
                                  field + "'");

  // Flags beat the spec file, which beats the defaults.
  const std::string kind_name =
      !kind_flag.empty() ? kind_flag : spec.value("kind", std::string("feld"));
  const int horizon = horizon_flag > 0 ? horizon_flag : spec.value("horizon", 10);
  std::string out_dir = !out_dir_flag.empty()
                            ? out_dir_flag
                            : spec.value("out_dir", std::string("."));
  out_dir = resolve_output(out_dir);

  const fred::ModelHandle model =
      fred::make_model(spec["model"].get<std::string>(), spec["params"].dump());
  const fred::Kind kind = fred::kind_from_string(kind_name);

  const auto read_grid = [&spec](const char* field) {
    std::vector<Vec> grid;
    for (const auto& row : spec[field]) {
      if (row.is_number()) {
        grid.push_back(fred::scalar_vec(row.get<double>()));
      } else {
        Vec v(static_cast<int>(row.size()));
        int i = 0;
        for (const auto& x : row) v[i++] = x.get<double>();
        grid.push_back(v);
      }
    }
    if (grid.empty())
      throw std::invalid_argument(std::string("scenario spec field '") + field +
                                  "' is empty");
    return grid;
  };
  const std::vector<Vec> args = read_grid("arguments");
  const std::vector<Vec> states = read_grid("states");

  std::vector<ScenarioCell> cells;
  for (std::size_t i = 0; i < args.size(); ++i)
    for (std::size_t j = 0; j < states.size(); ++j)
      cells.push_back({"u" + std::to_string(i) + "_y" + std::to_string(j),
                       args[i], states[j]});

  log_config("scenario", {{"spec", spec_path},
                          {"model", spec["model"].get<std::string>()},
                          {"kind", kind_name},
                          {"horizon", std::to_string(horizon)},
                          {"cells", std::to_string(cells.size())},
                          {"out_dir", out_dir}});

  // Cells evaluate concurrently; results are collected in cell order so the
  // emitted files and comparison columns are deterministic.
  std::vector<std::future<fred::DecompositionTable>> futures;
  futures.reserve(cells.size());
  for (const ScenarioCell& cell : cells)
    futures.push_back(std::async(std::launch::async, [&model, &cell, kind, horizon] {
      fred::DecomposeRequest req;
      req.kind = kind;
      req.max_h = horizon;
      req.argument = cell.argument;
      req.state = cell.state;
      return model.decompose(req);
    }));
  std::vector<fred::DecompositionTable> tables;
  tables.reserve(cells.size());
  for (auto& f : futures) tables.push_back(f.get());

  std::filesystem::create_directories(out_dir);
  const auto path_in = [&out_dir](const std::string& name) {
    return (std::filesystem::path(out_dir) / name).string();
  };

  char buf[64];
  for (std::size_t i = 0; i < cells.size(); ++i)
    write_text(path_in("cell_" + cells[i].label + ".csv"), tables[i].to_csv());

  std::string comparison = "h";
  for (const ScenarioCell& cell : cells) comparison += "," + cell.label;
  comparison += "\n";
  for (int h = 1; h <= horizon; ++h) {
    comparison += std::to_string(h);
    for (const fred::DecompositionTable& t : tables) {
      std::snprintf(buf, sizeof(buf), ",%.17g", t.total(h));
      comparison += buf;
    }
    comparison += "\n";
  }
  write_text(path_in("comparison.csv"), comparison);

  std::string share_view = "cell,h,k,share\n";
  for (std::size_t i = 0; i < cells.size(); ++i)
    for (const auto& [hk, term] : tables[i].terms) {
      const double total = tables[i].total(hk.first);
      const double share = total == 0.0 ? 0.0 : term / total;
      std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.17g\n", cells[i].label.c_str(),
                    hk.first, hk.second, share);
      share_view += buf;
    }
  write_text(path_in("shares.csv"), share_view);
  return 0;
}

// ----------------------------------------------------------------- ranks

int run_ranks(const std::string& input, const std::string& frequency,
              const std::string& cols, const std::string& out) {
  const fred::SeriesTable series = fred::ingest_csv(input, frequency);

  std::vector<int> indices;
  std::stringstream ss(cols);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    int idx = series.find_component(cell);
    if (idx < 0) {
      try {
        std::size_t used = 0;
        idx = std::stoi(cell, &used);
        if (used != cell.size()) idx = -1;
      } catch (const std::exception&) {
        idx = -1;
      }
    }
    if (idx < 0 || idx >= series.values.cols())
      throw std::invalid_argument("unknown column '" + cell + "'");
    indices.push_back(idx);
  }
  if (indices.size() != 2)
    throw std::invalid_argument("--cols needs exactly two columns, got " +
                                std::to_string(indices.size()));

  log_config("ranks", {{"input", input},
                       {"cols", cols},
                       {"n", std::to_string(series.values.rows())}});

  const std::vector<double> a = fred::gaussian_ranks(series.column(indices[0]));
  const std::vector<double> b = fred::gaussian_ranks(series.column(indices[1]));
  std::string text = "date," + series.components[indices[0]] + "," +
                     series.components[indices[1]] + "\n";
  char buf[128];
  for (std::size_t t = 0; t < a.size(); ++t) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g\n", series.dates[t].c_str(),
                  a[t], b[t]);
    text += buf;
  }
  emit(out, text);
  return 0;
}

// ---------------------------------------------------------------- table1

int run_table1(double lambda, const std::string& rho_grid_text,
               const std::string& u_grid_text, const std::string& out) {
  Vec rho_grid = parse_vec(rho_grid_text);
  Vec u_grid = parse_vec(u_grid_text);
  if (rho_grid.size() == 0) {
    rho_grid.resize(10);
    for (int i = 0; i < 10; ++i) rho_grid[i] = 0.05 + 0.1 * i;
  }
  if (u_grid.size() == 0) {
    u_grid.resize(10);
    for (int i = 0; i < 10; ++i) u_grid[i] = 0.1 + 0.3 * i;
  }
  if (lambda <= 0.0) throw std::invalid_argument("--lambda must be positive");
  for (int i = 0; i < rho_grid.size(); ++i)
    if (rho_grid[i] <= 0.0 || rho_grid[i] >= 1.0)
      throw std::invalid_argument("--rho-grid entries must lie in (0,1)");
  for (int i = 0; i < u_grid.size(); ++i)
    if (u_grid[i] <= 0.0)
      throw std::invalid_argument("--u-grid entries must be positive");

  log_config("table1", {{"lambda", std::to_string(lambda)},
                        {"rho_points", std::to_string(rho_grid.size())},
                        {"u_points", std::to_string(u_grid.size())}});

  std::string text = "rho,u,value,rounded\n";
  char buf[128];
  for (int i = 0; i < rho_grid.size(); ++i)
    for (int j = 0; j < u_grid.size(); ++j) {
      const double v =
          fred::inar_feld_limit(fred::make_inar(rho_grid[i], lambda), u_grid[j]);
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.2f\n", rho_grid[i],
                    u_grid[j], v, v);
      text += buf;
    }
  emit(out, text);
  return 0;
}

// -------------------------------------------------------------- simulate

int run_simulate(const std::string& model_id, const std::string& params,
                 const std::string& y0_text, int steps, int paths,
                 unsigned long long seed, const std::string& out) {
  if (steps < 1) throw std::invalid_argument("--steps must be >= 1");
  if (paths < 1) throw std::invalid_argument("--paths must be >= 1");
  const fred::ModelHandle model = fred::make_model(model_id, params);
  Vec y0 = parse_vec(y0_text);
  if (y0.size() == 0) y0 = model.process.default_state;

  log_config("simulate", {{"model", model_id},
                          {"steps", std::to_string(steps)},
                          {"paths", std::to_string(paths)},
                          {"seed", std::to_string(seed)}});

  const fred::PathSet set = fred::simulate(model.process, y0, steps, paths, seed);
  emit(out, set.to_csv());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forecast-error decomposition toolkit"};
  app.require_subcommand(1);

  // ingest
  std::string in_input, in_frequency = "weekly", in_out;
  CLI::App* ingest = app.add_subcommand("ingest", "Validate a dated count CSV and print summary moments");
  ingest->add_option("--input", in_input, "CSV file: date,label,...")->required();
  ingest->add_option("--frequency", in_frequency, "daily|weekly|monthly|quarterly|annual");
  ingest->add_option("--out", in_out, "output CSV path (default stdout)");

  // decompose
  std::string d_model, d_params, d_fit, d_kind = "feld", d_arg, d_state, d_format = "csv", d_out;
  int d_horizon = 10;
  bool d_shares = false;
  CLI::App* decompose = app.add_subcommand("decompose", "Emit a forecast-error decomposition table");
  decompose->add_option("--model", d_model, "model id")->required();
  decompose->add_option("--params", d_params, "model parameters as JSON");
  decompose->add_option("--fit", d_fit, "estimation result JSON file (alternative to --params)");
  decompose->add_option("--kind", d_kind, "fekd|feld|fevd");
  decompose->add_option("--arg", d_arg, "transform argument (comma separated)");
  decompose->add_option("--state", d_state, "conditioning state (comma separated)");
  decompose->add_option("--horizon", d_horizon, "largest horizon");
  decompose->add_option("--format", d_format, "csv|json");
  decompose->add_flag("--shares", d_shares, "emit normalized shares instead of raw terms");
  decompose->add_option("--out", d_out, "output path (default stdout)");

  // estimate
  std::string e_input, e_frequency = "weekly", e_model, e_method, e_out_json, e_out_csv;
  CLI::App* estimate = app.add_subcommand("estimate", "Fit a count model to an ingested series");
  estimate->add_option("--input", e_input, "CSV file")->required();
  estimate->add_option("--frequency", e_frequency, "date spacing of the file");
  estimate->add_option("--model", e_model, "nbar|nbar2")->required();
  estimate->add_option("--method", e_method, "ols|mle|gmm")->required();
  estimate->add_option("--out-json", e_out_json, "write the result JSON here");
  estimate->add_option("--out-csv", e_out_csv, "write the parameter table here");

  // scenario
  std::string s_spec, s_out_dir, s_kind;
  int s_horizon = 0;
  CLI::App* scenario = app.add_subcommand("scenario", "Evaluate a grid of decompositions from a JSON spec");
  scenario->add_option("--spec", s_spec, "scenario spec JSON file")->required();
  scenario->add_option("--out-dir", s_out_dir, "output directory (overrides the spec)");
  scenario->add_option("--horizon", s_horizon, "largest horizon (overrides the spec)");
  scenario->add_option("--kind", s_kind, "fekd|feld|fevd (overrides the spec)");

  // ranks
  std::string r_input, r_frequency = "weekly", r_cols, r_out;
  CLI::App* ranks = app.add_subcommand("ranks", "Gaussian-rank transform of two columns");
  ranks->add_option("--input", r_input, "CSV file")->required();
  ranks->add_option("--frequency", r_frequency, "date spacing of the file");
  ranks->add_option("--cols", r_cols, "two columns, by name or index")->required();
  ranks->add_option("--out", r_out, "output path (default stdout)");

  // table1
  double t_lambda = 2.0;
  std::string t_rho, t_u, t_out;
  CLI::App* table1 = app.add_subcommand("table1", "Limiting FELD values of the thinning model on a (rho,u) grid");
  table1->add_option("--lambda", t_lambda, "innovation mean");
  table1->add_option("--rho-grid", t_rho, "comma separated; default 0.05..0.95 step 0.1");
  table1->add_option("--u-grid", t_u, "comma separated; default 0.1..2.8 step 0.3");
  table1->add_option("--out", t_out, "output path (default stdout)");

  // simulate
  std::string m_model, m_params, m_y0, m_out;
  int m_steps = 10, m_paths = 1;
  unsigned long long m_seed = 1;
  CLI::App* simulate = app.add_subcommand("simulate", "Draw seeded exact-transition paths");
  simulate->add_option("--model", m_model, "model id")->required();
  simulate->add_option("--params", m_params, "model parameters as JSON")->required();
  simulate->add_option("--y0", m_y0, "starting state (default: model baseline)");
  simulate->add_option("--steps", m_steps, "transitions per path");
  simulate->add_option("--paths", m_paths, "number of paths");
  simulate->add_option("--seed", m_seed, "random seed");
  simulate->add_option("--out", m_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest) return run_ingest(in_input, in_frequency, in_out);
    if (*decompose)
      return run_decompose(d_model, d_params, d_fit, d_kind, d_arg, d_state,
                           d_horizon, d_format, d_shares, d_out);
    if (*estimate)
      return run_estimate(e_input, e_frequency, e_model, e_method, e_out_json, e_out_csv);
    if (*scenario) return run_scenario(s_spec, s_out_dir, s_horizon, s_kind);
    if (*ranks) return run_ranks(r_input, r_frequency, r_cols, r_out);
    if (*table1) return run_table1(t_lambda, t_rho, t_u, t_out);
    if (*simulate)
      return run_simulate(m_model, m_params, m_y0, m_steps, m_paths, m_seed, m_out);
  } catch (const nlohmann::json::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::domain_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::runtime_error& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return 3;
  }
  return 0;
}
