#include "fred/table.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fred {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  out.push_back(field);
  return out;
}

}  // namespace

std::string to_string(Kind kind) {
  switch (kind) {
    case Kind::fekd: return "fekd";
    case Kind::feld: return "feld";
    case Kind::fevd: return "fevd";
  }
  throw std::logic_error("unreachable kind");
}

Kind kind_from_string(const std::string& name) {
  if (name == "fekd") return Kind::fekd;
  if (name == "feld") return Kind::feld;
  if (name == "fevd") return Kind::fevd;
  throw std::invalid_argument("unknown decomposition kind '" + name +
                              "' (expected fekd, feld, or fevd)");
}

int kind_kmax(Kind kind, int h) {
  if (h < 1) throw std::invalid_argument("horizon must be >= 1");
  return kind == Kind::fekd ? h - 2 : h - 1;
}

TransformSpec TransformSpec::laplace(const Vec& u) {
  TransformSpec t;
  t.tag = Tag::laplace;
  t.value = u;
  return t;
}

TransformSpec TransformSpec::density_at(const Vec& y) {
  TransformSpec t;
  t.tag = Tag::density_at;
  t.value = y;
  return t;
}

TransformSpec TransformSpec::matrix_laplace(const Mat& gamma) {
  TransformSpec t;
  t.tag = Tag::matrix_laplace;
  t.matrix_n = static_cast<int>(gamma.rows());
  t.value = Vec(gamma.size());
  for (int i = 0; i < gamma.rows(); ++i)
    for (int j = 0; j < gamma.cols(); ++j)
      t.value[i * gamma.cols() + j] = gamma(i, j);
  return t;
}

double DecompositionTable::term(int h, int k) const {
  const auto it = terms.find({h, k});
  if (it == terms.end())
    throw std::invalid_argument("no term stored for (h=" + std::to_string(h) +
                                ", k=" + std::to_string(k) + ")");
  return it->second;
}

double DecompositionTable::total(int h) const {
  const auto it = totals.find(h);
  if (it == totals.end())
    throw std::invalid_argument("no total stored for h=" + std::to_string(h));
  return it->second;
}

DecompositionTable assemble_table(Kind kind,
                                  const std::map<std::pair<int, int>, double>& terms,
                                  const std::map<int, double>& totals,
                                  const Vec& argument, const Vec& state,
                                  int matrix_n, double identity_tol) {
  DecompositionTable tab;
  tab.kind = kind;
  tab.argument = argument;
  tab.state = state;
  tab.matrix_n = matrix_n;
  tab.terms = terms;
  tab.totals = totals;

  for (const auto& [key, value] : terms) {
    const auto [h, k] = key;
    if (!std::isfinite(value))
      throw std::invalid_argument("non-finite term at (h=" + std::to_string(h) +
                                  ", k=" + std::to_string(k) + ")");
    if (totals.find(h) == totals.end())
      throw std::invalid_argument("term at h=" + std::to_string(h) +
                                  " has no matching total");
    if (k < 0 || k > kind_kmax(kind, h))
      throw std::invalid_argument("k=" + std::to_string(k) +
                                  " outside the " + to_string(kind) +
                                  " range at h=" + std::to_string(h));
  }

  for (const auto& [h, total] : totals) {
    if (!std::isfinite(total))
      throw std::invalid_argument("non-finite total at h=" + std::to_string(h));
    tab.horizons.push_back(h);
    double sum = 0.0;
    for (int k = 0; k <= kind_kmax(kind, h); ++k) {
      const auto it = terms.find({h, k});
      if (it == terms.end())
        throw std::invalid_argument("missing term (h=" + std::to_string(h) +
                                    ", k=" + std::to_string(k) + ")");
      sum += it->second;
    }
    const double residual = total - sum;
    if (std::abs(residual) > identity_tol * std::max(1.0, std::abs(total)))
      throw std::runtime_error(
          "terms do not sum to the total at h=" + std::to_string(h) +
          ": residual " + fmt(residual));
    tab.residuals[h] = residual;
  }
  return tab;
}

std::map<std::pair<int, int>, double> normalized_shares(const DecompositionTable& table) {
  std::map<std::pair<int, int>, double> shares;
  for (const auto& [h, total] : table.totals) {
    if (total == 0.0)
      throw std::invalid_argument("cannot normalize shares: total is zero at h=" +
                                  std::to_string(h));
    double sum = 0.0;
    for (int k = 0; k <= kind_kmax(table.kind, h); ++k) {
      const double s = table.term(h, k) / total;
      shares[{h, k}] = s;
      sum += s;
    }
    if (kind_kmax(table.kind, h) >= 0 && std::abs(sum - 1.0) > 1e-12)
      throw std::runtime_error("shares at h=" + std::to_string(h) +
                               " sum to " + fmt(sum) + ", expected 1");
  }
  return shares;
}

std::string DecompositionTable::to_csv() const {
  std::ostringstream out;
  out << "h,k,term,total,share\n";
  for (const auto& [h, total] : totals) {
    const int kmax = kind_kmax(kind, h);
    if (kmax < 0) {
      out << h << ",,," << fmt(total) << ",\n";
      continue;
    }
    for (int k = 0; k <= kmax; ++k) {
      const double value = term(h, k);
      const double share = total == 0.0 ? 0.0 : value / total;
      out << h << ',' << k << ',' << fmt(value) << ',' << fmt(total) << ','
          << fmt(share) << '\n';
    }
  }
  return out.str();
}

DecompositionTable DecompositionTable::from_csv(const std::string& text, Kind kind) {
  DecompositionTable tab;
  tab.kind = kind;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("empty decomposition CSV");
  if (split_line(line).size() != 5)
    throw std::invalid_argument("decomposition CSV must have header h,k,term,total,share");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != 5)
      throw std::invalid_argument("line " + std::to_string(lineno) +
                                  ": expected 5 fields");
    const int h = std::stoi(fields[0]);
    tab.totals[h] = std::stod(fields[3]);
    if (!fields[1].empty())
      tab.terms[{h, std::stoi(fields[1])}] = std::stod(fields[2]);
  }
  for (const auto& [h, total] : tab.totals) {
    (void)total;
    tab.horizons.push_back(h);
  }
  return tab;
}

std::string DecompositionTable::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind);
  j["argument"] = std::vector<double>(argument.data(), argument.data() + argument.size());
  j["state"] = std::vector<double>(state.data(), state.data() + state.size());
  if (matrix_n > 0) j["matrix_n"] = matrix_n;
  auto& jt = j["terms"] = nlohmann::json::array();
  for (const auto& [key, value] : terms)
    jt.push_back({{"h", key.first}, {"k", key.second}, {"value", value}});
  auto& jtot = j["totals"] = nlohmann::json::array();
  for (const auto& [h, value] : totals)
    jtot.push_back({{"h", h}, {"value", value}});
  return j.dump(2);
}

DecompositionTable DecompositionTable::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  DecompositionTable tab;
  tab.kind = kind_from_string(j.at("kind").get<std::string>());
  const auto arg = j.at("argument").get<std::vector<double>>();
  const auto st = j.at("state").get<std::vector<double>>();
  tab.argument = Eigen::Map<const Vec>(arg.data(), static_cast<long>(arg.size()));
  tab.state = Eigen::Map<const Vec>(st.data(), static_cast<long>(st.size()));
  tab.matrix_n = j.value("matrix_n", 0);
  for (const auto& item : j.at("terms"))
    tab.terms[{item.at("h").get<int>(), item.at("k").get<int>()}] =
        item.at("value").get<double>();
  for (const auto& item : j.at("totals")) {
    const int h = item.at("h").get<int>();
    tab.totals[h] = item.at("value").get<double>();
    tab.horizons.push_back(h);
  }
  return tab;
}

}  // namespace fred
