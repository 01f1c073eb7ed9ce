#include "fred/series.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace fred {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::chrono::year_month_day parse_date(const std::string& text, int line_no) {
  int y = 0, m = 0, d = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &m, &d, &extra) != 3)
    throw std::invalid_argument("line " + std::to_string(line_no) +
                                ": date '" + text + "' is not YYYY-MM-DD");
  const std::chrono::year_month_day date{
      std::chrono::year(y), std::chrono::month(static_cast<unsigned>(m)),
      std::chrono::day(static_cast<unsigned>(d))};
  if (!date.ok())
    throw std::invalid_argument("line " + std::to_string(line_no) +
                                ": '" + text + "' is not a calendar date");
  return date;
}

enum class Frequency { daily, weekly, monthly, quarterly, annual };

Frequency parse_frequency(const std::string& text) {
  if (text == "daily") return Frequency::daily;
  if (text == "weekly") return Frequency::weekly;
  if (text == "monthly") return Frequency::monthly;
  if (text == "quarterly") return Frequency::quarterly;
  if (text == "annual") return Frequency::annual;
  throw std::invalid_argument(
      "frequency '" + text +
      "' not recognized (daily, weekly, monthly, quarterly, annual)");
}

void check_spacing(const std::chrono::year_month_day& prev,
                   const std::chrono::year_month_day& curr, Frequency freq,
                   int line_no) {
  using std::chrono::sys_days;
  const auto fail = [&](const char* expected) {
    throw std::invalid_argument("line " + std::to_string(line_no) +
                                ": dates are not " + expected + " apart");
  };
  const long day_gap = (sys_days(curr) - sys_days(prev)).count();
  if (day_gap <= 0)
    throw std::invalid_argument("line " + std::to_string(line_no) +
                                ": dates must be strictly increasing");
  const long month_gap = (static_cast<int>(curr.year()) * 12 +
                          static_cast<int>(static_cast<unsigned>(curr.month()))) -
                         (static_cast<int>(prev.year()) * 12 +
                          static_cast<int>(static_cast<unsigned>(prev.month())));
  switch (freq) {
    case Frequency::daily:
      if (day_gap != 1) fail("one day");
      break;
    case Frequency::weekly:
      if (day_gap != 7) fail("one week");
      break;
    case Frequency::monthly:
      if (month_gap != 1) fail("one month");
      break;
    case Frequency::quarterly:
      if (month_gap != 3) fail("one quarter");
      break;
    case Frequency::annual:
      if (month_gap != 12) fail("one year");
      break;
  }
}

std::string fmt_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

int SeriesTable::find_component(const std::string& name) const {
  for (std::size_t i = 0; i < components.size(); ++i)
    if (components[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<double> SeriesTable::column(int index) const {
  if (index < 0 || index >= values.cols())
    throw std::invalid_argument("series column " + std::to_string(index) +
                                " out of range");
  std::vector<double> out(values.rows());
  for (int t = 0; t < values.rows(); ++t) out[t] = values(t, index);
  return out;
}

std::string SeriesTable::to_csv() const {
  std::string out = "date";
  for (const auto& name : components) out += "," + name;
  out += "\n";
  for (std::size_t t = 0; t < dates.size(); ++t) {
    out += dates[t];
    for (int c = 0; c < values.cols(); ++c)
      out += "," + fmt_value(values(static_cast<int>(t), c));
    out += "\n";
  }
  return out;
}

SeriesTable parse_series_csv(const std::string& text,
                             const std::string& frequency) {
  const Frequency freq = parse_frequency(frequency);

  std::vector<std::string> lines;
  std::stringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.size() < 2)
    throw std::invalid_argument("series needs a header and at least one row");

  const std::vector<std::string> header = split_csv_line(lines[0]);
  if (header.size() < 2 || header[0] != "date")
    throw std::invalid_argument(
        "series header must be 'date,<component>[,...]'");

  SeriesTable table;
  table.components.assign(header.begin() + 1, header.end());
  const int n_cols = static_cast<int>(table.components.size());
  const int n_rows = static_cast<int>(lines.size()) - 1;
  table.values.resize(n_rows, n_cols);
  table.dates.reserve(n_rows);

  std::chrono::year_month_day prev{};
  for (int r = 0; r < n_rows; ++r) {
    const int line_no = r + 2;
    const std::vector<std::string> fields = split_csv_line(lines[r + 1]);
    if (static_cast<int>(fields.size()) != n_cols + 1)
      throw std::invalid_argument("line " + std::to_string(line_no) + ": got " +
                                  std::to_string(fields.size()) +
                                  " fields, expected " +
                                  std::to_string(n_cols + 1));
    const auto date = parse_date(fields[0], line_no);
    if (r > 0) check_spacing(prev, date, freq, line_no);
    prev = date;
    table.dates.push_back(fields[0]);
    for (int c = 0; c < n_cols; ++c) {
      try {
        std::size_t used = 0;
        table.values(r, c) = std::stod(fields[c + 1], &used);
        if (used != fields[c + 1].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw std::invalid_argument("line " + std::to_string(line_no) +
                                    ": value '" + fields[c + 1] +
                                    "' is not numeric");
      }
    }
  }
  return table;
}

SeriesTable ingest_csv(const std::string& path, const std::string& frequency) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open series file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_series_csv(buffer.str(), frequency);
}

SummaryStats summarize(const std::vector<double>& xs) {
  const long n = static_cast<long>(xs.size());
  if (n < 2) throw std::invalid_argument("summarize: need at least two values");

  SummaryStats stats;
  stats.n = n;
  stats.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  stats.minimum = *std::min_element(xs.begin(), xs.end());
  stats.maximum = *std::max_element(xs.begin(), xs.end());

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (const double x : xs) {
    const double d = x - stats.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  stats.variance = m2 * n / (n - 1.0);
  if (!(m2 > 0.0))
    throw std::runtime_error("summarize: series is constant");
  stats.skewness = m3 / std::pow(m2, 1.5);
  stats.kurtosis = m4 / (m2 * m2);
  return stats;
}

std::vector<double> gaussian_ranks(const std::vector<double>& xs) {
  const long n = static_cast<long>(xs.size());
  if (n < 1) throw std::invalid_argument("gaussian_ranks: empty series");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return xs[a] < xs[b]; });

  // Average the ranks inside each group of exactly equal values.
  std::vector<double> rank(n);
  long i = 0;
  while (i < n) {
    long j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double shared = 0.5 * (i + j) + 1.0;  // ranks are 1-based
    for (long t = i; t <= j; ++t) rank[order[t]] = shared;
    i = j + 1;
  }

  const boost::math::normal gauss;
  std::vector<double> scores(n);
  for (long t = 0; t < n; ++t)
    scores[t] = boost::math::quantile(gauss, rank[t] / (n + 1.0));
  return scores;
}

}  // namespace fred
