#pragma once

// Observed-series handling: dated CSV ingestion with calendar validation,
// moment summaries, and the normal-scores transform used to map arbitrary
// marginals into the Gaussian model.

#include <string>
#include <vector>

#include "fred/types.hpp"

namespace fred {

struct SeriesTable {
  std::vector<std::string> dates;       // ISO-8601 calendar dates
  std::vector<std::string> components;  // column names after the date
  Mat values;                           // one row per date

  int find_component(const std::string& name) const;  // -1 when absent
  std::vector<double> column(int index) const;
  std::string to_csv() const;
};

// Parses "date,name1[,name2...]" CSV text.  Dates must be valid ISO-8601
// calendar dates, strictly increasing, and spaced according to the declared
// frequency: daily, weekly, monthly, quarterly, or annual.
SeriesTable parse_series_csv(const std::string& text,
                             const std::string& frequency);

SeriesTable ingest_csv(const std::string& path, const std::string& frequency);

// Moment summary. variance uses the n-1 denominator; skewness and kurtosis
// are the standardized third and fourth central moments (kurtosis is raw,
// 3 for a Gaussian).
struct SummaryStats {
  long n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
  double minimum = 0.0;
  double maximum = 0.0;
};

SummaryStats summarize(const std::vector<double>& xs);

// Inverse standard normal at Rank/(T+1); tied observations share the
// average of the ranks they occupy.
std::vector<double> gaussian_ranks(const std::vector<double>& xs);

}  // namespace fred
