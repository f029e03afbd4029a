#pragma once

#include <string>
#include <utility>
#include <vector>

namespace snd {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (query budget, success rate %)
};

// Standalone SVG line chart. y is clamped to [0, 100] with ticks at
// 0/25/50/75/100; every point gets a marker; a legend lists the series.
std::string render_success_chart(const std::vector<Series>& series, const std::string& title);

// Series from a results CSV: one per defense (prefixed by attack and T when
// those vary), success averaged over seeds, x from the sr_q<Q> columns.
// Throws FormatError when required columns are missing.
std::vector<Series> series_from_results_csv(const std::string& csv);

}  // namespace snd
