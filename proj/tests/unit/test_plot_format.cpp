#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>
#include <sstream>
#include <vector>

#include "snd/errors.hpp"
#include "snd/format.hpp"
#include "snd/svg_plot.hpp"

using namespace snd;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

// Minimal XML well-formedness: balanced, properly nested tags with quoted
// attributes. Enough to catch a broken writer.
bool well_formed(const std::string& xml) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool root_seen = false;
  while ((i = xml.find('<', i)) != std::string::npos) {
    const std::size_t end = xml.find('>', i);
    if (end == std::string::npos) return false;
    std::string tag = xml.substr(i + 1, end - i - 1);
    i = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) return false;
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
      continue;
    }
    const bool self_closing = tag.back() == '/';
    const std::string name = tag.substr(0, tag.find_first_of(" /"));
    if (stack.empty()) {
      if (root_seen) return false;
      root_seen = true;
    }
    if (!self_closing) stack.push_back(name);
  }
  return root_seen && stack.empty();
}

std::vector<double> polyline_ys(const std::string& svg) {
  std::vector<double> ys;
  const std::regex pts("points=\"([^\"]*)\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), pts); it != std::sregex_iterator(); ++it) {
    std::istringstream in((*it)[1].str());
    std::string pair;
    while (in >> pair) ys.push_back(std::stod(pair.substr(pair.find(',') + 1)));
  }
  return ys;
}

const char* kCsv =
    "attack,defense,sigma,T,seed,n_images,success_rate,mean_final_l2,mean_query_l2,pmis,sigma_hat,status,"
    "sr_q2000,sr_q5000,sr_q10000\n"
    "hsja,none,0,1,1,10,90,1,1,0,0,ok,50,80,90\n"
    "hsja,none,0,1,2,10,70,1,1,0,0,ok,30,60,70\n"
    "hsja,snd:0.05,0.05,1,1,10,20,1,1,0,0,ok,10,15,20\n";

}  // namespace

TEST(SvgChart, SinglePointIsOneMarker) {
  const std::string svg = render_success_chart({{"none", {{1000.0, 42.0}}}}, "t");
  EXPECT_TRUE(well_formed(svg));
  EXPECT_EQ(count(svg, "class=\"marker\""), 1u);
  EXPECT_EQ(count(svg, "<polyline"), 0u);
}

TEST(SvgChart, TwoSeriesThreeBudgets) {
  const std::string svg = render_success_chart(
      {{"none", {{2000, 50}, {5000, 80}, {10000, 90}}}, {"snd", {{2000, 5}, {5000, 10}, {10000, 12}}}}, "a & b");
  EXPECT_TRUE(well_formed(svg));
  EXPECT_EQ(count(svg, "<polyline"), 2u);
  EXPECT_EQ(count(svg, "class=\"marker\""), 6u);
  EXPECT_EQ(polyline_ys(svg).size(), 6u);
  EXPECT_NE(svg.find("a &amp; b"), std::string::npos);
  EXPECT_EQ(count(svg, "class=\"legend\""), 2u);
}

TEST(SvgChart, TicksAndClamping) {
  const std::string svg = render_success_chart({{"x", {{1, -20}, {2, 50}, {3, 140}}}}, "t");
  EXPECT_EQ(count(svg, "class=\"ytick\""), 5u);
  for (const char* t : {">0<", ">25<", ">50<", ">75<", ">100<"}) EXPECT_NE(svg.find(t), std::string::npos) << t;
  // clamped values land on the 0 and 100 tick lines
  const auto ys = polyline_ys(render_success_chart({{"x", {{1, -20}, {3, 140}}}}, "t"));
  const auto ref = polyline_ys(render_success_chart({{"x", {{1, 0}, {3, 100}}}}, "t"));
  EXPECT_EQ(ys, ref);
}

TEST(SvgChart, SeriesFromResultsAverageSeeds) {
  const auto series = series_from_results_csv(kCsv);
  ASSERT_EQ(series.size(), 2u);
  const Series* none = series[0].name.find("snd") == std::string::npos ? &series[0] : &series[1];
  ASSERT_EQ(none->points.size(), 3u);
  EXPECT_EQ(none->points[0], (std::pair<double, double>{2000, 40}));
  EXPECT_EQ(none->points[2], (std::pair<double, double>{10000, 80}));
}

TEST(SvgChart, MissingColumnsAreFormatErrors) {
  EXPECT_THROW(series_from_results_csv(""), FormatError);
  EXPECT_THROW(series_from_results_csv("attack,defense\nhsja,none\n"), FormatError);
  EXPECT_THROW(series_from_results_csv("attack,defense,T\nhsja,none,1\n"), FormatError);
  EXPECT_THROW(series_from_results_csv("attack,defense,T,sr_q100\nhsja,none,1,abc\n"), FormatError);
}

TEST(Format, DoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5, 0.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v) << format_double(v);
  }
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_fixed(3.14159, 2), "3.14");
  EXPECT_EQ(format_fixed(1e300, 2), format_double(1e300));
}

TEST(Format, CsvQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  const auto f = split_csv_line("x,\"a,b\",\"q\"\"q\",");
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(f[1], "a,b");
  EXPECT_EQ(f[2], "q\"q");
  EXPECT_EQ(f[3], "");
}
