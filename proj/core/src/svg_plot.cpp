#include "snd/svg_plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "snd/errors.hpp"
#include "snd/format.hpp"

namespace snd {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 400;
constexpr double kLeft = 70;
constexpr double kRight = 180;
constexpr double kTop = 40;
constexpr double kBottom = 60;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return format_fixed(v, 2); }

double parse_number(const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw FormatError("not a number in CSV: '" + s + "'");
  return v;
}

}  // namespace

std::string render_success_chart(const std::vector<Series>& series, const std::string& title) {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = 0;
    xmax = 1;
  }
  if (xmax == xmin) {
    xmin -= 0.5 * std::max(1.0, std::abs(xmin));
    xmax += 0.5 * std::max(1.0, std::abs(xmax));
  }
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - std::clamp(y, 0.0, 100.0) / 100.0) * ph; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
    << "</text>\n";
  // axes
  o << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\"" << kTop + ph
    << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph
    << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 100; t += 25) {
    const double y = py(t);
    o << "<line class=\"ytick\" x1=\"" << kLeft - 5 << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft + pw << "\" y2=\""
      << num(y) << "\" stroke=\"#dddddd\"/>\n"
      << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << t << "</text>\n";
  }
  std::set<double> xs;
  for (const auto& s : series) {
    for (const auto& p : s.points) xs.insert(p.first);
  }
  for (double x : xs) {
    o << "<text x=\"" << num(px(x)) << "\" y=\"" << num(kTop + ph + 18) << "\" text-anchor=\"middle\">"
      << format_double(x) << "</text>\n";
  }
  o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">query budget</text>\n"
    << "<text transform=\"translate(18," << num(kTop + ph / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">success rate (%)</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    auto pts = s.points;
    std::sort(pts.begin(), pts.end());
    if (pts.size() > 1) {
      o << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (std::size_t k = 0; k < pts.size(); ++k) {
        o << (k ? " " : "") << num(px(pts[k].first)) << ',' << num(py(pts[k].second));
      }
      o << "\"/>\n";
    }
    for (const auto& [x, y] : pts) {
      o << "<circle class=\"marker\" cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"3.5\" fill=\"" << color
        << "\"/>\n";
    }
    const double ly = kTop + 10 + 20.0 * static_cast<double>(i);
    o << "<line x1=\"" << kLeft + pw + 15 << "\" y1=\"" << num(ly) << "\" x2=\"" << kLeft + pw + 35 << "\" y2=\""
      << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
      << "<text class=\"legend\" x=\"" << kLeft + pw + 40 << "\" y=\"" << num(ly + 4) << "\">" << escape(s.name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<Series> series_from_results_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("results CSV is empty");
  const auto head = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < head.size(); ++i) col[head[i]] = i;
  for (const char* need : {"attack", "defense", "T"}) {
    if (!col.count(need)) throw FormatError(std::string("results CSV lacks column '") + need + "'");
  }
  std::vector<std::pair<double, std::size_t>> budget_cols;
  for (std::size_t i = 0; i < head.size(); ++i) {
    if (head[i].rfind("sr_q", 0) == 0) budget_cols.emplace_back(parse_number(head[i].substr(4)), i);
  }
  if (budget_cols.empty()) throw FormatError("results CSV has no sr_q<budget> columns");

  std::vector<std::vector<std::string>> rows;
  std::set<std::string> attacks;
  std::set<std::string> repeats;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto r = split_csv_line(line);
    if (r.size() != head.size()) throw FormatError("results CSV row has the wrong number of fields");
    attacks.insert(r[col["attack"]]);
    repeats.insert(r[col["T"]]);
    rows.push_back(std::move(r));
  }
  std::map<std::string, std::pair<std::vector<double>, std::size_t>> acc;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    std::string name = r[col["defense"]];
    if (repeats.size() > 1) name += " T=" + r[col["T"]];
    if (attacks.size() > 1) name = r[col["attack"]] + " / " + name;
    auto [it, fresh] = acc.try_emplace(name, std::vector<double>(budget_cols.size(), 0.0), 0);
    if (fresh) order.push_back(name);
    for (std::size_t k = 0; k < budget_cols.size(); ++k) it->second.first[k] += parse_number(r[budget_cols[k].second]);
    ++it->second.second;
  }
  std::vector<Series> out;
  for (const auto& name : order) {
    const auto& [sums, n] = acc[name];
    Series s{name, {}};
    for (std::size_t k = 0; k < budget_cols.size(); ++k) {
      s.points.emplace_back(budget_cols[k].first, sums[k] / static_cast<double>(n));
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace snd
