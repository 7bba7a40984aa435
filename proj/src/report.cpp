#include "sfca/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "sfca/csv_io.hpp"

namespace sfca {
namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

constexpr std::string_view kReportHeader[] = {"method", "type", "problem", "filter",
                                              "n", "rmse_min", "gm_min"};
constexpr std::string_view kScatterHeader[] = {"method", "problem", "city_id", "year", "observed",
                                               "predicted", "respondents", "ci_half_width"};

}  // namespace

std::string report_csv(const EvaluationReport& report) {
  std::string out = "method,type,problem,filter,n,rmse_min,gm_min\n";
  for (const auto& c : report.cells) {
    const auto* g = report.gm(c.method, c.problem);
    out += c.method + ',' + c.type + ',' + c.problem.key() + ',' + std::to_string(c.filter) + ',' +
           std::to_string(c.n) + ',' + (c.ok() ? fixed(c.rmse) : std::string()) + ',' +
           (g && g->defined ? fixed(g->gm) : std::string()) + '\n';
  }
  return out;
}

EvaluationReport parse_report_csv(std::string_view text) {
  const auto t = csv::parse(text, kReportHeader);
  EvaluationReport r;
  for (const auto& row : t.rows) {
    CellResult c;
    c.method = row[0];
    c.type = row[1];
    c.problem = ProblemSpec::parse(row[2]);
    c.filter = csv::to_int(row[3], "filter");
    c.n = static_cast<std::size_t>(csv::to_int(row[4], "n"));
    if (row[5].empty()) c.error = "failed";
    else c.rmse = csv::to_double(row[5], "rmse_min");
    if (std::find(r.methods.begin(), r.methods.end(), c.method) == r.methods.end()) r.methods.push_back(c.method);
    if (std::find(r.problems.begin(), r.problems.end(), c.problem) == r.problems.end()) r.problems.push_back(c.problem);
    if (std::find(r.filters.begin(), r.filters.end(), c.filter) == r.filters.end()) r.filters.push_back(c.filter);
    r.cells.push_back(std::move(c));
  }
  annotate(r);
  return r;
}

std::string report_table(const EvaluationReport& report) {
  std::ostringstream os;
  for (auto source : {SignalSource::internet, SignalSource::electricity}) {
    std::vector<ProblemSpec> cols;
    for (const auto& p : report.problems)
      if (p.source == source) cols.push_back(p);
    if (cols.empty()) continue;
    std::size_t mw = 6;
    for (const auto& m : report.methods) mw = std::max(mw, m.size());
    os << "GM(RMSE) (min), " << to_string(source) << " signal, " << report.filters.size()
       << " population filters\n";
    os << std::left << std::setw(static_cast<int>(mw) + 2) << "method" << std::setw(11) << "type";
    for (const auto& p : cols)
      os << std::right << std::setw(16)
         << (std::string(to_string(p.activity)) + ":" + std::string(to_string(p.target)));
    os << '\n';
    for (const auto& m : report.methods) {
      std::string type;
      for (const auto& g : report.gms)
        if (g.method == m && !g.type.empty()) type = g.type;
      os << std::left << std::setw(static_cast<int>(mw) + 2) << m << std::setw(11) << type;
      for (const auto& p : cols) {
        const auto* g = report.gm(m, p);
        std::string cell = g && g->defined ? fixed(g->gm, 2) + g->markers : "n/a";
        os << std::right << std::setw(16) << cell;
      }
      os << '\n';
    }
    os << "\nRMSE (min) per population filter, " << to_string(source) << " signal\n";
    for (const auto& p : cols) {
      os << p.key() << '\n';
      os << std::left << std::setw(static_cast<int>(mw) + 2) << "method";
      for (auto f : report.filters) os << std::right << std::setw(14) << ("> " + std::to_string(f));
      os << '\n';
      for (const auto& m : report.methods) {
        os << std::left << std::setw(static_cast<int>(mw) + 2) << m;
        for (auto f : report.filters) {
          const auto* c = report.cell(m, p, f);
          std::string cell = "-";
          if (c && c->ok()) {
            cell = fixed(c->rmse, 2) + " (" + std::to_string(c->n) + ")";
            if (c->excluded) cell += "!" + std::to_string(c->excluded);
          } else if (c) {
            cell = "failed";
          }
          os << std::right << std::setw(14) << cell;
        }
        os << '\n';
      }
    }
    os << '\n';
  }
  os << "^ best regression method, * best overall, _ SFCA method beating the best regression method\n";
  os << "(n) city-years scored, !k city-years excluded after a decode failure\n";
  if (!report.exceptions.empty()) {
    os << "\nExceptions (" << report.exceptions.size() << ")\n";
    for (const auto& e : report.exceptions) os << "  " << e << '\n';
  }
  return os.str();
}

double ci_half_width(int respondents, double sd_minutes) {
  if (respondents < 1) throw Error("respondents must be positive");
  return 1.96 * sd_minutes / std::sqrt(static_cast<double>(respondents));
}

std::string scatter_csv(const EvaluationReport& report, double sd_minutes) {
  std::string out = "method,problem,city_id,year,observed,predicted,respondents,ci_half_width\n";
  for (const auto& p : report.scatter)
    out += p.method + ',' + p.problem.key() + ',' + p.city_id + ',' + std::to_string(p.year) + ',' +
           fixed(p.observed) + ',' + fixed(p.predicted) + ',' + std::to_string(p.respondents) + ',' +
           fixed(ci_half_width(p.respondents, sd_minutes)) + '\n';
  return out;
}

std::vector<ScatterPoint> parse_scatter_csv(std::string_view text) {
  const auto t = csv::parse(text, kScatterHeader);
  std::vector<ScatterPoint> out;
  for (const auto& row : t.rows)
    out.push_back({row[0], ProblemSpec::parse(row[1]), row[2],
                   static_cast<int>(csv::to_int(row[3], "year")), csv::to_double(row[4], "observed"),
                   csv::to_double(row[5], "predicted"),
                   static_cast<int>(csv::to_int(row[6], "respondents"))});
  return out;
}

std::string scatter_svg(std::span<const ScatterPoint> points, std::string_view title,
                        double sd_minutes) {
  constexpr double W = 480, H = 480, L = 60, R = 20, T = 40, B = 50;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& p : points) {
    const double ci = ci_half_width(p.respondents, sd_minutes);
    lo = std::min({lo, p.observed - ci, p.predicted});
    hi = std::max({hi, p.observed + ci, p.predicted});
  }
  if (points.empty()) {
    lo = 0;
    hi = 1;
  }
  const double pad = 0.05 * std::max(hi - lo, 1.0);
  lo -= pad;
  hi += pad;
  const double span = hi - lo;
  auto sx = [&](double v) { return L + (v - lo) / span * (W - L - R); };
  auto sy = [&](double v) { return H - B - (v - lo) / span * (H - T - B); };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << title << "</text>\n";
  os << "<path d=\"M" << L << ' ' << H - B << " H" << W - R << " M" << L << ' ' << H - B << " V" << T
     << "\" stroke=\"black\" fill=\"none\"/>\n";
  const double step = std::pow(10.0, std::floor(std::log10(span / 5.0)));
  const double tick = span / step > 25 ? 5 * step : (span / step > 10 ? 2 * step : step);
  for (double v = std::ceil(lo / tick) * tick; v <= hi; v += tick) {
    os << "<path d=\"M" << sx(v) << ' ' << H - B << " v5 M" << L << ' ' << sy(v)
       << " h-5\" stroke=\"black\"/>\n";
    os << "<text x=\"" << sx(v) << "\" y=\"" << H - B + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << std::setprecision(0) << v
       << "</text>\n";
    os << "<text x=\"" << L - 8 << "\" y=\"" << sy(v) + 3
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << v << "</text>\n"
       << std::setprecision(2);
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">observed (min)</text>\n";
  os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"12\" transform=\"rotate(-90 16 "
     << (T + H - B) / 2 << ")\">predicted (min)</text>\n";
  os << "<path d=\"M" << sx(lo) << ' ' << sy(lo) << " L" << sx(hi) << ' ' << sy(hi)
     << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  for (const auto& p : points) {
    const double ci = ci_half_width(p.respondents, sd_minutes);
    os << "<path d=\"M" << sx(p.observed - ci) << ' ' << sy(p.predicted) << " H" << sx(p.observed + ci)
       << "\" stroke=\"#bbb\" stroke-width=\"2\"/>\n";
  }
  for (const auto& p : points)
    os << "<circle cx=\"" << sx(p.observed) << "\" cy=\"" << sy(p.predicted)
       << "\" r=\"2.5\" fill=\"#1f4e9c\"/>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace sfca
