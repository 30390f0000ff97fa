#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "anderson/cli.hpp"
#include "anderson/error.hpp"
#include "anderson/format.hpp"
#include "anderson/ids.hpp"
#include "anderson/stats.hpp"

namespace anderson::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, const std::filesystem::path& p) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw SchemaError("non-numeric cell '" + s + "' in " + p.string());
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  if (std::abs(v) < 1e-12) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

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

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

/// Round step of about span / 5 from {1, 2, 5} x 10^k.
double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0})
    if (m * mag >= raw) return m * mag;
  return 10.0 * mag;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw SchemaError("missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) throw SchemaError("cannot read " + p.string());
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw SchemaError("empty CSV " + p.string());
  t.header = split_csv_line(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto row = split_csv_line(line);
    if (row.size() != t.header.size()) throw SchemaError("ragged row in " + p.string());
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string render_svg(const Figure& fig) {
  constexpr double W = 640, H = 420, left = 70, right = 170, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;

  double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
  auto extend = [](double v, double& lo, double& hi) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (const Series& s : fig.series) {
    for (double v : s.x) extend(v, xmin, xmax);
    for (double v : s.y) extend(v, ymin, ymax);
    for (double v : s.lo) extend(v, ymin, ymax);
    for (double v : s.hi) extend(v, ymin, ymax);
  }
  if (!(xmin <= xmax)) xmin = 0.0, xmax = 1.0;
  if (!(ymin <= ymax)) ymin = 0.0, ymax = 1.0;
  if (xmax - xmin < 1e-12) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(W) << "\" height=\"" << num(H) << "\" viewBox=\"0 0 "
     << num(W) << ' ' << num(H) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << num(W) << "\" height=\"" << num(H) << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(W / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(fig.title)
     << "</text>\n";

  // Axes and ticks.
  os << "<g stroke=\"black\" fill=\"none\">\n";
  os << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(left + pw) << "\" y2=\""
     << num(top + ph) << "\"/>\n";
  os << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\"" << num(top + ph)
     << "\"/>\n";
  os << "</g>\n<g font-size=\"10\">\n";
  const double xs = nice_step(xmax - xmin), ys = nice_step(ymax - ymin);
  for (double t = std::ceil(xmin / xs - 1e-9) * xs; t <= xmax + 1e-9 * xs; t += xs) {
    os << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(sx(t)) << "\" y2=\""
       << num(top + ph + 5) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << num(sx(t)) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">" << tick_label(t)
       << "</text>\n";
  }
  for (double t = std::ceil(ymin / ys - 1e-9) * ys; t <= ymax + 1e-9 * ys; t += ys) {
    os << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << num(left) << "\" y2=\""
       << num(sy(t)) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << num(left - 8) << "\" y=\"" << num(sy(t) + 3) << "\" text-anchor=\"end\">" << tick_label(t)
       << "</text>\n";
  }
  os << "</g>\n";
  os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(H - 16) << "\" text-anchor=\"middle\">"
     << escape(fig.xlabel) << "</text>\n";
  os << "<text x=\"16\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << num(top + ph / 2) << ")\">" << escape(fig.ylabel) << "</text>\n";

  for (std::size_t i = 0; i < fig.series.size(); ++i) {
    const Series& s = fig.series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    if (!s.lo.empty() && s.lo.size() == s.x.size() && s.hi.size() == s.x.size()) {
      os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (std::size_t k = 0; k < s.x.size(); ++k) os << num(sx(s.x[k])) << ',' << num(sy(s.hi[k])) << ' ';
      for (std::size_t k = s.x.size(); k-- > 0;) os << num(sx(s.x[k])) << ',' << num(sy(s.lo[k])) << ' ';
      os << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k)
      if (std::isfinite(s.x[k]) && std::isfinite(s.y[k])) os << num(sx(s.x[k])) << ',' << num(sy(s.y[k])) << ' ';
    os << "\"/>\n";
    const double ly = top + 10 + 18.0 * static_cast<double>(i);
    os << "<line x1=\"" << num(left + pw + 15) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(left + pw + 35)
       << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>";
    os << "<text class=\"legend\" x=\"" << num(left + pw + 40) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

Figure make_figure(const std::string& kind, const std::vector<std::filesystem::path>& files, int dim) {
  Figure fig;
  if (kind == "ids") {
    fig = {"Integrated density of states", "lambda", "N(lambda) / |U|", {}};
    std::vector<std::pair<std::string, std::pair<double, std::string>>> order;
    std::map<std::string, Series> by_key;
    std::set<std::string> bcs;
    for (const auto& p : files) {
      const CsvTable t = read_csv(p);
      const std::size_t bc = t.column("bc"), L = t.column("L"), lam = t.column("lambda"),
                        mean = t.column("mean_count_per_volume"), se = t.column("stderr");
      for (const auto& row : t.rows) {
        const std::string key = row[bc] + "|" + row[L];
        if (!by_key.count(key)) order.push_back({key, {to_double(row[L], p), row[bc]}});
        bcs.insert(row[bc]);
        Series& s = by_key[key];
        const double m = to_double(row[mean], p), e = to_double(row[se], p);
        s.x.push_back(to_double(row[lam], p));
        s.y.push_back(m);
        s.lo.push_back(m - 2.0 * e);
        s.hi.push_back(m + 2.0 * e);
      }
    }
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      return a.second.second != b.second.second ? a.second.second < b.second.second : a.second.first < b.second.first;
    });
    for (const auto& [key, info] : order) {
      Series s = by_key[key];
      const std::string L = key.substr(key.find('|') + 1);
      s.label = bcs.size() > 1 ? info.second + " " + L : L;
      fig.series.push_back(std::move(s));
    }
  } else if (kind == "weyl") {
    fig = {"Weyl ratio", "lambda", "N(lambda) / (|U| lambda^{d/2})", {}};
    const double target = weyl_constant(dim);
    for (const auto& p : files) {
      const CsvTable t = read_csv(p);
      const std::size_t lam = t.column("lambda"), mean = t.column("mean_count_per_volume"), bc = t.column("bc");
      Series s;
      for (const auto& row : t.rows) {
        const double l = to_double(row[lam], p);
        if (l <= 0.0) continue;
        s.label = row[bc];
        s.x.push_back(l);
        s.y.push_back(to_double(row[mean], p) / std::pow(l, dim / 2.0));
      }
      if (!s.x.empty()) fig.series.push_back(std::move(s));
    }
    if (!fig.series.empty()) {
      double lo = kInf, hi = -kInf;
      for (const Series& s : fig.series) {
        lo = std::min(lo, s.x.front());
        hi = std::max(hi, s.x.back());
      }
      fig.series.push_back({"Weyl constant", {lo, hi}, {target, target}, {}, {}});
    }
  } else if (kind == "renorm") {
    fig = {"Renormalization constant", "log(1/epsilon)", "c_epsilon", {}};
    for (const auto& p : files) {
      const CsvTable t = read_csv(p);
      const std::size_t eps = t.column("epsilon"), c = t.column("c_eps"), se = t.column("std_error"),
                        method = t.column("method");
      Series s;
      for (const auto& row : t.rows) {
        const double v = to_double(row[c], p), e = to_double(row[se], p);
        s.label = row[method];
        s.x.push_back(std::log(1.0 / to_double(row[eps], p)));
        s.y.push_back(v);
        s.lo.push_back(v - 2.0 * e);
        s.hi.push_back(v + 2.0 * e);
      }
      if (s.x.empty()) continue;
      if (dim == 2) {
        // Reference line of slope 1/(2 pi) through the first point.
        const double slope = 1.0 / (2.0 * std::numbers::pi);
        Series ref{"slope 1/(2pi)", {s.x.front(), s.x.back()},
                   {s.y.front(), s.y.front() + slope * (s.x.back() - s.x.front())}, {}, {}};
        fig.series.push_back(std::move(s));
        fig.series.push_back(std::move(ref));
      } else {
        fig.series.push_back(std::move(s));
      }
    }
  } else if (kind == "besov") {
    fig = {"Littlewood-Paley block norms", "j", "mean log2 ||Delta_j f||", {}};
    for (const auto& p : files) {
      const CsvTable t = read_csv(p);
      const std::size_t j = t.column("j"), norm = t.column("norm");
      std::map<int, std::vector<double>> logs;
      for (const auto& row : t.rows)
        logs[static_cast<int>(to_double(row[j], p))].push_back(std::log2(to_double(row[norm], p)));
      Series s;
      s.label = p.parent_path().filename().string().empty() ? p.filename().string() : p.parent_path().filename().string();
      for (const auto& [level, v] : logs) {
        const double m = stats::mean(v), e = v.size() > 1 ? stats::standard_error(v) : 0.0;
        s.x.push_back(level);
        s.y.push_back(m);
        s.lo.push_back(m - 2.0 * e);
        s.hi.push_back(m + 2.0 * e);
      }
      if (!s.x.empty()) fig.series.push_back(std::move(s));
    }
  } else {
    throw SchemaError("unknown plot kind '" + kind + "'");
  }
  return fig;
}

}  // namespace anderson::cli
