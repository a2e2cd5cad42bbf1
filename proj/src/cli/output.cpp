#include "zeno/output.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "zeno/error.hpp"

namespace zeno {

std::string format_number(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

std::vector<std::optional<double>> CsvTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ValidationError("CSV has no column '" + name + "'");
  const auto k = static_cast<std::size_t>(it - columns.begin());
  std::vector<std::optional<double>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

std::optional<std::string> CsvTable::header_value(const std::string& key) const {
  for (const auto& [k, v] : header)
    if (k == key) return v;
  return std::nullopt;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  for (const auto& [key, value] : table.header) {
    std::string flat = value;
    std::replace(flat.begin(), flat.end(), '\n', ' ');
    out << "# " << key << '=' << flat << '\n';
  }
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw ValidationError("CSV row width differs from the header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      if (row[i]) out << format_number(*row[i]);
    }
    out << '\n';
  }
  if (!out) throw ValidationError("failed while writing '" + path + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  CsvTable table;
  std::string line;
  bool have_columns = false;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    parts.push_back(cur);
    return parts;
  };
  while (std::getline(in, line)) {
    if (!have_columns && line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ValidationError(path + ": header line without '='");
      table.header.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
    } else if (!have_columns) {
      table.columns = split(line);
      have_columns = true;
    } else if (!line.empty()) {
      const auto parts = split(line);
      if (parts.size() != table.columns.size()) throw ValidationError(path + ": ragged row");
      std::vector<std::optional<double>> row;
      for (const auto& p : parts) {
        if (p.empty()) {
          row.emplace_back();
          continue;
        }
        double x = 0.0;
        const auto res = std::from_chars(p.data(), p.data() + p.size(), x);
        if (res.ec != std::errc() || res.ptr != p.data() + p.size())
          throw ValidationError(path + ": bad number '" + p + "'");
        row.emplace_back(x);
      }
      table.rows.push_back(std::move(row));
    }
  }
  if (!have_columns) throw ValidationError(path + ": no column line");
  return table;
}

namespace {

constexpr double kPlotWidth = 450, kHeight = 480;
constexpr double kLeft = 80, kTop = 40, kBottom = 60;
constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                 "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

struct Axis {
  bool log;
  double lo, hi;  // in transformed units (log10 for log axes)
  std::vector<double> ticks;

  double transform(double x) const { return log ? std::log10(x) : x; }
  double fraction(double x) const { return (transform(x) - lo) / (hi - lo); }
};

Axis make_axis(bool log, double lo, double hi) {
  Axis a{log, 0, 1, {}};
  if (!(lo <= hi)) lo = hi = log ? 1.0 : 0.0;
  if (log) {
    a.lo = std::floor(std::log10(lo));
    a.hi = std::ceil(std::log10(hi));
    if (a.hi <= a.lo) a.hi = a.lo + 1;
    const int stride = std::max(1, static_cast<int>(std::ceil((a.hi - a.lo) / 8.0)));
    for (int e = static_cast<int>(a.lo); e <= static_cast<int>(a.hi); e += stride) a.ticks.push_back(std::pow(10.0, e));
    return a;
  }
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  a.lo = std::floor(lo / step) * step;
  a.hi = std::ceil(hi / step) * step;
  for (double t = a.lo; t <= a.hi + 0.5 * step; t += step) a.ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return a;
}

struct Points {
  std::vector<double> x, y, err;
};

}  // namespace

void write_svg(const std::string& path, const PlotSpec& spec) {
  std::vector<Points> data;
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : spec.series) {
    const CsvTable t = read_csv(s.csv_path);
    const auto xs = t.column(s.x_column);
    const auto ys = t.column(s.y_column);
    std::vector<std::optional<double>> es(xs.size());
    if (!s.error_column.empty()) es = t.column(s.error_column);
    Points p;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!xs[i] || !ys[i] || !std::isfinite(*xs[i]) || !std::isfinite(*ys[i])) continue;
      if ((spec.log_x && !(*xs[i] > 0)) || (spec.log_y && !(*ys[i] > 0))) continue;
      p.x.push_back(*xs[i]);
      p.y.push_back(*ys[i]);
      p.err.push_back(es[i] ? *es[i] : 0.0);
      xlo = std::min(xlo, *xs[i]);
      xhi = std::max(xhi, *xs[i]);
      ylo = std::min(ylo, *ys[i]);
      yhi = std::max(yhi, *ys[i]);
    }
    data.push_back(std::move(p));
  }
  const Axis ax = make_axis(spec.log_x, xlo, xhi);
  const Axis ay = make_axis(spec.log_y, ylo, yhi);
  std::size_t longest = 0;
  for (const auto& s : spec.series) longest = std::max(longest, s.label.size());
  const double width = kLeft + kPlotWidth + 60 + 7.0 * static_cast<double>(longest);
  const double pw = kPlotWidth, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + pw * std::clamp(ax.fraction(x), -0.05, 1.05); };
  auto py = [&](double y) { return kTop + ph * (1.0 - std::clamp(ay.fraction(y), -0.05, 1.05)); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fixed(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
    << escape_xml(spec.title) << "</text>\n";
  o << "<defs><clipPath id=\"plot\"><rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw
    << "\" height=\"" << ph << "\"/></clipPath></defs>\n";
  for (double t : ax.ticks) {
    const double x = kLeft + pw * ax.fraction(t);
    o << "<line x1=\"" << fixed(x) << "\" y1=\"" << kTop << "\" x2=\"" << fixed(x) << "\" y2=\"" << kTop + ph
      << "\" stroke=\"#e0e0e0\"/>\n";
    o << "<text x=\"" << fixed(x) << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">" << tick_label(t)
      << "</text>\n";
  }
  for (double t : ay.ticks) {
    const double y = kTop + ph * (1.0 - ay.fraction(t));
    o << "<line x1=\"" << kLeft << "\" y1=\"" << fixed(y) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << fixed(y)
      << "\" stroke=\"#e0e0e0\"/>\n";
    o << "<text x=\"" << kLeft - 6 << "\" y=\"" << fixed(y + 4) << "\" text-anchor=\"end\">" << tick_label(t)
      << "</text>\n";
  }
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << fixed(kLeft + pw / 2) << "\" y=\"" << kHeight - 18 << "\" text-anchor=\"middle\">"
    << escape_xml(spec.x_label) << "</text>\n";
  o << "<text x=\"20\" y=\"" << fixed(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
    << fixed(kTop + ph / 2) << ")\">" << escape_xml(spec.y_label) << "</text>\n";

  o << "<g clip-path=\"url(#plot)\">\n";
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto& s = spec.series[k];
    const auto& p = data[k];
    const char* color = kPalette[k % kPalette.size()];
    if (s.markers) {
      for (std::size_t i = 0; i < p.x.size(); ++i) {
        if (p.err[i] > 0) {
          const double lo = spec.log_y ? std::max(p.y[i] - p.err[i], p.y[i] * 1e-3) : p.y[i] - p.err[i];
          o << "<line x1=\"" << fixed(px(p.x[i])) << "\" y1=\"" << fixed(py(lo)) << "\" x2=\"" << fixed(px(p.x[i]))
            << "\" y2=\"" << fixed(py(p.y[i] + p.err[i])) << "\" stroke=\"" << color << "\"/>\n";
        }
        o << "<circle cx=\"" << fixed(px(p.x[i])) << "\" cy=\"" << fixed(py(p.y[i])) << "\" r=\"2.5\" fill=\""
          << color << "\"/>\n";
      }
    } else if (!p.x.empty()) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
        << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
      for (std::size_t i = 0; i < p.x.size(); ++i) o << (i ? " " : "") << fixed(px(p.x[i])) << ',' << fixed(py(p.y[i]));
      o << "\"/>\n";
    }
  }
  o << "</g>\n";

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const double y = kTop + 10 + 18.0 * static_cast<double>(k);
    const double x = kLeft + pw + 12;
    const char* color = kPalette[k % kPalette.size()];
    if (spec.series[k].markers)
      o << "<circle cx=\"" << fixed(x + 12) << "\" cy=\"" << fixed(y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    else
      o << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(y) << "\" x2=\"" << fixed(x + 24) << "\" y2=\"" << fixed(y)
        << "\" stroke=\"" << color << "\" stroke-width=\"1.5\""
        << (spec.series[k].dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    o << "<text x=\"" << fixed(x + 30) << "\" y=\"" << fixed(y + 4) << "\">" << escape_xml(spec.series[k].label)
      << "</text>\n";
  }
  o << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << o.str();
  if (!out) throw ValidationError("failed while writing '" + path + "'");
}

}  // namespace zeno
