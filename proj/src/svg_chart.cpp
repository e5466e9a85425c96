#include "dropkit/svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dropkit {

namespace {
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  return cells;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}
}  // namespace

ChartSeries series_from_csv(const std::string& csv_text, const std::string& x_column,
                            const std::string& y_column) {
  std::istringstream is(csv_text);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty CSV");
  const auto header = split_csv_line(line);
  std::size_t xi = header.size(), yi = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == x_column) xi = i;
    if (header[i] == y_column) yi = i;
  }
  if (xi == header.size()) throw std::runtime_error("CSV has no column " + x_column);
  if (yi == header.size()) throw std::runtime_error("CSV has no column " + y_column);

  ChartSeries s;
  s.label = y_column;
  while (std::getline(is, line)) {
    const auto cells = split_csv_line(line);
    if (cells.size() <= std::max(xi, yi)) continue;
    try {
      std::size_t px = 0, py = 0;
      const double x = std::stod(cells[xi], &px);
      const double y = std::stod(cells[yi], &py);
      if (px == 0 || py == 0) continue;
      s.x.push_back(x);
      s.y.push_back(y);
    } catch (const std::exception&) {
      continue;  // skipped / non-numeric rows
    }
  }
  return s;
}

std::string render_svg_chart(const std::string& title, const std::string& x_label,
                             const std::string& y_label, const std::vector<ChartSeries>& series,
                             bool log_x) {
  constexpr double W = 840, H = 560, ml = 90, mr = 30, mt = 50, mb = 70;
  const double pw = W - ml - mr, ph = H - mt - mb;

  double xmin = 1e300, xmax = -1e300, ymin = 0, ymax = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double x = log_x ? std::log10(std::max(s.x[i], 1e-12)) : s.x[i];
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  ymax *= 1.05;

  const auto X = [&](double x) {
    const double v = log_x ? std::log10(std::max(x, 1e-12)) : x;
    return ml + (v - xmin) / (xmax - xmin) * pw;
  };
  const auto Y = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << W / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"18\" "
        "font-family=\"sans-serif\">"
     << title << "</text>\n";

  // axes
  os << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
     << mt + ph << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
     << "\" stroke=\"black\"/>\n";

  for (int t = 0; t <= 5; ++t) {
    const double fy = ymin + (ymax - ymin) * t / 5.0;
    const double yy = Y(fy);
    os << "<line x1=\"" << ml - 4 << "\" y1=\"" << yy << "\" x2=\"" << ml + pw << "\" y2=\"" << yy
       << "\" stroke=\"#dddddd\"/>\n"
       << "<text x=\"" << ml - 8 << "\" y=\"" << yy + 4
       << "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">" << fmt(fy)
       << "</text>\n";
    const double fxv = xmin + (xmax - xmin) * t / 5.0;
    const double fx = log_x ? std::pow(10.0, fxv) : fxv;
    const double xx = ml + pw * t / 5.0;
    os << "<text x=\"" << xx << "\" y=\"" << mt + ph + 20
       << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" << fmt(fx)
       << "</text>\n";
  }
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 16
     << "\" text-anchor=\"middle\" font-size=\"14\" font-family=\"sans-serif\">" << x_label
     << "</text>\n"
     << "<text x=\"20\" y=\"" << mt + ph / 2
     << "\" text-anchor=\"middle\" font-size=\"14\" font-family=\"sans-serif\" "
        "transform=\"rotate(-90 20 "
     << mt + ph / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = colors[si % 5];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << X(s.x[i]) << "," << Y(s.y[i]) << " ";
    os << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << "<circle cx=\"" << X(s.x[i]) << "\" cy=\"" << Y(s.y[i]) << "\" r=\"3\" fill=\""
         << color << "\"/>\n";
    os << "<text x=\"" << ml + pw - 8 << "\" y=\"" << mt + 16 + 16 * si
       << "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\" fill=\"" << color
       << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void plot_csv_to_svg(const std::string& csv_path, const std::string& x_column,
                     const std::string& y_column, const std::string& svg_path, bool log_x) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open " + csv_path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const ChartSeries s = series_from_csv(ss.str(), x_column, y_column);
  if (s.x.empty()) throw std::runtime_error("no numeric rows for " + x_column + "/" + y_column);
  std::ofstream out(svg_path);
  if (!out) throw std::runtime_error("cannot open " + svg_path);
  out << render_svg_chart(y_column + " vs " + x_column, x_column, y_column, {s}, log_x);
}

}  // namespace dropkit
