#include "fshadow/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace fshadow::cli::svg {

namespace {

constexpr double kWidth = 560, kHeight = 400, kLeft = 70, kRight = 150, kTop = 40, kBottom = 55;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Scale {
  double lo, hi, a, b;
  bool log;
  double operator()(double v) const {
    const double t = log ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
    return a + t * (b - a);
  }
};

Scale make_scale(double lo, double hi, double a, double b, bool log) {
  if (log) {
    lo = std::log10(lo);
    hi = std::log10(hi);
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  return {lo, hi, a, b, log};
}

// Sequential blue-to-yellow ramp.
std::string ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(68 + t * (253 - 68));
  const int g = static_cast<int>(1 + t * (231 - 1));
  const int b = static_cast<int>(84 + t * (37 - 84));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string line_plot(const Axes& axes, const std::vector<Series>& series) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((axes.log_x && s.x[i] <= 0) || (axes.log_y && s.y[i] <= 0) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!std::isfinite(xmin)) xmin = ymin = 1, xmax = ymax = 10;
  const auto sx = make_scale(xmin, xmax, kLeft, kWidth - kRight, axes.log_x);
  const auto sy = make_scale(ymin, ymax, kHeight - kBottom, kTop, axes.log_y);

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(axes.title)
     << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
     << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = sx.lo + (sx.hi - sx.lo) * t / 4, fy = sy.lo + (sy.hi - sy.lo) * t / 4;
    const double vx = axes.log_x ? std::pow(10.0, fx) : fx, vy = axes.log_y ? std::pow(10.0, fy) : fy;
    os << "<text x=\"" << sx(vx) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">" << num(vx)
       << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(vy) + 4 << "\" text-anchor=\"end\">" << num(vy) << "</text>\n";
  }
  os << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
     << escape(axes.x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << (kTop + kHeight - kBottom) / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(axes.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((axes.log_x && s.x[i] <= 0) || (axes.log_y && s.y[i] <= 0) || !std::isfinite(s.y[i])) continue;
      os << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
    }
    os << "\"/>\n";
    const double ly = kTop + 14 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << kWidth - kRight + 10 << "\" y1=\"" << ly << "\" x2=\"" << kWidth - kRight + 30
       << "\" y2=\"" << ly << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kWidth - kRight + 35 << "\" y=\"" << ly + 4 << "\">" << escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string heat_map(const std::string& title, const std::vector<std::vector<double>>& values,
                     const std::string& row_label, const std::string& col_label) {
  const std::size_t rows = values.size(), cols = rows ? values[0].size() : 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : values)
    for (double v : r) lo = std::min(lo, v), hi = std::max(hi, v);
  if (!(hi > lo)) hi = lo + 1.0;
  const double cell = std::min(280.0 / std::max<std::size_t>(cols, 1), 280.0 / std::max<std::size_t>(rows, 1));
  const double x0 = 60, y0 = 45, w = cell * static_cast<double>(cols) + 140, h = cell * static_cast<double>(rows) + 80;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
  for (std::size_t r = 0; r < rows; ++r) {
    os << "<text x=\"" << x0 - 6 << "\" y=\"" << y0 + cell * (static_cast<double>(r) + 0.5) + 4
       << "\" text-anchor=\"end\">" << r << "</text>\n";
    for (std::size_t c = 0; c < cols; ++c)
      os << "<rect x=\"" << x0 + cell * static_cast<double>(c) << "\" y=\"" << y0 + cell * static_cast<double>(r)
         << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"" << ramp((values[r][c] - lo) / (hi - lo))
         << "\"><title>" << num(values[r][c]) << "</title></rect>\n";
  }
  for (std::size_t c = 0; c < cols; ++c)
    os << "<text x=\"" << x0 + cell * (static_cast<double>(c) + 0.5) << "\" y=\"" << y0 - 6
       << "\" text-anchor=\"middle\">" << c << "</text>\n";
  os << "<text x=\"" << x0 + cell * static_cast<double>(cols) / 2 << "\" y=\"" << y0 + cell * static_cast<double>(rows) + 22
     << "\" text-anchor=\"middle\">" << escape(col_label) << "</text>\n";
  os << "<text transform=\"translate(18," << y0 + cell * static_cast<double>(rows) / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(row_label) << "</text>\n";
  const double bx = x0 + cell * static_cast<double>(cols) + 20;
  for (int t = 0; t < 20; ++t)
    os << "<rect x=\"" << bx << "\" y=\"" << y0 + (19 - t) * cell * static_cast<double>(rows) / 20
       << "\" width=\"14\" height=\"" << cell * static_cast<double>(rows) / 20 + 0.5 << "\" fill=\"" << ramp(t / 19.0)
       << "\"/>\n";
  os << "<text x=\"" << bx + 18 << "\" y=\"" << y0 + 10 << "\">" << num(hi) << "</text>\n";
  os << "<text x=\"" << bx + 18 << "\" y=\"" << y0 + cell * static_cast<double>(rows) << "\">" << num(lo) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace fshadow::cli::svg
