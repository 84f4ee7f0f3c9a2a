#include "drkf/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace drkf {
namespace {

constexpr int kWidth = 860;
constexpr int kHeight = 520;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 160;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string line_chart_svg(const std::string& title,
                           const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<ChartSeries>& series) {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  bool all_positive = true;
  for (const ChartSeries& s : series) {
    for (std::size_t m = 0; m < s.x.size(); ++m) {
      xmin = std::min(xmin, s.x[m]);
      xmax = std::max(xmax, s.x[m]);
      ymin = std::min(ymin, s.y[m]);
      ymax = std::max(ymax, s.y[m]);
      if (s.y[m] <= 0.0) all_positive = false;
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  const bool log_y = all_positive && ymin > 0.0 && ymax / ymin > 100.0;
  auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
  const double tymin = ty(ymin);
  const double tymax = ty(ymax);

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto px = [&](double x) {
    return kMarginLeft + plot_w * (x - xmin) / (xmax - xmin);
  };
  auto py = [&](double y) {
    return kMarginTop + plot_h * (1.0 - (ty(y) - tymin) / (tymax - tymin));
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
     << kHeight << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"16\">"
     << title << "</text>\n";

  // Axes + ticks.
  os << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
     << plot_w << "\" height=\"" << plot_h
     << "\" fill=\"none\" stroke=\"#333\"/>\n";
  const int ticks = 5;
  for (int t = 0; t <= ticks; ++t) {
    const double fx = xmin + (xmax - xmin) * t / ticks;
    os << "<line x1=\"" << px(fx) << "\" y1=\"" << kMarginTop + plot_h
       << "\" x2=\"" << px(fx) << "\" y2=\"" << kMarginTop + plot_h + 5
       << "\" stroke=\"#333\"/>\n"
       << "<text x=\"" << px(fx) << "\" y=\"" << kMarginTop + plot_h + 20
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << fmt(fx) << "</text>\n";
    const double tv = tymin + (tymax - tymin) * t / ticks;
    const double fy = log_y ? std::pow(10.0, tv) : tv;
    os << "<line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << py(fy)
       << "\" x2=\"" << kMarginLeft << "\" y2=\"" << py(fy)
       << "\" stroke=\"#333\"/>\n"
       << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << py(fy) + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << fmt(fy) << "</text>\n";
  }
  os << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\""
     << kHeight - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\">"
     << x_label << "</text>\n"
     << "<text x=\"18\" y=\"" << kMarginTop + plot_h / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\" transform=\"rotate(-90 18 "
     << kMarginTop + plot_h / 2 << ")\">" << y_label
     << (log_y ? " (log scale)" : "") << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(*kPalette))];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t m = 0; m < series[s].x.size(); ++m) {
      os << fmt(px(series[s].x[m])) << "," << fmt(py(series[s].y[m])) << " ";
    }
    os << "\"/>\n";
    const double ly = kMarginTop + 16.0 * (1 + static_cast<double>(s));
    os << "<line x1=\"" << kMarginLeft + plot_w + 10 << "\" y1=\"" << ly
       << "\" x2=\"" << kMarginLeft + plot_w + 34 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << kMarginLeft + plot_w + 40 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"12\">"
       << series[s].label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace drkf
