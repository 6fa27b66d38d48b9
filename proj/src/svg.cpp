#include "mflab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "mflab/report.hpp"

namespace mflab {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

void write_svg_plot(std::ostream& out, const PlotSpec& spec, const std::vector<Series>& series) {
  auto tx = [&](double v) { return spec.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.logy ? std::log10(v) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double a = tx(s.x[i]), b = ty(s.y[i]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      x0 = std::min(x0, a);
      x1 = std::max(x1, a);
      y0 = std::min(y0, b);
      y1 = std::max(y1, b);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double ml = 70, mr = 150, mt = 40, mb = 50;
  const double pw = spec.width - ml - mr, ph = spec.height - mt - mb;
  auto px = [&](double a) { return ml + (a - x0) / (x1 - x0) * pw; };
  auto py = [&](double b) { return mt + ph - (b - y0) / (y1 - y0) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << spec.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(spec.title)
      << "</text>\n";
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double a = x0 + (x1 - x0) * i / 4, b = y0 + (y1 - y0) * i / 4;
    out << "<text x=\"" << px(a) << "\" y=\"" << mt + ph + 16 << "\" text-anchor=\"middle\">"
        << fmt(spec.logx ? std::pow(10, a) : a) << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << py(b) + 4 << "\" text-anchor=\"end\">"
        << fmt(spec.logy ? std::pow(10, b) : b) << "</text>\n";
  }
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << spec.height - 10 << "\" text-anchor=\"middle\">"
      << escape(spec.xlabel) << "</text>\n";
  out << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << mt + ph / 2 << ")\">" << escape(spec.ylabel) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof *kPalette)];
    const auto& ser = series[s];
    if (spec.scatter) {
      for (std::size_t i = 0; i < ser.x.size(); ++i) {
        const double a = tx(ser.x[i]), b = ty(ser.y[i]);
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        out << "<circle cx=\"" << fmt(px(a)) << "\" cy=\"" << fmt(py(b)) << "\" r=\"1.5\" fill=\"" << color << "\"/>\n";
      }
    } else {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
      for (std::size_t i = 0; i < ser.x.size(); ++i) {
        const double a = tx(ser.x[i]), b = ty(ser.y[i]);
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        out << fmt(px(a)) << ',' << fmt(py(b)) << ' ';
      }
      out << "\"/>\n";
    }
    if (!ser.label.empty() && s < 12)
      out << "<text x=\"" << ml + pw + 10 << "\" y=\"" << mt + 14 + 16 * s << "\" fill=\"" << color << "\">"
          << escape(ser.label) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace mflab
