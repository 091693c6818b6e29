#include "poseval/svg.hpp"

#include <cstdio>

namespace poseval {

namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
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

}  // namespace

std::string pr_curve_svg(const PRCurve& curve, const std::string& title, const SvgStyle& style) {
  const double x0 = style.margin;
  const double y0 = style.height - style.margin;
  const double pw = style.width - 1.5 * style.margin;
  const double ph = style.height - 2.0 * style.margin;
  const auto px = [&](double r) { return x0 + r * pw; };
  const auto py = [&](double p) { return y0 - p * ph; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width) + "\" height=\"" +
       std::to_string(style.height) + "\" viewBox=\"0 0 " + std::to_string(style.width) + " " +
       std::to_string(style.height) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(style.width) + "\" height=\"" + std::to_string(style.height) +
       "\" fill=\"#ffffff\"/>\n";
  s += "<text x=\"" + fixed(style.width / 2.0) + "\" y=\"" + fixed(style.margin / 2.0) +
       "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" + escape(title) + "</text>\n";

  // grid and tick labels
  for (int i = 0; i <= 10; ++i) {
    const double f = i / 10.0;
    s += "<line x1=\"" + fixed(px(f)) + "\" y1=\"" + fixed(py(0)) + "\" x2=\"" + fixed(px(f)) + "\" y2=\"" +
         fixed(py(1)) + "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
    s += "<line x1=\"" + fixed(px(0)) + "\" y1=\"" + fixed(py(f)) + "\" x2=\"" + fixed(px(1)) + "\" y2=\"" +
         fixed(py(f)) + "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
    if (i % 2 == 0) {
      s += "<text x=\"" + fixed(px(f)) + "\" y=\"" + fixed(y0 + 16) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" + fixed(f, 1) + "</text>\n";
      s += "<text x=\"" + fixed(x0 - 6) + "\" y=\"" + fixed(py(f) + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" + fixed(f, 1) + "</text>\n";
    }
  }
  s += "<line x1=\"" + fixed(px(0)) + "\" y1=\"" + fixed(py(0)) + "\" x2=\"" + fixed(px(1)) + "\" y2=\"" +
       fixed(py(0)) + "\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
  s += "<line x1=\"" + fixed(px(0)) + "\" y1=\"" + fixed(py(0)) + "\" x2=\"" + fixed(px(0)) + "\" y2=\"" +
       fixed(py(1)) + "\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
  s += "<text x=\"" + fixed(px(0.5)) + "\" y=\"" + fixed(y0 + 36) +
       "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">recall</text>\n";
  s += "<text x=\"" + fixed(x0 - 40) + "\" y=\"" + fixed(py(0.5)) +
       "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 " +
       fixed(x0 - 40) + " " + fixed(py(0.5)) + ")\">precision</text>\n";

  if (!curve.points.empty()) {
    s += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      if (i) s += ' ';
      s += fixed(px(curve.points[i].recall)) + "," + fixed(py(curve.points[i].precision));
    }
    s += "\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace poseval
