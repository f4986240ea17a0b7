#include "xids_cli/svg_chart.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace xids::cli {
namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
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

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string bar_chart_svg(const std::vector<Bar>& bars, const std::string& title,
                          const std::string& comment) {
  constexpr int kLabelWidth = 260;
  constexpr int kPlotWidth = 420;
  constexpr int kRowHeight = 22;
  constexpr int kTop = 40;
  const int height = kTop + static_cast<int>(bars.size()) * kRowHeight + 20;
  const int width = kLabelWidth + kPlotWidth + 90;

  double max_value = 0.0;
  for (const auto& b : bars) max_value = std::max(max_value, b.value);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  if (!comment.empty()) {
    std::string safe = comment;
    for (std::size_t p; (p = safe.find("--")) != std::string::npos;) safe.replace(p, 2, "- -");
    svg << "<!-- " << safe << " -->\n";
  }
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"10\" y=\"22\" font-size=\"15\">" << xml_escape(title) << "</text>\n";
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const int y = kTop + static_cast<int>(i) * kRowHeight;
    const double w = max_value > 0 ? bars[i].value / max_value * kPlotWidth : 0.0;
    svg << "<text x=\"" << kLabelWidth - 6 << "\" y=\"" << y + 15
        << "\" text-anchor=\"end\">" << xml_escape(bars[i].label) << "</text>\n";
    svg << "<rect x=\"" << kLabelWidth << "\" y=\"" << y + 3 << "\" width=\"" << fixed(w, 2)
        << "\" height=\"" << kRowHeight - 6 << "\" fill=\"#1f77b4\"/>\n";
    svg << "<text x=\"" << fixed(kLabelWidth + w + 4, 2) << "\" y=\"" << y + 15 << "\">"
        << fixed(bars[i].value, 4) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace xids::cli
