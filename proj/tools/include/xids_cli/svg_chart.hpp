#pragma once

#include <string>
#include <vector>

namespace xids::cli {

struct Bar {
  std::string label;
  double value = 0.0;
};

/// Static horizontal bar chart, one bar per entry in the given order.
/// `comment` is embedded as an XML comment after the root element opens.
std::string bar_chart_svg(const std::vector<Bar>& bars, const std::string& title,
                          const std::string& comment = {});

}  // namespace xids::cli
