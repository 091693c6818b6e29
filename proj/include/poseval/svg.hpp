#pragma once

#include <string>

#include "poseval/metrics.hpp"

namespace poseval {

struct SvgStyle {
  int width = 480;
  int height = 400;
  int margin = 56;
};

/// Self-contained SVG of a precision-recall curve on fixed [0,1] axes.
/// An empty curve yields the axes only. Output is a pure function of the input.
std::string pr_curve_svg(const PRCurve& curve, const std::string& title, const SvgStyle& style = {});

}  // namespace poseval
