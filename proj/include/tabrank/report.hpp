#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "evaluation.hpp"

namespace tabrank {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

// Static line chart of accuracy against subset size, one polyline per model.
// NA cells are left out of their model's line.
inline void write_accuracy_svg(std::ostream& out, const AccuracyMatrix& mx) {
  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                   "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#ad494a"};
  constexpr double W = 900, H = 520, left = 70, right = 210, top = 30, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;

  double lo = 1.0;
  for (std::size_t i = 0; i < mx.rows(); ++i)
    for (std::size_t m = 0; m < mx.cols(); ++m)
      if (auto a = mx.accuracy(i, m)) lo = std::min(lo, *a);
  lo = std::max(0.0, std::floor(lo * 10.0) / 10.0);
  if (lo >= 1.0) lo = 0.9;
  const double hi = 1.0;
  const std::size_t nx = std::max<std::size_t>(mx.rows(), 1);
  const double x_first = mx.subset_sizes.empty() ? 1.0 : static_cast<double>(mx.subset_sizes.front());
  const double x_last = mx.subset_sizes.empty() ? 1.0 : static_cast<double>(mx.subset_sizes.back());
  auto px = [&](double r) { return nx <= 1 ? left + pw / 2 : left + (r - x_first) / (x_last - x_first) * pw; };
  auto py = [&](double a) { return top + (hi - a) / (hi - lo) * ph; };
  char buf[128];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  // Axes
  out << "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph << "\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n";
  out << "</g>\n<g id=\"ticks\">\n";
  for (std::size_t i = 0; i < mx.rows(); ++i) {
    const double x = px(static_cast<double>(mx.subset_sizes[i]));
    out << "<line x1=\"" << num(x) << "\" y1=\"" << top + ph << "\" x2=\"" << num(x) << "\" y2=\"" << top + ph + 5
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(x) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << mx.subset_sizes[i]
        << "</text>\n";
  }
  const int steps = static_cast<int>(std::lround((hi - lo) / 0.05));
  for (int s = 0; s <= steps; ++s) {
    const double a = lo + (hi - lo) * s / std::max(steps, 1);
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << num(py(a)) << "\" x2=\"" << left << "\" y2=\"" << num(py(a))
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << num(py(a) + 4) << "\" text-anchor=\"end\">" << num(a)
        << "</text>\n";
  }
  out << "</g>\n";
  out << "<text id=\"x-label\" x=\"" << left + pw / 2 << "\" y=\"" << H - 15
      << "\" text-anchor=\"middle\">Number of top-ranked features</text>\n";
  out << "<text id=\"y-label\" x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << top + ph / 2 << ")\">Cross-validated accuracy</text>\n";

  out << "<g id=\"series\" fill=\"none\" stroke-width=\"2\">\n";
  for (std::size_t m = 0; m < mx.cols(); ++m) {
    out << "<polyline data-model=\"" << xml_escape(mx.models[m]) << "\" stroke=\"" << kPalette[m % 12]
        << "\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < mx.rows(); ++i) {
      auto a = mx.accuracy(i, m);
      if (!a) continue;
      if (!first) out << ' ';
      first = false;
      out << num(px(static_cast<double>(mx.subset_sizes[i]))) << ',' << num(py(*a));
    }
    out << "\"/>\n";
  }
  out << "</g>\n<g id=\"legend\">\n";
  for (std::size_t m = 0; m < mx.cols(); ++m) {
    const double y = top + 10 + 18.0 * static_cast<double>(m);
    out << "<line x1=\"" << W - right + 15 << "\" y1=\"" << y << "\" x2=\"" << W - right + 40 << "\" y2=\"" << y
        << "\" stroke=\"" << kPalette[m % 12] << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << W - right + 46 << "\" y=\"" << y + 4 << "\">" << xml_escape(mx.models[m]) << "</text>\n";
  }
  out << "</g>\n</svg>\n";
}

}  // namespace tabrank
