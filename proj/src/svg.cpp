#include "epl/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace epl {
namespace {

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string class_colour(Label label) {
  if (label == kUnlabeled) return "#000000";
  if (label < 0) throw Error("class_colour: invalid label " + std::to_string(label));
  if (static_cast<std::size_t>(label) < kPalette.size()) return kPalette[static_cast<std::size_t>(label)];
  // Golden-angle hues past the fixed palette, at fixed saturation/value.
  const double hue = std::fmod(static_cast<double>(label) * 137.508, 360.0) / 60.0;
  const double c = 0.75 * 0.9;
  const double x = c * (1.0 - std::abs(std::fmod(hue, 2.0) - 1.0));
  const double m = 0.9 - c;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hue)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround((r + m) * 255)),
                static_cast<int>(std::lround((g + m) * 255)), static_cast<int>(std::lround((b + m) * 255)));
  return buf;
}

std::string render_scatter(const Matrix& coords, const LabelVector& labels, const ScatterStyle& style) {
  if (coords.cols() != 2) throw Error("render_scatter: coordinates must be n x 2");
  if (labels.size() != coords.rows()) throw Error("render_scatter: label count does not match the embedding");
  const std::size_t n = coords.rows();
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (n > 0) {
    x0 = x1 = coords(0, 0);
    y0 = y1 = coords(0, 1);
    for (std::size_t i = 1; i < n; ++i) {
      x0 = std::min(x0, coords(i, 0));
      x1 = std::max(x1, coords(i, 0));
      y0 = std::min(y0, coords(i, 1));
      y1 = std::max(y1, coords(i, 1));
    }
  }
  const double w = style.width - 2 * style.margin;
  const double h = style.height - 2 * style.margin;
  const double sx = x1 > x0 ? w / (x1 - x0) : 0.0;
  const double sy = y1 > y0 ? h / (y1 - y0) : 0.0;

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(style.width) + "\" height=\"" +
         fixed(style.height) + "\" viewBox=\"0 0 " + fixed(style.width) + " " + fixed(style.height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  // Unlabeled points first so class colours stay visible on top.
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < n; ++i) {
      if ((labels.values[i] == kUnlabeled) != (pass == 0)) continue;
      const double px = style.margin + (sx > 0 ? (coords(i, 0) - x0) * sx : w / 2);
      const double py = style.margin + h - (sy > 0 ? (coords(i, 1) - y0) * sy : h / 2);
      out += "<circle cx=\"" + fixed(px) + "\" cy=\"" + fixed(py) + "\" r=\"" + fixed(style.radius) +
             "\" fill=\"" + class_colour(labels.values[i]) + "\"/>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

void emit_scatter(const Matrix& coords, const LabelVector& labels, const std::filesystem::path& path,
                  const ScatterStyle& style) {
  const auto svg = render_scatter(coords, labels, style);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << svg;
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace epl
