#include "sefce/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sefce/errors.hpp"

namespace sefce {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 64, kRight = 24, kTop = 40, kBottom = 48;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string render_epf_svg(const std::vector<PlotSeries>& series,
                           const std::string& title) {
  if (series.empty()) throw bad_parameter("plot needs at least one series");
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const PlotSeries& s : series) {
    if (s.knots.empty()) throw bad_parameter("plot series has no knots");
    for (const Knot& k : s.knots) {
      xlo = std::min(xlo, k.x);
      xhi = std::max(xhi, k.x);
      ylo = std::min(ylo, k.y);
      yhi = std::max(yhi, k.y);
    }
  }
  // Pad degenerate and near-degenerate ranges so points stay visible.
  if (xhi - xlo < 1e-12) { xlo -= 0.5; xhi += 0.5; }
  if (yhi - ylo < 1e-12) { ylo -= 0.5; yhi += 0.5; }
  double xpad = 0.05 * (xhi - xlo), ypad = 0.05 * (yhi - ylo);
  xlo -= xpad; xhi += xpad; ylo -= ypad; yhi += ypad;

  auto px = [&](double x) {
    return kLeft + (x - xlo) / (xhi - xlo) * (kWidth - kLeft - kRight);
  };
  auto py = [&](double y) {
    return kHeight - kBottom -
           (y - ylo) / (yhi - ylo) * (kHeight - kTop - kBottom);
  };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
         "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) +
         " " + num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    svg += "<text x=\"" + num(kWidth / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"15\">" +
           escape(title) + "</text>\n";
  }

  // Axes with four tick intervals each.
  svg += "<g stroke=\"#333\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kHeight - kBottom) +
         "\" x2=\"" + num(kWidth - kRight) + "\" y2=\"" +
         num(kHeight - kBottom) + "\"/>\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" +
         num(kLeft) + "\" y2=\"" + num(kHeight - kBottom) + "\"/>\n";
  svg += "</g>\n";
  svg += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int i = 0; i <= 4; ++i) {
    double xv = xlo + (xhi - xlo) * i / 4.0;
    double yv = ylo + (yhi - ylo) * i / 4.0;
    svg += "<line x1=\"" + num(px(xv)) + "\" y1=\"" + num(kHeight - kBottom) +
           "\" x2=\"" + num(px(xv)) + "\" y2=\"" +
           num(kHeight - kBottom + 4) + "\" stroke=\"#333\"/>\n";
    svg += "<text x=\"" + num(px(xv)) + "\" y=\"" +
           num(kHeight - kBottom + 16) + "\" text-anchor=\"middle\">" +
           num(xv) + "</text>\n";
    svg += "<line x1=\"" + num(kLeft - 4) + "\" y1=\"" + num(py(yv)) +
           "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(py(yv)) +
           "\" stroke=\"#333\"/>\n";
    svg += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(py(yv) + 4) +
           "\" text-anchor=\"end\">" + num(yv) + "</text>\n";
  }
  svg += "<text x=\"" + num((kLeft + kWidth - kRight) / 2) + "\" y=\"" +
         num(kHeight - 10) + "\" text-anchor=\"middle\">follower payoff "
         "&#956;2</text>\n";
  svg += "<text x=\"16\" y=\"" + num((kTop + kHeight - kBottom) / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num((kTop + kHeight - kBottom) / 2) + ")\">leader value U</text>\n";
  svg += "</g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    std::string pts;
    for (const Knot& k : series[i].knots) {
      pts += num(px(k.x)) + "," + num(py(k.y)) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    for (const Knot& k : series[i].knots) {
      svg += "<circle cx=\"" + num(px(k.x)) + "\" cy=\"" + num(py(k.y)) +
             "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
  }

  if (series.size() > 1) {
    double lx = kWidth - kRight - 170, ly = kTop + 8;
    svg += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
      const char* color = kPalette[i % std::size(kPalette)];
      double y = ly + 18 * static_cast<double>(i);
      svg += "<line x1=\"" + num(lx) + "\" y1=\"" + num(y) + "\" x2=\"" +
             num(lx + 22) + "\" y2=\"" + num(y) + "\" stroke=\"" + color +
             "\" stroke-width=\"2\"/>\n";
      svg += "<text x=\"" + num(lx + 28) + "\" y=\"" + num(y + 4) + "\">" +
             escape(series[i].label) + "</text>\n";
    }
    svg += "</g>\n";
  }

  svg += "</svg>\n";
  return svg;
}

}  // namespace sefce
