// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svg.hpp"

#include <algorithm>
#include <cstdio>
#include <iterator>

namespace guidelab {
namespace {

constexpr double kWidth = 640, kHeight = 360;
constexpr double kLeft = 56, kRight = 150, kTop = 32, kBottom = 40;
constexpr const char* kColours[] = {"#c0392b", "#2471a3", "#229954", "#d68910",
                                    "#7d3c98", "#17a589", "#566573", "#a04000"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
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

}  // namespace

std::string cosine_plot_svg(const std::vector<PlotSeries>& series,
                            const std::string& title) {
  int t_max = 1;
  for (const auto& s : series)
    for (const auto& p : s.series->points) t_max = std::max(t_max, p.t);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](int t) { return kLeft + pw * (t_max - t) / std::max(1, t_max - 1); };
  auto sy = [&](double c) { return kTop + ph * (1.0 - (std::clamp(c, -1.0, 1.0) + 1.0) / 2.0); };

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
                    "\" height=\"" + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(kLeft) + "\" y=\"18\" font-size=\"13\">" + escape(title) + "</text>\n";
  for (double c : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    out += "<line x1=\"" + num(kLeft) + "\" x2=\"" + num(kLeft + pw) + "\" y1=\"" + num(sy(c)) +
           "\" y2=\"" + num(sy(c)) + "\" stroke=\"#ddd\"/>\n";
    out += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(sy(c) + 4) +
           "\" text-anchor=\"end\">" + num(c) + "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const int t = t_max - (t_max - 1) * k / 4;
    out += "<text x=\"" + num(sx(t)) + "\" y=\"" + num(kTop + ph + 16) +
           "\" text-anchor=\"middle\">" + std::to_string(t) + "</text>\n";
  }
  out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 6) +
         "\" text-anchor=\"middle\">t</text>\n";
  out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"#444\"/>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* colour = kColours[i % std::size(kColours)];
    std::string upper, lower, line;
    for (const auto& p : series[i].series->points) {
      if (p.n_valid == 0) continue;
      upper += num(sx(p.t)) + "," + num(sy(p.mean + p.std)) + " ";
      lower = num(sx(p.t)) + "," + num(sy(p.mean - p.std)) + " " + lower;
      line += num(sx(p.t)) + "," + num(sy(p.mean)) + " ";
    }
    out += std::string("<polygon points=\"") + upper + lower + "\" fill=\"" + colour +
           "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
    out += std::string("<polyline points=\"") + line + "\" fill=\"none\" stroke=\"" + colour +
           "\" stroke-width=\"1.4\"/>\n";
    const double ly = kTop + 14 + 16 * static_cast<double>(i);
    out += std::string("<line x1=\"") + num(kLeft + pw + 10) + "\" x2=\"" + num(kLeft + pw + 26) +
           "\" y1=\"" + num(ly - 4) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + colour +
           "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + num(kLeft + pw + 30) + "\" y=\"" + num(ly) + "\">" +
           escape(series[i].label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace guidelab
