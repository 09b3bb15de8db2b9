// Copyright 2026 The msa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "msa/charts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "msa/common.hpp"

namespace msa::viz {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
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

std::string header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, const std::string& extra = "") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\"" + extra + ">" + escape(s) + "</text>\n";
}

}  // namespace

std::string scatter_svg(const std::vector<ScatterPoint>& points,
                        const std::vector<std::string>& class_names, const std::string& title) {
  if (points.empty()) throw ValidationError("scatter chart needs at least one point");
  const double w = 640, h = 520, left = 40, top = 40, plot = 440;
  double xmin = points[0].x, xmax = xmin, ymin = points[0].y, ymax = ymin;
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ValidationError("scatter point is not finite");
    xmin = std::min(xmin, p.x), xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y), ymax = std::max(ymax, p.y);
  }
  const double xs = xmax > xmin ? plot / (xmax - xmin) : 1.0;
  const double ys = ymax > ymin ? plot / (ymax - ymin) : 1.0;
  std::ostringstream o;
  o << header(w, h) << text(left, 24, title, " font-size=\"14\"");
  o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(plot) << "\" height=\""
    << num(plot) << "\" fill=\"none\" stroke=\"#999\"/>\n";
  std::set<int> present;
  for (const auto& p : points) {
    present.insert(p.label);
    const double cx = left + (p.x - xmin) * xs, cy = top + plot - (p.y - ymin) * ys;
    o << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"3\" fill=\""
      << color(static_cast<std::size_t>(std::max(p.label, 0))) << "\" fill-opacity=\"0.8\"/>\n";
  }
  double ly = top + 10;
  for (int label : present) {
    const std::string name = label >= 0 && static_cast<std::size_t>(label) < class_names.size()
                                 ? class_names[static_cast<std::size_t>(label)]
                                 : "class " + std::to_string(label);
    o << "<circle cx=\"" << num(left + plot + 20) << "\" cy=\"" << num(ly - 4) << "\" r=\"5\" fill=\""
      << color(static_cast<std::size_t>(std::max(label, 0))) << "\"/>\n";
    o << text(left + plot + 30, ly, name, " class=\"legend\"");
    ly += 18;
  }
  o << "</svg>\n";
  return o.str();
}

std::string bars_svg(const std::vector<BarGroup>& groups, const std::string& title,
                     const std::string& y_label, double y_max) {
  if (groups.empty()) throw ValidationError("bar chart needs at least one group");
  if (!(y_max > 0.0)) throw ValidationError("bar chart y_max must be positive");
  std::vector<std::string> series;
  for (const auto& g : groups)
    for (const auto& b : g.bars)
      if (std::find(series.begin(), series.end(), b.series) == series.end()) series.push_back(b.series);
  const double bar_w = 18, gap = 24, left = 60, top = 40, plot_h = 300;
  double width = left;
  for (const auto& g : groups) width += static_cast<double>(g.bars.size()) * bar_w + gap;
  const double legend_x = width + 10;
  width = legend_x + 160;
  const double height = top + plot_h + 60;
  std::ostringstream o;
  o << header(width, height) << text(left, 24, title, " font-size=\"14\"");
  o << text(14, top + plot_h / 2, y_label,
            " transform=\"rotate(-90 14 " + num(top + plot_h / 2) + ")\" text-anchor=\"middle\"");
  for (int t = 0; t <= 4; ++t) {
    const double v = y_max * t / 4.0, y = top + plot_h - plot_h * t / 4.0;
    o << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(legend_x - 10) << "\" y2=\""
      << num(y) << "\" stroke=\"#ddd\"/>\n";
    o << text(left - 6, y + 4, num(v), " text-anchor=\"end\"");
  }
  double x = left + gap / 2;
  for (const auto& g : groups) {
    const double start = x;
    for (const auto& b : g.bars) {
      const double v = std::clamp(b.value, 0.0, y_max);
      const double bh = plot_h * v / y_max;
      const auto si = static_cast<std::size_t>(std::find(series.begin(), series.end(), b.series) - series.begin());
      o << "<rect class=\"bar\" x=\"" << num(x) << "\" y=\"" << num(top + plot_h - bh) << "\" width=\""
        << num(bar_w - 2) << "\" height=\"" << num(bh) << "\" fill=\"" << color(si) << "\"><title>"
        << escape(g.name + " / " + b.series + ": " + num(b.value)) << "</title></rect>\n";
      x += bar_w;
    }
    o << text((start + x) / 2, top + plot_h + 18, g.name, " text-anchor=\"middle\"");
    x += gap;
  }
  double ly = top + 10;
  for (std::size_t i = 0; i < series.size(); ++i) {
    o << "<rect x=\"" << num(legend_x) << "\" y=\"" << num(ly - 10) << "\" width=\"10\" height=\"10\" fill=\""
      << color(i) << "\"/>\n";
    o << text(legend_x + 16, ly, series[i], " class=\"legend\"");
    ly += 18;
  }
  o << "</svg>\n";
  return o.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << content;
  if (!out) throw ValidationError("failed writing " + path.string());
}

}  // namespace msa::viz
