#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace spoofbench::svg {
namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 400;
constexpr double kLeft = 70;
constexpr double kRight = 150;
constexpr double kTop = 40;
constexpr double kBottom = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string num4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string open(double width, double height, const std::string& title) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
       num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) +
       "\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(width / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"15\">" + escape(title) + "</text>\n";
  return s;
}

std::string text(double x, double y, const std::string& body, const std::string& anchor = "middle",
                 int size = 11, const std::string& extra = "") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor +
         "\" font-family=\"sans-serif\" font-size=\"" + std::to_string(size) + "\"" + extra + ">" +
         escape(body) + "</text>\n";
}

std::string axes(const std::string& x_label, const std::string& y_label) {
  const double x0 = kLeft, y0 = kHeight - kBottom, x1 = kWidth - kRight, y1 = kTop;
  std::string s;
  s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(y0) +
       "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(y1) +
       "\" stroke=\"black\"/>\n";
  s += text((x0 + x1) / 2, kHeight - 18, x_label);
  s += text(18, (y0 + y1) / 2, y_label, "middle", 11,
            " transform=\"rotate(-90 18 " + num((y0 + y1) / 2) + ")\"");
  return s;
}

std::string legend(const std::vector<std::string>& labels, const std::vector<std::string>& colors) {
  std::string s;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = kTop + 10 + 20 * static_cast<double>(i);
    s += "<rect x=\"" + num(kWidth - kRight + 15) + "\" y=\"" + num(y - 9) +
         "\" width=\"12\" height=\"12\" fill=\"" + colors[i] + "\"/>\n";
    s += text(kWidth - kRight + 32, y + 1, labels[i], "start");
  }
  return s;
}

}  // namespace

std::string escape(const std::string& in) {
  std::string out;
  for (char c : in) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series,
                       double y_min, double y_max) {
  double x_max = 1.0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) x_max = std::max(x_max, x);
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + plot_w * x / x_max; };
  auto py = [&](double y) { return kHeight - kBottom - plot_h * (y - y_min) / (y_max - y_min); };

  std::string out = open(kWidth, kHeight, title);
  out += axes(x_label, y_label);
  for (int i = 0; i <= 4; ++i) {
    const double y = y_min + (y_max - y_min) * i / 4.0;
    out += text(kLeft - 6, py(y) + 4, tick(y), "end");
  }
  for (int i = 0; i <= 4; ++i) {
    const double x = x_max * i / 4.0;
    out += text(px(x), kHeight - kBottom + 16, tick(std::round(x * 100) / 100));
  }
  std::vector<std::string> labels, colors;
  for (const auto& s : series) {
    std::string pts;
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(y)) continue;
      if (!pts.empty()) pts += ' ';
      pts += num(px(x)) + "," + num(py(y));
    }
    out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"2\" points=\"" + pts +
           "\"/>\n";
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(y)) continue;
      out += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"2.5\" fill=\"" +
             s.color + "\"><title>" + escape(s.label) + " @" + tick(x) + ": " + num4(y) +
             "</title></circle>\n";
    }
    labels.push_back(s.label);
    colors.push_back(s.color);
  }
  out += legend(labels, colors);
  out += "</svg>\n";
  return out;
}

std::string bar_chart(const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<std::string>& series_labels,
                      const std::vector<std::string>& colors, const std::vector<BarGroup>& groups) {
  double y_max = 1.0;
  for (const auto& g : groups) {
    for (double v : g.values) y_max = std::max(y_max, v);
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double group_w = plot_w / static_cast<double>(std::max<std::size_t>(1, groups.size()));
  const double bar_w = group_w * 0.8 / static_cast<double>(std::max<std::size_t>(1, series_labels.size()));

  std::string out = open(kWidth, kHeight, title);
  out += axes(x_label, y_label);
  for (int i = 0; i <= 4; ++i) {
    const double y = y_max * i / 4.0;
    out += text(kLeft - 6, kHeight - kBottom - plot_h * i / 4.0 + 4, tick(std::round(y)), "end");
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double gx = kLeft + group_w * static_cast<double>(g) + group_w * 0.1;
    for (std::size_t s = 0; s < groups[g].values.size(); ++s) {
      const double v = groups[g].values[s];
      const double h = plot_h * v / y_max;
      const double x = gx + bar_w * static_cast<double>(s);
      out += "<rect x=\"" + num(x) + "\" y=\"" + num(kHeight - kBottom - h) + "\" width=\"" +
             num(bar_w) + "\" height=\"" + num(h) + "\" fill=\"" + colors[s] + "\"/>\n";
      if (v > 0) out += text(x + bar_w / 2, kHeight - kBottom - h - 3, tick(v), "middle", 9);
    }
    out += text(gx + group_w * 0.4, kHeight - kBottom + 16, groups[g].label);
  }
  out += legend(series_labels, colors);
  out += "</svg>\n";
  return out;
}

std::string heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& col_labels,
                    const std::vector<std::vector<double>>& cells) {
  const double cell = 20;
  const double left = 60, top = 50;
  const double width = std::max(360.0, left + cell * static_cast<double>(col_labels.size()) + 40);
  const double height = top + cell * static_cast<double>(row_labels.size()) + 40;
  std::string out = open(width, height, title);
  for (std::size_t c = 0; c < col_labels.size(); ++c) {
    out += text(left + cell * (static_cast<double>(c) + 0.5), top - 6, col_labels[c]);
  }
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    const double y = top + cell * static_cast<double>(r);
    out += text(left - 6, y + cell * 0.7, row_labels[r], "end");
    for (std::size_t c = 0; c < col_labels.size(); ++c) {
      const double v = std::clamp(cells[r][c], 0.0, 1.0);
      // white -> dark blue
      const int red = static_cast<int>(std::lround(255 * (1 - v)));
      const int green = static_cast<int>(std::lround(255 * (1 - 0.8 * v)));
      char fill[16];
      std::snprintf(fill, sizeof(fill), "#%02x%02xff", red, green);
      out += "<rect x=\"" + num(left + cell * static_cast<double>(c)) + "\" y=\"" + num(y) +
             "\" width=\"" + num(cell) + "\" height=\"" + num(cell) + "\" fill=\"" + fill +
             "\"><title>" + escape(row_labels[r] + " " + col_labels[c] + ": " + num(cells[r][c])) +
             "</title></rect>\n";
    }
  }
  out += text(left, height - 14, "position (rows) x symbol (columns), shade = frequency", "start", 10);
  out += "</svg>\n";
  return out;
}

}  // namespace spoofbench::svg
