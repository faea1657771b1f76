#include "ved/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ved/binary_io.hpp"

namespace ved::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Box {
  double x, y, w, h;
};

// Axes, ticks and polylines for one chart inside `box`.
void draw_chart(std::ostringstream& out, const Box& box, const std::string& title, const std::string& x_label,
                const std::string& y_label, const std::vector<Series>& series, bool log_y) {
  auto ty = [&](double v) { return log_y ? std::log10(std::max(v, 1e-300)) : v; };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series) {
    for (Eigen::Index i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x(i)) || !std::isfinite(s.y(i))) continue;
      x0 = std::min(x0, s.x(i));
      x1 = std::max(x1, s.x(i));
      y0 = std::min(y0, ty(s.y(i)));
      y1 = std::max(y1, ty(s.y(i)));
    }
  }
  if (x0 > x1) x0 = 0, x1 = 1;
  if (y0 > y1) y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;

  const double left = box.x + 55, right = box.x + box.w - 10, top = box.y + 25, bottom = box.y + box.h - 35;
  auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * (right - left); };
  auto py = [&](double v) { return bottom - (ty(v) - y0) / (y1 - y0) * (bottom - top); };

  out << "<text x='" << (left + right) / 2 << "' y='" << box.y + 15
      << "' text-anchor='middle' font-size='13'>" << escape(title) << "</text>\n";
  out << "<rect x='" << left << "' y='" << top << "' width='" << right - left << "' height='" << bottom - top
      << "' fill='none' stroke='#444'/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = x0 + (x1 - x0) * t / 4.0, fy = y0 + (y1 - y0) * t / 4.0;
    const double gx = left + (right - left) * t / 4.0, gy = bottom - (bottom - top) * t / 4.0;
    out << "<text x='" << gx << "' y='" << bottom + 14 << "' text-anchor='middle' font-size='10'>" << num(fx)
        << "</text>\n";
    out << "<text x='" << left - 4 << "' y='" << gy + 3 << "' text-anchor='end' font-size='10'>"
        << num(log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  if (!x_label.empty())
    out << "<text x='" << (left + right) / 2 << "' y='" << bottom + 30
        << "' text-anchor='middle' font-size='11'>" << escape(x_label) << "</text>\n";
  if (!y_label.empty())
    out << "<text x='" << box.x + 12 << "' y='" << (top + bottom) / 2 << "' font-size='11' transform='rotate(-90 "
        << box.x + 12 << ' ' << (top + bottom) / 2 << ")' text-anchor='middle'>" << escape(y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = kPalette[k % std::size(kPalette)];
    out << "<polyline fill='none' stroke='" << colour << "' stroke-width='1.5' points='";
    for (Eigen::Index i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.x(i)) && std::isfinite(s.y(i))) out << num(px(s.x(i))) << ',' << num(py(s.y(i))) << ' ';
    out << "'/>\n";
    out << "<text x='" << right - 5 << "' y='" << top + 14 + 13 * static_cast<double>(k)
        << "' text-anchor='end' font-size='10' fill='" << colour << "'>" << escape(s.label) << "</text>\n";
  }
}

std::string open_svg(double w, double h) {
  std::ostringstream o;
  o << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "' viewBox='0 0 " << w << ' '
    << h << "' font-family='sans-serif'>\n<rect width='100%' height='100%' fill='white'/>\n";
  return o.str();
}

}  // namespace

void line_plot(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
               const std::string& y_label, const std::vector<Series>& series, bool log_y) {
  std::ostringstream out;
  out << open_svg(640, 420);
  draw_chart(out, {0, 0, 640, 420}, title, x_label, y_label, series, log_y);
  out << "</svg>\n";
  write_text(path, out.str());
}

void panel_plot(const std::filesystem::path& path, const std::string& title, const std::vector<Panel>& panels,
                int columns) {
  columns = std::max(1, columns);
  const int rows = std::max(1, (static_cast<int>(panels.size()) + columns - 1) / columns);
  const double pw = 320, ph = 240, head = 30;
  std::ostringstream out;
  out << open_svg(pw * columns, ph * rows + head);
  out << "<text x='" << pw * columns / 2 << "' y='20' text-anchor='middle' font-size='15'>" << escape(title)
      << "</text>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const double x = pw * static_cast<double>(static_cast<int>(i) % columns);
    const double y = head + ph * static_cast<double>(static_cast<int>(i) / columns);
    draw_chart(out, {x, y, pw, ph}, panels[i].title, "", "", panels[i].series, false);
  }
  out << "</svg>\n";
  write_text(path, out.str());
}

void heatmap(const std::filesystem::path& path, const std::string& title, const Eigen::MatrixXd& m) {
  const double cell = std::clamp(480.0 / static_cast<double>(std::max<Eigen::Index>(1, std::max(m.rows(), m.cols()))), 2.0, 40.0);
  const double w = cell * static_cast<double>(m.cols()) + 140, h = cell * static_cast<double>(m.rows()) + 60;
  const double range = std::max(m.cwiseAbs().maxCoeff(), 1e-12);
  auto colour = [&](double v) {
    const double t = std::clamp(v / range, -1.0, 1.0);
    const int fade = static_cast<int>(std::lround(255 * (1.0 - std::abs(t))));
    char buf[16];
    if (t >= 0)
      std::snprintf(buf, sizeof buf, "#ff%02x%02x", fade, fade);
    else
      std::snprintf(buf, sizeof buf, "#%02x%02xff", fade, fade);
    return std::string(buf);
  };
  std::ostringstream out;
  out << open_svg(w, h);
  out << "<text x='" << w / 2 << "' y='20' text-anchor='middle' font-size='14'>" << escape(title) << "</text>\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << "<rect x='" << 20 + cell * static_cast<double>(j) << "' y='" << 40 + cell * static_cast<double>(i)
          << "' width='" << cell << "' height='" << cell << "' fill='" << colour(m(i, j)) << "'/>\n";
  const double bx = 40 + cell * static_cast<double>(m.cols());
  for (int k = 0; k <= 10; ++k) {
    const double v = range * (1.0 - k / 5.0);
    out << "<rect x='" << bx << "' y='" << 40 + 18 * k << "' width='16' height='18' fill='" << colour(v) << "'/>\n";
    out << "<text x='" << bx + 22 << "' y='" << 53 + 18 * k << "' font-size='10'>" << num(v) << "</text>\n";
  }
  out << "</svg>\n";
  write_text(path, out.str());
}

}  // namespace ved::svg
