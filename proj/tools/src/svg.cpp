#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

namespace scorelab::cli {

namespace {

constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 36.0;
constexpr double kMarginBottom = 48.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Round tick spacing to 1/2/5 times a power of ten.
double nice_step(double span) {
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  if (r < 1.5) return mag;
  if (r < 3.5) return 2.0 * mag;
  if (r < 7.5) return 5.0 * mag;
  return 10.0 * mag;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label, int width,
                 int height)
    : title_(std::move(title)),
      x_label_(std::move(x_label)),
      y_label_(std::move(y_label)),
      width_(width),
      height_(height) {}

void SvgPlot::set_range(double x_min, double x_max, double y_min, double y_max) {
  x_min_ = x_min;
  x_max_ = x_max;
  y_min_ = y_min;
  y_max_ = y_max;
  has_range_ = true;
}

void SvgPlot::include(const std::vector<Eigen::Vector2d>& pts) {
  for (const auto& p : pts) {
    if (!has_range_) {
      x_min_ = x_max_ = p.x();
      y_min_ = y_max_ = p.y();
      has_range_ = true;
      continue;
    }
    x_min_ = std::min(x_min_, p.x());
    x_max_ = std::max(x_max_, p.x());
    y_min_ = std::min(y_min_, p.y());
    y_max_ = std::max(y_max_, p.y());
  }
}

void SvgPlot::add_scatter(const std::vector<Eigen::Vector2d>& pts, double radius,
                          const std::string& color, bool filled, const std::string& label) {
  include(pts);
  scatters_.push_back({pts, radius, color, filled, label});
}

void SvgPlot::add_polyline(const std::vector<Eigen::Vector2d>& pts, const std::string& color,
                           double stroke_width) {
  include(pts);
  lines_.push_back({pts, color, stroke_width});
}

void SvgPlot::add_segments(const std::vector<Segment>& segs, const std::string& color,
                           double stroke_width) {
  for (const auto& s : segs) {
    lines_.push_back({{s.a, s.b}, color, stroke_width});
  }
}

double SvgPlot::map_x(double x) const {
  const double span = x_max_ > x_min_ ? x_max_ - x_min_ : 1.0;
  return kMarginLeft + (x - x_min_) / span * (width_ - kMarginLeft - kMarginRight);
}

double SvgPlot::map_y(double y) const {
  const double span = y_max_ > y_min_ ? y_max_ - y_min_ : 1.0;
  return height_ - kMarginBottom - (y - y_min_) / span * (height_ - kMarginTop - kMarginBottom);
}

std::string SvgPlot::render(bool timestamp) const {
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
      << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n";
  if (timestamp) {
    char buf[64];
    const std::time_t now = std::time(nullptr);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    svg << "<!-- generated " << buf << " -->\n";
  }
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // pad the data range slightly
  const double px = 0.05 * (x_max_ - x_min_ + 1e-12);
  const double py = 0.05 * (y_max_ - y_min_ + 1e-12);
  SvgPlot padded = *this;
  padded.x_min_ -= px;
  padded.x_max_ += px;
  padded.y_min_ -= py;
  padded.y_max_ += py;

  const double x0 = kMarginLeft, x1 = width_ - kMarginRight;
  const double y0 = height_ - kMarginBottom, y1 = kMarginTop;

  // axes frame
  svg << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y1) << "\" width=\"" << fmt(x1 - x0)
      << "\" height=\"" << fmt(y0 - y1) << "\" fill=\"none\" stroke=\"black\"/>\n";

  // ticks
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
  const double xs = nice_step(padded.x_max_ - padded.x_min_);
  for (double v = std::ceil(padded.x_min_ / xs) * xs; v <= padded.x_max_ + 1e-12; v += xs) {
    const double sx = padded.map_x(v);
    svg << "<line x1=\"" << fmt(sx) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(sx)
        << "\" y2=\"" << fmt(y0 + 4) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt(sx) << "\" y=\"" << fmt(y0 + 16)
        << "\" text-anchor=\"middle\">" << fmt(v) << "</text>\n";
  }
  const double ys = nice_step(padded.y_max_ - padded.y_min_);
  for (double v = std::ceil(padded.y_min_ / ys) * ys; v <= padded.y_max_ + 1e-12; v += ys) {
    const double sy = padded.map_y(v);
    svg << "<line x1=\"" << fmt(x0 - 4) << "\" y1=\"" << fmt(sy) << "\" x2=\"" << fmt(x0)
        << "\" y2=\"" << fmt(sy) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt(x0 - 6) << "\" y=\"" << fmt(sy + 4)
        << "\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
  }
  svg << "<text x=\"" << fmt(0.5 * (x0 + x1)) << "\" y=\"" << fmt(height_ - 12)
      << "\" text-anchor=\"middle\">" << x_label_ << "</text>\n";
  svg << "<text x=\"14\" y=\"" << fmt(0.5 * (y0 + y1))
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << fmt(0.5 * (y0 + y1))
      << ")\">" << y_label_ << "</text>\n";
  svg << "<text x=\"" << fmt(0.5 * (x0 + x1)) << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-size=\"13\">" << title_ << "</text>\n";
  svg << "</g>\n";

  svg << "<g clip-path=\"none\">\n";
  for (const auto& ln : padded.lines_) {
    svg << "<polyline fill=\"none\" stroke=\"" << ln.color << "\" stroke-width=\""
        << fmt(ln.width) << "\" points=\"";
    for (const auto& p : ln.pts) svg << fmt(padded.map_x(p.x())) << "," << fmt(padded.map_y(p.y())) << " ";
    svg << "\"/>\n";
  }
  for (const auto& sc : padded.scatters_) {
    for (const auto& p : sc.pts) {
      svg << "<circle cx=\"" << fmt(padded.map_x(p.x())) << "\" cy=\""
          << fmt(padded.map_y(p.y())) << "\" r=\"" << fmt(sc.radius) << "\" ";
      if (sc.filled) {
        svg << "fill=\"" << sc.color << "\"";
      } else {
        svg << "fill=\"none\" stroke=\"" << sc.color << "\"";
      }
      svg << "/>\n";
    }
  }
  svg << "</g>\n";

  // legend for labeled scatters
  double ly = kMarginTop + 14;
  svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (const auto& sc : padded.scatters_) {
    if (sc.label.empty()) continue;
    svg << "<circle cx=\"" << fmt(x1 - 110) << "\" cy=\"" << fmt(ly - 4) << "\" r=\"4\" ";
    if (sc.filled) {
      svg << "fill=\"" << sc.color << "\"";
    } else {
      svg << "fill=\"none\" stroke=\"" << sc.color << "\"";
    }
    svg << "/>\n<text x=\"" << fmt(x1 - 100) << "\" y=\"" << fmt(ly) << "\">" << sc.label
        << "</text>\n";
    ly += 16;
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace scorelab::cli
