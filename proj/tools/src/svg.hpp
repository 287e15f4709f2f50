#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "scorelab/geometry.hpp"

namespace scorelab::cli {

// Minimal SVG scatter/line plot with linear axes.  Data coordinates are
// mapped into a fixed viewport; callers plot log quantities directly when a
// log axis is wanted.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label, int width = 640,
          int height = 480);

  void set_range(double x_min, double x_max, double y_min, double y_max);
  // Expands the current range to cover the points (call before rendering).
  void include(const std::vector<Eigen::Vector2d>& pts);

  void add_scatter(const std::vector<Eigen::Vector2d>& pts, double radius,
                   const std::string& color, bool filled = true, const std::string& label = "");
  void add_polyline(const std::vector<Eigen::Vector2d>& pts, const std::string& color,
                    double stroke_width = 1.0);
  void add_segments(const std::vector<Segment>& segs, const std::string& color,
                    double stroke_width = 1.0);

  // Render to an SVG document; a generation timestamp comment is emitted only
  // when `timestamp` is set.
  std::string render(bool timestamp) const;

 private:
  struct Scatter {
    std::vector<Eigen::Vector2d> pts;
    double radius;
    std::string color;
    bool filled;
    std::string label;
  };
  struct Line {
    std::vector<Eigen::Vector2d> pts;
    std::string color;
    double width;
  };

  double map_x(double x) const;
  double map_y(double y) const;

  std::string title_, x_label_, y_label_;
  int width_, height_;
  double x_min_ = 0, x_max_ = 1, y_min_ = 0, y_max_ = 1;
  bool has_range_ = false;
  std::vector<Scatter> scatters_;
  std::vector<Line> lines_;
};

}  // namespace scorelab::cli
