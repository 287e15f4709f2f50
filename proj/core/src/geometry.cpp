#include "scorelab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scorelab/errors.hpp"

namespace scorelab {

namespace {

// Indices and values of the two smallest squared distances from x.
struct TwoNearest {
  int first = -1, second = -1;
  double d2_first = 0.0, d2_second = 0.0;
};

TwoNearest two_nearest(const Dataset& data, const Eigen::VectorXd& x) {
  TwoNearest tn;
  tn.d2_first = tn.d2_second = std::numeric_limits<double>::infinity();
  for (int n = 0; n < data.size(); ++n) {
    const double d2 = (x - data.point(n)).squaredNorm();
    if (d2 < tn.d2_first) {
      tn.second = tn.first;
      tn.d2_second = tn.d2_first;
      tn.first = n;
      tn.d2_first = d2;
    } else if (d2 < tn.d2_second) {
      tn.second = n;
      tn.d2_second = d2;
    }
  }
  return tn;
}

}  // namespace

VoronoiClassification voronoi_classify(const Dataset& data, const Eigen::VectorXd& x,
                                       double boundary_tol) {
  if (data.size() < 1) throw InvalidDatasetError("voronoi_classify: empty dataset");
  if (!data.distinct())
    throw InvalidDatasetError("voronoi_classify: dataset has duplicate points");
  VoronoiClassification out;
  if (data.size() == 1) {
    out.nearest = 0;
    out.gap = std::numeric_limits<double>::infinity();
    return out;
  }
  const TwoNearest tn = two_nearest(data, x);
  out.nearest = tn.first;
  out.second = tn.second;
  out.gap = tn.d2_second - tn.d2_first;
  out.on_boundary = out.gap <= boundary_tol;
  return out;
}

double cell_margin(const Dataset& data, const Eigen::VectorXd& x) {
  if (!data.distinct()) throw InvalidDatasetError("cell_margin: dataset has duplicate points");
  if (data.size() < 2) return std::numeric_limits<double>::infinity();
  const TwoNearest tn = two_nearest(data, x);
  const double eps2 = tn.d2_second - tn.d2_first;
  return eps2 > 0.0 ? std::sqrt(eps2) : 0.0;
}

std::pair<double, double> pairwise_extremes(const Dataset& data) {
  if (data.size() < 2) throw InvalidDatasetError("pairwise_extremes: need N >= 2");
  if (!data.distinct())
    throw InvalidDatasetError("pairwise_extremes: dataset has duplicate points");
  double d_min = std::numeric_limits<double>::infinity();
  double d_max = 0.0;
  for (int i = 0; i < data.size(); ++i)
    for (int j = i + 1; j < data.size(); ++j) {
      const double d = (data.point(i) - data.point(j)).norm();
      d_min = std::min(d_min, d);
      d_max = std::max(d_max, d);
    }
  return {d_min, d_max};
}

MemorizationReport memorization_fraction(const std::vector<Eigen::VectorXd>& samples,
                                         const Dataset& data, double tau) {
  if (samples.empty()) throw DomainError("memorization_fraction: no samples");
  if (!(tau > 0.0)) throw DomainError("memorization_fraction: tau must be > 0");
  MemorizationReport rep;
  rep.tau = tau;
  rep.samples.reserve(samples.size());
  rep.cell_histogram.assign(data.size(), 0);
  int collapsed = 0;
  for (const auto& x : samples) {
    const TwoNearest tn = two_nearest(data, x);
    SampleStat st;
    st.nearest = tn.first;
    st.distance = std::sqrt(tn.d2_first);
    if (tn.second >= 0) {
      // Distance to the bisector hyperplane of the two nearest points.
      const double sep = (data.point(tn.first) - data.point(tn.second)).norm();
      st.boundary_distance = (tn.d2_second - tn.d2_first) / (2.0 * sep);
    } else {
      st.boundary_distance = std::numeric_limits<double>::infinity();
    }
    if (st.distance < tau) {
      ++collapsed;
      ++rep.cell_histogram[st.nearest];
    } else if (st.boundary_distance < tau) {
      ++rep.boundary_proximal_count;
    }
    rep.samples.push_back(st);
  }
  rep.fraction_collapsed = static_cast<double>(collapsed) / static_cast<double>(samples.size());
  return rep;
}

RateFit convergence_rate_fit(const Trajectory& traj, const Dataset& data,
                             const Schedule& schedule, double window, double tau) {
  if (traj.states.size() < 8) throw DomainError("convergence_rate_fit: trajectory too short");
  if (!(window > 0.0) || window > 1.0)
    throw DomainError("convergence_rate_fit: window must be in (0, 1]");

  const Eigen::VectorXd& terminal = traj.terminal();
  const TwoNearest tn = two_nearest(data, terminal);
  const double term_dist = std::sqrt(tn.d2_first);
  if (!(term_dist < tau)) {
    throw NotCollapsedError("convergence_rate_fit: terminal is not within tau of a data point");
  }
  RateFit fit;
  fit.limit_index = tn.first;
  const Eigen::VectorXd& x0 = data.point(tn.first);

  const int n_nodes = static_cast<int>(traj.states.size());
  const int last = n_nodes - 1 - 3;  // exclude the last 3 nodes
  const int first = std::max(0, n_nodes - 1 - static_cast<int>(window * (n_nodes - 1)));
  std::vector<double> ss, ls, lsig;
  for (int i = first; i <= last; ++i) {
    const double dist = (traj.states[i] - x0).norm();
    if (!(dist > 0.0)) continue;
    const double s = !traj.s_values.empty()
                         ? traj.s_values[i]
                         : -0.5 * std::log(schedule.variance(traj.times[i]));
    ss.push_back(s);
    ls.push_back(std::log(dist));
    const double sigma2 =
        !traj.s_values.empty() ? std::exp(-2.0 * traj.s_values[i]) : schedule.variance(traj.times[i]);
    lsig.push_back(0.5 * std::log(sigma2));
  }
  if (ss.size() < 3) throw DomainError("convergence_rate_fit: too few usable nodes in window");

  auto least_squares = [](const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
      syy += ys[i] * ys[i];
    }
    const double cov = sxy - sx * sy / n;
    const double var_x = sxx - sx * sx / n;
    const double var_y = syy - sy * sy / n;
    const double slope = cov / var_x;
    const double r2 = var_y > 0.0 ? (cov * cov) / (var_x * var_y) : 1.0;
    return std::pair<double, double>{slope, r2};
  };

  const auto [slope_s, r2] = least_squares(ss, ls);
  fit.slope_s = slope_s;
  fit.r2 = r2;
  fit.slope_sigma = least_squares(lsig, ls).first;
  return fit;
}

std::vector<Segment> voronoi_edges_2d(const Dataset& data, double x_min, double x_max,
                                      double y_min, double y_max) {
  if (data.dim() != 2) throw InvalidDatasetError("voronoi_edges_2d: dataset must be 2D");
  if (!data.distinct())
    throw InvalidDatasetError("voronoi_edges_2d: dataset has duplicate points");

  using Poly = std::vector<Eigen::Vector2d>;
  const Poly box = {{x_min, y_min}, {x_max, y_min}, {x_max, y_max}, {x_min, y_max}};

  // Clip polygon by the half-plane a . x <= b (Sutherland-Hodgman).
  auto clip = [](const Poly& poly, const Eigen::Vector2d& a, double b) {
    Poly out;
    const int n = static_cast<int>(poly.size());
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d& p = poly[i];
      const Eigen::Vector2d& q = poly[(i + 1) % n];
      const bool p_in = a.dot(p) <= b;
      const bool q_in = a.dot(q) <= b;
      if (p_in) out.push_back(p);
      if (p_in != q_in) {
        const double denom = a.dot(q - p);
        const double u = (b - a.dot(p)) / denom;
        out.push_back(p + u * (q - p));
      }
    }
    return out;
  };

  std::vector<Segment> segments;
  for (int i = 0; i < data.size(); ++i) {
    Poly cell = box;
    const Eigen::Vector2d pi = data.point(i).head<2>();
    for (int j = 0; j < data.size() && !cell.empty(); ++j) {
      if (j == i) continue;
      const Eigen::Vector2d pj = data.point(j).head<2>();
      // |x - pi|^2 <= |x - pj|^2  <=>  2 (pj - pi) . x <= |pj|^2 - |pi|^2
      cell = clip(cell, 2.0 * (pj - pi), pj.squaredNorm() - pi.squaredNorm());
    }
    // Emit edges that lie on a bisector with j > i (each shared edge once).
    const int n = static_cast<int>(cell.size());
    for (int k = 0; k < n; ++k) {
      const Eigen::Vector2d a = cell[k];
      const Eigen::Vector2d b = cell[(k + 1) % n];
      const Eigen::Vector2d mid = 0.5 * (a + b);
      const double d2i = (mid - pi).squaredNorm();
      int owner = -1;
      for (int j = 0; j < data.size(); ++j) {
        if (j == i) continue;
        const Eigen::Vector2d pj = data.point(j).head<2>();
        if (std::abs((mid - pj).squaredNorm() - d2i) < 1e-9 * (1.0 + d2i)) {
          owner = j;
          break;
        }
      }
      if (owner > i) segments.push_back({a, b});
    }
  }
  return segments;
}

}  // namespace scorelab
