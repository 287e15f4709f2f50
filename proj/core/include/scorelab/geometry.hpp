#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "scorelab/dataset.hpp"
#include "scorelab/reverse.hpp"
#include "scorelab/schedule.hpp"

namespace scorelab {

// Voronoi query result: cell of the nearest point, or boundary between the
// two nearest when their squared distances differ by at most boundary_tol.
struct VoronoiClassification {
  bool on_boundary = false;
  int nearest = -1;
  int second = -1;
  double gap = 0.0;  // |x - x0_second|^2 - |x - x0_nearest|^2
};

// Brute-force O(N) query; the dataset must be pairwise distinct.
VoronoiClassification voronoi_classify(const Dataset& data, const Eigen::VectorXd& x,
                                       double boundary_tol = 1e-10);

// Largest eps with x in V_eps(x0^nearest): eps^2 = min over other points of
// (|x - x0^l|^2 - |x - x0^n|^2); zero on the boundary.
double cell_margin(const Dataset& data, const Eigen::VectorXd& x);

// (D_minus, D_plus): min and max pairwise Euclidean distances.
std::pair<double, double> pairwise_extremes(const Dataset& data);

struct SampleStat {
  int nearest = -1;
  double distance = 0.0;           // to the nearest data point
  double boundary_distance = 0.0;  // to the bisector of its two nearest points
};

struct MemorizationReport {
  double fraction_collapsed = 0.0;  // #samples with distance < tau / total
  double tau = 0.0;
  std::vector<SampleStat> samples;
  std::vector<int> cell_histogram;   // collapsed samples per data index
  int boundary_proximal_count = 0;   // non-collapsed samples with bisector distance < tau
};

MemorizationReport memorization_fraction(const std::vector<Eigen::VectorXd>& samples,
                                         const Dataset& data, double tau);

struct RateFit {
  int limit_index = -1;
  double slope_s = 0.0;      // d log|x - x0^n| / ds, expected -1
  double slope_sigma = 0.0;  // d log|x - x0^n| / d log sigma(t), expected +1
  double r2 = 0.0;           // of the s fit
};

// Least-squares fit of log-distance over the final `window` fraction of
// nodes, excluding the last 3 (where the distance may underflow).  Throws
// NotCollapsedError unless the terminal is within tau of a data point.
RateFit convergence_rate_fit(const Trajectory& traj, const Dataset& data,
                             const Schedule& schedule, double window = 0.3, double tau = 1e-2);

// Bounded Voronoi edges for d = 2 datasets, for plotting.
struct Segment {
  Eigen::Vector2d a;
  Eigen::Vector2d b;
};
std::vector<Segment> voronoi_edges_2d(const Dataset& data, double x_min, double x_max,
                                      double y_min, double y_max);

}  // namespace scorelab
