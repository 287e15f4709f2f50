#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "scorelab/rng.hpp"
#include "scorelab/schedule.hpp"
#include "scorelab/score.hpp"

namespace scorelab {

// Strictly decreasing node sequence from T down to t_min.
struct TimeGrid {
  enum class Kind { GeometricInT, UniformInS };

  Kind kind = Kind::GeometricInT;
  std::vector<double> nodes;

  // t_i = T (t_min / T)^(i / steps); resolves the 1/sigma^2 stiffness near 0.
  static TimeGrid geometric(double T, double t_min, int steps);
  // Nodes uniform in s = -ln(sigma^2(t) + c)/2.  t_min = 0 is allowed only
  // for c > 0, in which case the grid ends at s_inf = -ln(c)/2 (t = 0).
  static TimeGrid uniform_in_s(const Schedule& schedule, double t_min, int steps, double c = 0.0);

  int steps() const { return static_cast<int>(nodes.size()) - 1; }
};

// Grid in the transformed variable s, increasing from s0 = h(T; c).
struct SGrid {
  std::vector<double> nodes;
  double c = 0.0;

  // Uniform nodes from h(T; c) to h(t_end; c); t_end = 0 requires c > 0.
  static SGrid uniform(const Schedule& schedule, double t_end, int steps, double c = 0.0);
};

struct Trajectory {
  std::vector<double> times;                     // t per node (decreasing)
  std::vector<double> s_values;                  // s per node when known, else empty
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> node_weights;     // transformed runs: w(y, s) per node
  std::uint64_t seed = 0;
  std::string schedule_id;
  std::string model_id;

  const Eigen::VectorXd& terminal() const { return states.back(); }
};

// Right-hand side of the reverse ODE: -beta(t) x / 2 - g(t) s(x,t) / 2.
Eigen::VectorXd reverse_ode_rhs(const ScoreModel& model, const Schedule& schedule,
                                const Eigen::VectorXd& x, double t);

// Classical fixed-grid fourth-order Runge-Kutta over the grid nodes.
Trajectory integrate_reverse_ode(const ScoreModel& model, const Schedule& schedule,
                                 const Eigen::VectorXd& xT, const TimeGrid& grid);

// Integrates the transformed dynamics in s (exact or Tikhonov models):
//   VE            dy/ds = -(y - y_N(y, s)),        sigma^2 = e^(-2s) - c
//   VP (c = 0)    dy/ds = -(y - y_N(y, s) / m(s)), m = sqrt(1 - e^(-2s))
// Records the weight vector at every node.
Trajectory integrate_transformed_ode(const ScoreModel& model, const Schedule& schedule,
                                     const Eigen::VectorXd& xT, const SGrid& grid);

// s = h(t; c) = -ln(sigma^2(t) + c)/2, and its inverse.
double time_transform(const Schedule& schedule, double t, double c = 0.0);
double time_transform_inverse(const Schedule& schedule, double s, double c = 0.0);

// Euler-Maruyama steps of the reverse SDE with diffusion strength alpha2;
// alpha2 = 0 reduces exactly to Euler steps of the ODE on the same grid.
Trajectory integrate_reverse_sde(const ScoreModel& model, const Schedule& schedule,
                                 const Eigen::VectorXd& xT, double alpha2, const TimeGrid& grid,
                                 Rng& rng);

// Draw from the reference distribution g_T: N(0, sigma^2(T) I) for VE,
// N(0, I) for VP.
Eigen::VectorXd sample_terminal_prior(const Schedule& schedule, int dim, Rng& rng);

// Draws `count` initial conditions from g_T, integrates the reverse ODE to
// t_min, and returns the terminal points in sample order.  Sample i uses the
// generator seeded with subseed(master_seed, i).  t_min = 0 requires a score
// regular at t = 0 (Tikhonov models step on a grid uniform in s down to
// s_inf).  point_dim is only needed for models without a dataset.
std::vector<Eigen::VectorXd> generate_samples(const ScoreModel& model, const Schedule& schedule,
                                              int count, double t_min, std::uint64_t master_seed,
                                              int steps = 400, int point_dim = -1);

}  // namespace scorelab
