#include "scorelab/reverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "scorelab/errors.hpp"

namespace scorelab {

namespace {

constexpr double kDivergenceBound = 1e6;

void check_state(const Eigen::VectorXd& x, double at, const Trajectory& traj) {
  if (x.allFinite() && x.norm() <= kDivergenceBound) return;
  std::ostringstream os;
  os << "trajectory diverged near node time " << at << " (|x| > 1e6 or non-finite)";
  throw DivergenceError(os.str(), traj.times.back(), traj.states.back());
}

// One classical RK4 step x(t0) -> x(t0 + h) for dx/dt = f(x, t).
template <typename F>
Eigen::VectorXd rk4_step(const F& f, const Eigen::VectorXd& x, double t0, double h) {
  const Eigen::VectorXd k1 = f(x, t0);
  const Eigen::VectorXd k2 = f(x + 0.5 * h * k1, t0 + 0.5 * h);
  const Eigen::VectorXd k3 = f(x + 0.5 * h * k2, t0 + 0.5 * h);
  const Eigen::VectorXd k4 = f(x + h * k3, t0 + h);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

TimeGrid TimeGrid::geometric(double T, double t_min, int steps) {
  if (!(T > 0.0) || !(t_min > 0.0) || t_min >= T)
    throw DomainError("geometric grid: need 0 < t_min < T");
  if (steps < 2) throw DomainError("time grid: steps must be >= 2");
  TimeGrid grid;
  grid.kind = Kind::GeometricInT;
  grid.nodes.resize(steps + 1);
  const double ratio = t_min / T;
  for (int i = 0; i <= steps; ++i)
    grid.nodes[i] = T * std::pow(ratio, static_cast<double>(i) / steps);
  grid.nodes.front() = T;
  grid.nodes.back() = t_min;
  return grid;
}

TimeGrid TimeGrid::uniform_in_s(const Schedule& schedule, double t_min, int steps, double c) {
  if (steps < 2) throw DomainError("time grid: steps must be >= 2");
  if (t_min < 0.0 || t_min >= schedule.final_time())
    throw DomainError("uniform_in_s grid: need 0 <= t_min < T");
  if (t_min == 0.0 && !(c > 0.0))
    throw DomainError("uniform_in_s grid: t_min = 0 requires c > 0");
  const double s0 = time_transform(schedule, schedule.final_time(), c);
  const double s_end = (t_min > 0.0) ? time_transform(schedule, t_min, c) : -0.5 * std::log(c);
  TimeGrid grid;
  grid.kind = Kind::UniformInS;
  grid.nodes.resize(steps + 1);
  const double s_inf = (c > 0.0) ? -0.5 * std::log(c) : 0.0;
  const double v_max = schedule.variance(schedule.final_time());
  for (int i = 0; i <= steps; ++i) {
    const double s = s0 + (s_end - s0) * static_cast<double>(i) / steps;
    // sigma^2(t) = e^(-2s) - c, evaluated in a cancellation-free form for c > 0.
    double v = (c > 0.0) ? c * std::expm1(-2.0 * (s - s_inf)) : std::exp(-2.0 * s);
    v = std::min(v, v_max);
    grid.nodes[i] = (v <= 0.0) ? 0.0 : schedule.invert_variance(v);
  }
  grid.nodes.front() = schedule.final_time();
  grid.nodes.back() = t_min;
  return grid;
}

SGrid SGrid::uniform(const Schedule& schedule, double t_end, int steps, double c) {
  if (steps < 2) throw DomainError("s grid: steps must be >= 2");
  if (t_end < 0.0 || t_end >= schedule.final_time())
    throw DomainError("s grid: need 0 <= t_end < T");
  if (t_end == 0.0 && !(c > 0.0)) throw DomainError("s grid: t_end = 0 requires c > 0");
  const double s0 = time_transform(schedule, schedule.final_time(), c);
  const double s_end = (t_end > 0.0) ? time_transform(schedule, t_end, c) : -0.5 * std::log(c);
  SGrid grid;
  grid.c = c;
  grid.nodes.resize(steps + 1);
  for (int i = 0; i <= steps; ++i)
    grid.nodes[i] = s0 + (s_end - s0) * static_cast<double>(i) / steps;
  return grid;
}

double time_transform(const Schedule& schedule, double t, double c) {
  if (c < 0.0) throw DomainError("time_transform: c must be >= 0");
  if (t == 0.0 && !(c > 0.0)) throw SingularTimeError("time_transform: t = 0 requires c > 0");
  return -0.5 * std::log(schedule.variance(t) + c);
}

double time_transform_inverse(const Schedule& schedule, double s, double c) {
  if (c < 0.0) throw DomainError("time_transform_inverse: c must be >= 0");
  const double v = std::exp(-2.0 * s) - c;
  // invert_variance enforces v in (0, sigma^2(T)].
  return schedule.invert_variance(v);
}

Eigen::VectorXd reverse_ode_rhs(const ScoreModel& model, const Schedule& schedule,
                                const Eigen::VectorXd& x, double t) {
  return -0.5 * schedule.beta(t) * x - 0.5 * schedule.g(t) * model.score(x, t);
}

Trajectory integrate_reverse_ode(const ScoreModel& model, const Schedule& schedule,
                                 const Eigen::VectorXd& xT, const TimeGrid& grid) {
  if (!xT.allFinite()) throw DomainError("integrate_reverse_ode: xT must be finite");
  Trajectory traj;
  traj.schedule_id = schedule.id();
  traj.model_id = model.id();
  traj.times.reserve(grid.nodes.size());
  traj.states.reserve(grid.nodes.size());
  traj.times.push_back(grid.nodes.front());
  traj.states.push_back(xT);

  const auto f = [&](const Eigen::VectorXd& x, double t) {
    return reverse_ode_rhs(model, schedule, x, t);
  };
  Eigen::VectorXd x = xT;
  for (int i = 0; i + 1 < static_cast<int>(grid.nodes.size()); ++i) {
    const double t0 = grid.nodes[i];
    const double h = grid.nodes[i + 1] - t0;  // negative: backward in t
    x = rk4_step(f, x, t0, h);
    check_state(x, grid.nodes[i + 1], traj);
    traj.times.push_back(grid.nodes[i + 1]);
    traj.states.push_back(x);
  }
  return traj;
}

namespace {

// sigma^2 at s for the transformed dynamics; exact zero at s_inf when c > 0.
double sigma2_of_s(double s, double c, double s_inf) {
  if (c > 0.0) {
    const double v = c * std::expm1(-2.0 * (s - s_inf));
    return v > 0.0 ? v : 0.0;
  }
  return std::exp(-2.0 * s);
}

}  // namespace

Trajectory integrate_transformed_ode(const ScoreModel& model, const Schedule& schedule,
                                     const Eigen::VectorXd& xT, const SGrid& grid) {
  const bool exact = model.family() == ScoreModel::Family::Exact;
  const bool tikhonov = model.family() == ScoreModel::Family::Tikhonov;
  if (!exact && !tikhonov)
    throw DomainError("integrate_transformed_ode: model must be exact or Tikhonov");
  const double c = model.regularization();
  if (std::abs(c - grid.c) > 0.0)
    throw DomainError("integrate_transformed_ode: grid c does not match the model");
  const bool vp = schedule.kind() == ScheduleKind::VariancePreserving;
  if (vp && c > 0.0)
    throw DomainError("integrate_transformed_ode: Tikhonov transform is defined for VE only");
  if (!xT.allFinite()) throw DomainError("integrate_transformed_ode: xT must be finite");
  const double s_inf = (c > 0.0) ? -0.5 * std::log(c) : 0.0;
  if (c > 0.0 && grid.nodes.back() > s_inf + 1e-12)
    throw DomainError("integrate_transformed_ode: grid extends beyond s_inf = -ln(c)/2");

  const auto& pts = model.dataset().points();
  const auto f = [&](const Eigen::VectorXd& y, double s) -> Eigen::VectorXd {
    const double sigma2 = sigma2_of_s(s, c, s_inf);
    if (vp) {
      const double m = std::sqrt(-std::expm1(-2.0 * s));  // sqrt(1 - e^(-2s))
      const WeightVector w = mixture_weights_at(pts, m, sigma2, y);
      Eigen::VectorXd yN = Eigen::VectorXd::Zero(y.size());
      for (std::size_t n = 0; n < pts.size(); ++n) yN += w[static_cast<int>(n)] * pts[n];
      return -(y - yN / m);
    }
    const WeightVector w = mixture_weights_at(pts, 1.0, sigma2, y);
    Eigen::VectorXd yN = Eigen::VectorXd::Zero(y.size());
    for (std::size_t n = 0; n < pts.size(); ++n) yN += w[static_cast<int>(n)] * pts[n];
    return -(y - yN);
  };

  Trajectory traj;
  traj.schedule_id = schedule.id();
  traj.model_id = model.id();
  const int n_nodes = static_cast<int>(grid.nodes.size());
  traj.s_values = grid.nodes;
  traj.times.resize(n_nodes);
  traj.states.reserve(n_nodes);
  traj.node_weights.reserve(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    const double v = sigma2_of_s(grid.nodes[i], c, s_inf);
    traj.times[i] = (v > 0.0) ? schedule.invert_variance(std::min(v, schedule.variance(schedule.final_time())))
                              : 0.0;
  }

  Eigen::VectorXd y = xT;
  auto record = [&](int i) {
    const double sigma2 = sigma2_of_s(grid.nodes[i], c, s_inf);
    const double m = vp ? std::sqrt(-std::expm1(-2.0 * grid.nodes[i])) : 1.0;
    traj.node_weights.push_back(mixture_weights_at(pts, m, sigma2, y));
    traj.states.push_back(y);
  };
  record(0);
  for (int i = 0; i + 1 < n_nodes; ++i) {
    const double s0 = grid.nodes[i];
    const double h = grid.nodes[i + 1] - s0;  // positive: forward in s
    y = rk4_step(f, y, s0, h);
    check_state(y, grid.nodes[i + 1], traj);
    record(i + 1);
  }
  return traj;
}

Trajectory integrate_reverse_sde(const ScoreModel& model, const Schedule& schedule,
                                 const Eigen::VectorXd& xT, double alpha2, const TimeGrid& grid,
                                 Rng& rng) {
  if (alpha2 < 0.0) throw DomainError("integrate_reverse_sde: alpha2 must be >= 0");
  if (!xT.allFinite()) throw DomainError("integrate_reverse_sde: xT must be finite");
  Trajectory traj;
  traj.schedule_id = schedule.id();
  traj.model_id = model.id();
  traj.times.push_back(grid.nodes.front());
  traj.states.push_back(xT);

  Eigen::VectorXd x = xT;
  const int dim = static_cast<int>(xT.size());
  for (int i = 0; i + 1 < static_cast<int>(grid.nodes.size()); ++i) {
    const double t0 = grid.nodes[i];
    const double h = grid.nodes[i + 1] - t0;  // negative
    const Eigen::VectorXd drift =
        -0.5 * schedule.beta(t0) * x - 0.5 * (1.0 + alpha2) * schedule.g(t0) * model.score(x, t0);
    x += h * drift;
    if (alpha2 > 0.0)
      x += std::sqrt(alpha2 * schedule.g(t0) * std::abs(h)) * rng.normal_vec(dim);
    check_state(x, grid.nodes[i + 1], traj);
    traj.times.push_back(grid.nodes[i + 1]);
    traj.states.push_back(x);
  }
  return traj;
}

Eigen::VectorXd sample_terminal_prior(const Schedule& schedule, int dim, Rng& rng) {
  const double scale = schedule.kind() == ScheduleKind::VarianceExploding
                           ? std::sqrt(schedule.variance(schedule.final_time()))
                           : 1.0;
  return scale * rng.normal_vec(dim);
}

std::vector<Eigen::VectorXd> generate_samples(const ScoreModel& model, const Schedule& schedule,
                                              int count, double t_min, std::uint64_t master_seed,
                                              int steps, int point_dim) {
  if (count < 1) throw DomainError("generate_samples: count must be >= 1");
  if (t_min < 0.0) throw DomainError("generate_samples: t_min must be >= 0");
  TimeGrid grid;
  if (t_min > 0.0) {
    grid = TimeGrid::geometric(schedule.final_time(), t_min, steps);
  } else if (model.family() == ScoreModel::Family::Tikhonov) {
    grid = TimeGrid::uniform_in_s(schedule, 0.0, steps, model.regularization());
  } else if (model.regular_at_zero()) {
    // Regular custom scores: plain uniform grid down to t = 0.
    grid.kind = TimeGrid::Kind::GeometricInT;
    grid.nodes.resize(steps + 1);
    for (int i = 0; i <= steps; ++i)
      grid.nodes[i] = schedule.final_time() * (1.0 - static_cast<double>(i) / steps);
    grid.nodes.back() = 0.0;
  } else {
    throw DomainError("generate_samples: t_min = 0 requires a score regular at t = 0");
  }

  const int dim = model.dataset().size() > 0 ? model.dataset().dim() : point_dim;
  if (dim <= 0)
    throw DomainError("generate_samples: point_dim required for models without a dataset");
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  std::vector<int> failed;
  for (int i = 0; i < count; ++i) {
    Rng rng(subseed(master_seed, static_cast<std::uint64_t>(i)));
    const Eigen::VectorXd xT = sample_terminal_prior(schedule, dim, rng);
    try {
      out.push_back(integrate_reverse_ode(model, schedule, xT, grid).terminal());
    } catch (const DivergenceError&) {
      failed.push_back(i);
      out.push_back(Eigen::VectorXd::Constant(dim, std::numeric_limits<double>::quiet_NaN()));
    }
  }
  if (!failed.empty()) {
    std::ostringstream os;
    os << "generate_samples: " << failed.size() << " trajectories diverged (samples";
    for (int i : failed) os << " " << i;
    os << ")";
    throw DivergenceError(os.str(), t_min, out[failed.front()]);
  }
  return out;
}

}  // namespace scorelab
