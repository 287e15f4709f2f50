#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "scorelab/rng.hpp"

namespace scorelab {

enum class ScheduleKind { VarianceExploding, VariancePreserving };

// Conditional law of the forward process at time t: x(t)|x0 ~ N(m(t) x0, std^2 I).
struct GaussianMarginal {
  double mean_coeff = 1.0;
  double std = 0.0;
};

// Noise schedule of the linear forward SDE dx = -beta(t)/2 x dt + sqrt(g(t)) dW
// on [0, T], with beta = 0 (variance exploding) or beta = g (variance
// preserving).  Everything is derived from the running integral
// B(t) = int_0^t g:
//
//   VE:  m(t) = 1,            sigma^2(t) = B(t)
//   VP:  m(t) = exp(-B(t)/2), sigma^2(t) = 1 - exp(-B(t))
//
// Catalog schedules carry closed-form B; a custom g falls back to adaptive
// Gauss-Kronrod quadrature with relative tolerance 1e-10.
class Schedule {
 public:
  // Catalog g names: "quadratic" (2t), "exponential" (10^t), "constant" (1),
  // "linear" (beta_min + t (beta_max - beta_min); params {beta_min, beta_max}).
  static Schedule make(ScheduleKind kind, const std::string& g_name,
                       const std::vector<double>& params, double T);

  static Schedule ve_quadratic(double T = 1.0);    // g(t) = 2t
  static Schedule ve_exponential(double T = 1.0);  // g(t) = 10^t
  static Schedule vp_constant(double T = 1.0);     // g(t) = 1
  static Schedule vp_linear(double beta_min = 0.001, double beta_max = 3.0, double T = 1.0);
  static Schedule custom(ScheduleKind kind, std::function<double(double)> g, double T);

  ScheduleKind kind() const { return kind_; }
  double final_time() const { return T_; }

  double g(double t) const;
  double beta(double t) const;        // 0 for VE, g(t) for VP
  double g_integral(double t) const;  // B(t)

  // m(t); closed form for catalog schedules, quadrature otherwise.
  double mean_coeff(double t) const;
  // sigma^2(t); strictly increasing on (0, T].
  double variance(double t) const;
  // t with |sigma^2(t) - v| <= 1e-12 sigma^2(T), for v in (0, sigma^2(T)].
  double invert_variance(double v) const;

  GaussianMarginal marginal(double t) const;

  // m(t) x0 + sigma(t) eta with eta drawn from rng; exact x0 at t = 0.
  Eigen::VectorXd sample_forward_marginal(const Eigen::VectorXd& x0, double t, Rng& rng) const;

  std::string id() const;

  // Key-value config block:
  //   kind = ve | vp
  //   g.name = quadratic | exponential | constant | linear
  //   g.params = p1,p2,...
  //   T = <final time>
  std::string to_config() const;
  static Schedule from_config(const std::string& text);

 private:
  Schedule() = default;
  void check_time(double t) const;

  ScheduleKind kind_ = ScheduleKind::VarianceExploding;
  double T_ = 1.0;
  std::string g_name_ = "custom";
  std::vector<double> g_params_;
  std::function<double(double)> g_fn_;
  std::function<double(double)> g_integral_fn_;  // closed form or quadrature
};

}  // namespace scorelab
