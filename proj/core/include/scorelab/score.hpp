#pragma once

#include <functional>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "scorelab/dataset.hpp"
#include "scorelab/schedule.hpp"

namespace scorelab {

// Normalized mixture weights w_n(x, t); entries in [0, 1], sum 1.
using WeightVector = Eigen::VectorXd;

// Weights of the N-component Gaussian mixture p^N(., t) at x, computed in
// log space with max subtraction.  Exponents below the double underflow
// threshold give exactly-zero weights.  t = 0 is singular.
WeightVector mixture_weights(const Dataset& data, const Schedule& schedule,
                             const Eigen::VectorXd& x, double t);

// Weights at explicit conditional moments (m, sigma2); used by the
// transformed-time dynamics where sigma2 is a function of s.  sigma2 = 0
// yields the nearest-point limit (ties split equally).
WeightVector mixture_weights_at(const std::vector<Eigen::VectorXd>& points, double mean_coeff,
                                double sigma2, const Eigen::VectorXd& x);

// log p^N(x, t) including the (2 pi sigma^2)^(-d/2) normalization and the 1/N
// mixture weight.
double mixture_log_density(const Dataset& data, const Schedule& schedule,
                           const Eigen::VectorXd& x, double t);

// Exact minimizer of the empirical matching loss:
//   s^N(x,t) = -(x - m(t) sum_n w_n(x,t) x0^n) / sigma^2(t).
Eigen::VectorXd empirical_score(const Dataset& data, const Schedule& schedule,
                                const Eigen::VectorXd& x, double t);

// Damped score -(x - m(t) sum_n w_n x0^n) / (c + sigma^2(t)); equal to the
// empirical score at c = 0 and finite at t = 0 when c > 0.
Eigen::VectorXd tikhonov_score(const Dataset& data, const Schedule& schedule,
                               const Eigen::VectorXd& x, double t, double c);

// Density-floored estimator grad p^N / max(p^N, c), i.e. the empirical score
// scaled by min(1, p^N(x,t)/c).  The floor compares against the actual
// density value, so the useful range of c depends on d and sigma(t).
Eigen::VectorXd empirical_bayes_score(const Dataset& data, const Schedule& schedule,
                                      const Eigen::VectorXd& x, double t, double c);

// Empirical score restricted to the points whose observation equals y
// bitwise, with weights renormalized over that group.  Throws
// UndefinedObservationError when y is not in the marginal dataset.
Eigen::VectorXd conditional_empirical_score(const Dataset& data, const Schedule& schedule,
                                            const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                            double t);

// Tagged score family used by the reverse dynamics.
class ScoreModel {
 public:
  enum class Family { Exact, Tikhonov, EmpiricalBayes, Conditional, Custom };

  static ScoreModel exact(Dataset data, Schedule schedule);
  static ScoreModel tikhonov(Dataset data, Schedule schedule, double c);
  static ScoreModel empirical_bayes(Dataset data, Schedule schedule, double c);
  static ScoreModel conditional(Dataset data, Schedule schedule, Eigen::VectorXd y);
  // Arbitrary score function (neural nets plug in through this).
  static ScoreModel custom(std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> fn,
                           std::string id, bool regular_at_zero);

  Eigen::VectorXd score(const Eigen::VectorXd& x, double t) const;

  Family family() const { return family_; }
  // c for regularized families, 0 otherwise.
  double regularization() const { return c_; }
  // True when the score is finite at t = 0 (Tikhonov with c > 0, or a custom
  // score declared regular).
  bool regular_at_zero() const { return regular_at_zero_; }
  const Dataset& dataset() const { return data_; }
  const Schedule& schedule() const;  // throws DomainError for custom models
  const std::string& id() const { return id_; }

 private:
  ScoreModel() = default;

  Family family_ = Family::Exact;
  Dataset data_;
  Dataset group_data_;  // Conditional: points with matching observation
  std::optional<Schedule> schedule_;
  double c_ = 0.0;
  bool regular_at_zero_ = false;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> fn_;
  std::string id_;
};

}  // namespace scorelab
