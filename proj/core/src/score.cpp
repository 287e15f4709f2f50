#include "scorelab/score.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "scorelab/errors.hpp"

namespace scorelab {

namespace {

struct MixtureEval {
  Eigen::VectorXd weights;   // normalized, sum 1
  double log_sum = 0.0;      // logsumexp of the unnormalized log weights
  bool degenerate = false;   // sigma2 == 0 limit (weights are a nearest-point indicator)
};

// Normalized Gaussian weights at conditional moments (m, sigma2).  At
// sigma2 = 0 the softmax limit assigns equal weight to the nearest points;
// density-related quantities are then undefined.
MixtureEval eval_weights(const std::vector<Eigen::VectorXd>& pts, double m, double sigma2,
                         const Eigen::VectorXd& x) {
  const int n = static_cast<int>(pts.size());
  MixtureEval out;
  out.weights.resize(n);

  Eigen::VectorXd sq(n);
  for (int i = 0; i < n; ++i) sq[i] = (x - m * pts[i]).squaredNorm();

  if (sigma2 == 0.0) {
    out.degenerate = true;
    const double d_min = sq.minCoeff();
    int ties = 0;
    for (int i = 0; i < n; ++i)
      if (sq[i] == d_min) ++ties;
    for (int i = 0; i < n; ++i) out.weights[i] = (sq[i] == d_min) ? 1.0 / ties : 0.0;
    out.log_sum = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  const Eigen::VectorXd logits = -sq / (2.0 * sigma2);
  const double lmax = logits.maxCoeff();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += std::exp(logits[i] - lmax);
  for (int i = 0; i < n; ++i) out.weights[i] = std::exp(logits[i] - lmax) / acc;
  out.log_sum = lmax + std::log(acc);
  return out;
}

Eigen::VectorXd weighted_mean(const std::vector<Eigen::VectorXd>& pts,
                              const Eigen::VectorXd& w) {
  Eigen::VectorXd xbar = Eigen::VectorXd::Zero(pts[0].size());
  for (std::size_t i = 0; i < pts.size(); ++i) xbar += w[static_cast<int>(i)] * pts[i];
  return xbar;
}

void check_mixture_time(const Schedule& schedule, double t) {
  if (!(t >= 0.0) || t > schedule.final_time()) {
    std::ostringstream os;
    os << "time " << t << " outside [0, " << schedule.final_time() << "]";
    throw DomainError(os.str());
  }
  if (t == 0.0) throw SingularTimeError();
}

}  // namespace

WeightVector mixture_weights(const Dataset& data, const Schedule& schedule,
                             const Eigen::VectorXd& x, double t) {
  check_mixture_time(schedule, t);
  return eval_weights(data.points(), schedule.mean_coeff(t), schedule.variance(t), x).weights;
}

WeightVector mixture_weights_at(const std::vector<Eigen::VectorXd>& points, double mean_coeff,
                                double sigma2, const Eigen::VectorXd& x) {
  if (sigma2 < 0.0) throw DomainError("mixture_weights_at: sigma2 must be >= 0");
  return eval_weights(points, mean_coeff, sigma2, x).weights;
}

double mixture_log_density(const Dataset& data, const Schedule& schedule,
                           const Eigen::VectorXd& x, double t) {
  check_mixture_time(schedule, t);
  const double sigma2 = schedule.variance(t);
  const double m = schedule.mean_coeff(t);
  const MixtureEval me = eval_weights(data.points(), m, sigma2, x);
  const double d = static_cast<double>(data.dim());
  return me.log_sum - 0.5 * d * std::log(2.0 * std::numbers::pi * sigma2) -
         std::log(static_cast<double>(data.size()));
}

Eigen::VectorXd empirical_score(const Dataset& data, const Schedule& schedule,
                                const Eigen::VectorXd& x, double t) {
  check_mixture_time(schedule, t);
  const double sigma2 = schedule.variance(t);
  const double m = schedule.mean_coeff(t);
  const MixtureEval me = eval_weights(data.points(), m, sigma2, x);
  return -(x - m * weighted_mean(data.points(), me.weights)) / sigma2;
}

Eigen::VectorXd tikhonov_score(const Dataset& data, const Schedule& schedule,
                               const Eigen::VectorXd& x, double t, double c) {
  if (c < 0.0) throw DomainError("tikhonov_score: c must be >= 0");
  if (!(t >= 0.0) || t > schedule.final_time())
    throw DomainError("tikhonov_score: time outside [0, T]");
  if (t == 0.0 && c == 0.0) throw SingularTimeError();
  const double sigma2 = schedule.variance(t);
  const double m = schedule.mean_coeff(t);
  const MixtureEval me = eval_weights(data.points(), m, sigma2, x);
  return -(x - m * weighted_mean(data.points(), me.weights)) / (c + sigma2);
}

Eigen::VectorXd empirical_bayes_score(const Dataset& data, const Schedule& schedule,
                                      const Eigen::VectorXd& x, double t, double c) {
  if (c < 0.0) throw DomainError("empirical_bayes_score: c must be >= 0");
  const Eigen::VectorXd s = empirical_score(data, schedule, x, t);
  if (c == 0.0) return s;
  const double log_p = mixture_log_density(data, schedule, x, t);
  const double log_c = std::log(c);
  if (log_p >= log_c) return s;
  return std::exp(log_p - log_c) * s;
}

Eigen::VectorXd conditional_empirical_score(const Dataset& data, const Schedule& schedule,
                                            const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                            double t) {
  if (!data.has_observations())
    throw UndefinedObservationError();
  const std::vector<int> group = data.group_indices(y);
  if (group.empty()) throw UndefinedObservationError();
  return empirical_score(data.subset(group), schedule, x, t);
}

ScoreModel ScoreModel::exact(Dataset data, Schedule schedule) {
  ScoreModel mdl;
  mdl.family_ = Family::Exact;
  mdl.data_ = std::move(data);
  mdl.schedule_ = std::move(schedule);
  mdl.id_ = "exact";
  return mdl;
}

ScoreModel ScoreModel::tikhonov(Dataset data, Schedule schedule, double c) {
  if (!(c > 0.0)) throw DomainError("ScoreModel::tikhonov: c must be > 0");
  ScoreModel mdl;
  mdl.family_ = Family::Tikhonov;
  mdl.data_ = std::move(data);
  mdl.schedule_ = std::move(schedule);
  mdl.c_ = c;
  mdl.regular_at_zero_ = true;
  std::ostringstream os;
  os << "tikhonov:c=" << c;
  mdl.id_ = os.str();
  return mdl;
}

ScoreModel ScoreModel::empirical_bayes(Dataset data, Schedule schedule, double c) {
  if (!(c > 0.0)) throw DomainError("ScoreModel::empirical_bayes: c must be > 0");
  ScoreModel mdl;
  mdl.family_ = Family::EmpiricalBayes;
  mdl.data_ = std::move(data);
  mdl.schedule_ = std::move(schedule);
  mdl.c_ = c;
  std::ostringstream os;
  os << "eb:c=" << c;
  mdl.id_ = os.str();
  return mdl;
}

ScoreModel ScoreModel::conditional(Dataset data, Schedule schedule, Eigen::VectorXd y) {
  if (!data.has_observations())
    throw UndefinedObservationError();
  const std::vector<int> group = data.group_indices(y);
  if (group.empty()) throw UndefinedObservationError();
  ScoreModel mdl;
  mdl.family_ = Family::Conditional;
  mdl.group_data_ = data.subset(group);
  mdl.data_ = std::move(data);
  mdl.schedule_ = std::move(schedule);
  std::ostringstream os;
  os << "conditional:|I_j|=" << group.size();
  mdl.id_ = os.str();
  return mdl;
}

ScoreModel ScoreModel::custom(std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> fn,
                              std::string id, bool regular_at_zero) {
  if (!fn) throw DomainError("ScoreModel::custom: fn must be callable");
  ScoreModel mdl;
  mdl.family_ = Family::Custom;
  mdl.fn_ = std::move(fn);
  mdl.id_ = std::move(id);
  mdl.regular_at_zero_ = regular_at_zero;
  return mdl;
}

const Schedule& ScoreModel::schedule() const {
  if (!schedule_) throw DomainError("ScoreModel: custom model carries no schedule");
  return *schedule_;
}

Eigen::VectorXd ScoreModel::score(const Eigen::VectorXd& x, double t) const {
  switch (family_) {
    case Family::Exact:
      return empirical_score(data_, *schedule_, x, t);
    case Family::Tikhonov:
      return tikhonov_score(data_, *schedule_, x, t, c_);
    case Family::EmpiricalBayes:
      return empirical_bayes_score(data_, *schedule_, x, t, c_);
    case Family::Conditional:
      return empirical_score(group_data_, *schedule_, x, t);
    case Family::Custom:
      return fn_(x, t);
  }
  throw DomainError("ScoreModel: unknown family");
}

}  // namespace scorelab
