#include "scorelab/schedule.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "scorelab/errors.hpp"

namespace scorelab {

namespace {

constexpr double kQuadRelTol = 1e-10;
const double kLn10 = std::log(10.0);

double quad(const std::function<double(double)>& f, double a, double b) {
  if (b <= a) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 12, kQuadRelTol);
}

}  // namespace

Schedule Schedule::make(ScheduleKind kind, const std::string& g_name,
                        const std::vector<double>& params, double T) {
  if (!(T > 0.0)) throw DomainError("schedule: T must be positive");
  Schedule s;
  s.kind_ = kind;
  s.T_ = T;
  s.g_name_ = g_name;
  s.g_params_ = params;
  if (g_name == "quadratic") {
    s.g_fn_ = [](double t) { return 2.0 * t; };
    s.g_integral_fn_ = [](double t) { return t * t; };
  } else if (g_name == "exponential") {
    s.g_fn_ = [](double t) { return std::pow(10.0, t); };
    s.g_integral_fn_ = [](double t) { return std::expm1(t * kLn10) / kLn10; };
  } else if (g_name == "constant") {
    s.g_fn_ = [](double) { return 1.0; };
    s.g_integral_fn_ = [](double t) { return t; };
  } else if (g_name == "linear") {
    double beta_min = 0.001, beta_max = 3.0;
    if (params.size() == 2) {
      beta_min = params[0];
      beta_max = params[1];
    } else if (!params.empty()) {
      throw DomainError("linear g expects params beta_min,beta_max");
    }
    if (beta_min < 0.0 || beta_max < beta_min)
      throw DomainError("linear g: need 0 <= beta_min <= beta_max");
    s.g_params_ = {beta_min, beta_max};
    s.g_fn_ = [beta_min, beta_max](double t) { return beta_min + t * (beta_max - beta_min); };
    s.g_integral_fn_ = [beta_min, beta_max](double t) {
      return beta_min * t + 0.5 * (beta_max - beta_min) * t * t;
    };
  } else {
    throw DomainError("unknown g catalog name: '" + g_name + "'");
  }
  return s;
}

Schedule Schedule::ve_quadratic(double T) {
  return make(ScheduleKind::VarianceExploding, "quadratic", {}, T);
}

Schedule Schedule::ve_exponential(double T) {
  return make(ScheduleKind::VarianceExploding, "exponential", {}, T);
}

Schedule Schedule::vp_constant(double T) {
  return make(ScheduleKind::VariancePreserving, "constant", {}, T);
}

Schedule Schedule::vp_linear(double beta_min, double beta_max, double T) {
  return make(ScheduleKind::VariancePreserving, "linear", {beta_min, beta_max}, T);
}

Schedule Schedule::custom(ScheduleKind kind, std::function<double(double)> g, double T) {
  if (!g) throw DomainError("custom schedule: g must be callable");
  if (!(T > 0.0)) throw DomainError("custom schedule: T must be positive");
  Schedule s;
  s.kind_ = kind;
  s.T_ = T;
  s.g_name_ = "custom";
  s.g_fn_ = g;
  s.g_integral_fn_ = [g](double t) { return quad(g, 0.0, t); };
  return s;
}

void Schedule::check_time(double t) const {
  if (!(t >= 0.0) || t > T_) {
    std::ostringstream os;
    os << "time " << t << " outside [0, " << T_ << "]";
    throw DomainError(os.str());
  }
}

double Schedule::g(double t) const {
  check_time(t);
  return g_fn_(t);
}

double Schedule::beta(double t) const {
  check_time(t);
  return kind_ == ScheduleKind::VariancePreserving ? g_fn_(t) : 0.0;
}

double Schedule::g_integral(double t) const {
  check_time(t);
  return g_integral_fn_(t);
}

double Schedule::mean_coeff(double t) const {
  check_time(t);
  if (kind_ == ScheduleKind::VarianceExploding) return 1.0;
  return std::exp(-0.5 * g_integral_fn_(t));
}

double Schedule::variance(double t) const {
  check_time(t);
  const double b = g_integral_fn_(t);
  if (kind_ == ScheduleKind::VarianceExploding) return b;
  return -std::expm1(-b);  // 1 - exp(-B), accurate near 0
}

double Schedule::invert_variance(double v) const {
  const double v_max = variance(T_);
  if (!(v > 0.0) || v > v_max) {
    std::ostringstream os;
    os << "variance value " << v << " outside (0, " << v_max << "]";
    throw DomainError(os.str());
  }
  const double tol = 1e-12 * v_max;
  double lo = 0.0, hi = T_;
  double t = 0.5 * T_;
  for (int it = 0; it < 200; ++it) {
    const double f = variance(t) - v;
    if (std::abs(f) <= tol) return t;
    (f > 0.0 ? hi : lo) = t;
    // Newton step on the monotone map, bisection fallback.
    double dv = g_fn_(t);
    if (kind_ == ScheduleKind::VariancePreserving) dv *= std::exp(-g_integral_fn_(t));
    double t_next = (dv > 0.0) ? t - f / dv : t;
    if (!(t_next > lo) || !(t_next < hi)) t_next = 0.5 * (lo + hi);
    t = t_next;
  }
  return t;
}

GaussianMarginal Schedule::marginal(double t) const {
  return {mean_coeff(t), std::sqrt(variance(t))};
}

Eigen::VectorXd Schedule::sample_forward_marginal(const Eigen::VectorXd& x0, double t,
                                                  Rng& rng) const {
  const GaussianMarginal gm = marginal(t);
  return gm.mean_coeff * x0 + gm.std * rng.normal_vec(static_cast<int>(x0.size()));
}

std::string Schedule::id() const {
  std::ostringstream os;
  os << (kind_ == ScheduleKind::VarianceExploding ? "ve" : "vp") << ":" << g_name_;
  if (!g_params_.empty()) {
    os << "(";
    for (std::size_t i = 0; i < g_params_.size(); ++i) {
      if (i) os << ",";
      os << g_params_[i];
    }
    os << ")";
  }
  os << ":T=" << T_;
  return os.str();
}

std::string Schedule::to_config() const {
  if (g_name_ == "custom") throw DomainError("custom g is not serializable");
  std::ostringstream os;
  os.precision(17);
  os << "kind = " << (kind_ == ScheduleKind::VarianceExploding ? "ve" : "vp") << "\n";
  os << "g.name = " << g_name_ << "\n";
  os << "g.params = ";
  for (std::size_t i = 0; i < g_params_.size(); ++i) {
    if (i) os << ",";
    os << g_params_[i];
  }
  os << "\n";
  os << "T = " << T_ << "\n";
  return os.str();
}

Schedule Schedule::from_config(const std::string& text) {
  std::string kind, name, params_str;
  double T = 1.0;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "kind") kind = val;
    else if (key == "g.name") name = val;
    else if (key == "g.params") params_str = val;
    else if (key == "T") T = std::stod(val);
  }
  std::vector<double> params;
  std::istringstream ps(params_str);
  std::string tok;
  while (std::getline(ps, tok, ',')) {
    if (!tok.empty()) params.push_back(std::stod(tok));
  }
  ScheduleKind k;
  if (kind == "ve") k = ScheduleKind::VarianceExploding;
  else if (kind == "vp") k = ScheduleKind::VariancePreserving;
  else throw DomainError("schedule config: kind must be 've' or 'vp', got '" + kind + "'");
  return make(k, name, params, T);
}

}  // namespace scorelab
