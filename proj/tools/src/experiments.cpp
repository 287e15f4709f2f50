#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include "scorelab/errors.hpp"
#include "scorelab/geometry.hpp"
#include "scorelab/nn.hpp"
#include "scorelab/reverse.hpp"
#include "scorelab/rng.hpp"
#include "scorelab/score.hpp"

#include "artifacts.hpp"
#include "datagen.hpp"
#include "svg.hpp"

namespace scorelab::cli {

namespace {

// ---------------------------------------------------------------------------
// config plumbing

void deep_merge(json& base, const json& overlay) {
  if (!overlay.is_object() || !base.is_object()) {
    base = overlay;
    return;
  }
  for (const auto& [key, value] : overlay.items()) {
    if (base.contains(key) && base[key].is_object() && value.is_object()) {
      deep_merge(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

json common_defaults() {
  return json{
      {"schedule", {{"kind", "ve"}, {"g", {{"name", "exponential"}, {"params", json::array()}}}, {"T", 1.0}}},
      {"dataset", {{"generator", "gaussian2d"}, {"n", 20}, {"seed", 7}}},
      {"sampling",
       {{"count", 1000}, {"tau", 1e-2}, {"t_min", 1e-4}, {"steps", 400}, {"seed", 1000}}},
  };
}

json experiment_defaults(const std::string& name) {
  json d = common_defaults();
  if (name == "voronoi-trajectories") {
    deep_merge(d, json{{"trajectories", 4}, {"sampling", {{"t_min", 1e-6}}}});
  } else if (name == "rate-fit") {
    deep_merge(d, json{{"trajectories", 30},
                       {"window", 0.3},
                       {"fit_tau", 0.1},
                       {"sampling", {{"t_min", 1e-6}, {"steps", 500}}}});
  } else if (name == "two-point") {
    deep_merge(d, json{{"schedule", {{"g", {{"name", "quadratic"}}}}},
                       {"dataset", {{"generator", "symmetric2"}}},
                       {"grid_side", 9},
                       {"sampling", {{"count", 100}, {"t_min", 1e-3}}}});
  } else if (name == "tikhonov-sweep") {
    deep_merge(d, json{{"sweep", {{"values", {1e-5, 1e-4, 1e-3, 1e-2, 1e-1}}}},
                       {"sampling", {{"t_min", 0.0}}}});
  } else if (name == "eb-sweep") {
    deep_merge(d, json{{"sweep", {{"values", {0.01, 0.1, 1.0}}, {"seeds", {1000, 1001, 1002}}}}});
  } else if (name == "vp-trajectories") {
    deep_merge(d, json{{"schedule",
                        {{"kind", "vp"}, {"g", {{"name", "linear"}, {"params", {0.001, 3.0}}}}}},
                       {"trajectories", 4},
                       {"sampling", {{"t_min", 1e-6}}}});
  } else if (name == "conditional-demo") {
    deep_merge(d, json{{"dataset", {{"generator", "paired-linear"}, {"n", 8}, {"seed", 7}}},
                       {"sampling", {{"count", 100}}},
                       {"query", json::array()}});
  } else if (name.rfind("nn-", 0) == 0) {
    deep_merge(d, json{{"schedule",
                        {{"kind", "vp"}, {"g", {{"name", "linear"}, {"params", {0.001, 3.0}}}}}},
                       {"sampling", {{"tau", 1e-1}}},
                       {"nn",
                        {{"width", 64},
                         {"epochs", 30000},
                         {"loss", "score-matching"},
                         {"c", 0.0},
                         {"seeds", {1, 2, 3}},
                         {"learning_rate", 1e-3},
                         {"fourier_scale", 1.0}}}});
    if (name == "nn-epoch-sweep") {
      deep_merge(d, json{{"sweep", {{"values", {5000, 30000, 300000}}}}});
    } else if (name == "nn-width-sweep") {
      deep_merge(d, json{{"sweep", {{"values", {8, 32, 128}}}}});
    } else if (name == "nn-tikhonov-sweep") {
      deep_merge(d, json{{"sweep", {{"values", {0.001, 0.01, 0.1}}}},
                         {"nn", {{"loss", "tikhonov"}}}});
    } else if (name == "nn-loss-compare") {
      deep_merge(d, json{{"sweep", {{"values", {"score-matching", "denoising"}}}}});
    }
  }
  return d;
}

Schedule schedule_from(const json& block) {
  const std::string kind = block.at("kind").get<std::string>();
  const json& g = block.at("g");
  std::vector<double> params;
  if (g.contains("params")) params = g.at("params").get<std::vector<double>>();
  ScheduleKind k;
  if (kind == "ve") k = ScheduleKind::VarianceExploding;
  else if (kind == "vp") k = ScheduleKind::VariancePreserving;
  else throw ConfigError("schedule.kind must be 've' or 'vp'");
  return Schedule::make(k, g.at("name").get<std::string>(), params,
                        block.value("T", 1.0));
}

Dataset dataset_from(const json& block) {
  const std::string generator = block.at("generator").get<std::string>();
  if (generator == "gaussian2d" || generator == "paired-linear") {
    if (!block.contains("seed")) throw ConfigError("dataset block: seed is mandatory");
    const int n = block.value("n", 20);
    const auto seed = block.at("seed").get<std::uint64_t>();
    return generator == "gaussian2d" ? gaussian2d(n, seed) : paired_linear(n, seed);
  }
  if (generator == "symmetric2") return symmetric2();
  if (generator == "symmetric4") return symmetric4();
  if (generator == "file") return Dataset::load(block.at("path").get<std::string>());
  throw ConfigError("unknown dataset generator '" + generator + "'");
}

struct Sampling {
  int count;
  double tau;
  double t_min;
  int steps;
  std::uint64_t seed;
};

Sampling sampling_from(const json& cfg) {
  const json& s = cfg.at("sampling");
  if (!s.contains("seed")) throw ConfigError("sampling block: seed is mandatory");
  return {s.at("count").get<int>(), s.at("tau").get<double>(), s.at("t_min").get<double>(),
          s.at("steps").get<int>(), s.at("seed").get<std::uint64_t>()};
}

// ---------------------------------------------------------------------------
// csv/svg helpers

std::string dataset_csv(const Dataset& data) {
  std::ostringstream os;
  os << "index";
  for (int k = 0; k < data.dim(); ++k) os << ",x_" << (k + 1);
  for (int k = 0; k < data.obs_dim(); ++k) os << ",y_" << (k + 1);
  os << "\n";
  for (int n = 0; n < data.size(); ++n) {
    os << n;
    for (int k = 0; k < data.dim(); ++k) os << "," << fmt_g17(data.point(n)[k]);
    for (int k = 0; k < data.obs_dim(); ++k) os << "," << fmt_g17(data.observation(n)[k]);
    os << "\n";
  }
  return os.str();
}

std::string terminals_csv(const std::vector<Eigen::VectorXd>& samples, const Dataset& data) {
  std::ostringstream os;
  os << "sample_id";
  const int dim = samples.empty() ? 0 : static_cast<int>(samples[0].size());
  for (int k = 0; k < dim; ++k) os << ",x_" << (k + 1);
  os << ",nearest_data_index,distance\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    int nearest = 0;
    double best = (samples[i] - data.point(0)).norm();
    for (int n = 1; n < data.size(); ++n) {
      const double dist = (samples[i] - data.point(n)).norm();
      if (dist < best) {
        best = dist;
        nearest = n;
      }
    }
    os << i;
    for (int k = 0; k < dim; ++k) os << "," << fmt_g17(samples[i][k]);
    os << "," << nearest << "," << fmt_g17(best) << "\n";
  }
  return os.str();
}

std::string trajectories_csv(const std::vector<Trajectory>& trajs, const Schedule& schedule,
                             double c) {
  std::ostringstream os;
  const int dim = trajs.empty() ? 0 : static_cast<int>(trajs[0].states[0].size());
  os << "sample_id,node_index,t,s";
  for (int k = 0; k < dim; ++k) os << ",x_" << (k + 1);
  os << "\n";
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const Trajectory& tr = trajs[i];
    for (std::size_t j = 0; j < tr.states.size(); ++j) {
      const double t = tr.times[j];
      double s;
      if (!tr.s_values.empty()) {
        s = tr.s_values[j];
      } else {
        s = -0.5 * std::log(schedule.variance(t) + c);
      }
      os << i << "," << j << "," << fmt_g17(t) << "," << fmt_g17(s);
      for (int k = 0; k < dim; ++k) os << "," << fmt_g17(tr.states[j][k]);
      os << "\n";
    }
  }
  return os.str();
}

std::string edges_csv(const std::vector<Segment>& segs) {
  std::ostringstream os;
  os << "x1,y1,x2,y2\n";
  for (const auto& s : segs) {
    os << fmt_g17(s.a.x()) << "," << fmt_g17(s.a.y()) << "," << fmt_g17(s.b.x()) << ","
       << fmt_g17(s.b.y()) << "\n";
  }
  return os.str();
}

std::vector<Eigen::Vector2d> to_2d(const std::vector<Eigen::VectorXd>& pts) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.emplace_back(p[0], p[1]);
  return out;
}

std::string report_json(const json& body) { return body.dump(2) + "\n"; }

// Scatter figure with data points, generated samples and Voronoi edges.
std::string scatter_svg(const std::string& title, const Dataset& data,
                        const std::vector<Eigen::VectorXd>& samples,
                        const std::vector<Trajectory>& trajs, bool timestamp) {
  SvgPlot plot(title, "x_1", "x_2");
  if (data.dim() == 2 && data.size() >= 2 && data.distinct()) {
    double lo = -3, hi = 3;
    for (int n = 0; n < data.size(); ++n) {
      lo = std::min({lo, data.point(n).minCoeff() - 1.0});
      hi = std::max({hi, data.point(n).maxCoeff() + 1.0});
    }
    plot.add_segments(voronoi_edges_2d(data, lo, hi, lo, hi), "#bbbbbb", 0.8);
  }
  for (const auto& tr : trajs) plot.add_polyline(to_2d(tr.states), "#cc4444", 0.9);
  plot.add_scatter(to_2d(data.points()), 4.0, "#2255cc", true, "data");
  if (!samples.empty()) plot.add_scatter(to_2d(samples), 2.5, "#cc2222", false, "samples");
  return plot.render(timestamp);
}

// ---------------------------------------------------------------------------
// experiments

void exp_trajectories(const json& cfg, ArtifactWriter& out, bool timestamp) {
  const Schedule schedule = schedule_from(cfg.at("schedule"));
  const Dataset data = dataset_from(cfg.at("dataset"));
  const Sampling smp = sampling_from(cfg);
  const int n_traj = cfg.at("trajectories").get<int>();
  const ScoreModel model = ScoreModel::exact(data, schedule);
  const TimeGrid grid = TimeGrid::geometric(schedule.final_time(), smp.t_min, smp.steps);

  std::vector<Trajectory> trajs;
  std::vector<Eigen::VectorXd> terminals;
  json per_traj = json::array();
  for (int i = 0; i < n_traj; ++i) {
    Rng rng(subseed(smp.seed, i));
    const Eigen::VectorXd xT = sample_terminal_prior(schedule, data.dim(), rng);
    Trajectory tr = integrate_reverse_ode(model, schedule, xT, grid);
    const VoronoiClassification cls = voronoi_classify(data, tr.terminal());
    per_traj.push_back({{"sample_id", i},
                        {"nearest", cls.nearest},
                        {"distance", (tr.terminal() - data.point(cls.nearest)).norm()}});
    terminals.push_back(tr.terminal());
    trajs.push_back(std::move(tr));
  }

  out.write("dataset.csv", dataset_csv(data));
  out.write("trajectories.csv", trajectories_csv(trajs, schedule, 0.0));
  out.write("terminals.csv", terminals_csv(terminals, data));
  if (data.dim() == 2) {
    double lo = -3, hi = 3;
    for (int n = 0; n < data.size(); ++n) {
      lo = std::min(lo, data.point(n).minCoeff() - 1.0);
      hi = std::max(hi, data.point(n).maxCoeff() + 1.0);
    }
    out.write("voronoi_edges.csv", edges_csv(voronoi_edges_2d(data, lo, hi, lo, hi)));
  }
  out.write("scatter.svg",
            scatter_svg(cfg.at("experiment").get<std::string>(), data, terminals, trajs,
                        timestamp));
  out.write("report.json", report_json(json{{"experiment", cfg.at("experiment")},
                                            {"schedule", schedule.id()},
                                            {"model", model.id()},
                                            {"seed", smp.seed},
                                            {"t_min", smp.t_min},
                                            {"trajectories", per_traj}}));
}

void exp_rate_fit(const json& cfg, ArtifactWriter& out, bool timestamp) {
  const Schedule schedule = schedule_from(cfg.at("schedule"));
  const Dataset data = dataset_from(cfg.at("dataset"));
  const Sampling smp = sampling_from(cfg);
  const int n_traj = cfg.at("trajectories").get<int>();
  const double window = cfg.at("window").get<double>();
  const double fit_tau = cfg.at("fit_tau").get<double>();
  const ScoreModel model = ScoreModel::exact(data, schedule);
  const SGrid grid = SGrid::uniform(schedule, smp.t_min, smp.steps);

  std::ostringstream fits_csv;
  fits_csv << "sample_id,limit_index,slope_s,slope_sigma,r2\n";
  SvgPlot rate_plot("log distance vs transformed time", "s", "log10 |x - x*|");
  json summary = json::array();
  int in_band = 0;
  for (int i = 0; i < n_traj; ++i) {
    Rng rng(subseed(smp.seed, i));
    const Eigen::VectorXd xT = sample_terminal_prior(schedule, data.dim(), rng);
    const Trajectory tr = integrate_transformed_ode(model, schedule, xT, grid);
    const RateFit fit = convergence_rate_fit(tr, data, schedule, window, fit_tau);
    fits_csv << i << "," << fit.limit_index << "," << fmt_g17(fit.slope_s) << ","
             << fmt_g17(fit.slope_sigma) << "," << fmt_g17(fit.r2) << "\n";
    summary.push_back({{"sample_id", i},
                       {"slope_s", fit.slope_s},
                       {"slope_sigma", fit.slope_sigma},
                       {"r2", fit.r2}});
    if (fit.slope_s >= -1.1 && fit.slope_s <= -0.9) ++in_band;

    std::vector<Eigen::Vector2d> curve;
    for (std::size_t j = 0; j < tr.states.size(); ++j) {
      const double dist = (tr.states[j] - data.point(fit.limit_index)).norm();
      if (dist > 0.0) curve.emplace_back(tr.s_values[j], std::log10(dist));
    }
    rate_plot.add_polyline(curve, "#cc4444", 0.8);
  }
  out.write("dataset.csv", dataset_csv(data));
  out.write("rate_fits.csv", fits_csv.str());
  out.write("rate.svg", rate_plot.render(timestamp));
  out.write("report.json", report_json(json{{"experiment", cfg.at("experiment")},
                                            {"schedule", schedule.id()},
                                            {"seed", smp.seed},
                                            {"slope_band_count", in_band},
                                            {"trajectories", summary}}));
}

void exp_two_point(const json& cfg, ArtifactWriter& out, bool timestamp) {
  const Schedule schedule = schedule_from(cfg.at("schedule"));
  const Dataset data = dataset_from(cfg.at("dataset"));
  const Sampling smp = sampling_from(cfg);
  const ScoreModel model = ScoreModel::exact(data, schedule);
  const TimeGrid grid = TimeGrid::geometric(schedule.final_time(), smp.t_min, smp.steps);
  const double sigma_T = std::sqrt(schedule.variance(schedule.final_time()));

  // Trajectories started on the boundary of a square of width 2 sigma(T).
  const int side = cfg.at("grid_side").get<int>();
  std::vector<Trajectory> trajs;
  for (int i = 0; i < 4 * (side - 1); ++i) {
    const int edge = i / (side - 1);
    const double u = -1.0 + 2.0 * (i % (side - 1)) / (side - 1);
    Eigen::VectorXd xT(2);
    switch (edge) {
      case 0: xT << u, 1; break;
      case 1: xT << 1, -u; break;
      case 2: xT << -u, -1; break;
      default: xT << -1, u; break;
    }
    xT *= sigma_T;
    trajs.push_back(integrate_reverse_ode(model, schedule, xT, grid));
  }

  // On-axis initialization follows x(t) = t x(T) / T exactly.
  Eigen::VectorXd on_axis(2);
  on_axis << 0.0, sigma_T;
  const Trajectory axis_traj = integrate_reverse_ode(model, schedule, on_axis, grid);
  double max_err = 0.0;
  for (std::size_t j = 0; j < axis_traj.states.size(); ++j) {
    const Eigen::VectorXd expected = axis_traj.times[j] / schedule.final_time() * on_axis;
    max_err = std::max(max_err, (axis_traj.states[j] - expected).norm());
  }

  // Random off-axis initializations all collapse onto a data point.
  std::vector<Eigen::VectorXd> terminals;
  for (int i = 0; i < smp.count; ++i) {
    Rng rng(subseed(smp.seed, i));
    const Eigen::VectorXd xT = sample_terminal_prior(schedule, 2, rng);
    terminals.push_back(integrate_reverse_ode(model, schedule, xT, grid).terminal());
  }
  const MemorizationReport rep = memorization_fraction(terminals, data, smp.tau);

  out.write("dataset.csv", dataset_csv(data));
  out.write("trajectories.csv", trajectories_csv(trajs, schedule, 0.0));
  out.write("terminals.csv", terminals_csv(terminals, data));
  out.write("scatter.svg", scatter_svg("two-point", data, terminals, trajs, timestamp));
  out.write("report.json",
            report_json(json{{"experiment", cfg.at("experiment")},
                             {"schedule", schedule.id()},
                             {"seed", smp.seed},
                             {"tau", smp.tau},
                             {"on_axis_max_error", max_err},
                             {"fraction_collapsed", rep.fraction_collapsed},
                             {"boundary_proximal", rep.boundary_proximal_count}}));
}

void write_sweep_outputs(const json& cfg, ArtifactWriter& out, bool timestamp,
                         const std::string& x_label, const std::vector<double>& xs,
                         const std::vector<double>& fractions, const json& detail) {
  std::ostringstream csv;
  csv << x_label << ",fraction\n";
  for (std::size_t i = 0; i < xs.size(); ++i)
    csv << fmt_g17(xs[i]) << "," << fmt_g17(fractions[i]) << "\n";
  out.write("fractions.csv", csv.str());

  SvgPlot plot("memorized fraction", "log10(" + x_label + ")", "fraction");
  std::vector<Eigen::Vector2d> curve;
  for (std::size_t i = 0; i < xs.size(); ++i)
    curve.emplace_back(std::log10(xs[i]), fractions[i]);
  plot.add_polyline(curve, "#2255cc", 1.5);
  plot.add_scatter(curve, 3.5, "#2255cc", true, "fraction");
  plot.set_range(curve.front().x(), curve.back().x(), 0.0, 1.0);
  out.write("sweep.svg", plot.render(timestamp));
  out.write("report.json", report_json(detail));
}

void exp_tikhonov_sweep(const json& cfg, ArtifactWriter& out, bool timestamp) {
  const Schedule schedule = schedule_from(cfg.at("schedule"));
  const Dataset data = dataset_from(cfg.at("dataset"));
  const Sampling smp = sampling_from(cfg);
  const auto values = cfg.at("sweep").at("values").get<std::vector<double>>();

  std::vector<double> fractions;
  json detail = json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double c = values[i];
    const ScoreModel model = ScoreModel::tikhonov(data, schedule, c);
    const auto samples =
        generate_samples(model, schedule, smp.count, smp.t_min, smp.seed, smp.steps);
    const MemorizationReport rep = memorization_fraction(samples, data, smp.tau);
    fractions.push_back(rep.fraction_collapsed);
    detail.push_back({{"c", c}, {"fraction", rep.fraction_collapsed}});
    std::ostringstream name;
    name << "terminals_c" << i << ".csv";
    out.write(name.str(), terminals_csv(samples, data));
  }
  out.write("dataset.csv", dataset_csv(data));
  write_sweep_outputs(cfg, out, timestamp, "c", values, fractions,
                      json{{"experiment", cfg.at("experiment")},
                           {"schedule", schedule.id()},
                           {"tau", smp.tau},
                           {"seed", smp.seed},
                           {"sweep", detail}});
}

void exp_eb_sweep(const json& cfg, ArtifactWriter& out, bool timestamp) {
  const Schedule schedule = schedule_from(cfg.at("schedule"));
  const Dataset data = dataset_from(cfg.at("dataset"));
  const Sampling smp = sampling_from(cfg);
  const auto values = cfg.at("sweep").at("values").get<std::vector<double>>();
  const auto seeds = cfg.at("sweep").at("seeds").get<std::vector<std::uint64_t>>();

  std::ostringstream per_seed_csv;
  per_seed_csv << "c,seed,fraction\n";
  std::vector<double> means;
  json detail = json::array();
  for (double c : values) {
    const ScoreModel model = ScoreModel::empirical_bayes(data, schedule, c);
    double mean = 0.0;
    json row = {{"c", c}, {"fractions", json::array()}};
    for (std::uint64_t seed : seeds) {
      const auto samples =
          generate_samples(model, schedule, smp.count, smp.t_min, seed, smp.steps);
      const double f = memorization_fraction(samples, data, smp.tau).fraction_collapsed;
      per_seed_csv << fmt_g17(c) << "," << seed << "," << fmt_g17(f) << "\n";
      row["fractions"].push_back(f);
      mean += f / seeds.size();
    }
    row["mean"] = mean;
    detail.push_back(row);
    means.push_back(mean);
  }
  out.write("dataset.csv", dataset_csv(data));
  out.write("fractions_per_seed.csv", per_seed_csv.str());
  write_sweep_outputs(cfg, out, timestamp, "c", values, means,
                      json{{"experiment", cfg.at("experiment")},
                           {"schedule", schedule.id()},
                           {"tau", smp.tau},
                           {"sweep", detail}});
}

// ---------------------------------------------------------------------------
// neural experiments

TrainConfig nn_train_config(const json& nn, LossKind loss, double c, std::uint64_t seed,
                            long epochs) {
  TrainConfig cfg;
  cfg.loss = loss;
  cfg.c = c;
  cfg.epochs = static_cast<int>(epochs);
  cfg.learning_rate = nn.value("learning_rate", 1e-3);
  cfg.seed = seed;
  return cfg;
}

LossKind parse_loss(const std::string& name) {
  if (name == "score-matching") return LossKind::ScoreMatching;
  if (name == "denoising") return LossKind::Denoising;
  if (name == "tikhonov") return LossKind::TikhonovScoreMatching;
  throw ConfigError("unknown nn loss '" + name + "'");
}

std::string loss_history_csv(const std::vector<double>& history) {
  std::ostringstream os;
  os << "epoch,mean_loss\n";
  for (std::size_t i = 0; i < history.size(); ++i)
    os << (i + 1) << "," << fmt_g17(history[i]) << "\n";
  return os.str();
}

double nn_fraction(const ScoreNet& net, const Schedule& schedule, const Dataset& data,
                   const Sampling& smp) {
  const auto samples =
      generate_samples_batched(net, schedule, smp.count, smp.t_min, smp.seed, smp.steps);
  return memorization_fraction(samples, data, smp.tau).fraction_collapsed;
}

// Shared sweep runner: one trained model per (parameter value, seed), fraction
// measured per snapshot.  kind selects what the sweep values parameterize.
enum class NnSweepKind { Epochs, Width, TikhonovC, Loss };

void exp_nn_sweep(const json& cfg, ArtifactWriter& out, bool timestamp, NnSweepKind kind) {
  const Schedule schedule = schedule_from(cfg.at("schedule"));
  const Dataset data = dataset_from(cfg.at("dataset"));
  const Sampling smp = sampling_from(cfg);
  const json& nn = cfg.at("nn");
  const auto seeds = nn.at("seeds").get<std::vector<std::uint64_t>>();
  const int width = nn.at("width").get<int>();
  const long epochs = nn.at("epochs").get<long>();
  const double fourier_scale = nn.value("fourier_scale", 1.0);

  std::ostringstream csv;
  csv << "parameter,seed,fraction\n";
  json detail = json::array();
  std::vector<double> xs, means;

  auto run_one = [&](const std::string& param_label, double x_value, int w, long ep,
                     LossKind loss, double c) {
    double mean = 0.0;
    json row = {{"parameter", param_label}, {"fractions", json::array()}};
    for (std::uint64_t seed : seeds) {
      ScoreNet net = ScoreNet::init(
          data.dim(), w, loss == LossKind::Denoising ? NetMode::NoisePredictor : NetMode::Score,
          seed, fourier_scale);
      const TrainConfig tc = nn_train_config(nn, loss, c, mix64(seed ^ 0x5eedull), ep);
      const TrainResult res = train(net, data, schedule, tc);
      std::ostringstream hist_name;
      hist_name << "loss_history_" << param_label << "_seed" << seed << ".csv";
      out.write(hist_name.str(), loss_history_csv(res.loss_history));
      std::ostringstream ck_name;
      ck_name << "net_" << param_label << "_seed" << seed << ".txt";
      const std::filesystem::path ck_path = out.dir() / ck_name.str();
      net.save(ck_path.string());
      // record the checkpoint in the manifest
      {
        std::ifstream in(ck_path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        std::filesystem::remove(ck_path);
        out.write(ck_name.str(), ss.str());
      }
      const double f = nn_fraction(net, schedule, data, smp);
      csv << param_label << "," << seed << "," << fmt_g17(f) << "\n";
      row["fractions"].push_back(f);
      mean += f / seeds.size();
    }
    row["mean"] = mean;
    detail.push_back(row);
    xs.push_back(x_value);
    means.push_back(mean);
  };

  switch (kind) {
    case NnSweepKind::Epochs: {
      // One training run per seed; fractions measured at the listed epochs.
      const auto epoch_list = cfg.at("sweep").at("values").get<std::vector<long>>();
      const LossKind loss = parse_loss(nn.at("loss").get<std::string>());
      std::map<long, std::vector<double>> by_epoch;
      for (std::uint64_t seed : seeds) {
        ScoreNet net = ScoreNet::init(data.dim(), width,
                                      loss == LossKind::Denoising ? NetMode::NoisePredictor
                                                                  : NetMode::Score,
                                      seed, fourier_scale);
        const long max_epochs = *std::max_element(epoch_list.begin(), epoch_list.end());
        const TrainConfig tc =
            nn_train_config(nn, loss, nn.at("c").get<double>(), mix64(seed ^ 0x5eedull), max_epochs);
        std::vector<std::pair<long, ScoreNet>> snapshots;
        const TrainResult res =
            train(net, data, schedule, tc, [&](int epoch, const ScoreNet& snap) {
              if (std::find(epoch_list.begin(), epoch_list.end(), epoch) != epoch_list.end())
                snapshots.emplace_back(epoch, snap);
            });
        std::ostringstream hist_name;
        hist_name << "loss_history_seed" << seed << ".csv";
        out.write(hist_name.str(), loss_history_csv(res.loss_history));
        for (const auto& [epoch, snap] : snapshots) {
          const double f = nn_fraction(snap, schedule, data, smp);
          csv << epoch << "," << seed << "," << fmt_g17(f) << "\n";
          by_epoch[epoch].push_back(f);
        }
      }
      for (long ep : epoch_list) {
        const auto& fs = by_epoch.at(ep);
        const double mean = std::accumulate(fs.begin(), fs.end(), 0.0) / fs.size();
        detail.push_back({{"parameter", std::to_string(ep)}, {"fractions", fs}, {"mean", mean}});
        xs.push_back(static_cast<double>(ep));
        means.push_back(mean);
      }
      break;
    }
    case NnSweepKind::Width: {
      const auto widths = cfg.at("sweep").at("values").get<std::vector<int>>();
      const LossKind loss = parse_loss(nn.at("loss").get<std::string>());
      for (int w : widths)
        run_one("w" + std::to_string(w), w, w, epochs, loss, nn.at("c").get<double>());
      break;
    }
    case NnSweepKind::TikhonovC: {
      const auto cs = cfg.at("sweep").at("values").get<std::vector<double>>();
      for (double c : cs) {
        std::ostringstream label;
        label << "c" << c;
        run_one(label.str(), c, width, epochs, LossKind::TikhonovScoreMatching, c);
      }
      break;
    }
    case NnSweepKind::Loss: {
      const auto losses = cfg.at("sweep").at("values").get<std::vector<std::string>>();
      for (std::size_t i = 0; i < losses.size(); ++i)
        run_one(losses[i], static_cast<double>(i), width, epochs, parse_loss(losses[i]), 0.0);
      break;
    }
  }

  out.write("dataset.csv", dataset_csv(data));
  out.write("fractions.csv", csv.str());

  SvgPlot plot("memorized fraction", "log10(sweep value)", "fraction");
  std::vector<Eigen::Vector2d> curve;
  for (std::size_t i = 0; i < xs.size(); ++i)
    curve.emplace_back(xs[i] > 0 ? std::log10(xs[i]) : static_cast<double>(i), means[i]);
  plot.add_polyline(curve, "#2255cc", 1.5);
  plot.add_scatter(curve, 3.5, "#2255cc", true, "fraction");
  out.write("sweep.svg", plot.render(timestamp));
  out.write("report.json", report_json(json{{"experiment", cfg.at("experiment")},
                                            {"schedule", schedule.id()},
                                            {"tau", smp.tau},
                                            {"sweep", detail}}));
}

void exp_conditional_demo(const json& cfg, ArtifactWriter& out, bool timestamp) {
  const Schedule schedule = schedule_from(cfg.at("schedule"));
  const Dataset data = dataset_from(cfg.at("dataset"));
  const Sampling smp = sampling_from(cfg);
  if (!data.has_observations())
    throw ConfigError("conditional-demo: dataset must carry observations");

  // Unseen queries abort with the undefined-observation error (exit code 2).
  for (const auto& q : cfg.at("query")) {
    Eigen::VectorXd y(data.obs_dim());
    const auto vals = q.get<std::vector<double>>();
    if (static_cast<int>(vals.size()) != data.obs_dim())
      throw ConfigError("conditional-demo: query dimension mismatch");
    for (int k = 0; k < data.obs_dim(); ++k) y[k] = vals[k];
    if (data.group_indices(y).empty()) throw UndefinedObservationError();
  }

  // Distinct observations in first-appearance order.
  std::vector<int> reps;
  for (int n = 0; n < data.size(); ++n) {
    bool seen = false;
    for (int r : reps)
      if (data.observation(r) == data.observation(n)) seen = true;
    if (!seen) reps.push_back(n);
  }

  json groups = json::array();
  std::vector<Eigen::VectorXd> all_terminals;
  std::ostringstream csv;
  csv << "group,sample_id";
  for (int k = 0; k < data.dim(); ++k) csv << ",x_" << (k + 1);
  csv << ",distance_in_group,distance_out_group\n";
  for (std::size_t gi = 0; gi < reps.size(); ++gi) {
    const Eigen::VectorXd y = data.observation(reps[gi]);
    const std::vector<int> members = data.group_indices(y);
    const ScoreModel model = ScoreModel::conditional(data, schedule, y);
    const auto samples = generate_samples(model, schedule, smp.count, smp.t_min,
                                          subseed(smp.seed, gi), smp.steps, data.dim());
    int collapsed_in = 0, near_out = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      double din = std::numeric_limits<double>::infinity();
      double dout = std::numeric_limits<double>::infinity();
      for (int n = 0; n < data.size(); ++n) {
        const double dist = (samples[i] - data.point(n)).norm();
        const bool in_group = std::find(members.begin(), members.end(), n) != members.end();
        (in_group ? din : dout) = std::min(in_group ? din : dout, dist);
      }
      if (din < smp.tau) ++collapsed_in;
      if (dout < smp.tau) ++near_out;
      csv << gi << "," << i;
      for (int k = 0; k < data.dim(); ++k) csv << "," << fmt_g17(samples[i][k]);
      csv << "," << fmt_g17(din) << "," << fmt_g17(dout) << "\n";
      all_terminals.push_back(samples[i]);
    }
    groups.push_back({{"group", gi},
                      {"observation_index", reps[gi]},
                      {"members", members},
                      {"fraction_on_group", static_cast<double>(collapsed_in) / samples.size()},
                      {"near_out_group", near_out}});
  }

  out.write("dataset.csv", dataset_csv(data));
  out.write("conditional_terminals.csv", csv.str());
  out.write("scatter.svg", scatter_svg("conditional-demo", data, all_terminals, {}, timestamp));
  out.write("report.json", report_json(json{{"experiment", cfg.at("experiment")},
                                            {"schedule", schedule.id()},
                                            {"tau", smp.tau},
                                            {"seed", smp.seed},
                                            {"groups", groups}}));
}

}  // namespace

const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> catalog = {
      {"voronoi-trajectories", "reverse-ODE trajectories over the Voronoi diagram (exact score)"},
      {"rate-fit", "exponential convergence-rate fits in transformed time"},
      {"two-point", "two symmetric data points: invariant axis and collapse"},
      {"tikhonov-sweep", "memorized fraction vs Tikhonov regularization c"},
      {"eb-sweep", "memorized fraction vs empirical-Bayes floor c"},
      {"nn-epoch-sweep", "memorized fraction vs training epochs (neural score)"},
      {"nn-width-sweep", "memorized fraction vs hidden width (neural score)"},
      {"nn-tikhonov-sweep", "memorized fraction vs Tikhonov c (neural score)"},
      {"nn-loss-compare", "score-matching vs denoising loss memorization"},
      {"vp-trajectories", "variance-preserving reverse-ODE trajectories"},
      {"conditional-demo", "conditional score collapse within observation groups"},
  };
  return catalog;
}

json resolve_config(const json& user_config) {
  if (!user_config.contains("experiment"))
    throw ConfigError("config must name an 'experiment'");
  const std::string name = user_config.at("experiment").get<std::string>();
  const auto& catalog = experiment_catalog();
  if (std::none_of(catalog.begin(), catalog.end(),
                   [&](const ExperimentInfo& e) { return e.name == name; }))
    throw ConfigError("unknown experiment '" + name + "'");
  json cfg = experiment_defaults(name);
  deep_merge(cfg, user_config);
  return cfg;
}

void run_experiment(const json& config, const std::filesystem::path& out_dir, bool timestamp) {
  const json cfg = resolve_config(config);
  const std::string name = cfg.at("experiment").get<std::string>();
  ArtifactWriter out(out_dir);
  out.write("config.json", cfg.dump(2) + "\n");

  if (name == "voronoi-trajectories" || name == "vp-trajectories") {
    exp_trajectories(cfg, out, timestamp);
  } else if (name == "rate-fit") {
    exp_rate_fit(cfg, out, timestamp);
  } else if (name == "two-point") {
    exp_two_point(cfg, out, timestamp);
  } else if (name == "tikhonov-sweep") {
    exp_tikhonov_sweep(cfg, out, timestamp);
  } else if (name == "eb-sweep") {
    exp_eb_sweep(cfg, out, timestamp);
  } else if (name == "nn-epoch-sweep") {
    exp_nn_sweep(cfg, out, timestamp, NnSweepKind::Epochs);
  } else if (name == "nn-width-sweep") {
    exp_nn_sweep(cfg, out, timestamp, NnSweepKind::Width);
  } else if (name == "nn-tikhonov-sweep") {
    exp_nn_sweep(cfg, out, timestamp, NnSweepKind::TikhonovC);
  } else if (name == "nn-loss-compare") {
    exp_nn_sweep(cfg, out, timestamp, NnSweepKind::Loss);
  } else if (name == "conditional-demo") {
    exp_conditional_demo(cfg, out, timestamp);
  }
  out.write_manifest(fnv1a64(cfg.dump()));
}

}  // namespace scorelab::cli
