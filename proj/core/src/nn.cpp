#include "scorelab/nn.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "scorelab/errors.hpp"
#include "scorelab/reverse.hpp"
#include "scorelab/rng.hpp"

namespace scorelab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_loss_time(const TrainConfig& config, const Schedule& schedule, double t) {
  if (!(t >= 0.0) || t > schedule.final_time())
    throw DomainError("loss: time outside [0, T]");
  if (t == 0.0 && config.loss != LossKind::Denoising)
    throw SingularTimeError("loss: J-losses are undefined at t = 0");
}

void check_mode(const ScoreNet& net, const TrainConfig& config) {
  const bool wants_noise = config.loss == LossKind::Denoising;
  const bool is_noise = net.mode == NetMode::NoisePredictor;
  if (wants_noise != is_noise)
    throw DomainError("loss/net mode mismatch: Denoising trains a NoisePredictor net, "
                      "the J-losses train a Score net");
}

}  // namespace

FourierTimeEmbedding FourierTimeEmbedding::make(std::uint64_t seed, int count, double scale) {
  if (count < 1) throw DomainError("FourierTimeEmbedding: count must be >= 1");
  Rng rng(mix64(seed ^ 0xf0u));
  FourierTimeEmbedding emb;
  emb.frequencies = scale * rng.normal_vec(count);
  return emb;
}

Eigen::VectorXd FourierTimeEmbedding::embed(double t) const {
  const int k = static_cast<int>(frequencies.size());
  Eigen::VectorXd out(2 * k);
  for (int i = 0; i < k; ++i) {
    out[i] = std::sin(kTwoPi * frequencies[i] * t);
    out[k + i] = std::cos(kTwoPi * frequencies[i] * t);
  }
  return out;
}

ScoreNet ScoreNet::init(int dim, int width, NetMode mode, std::uint64_t seed,
                        double fourier_scale) {
  if (dim < 1 || width < 1) throw DomainError("ScoreNet: dim and width must be >= 1");
  ScoreNet net;
  net.dim = dim;
  net.width = width;
  net.mode = mode;
  net.init_seed = seed;
  net.embedding = FourierTimeEmbedding::make(seed, 8, fourier_scale);

  Rng rng(mix64(seed ^ 0x17u));
  const int in = net.input_dim();
  auto he = [&rng](int rows, int cols) {
    Eigen::MatrixXd w(rows, cols);
    const double sd = std::sqrt(2.0 / static_cast<double>(cols));
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) w(i, j) = sd * rng.normal();
    return w;
  };
  net.w1 = he(width, in);
  net.b1 = Eigen::VectorXd::Zero(width);
  net.w2 = he(width, width);
  net.b2 = Eigen::VectorXd::Zero(width);
  net.w3 = he(dim, width);
  net.b3 = Eigen::VectorXd::Zero(dim);
  return net;
}

long ScoreNet::parameter_count() const {
  const long w = width, d = dim;
  return (d + 16 + 1) * w + (w + 1) * w + (w + 1) * d;
}

Eigen::VectorXd ScoreNet::forward(const Eigen::VectorXd& x, double t) const {
  Eigen::VectorXd z(input_dim());
  z << x, embedding.embed(t);
  const Eigen::VectorXd h1 = (w1 * z + b1).cwiseMax(0.0);
  const Eigen::VectorXd h2 = (w2 * h1 + b2).cwiseMax(0.0);
  return w3 * h2 + b3;
}

Eigen::MatrixXd ScoreNet::forward_batch(const Eigen::MatrixXd& x,
                                        const std::vector<double>& ts) const {
  const int b = static_cast<int>(x.cols());
  if (static_cast<int>(ts.size()) != b)
    throw DomainError("forward_batch: ts must match the number of columns");
  Eigen::MatrixXd z(input_dim(), b);
  for (int j = 0; j < b; ++j) {
    z.col(j).head(dim) = x.col(j);
    z.col(j).tail(embedding.output_dim()) = embedding.embed(ts[j]);
  }
  const Eigen::MatrixXd h1 = ((w1 * z).colwise() + b1).cwiseMax(0.0);
  const Eigen::MatrixXd h2 = ((w2 * h1).colwise() + b2).cwiseMax(0.0);
  return (w3 * h2).colwise() + b3;
}

NetGrads NetGrads::zeros_like(const ScoreNet& net) {
  NetGrads g;
  g.w1 = Eigen::MatrixXd::Zero(net.w1.rows(), net.w1.cols());
  g.w2 = Eigen::MatrixXd::Zero(net.w2.rows(), net.w2.cols());
  g.w3 = Eigen::MatrixXd::Zero(net.w3.rows(), net.w3.cols());
  g.b1 = Eigen::VectorXd::Zero(net.b1.size());
  g.b2 = Eigen::VectorXd::Zero(net.b2.size());
  g.b3 = Eigen::VectorXd::Zero(net.b3.size());
  return g;
}

Eigen::VectorXd NetGrads::flatten() const {
  Eigen::VectorXd out(w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size());
  long off = 0;
  auto put_m = [&](const Eigen::MatrixXd& m) {
    out.segment(off, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    off += m.size();
  };
  auto put_v = [&](const Eigen::VectorXd& v) {
    out.segment(off, v.size()) = v;
    off += v.size();
  };
  put_m(w1);
  put_v(b1);
  put_m(w2);
  put_v(b2);
  put_m(w3);
  put_v(b3);
  return out;
}

std::pair<double, NetGrads> loss_sample(const ScoreNet& net, const Schedule& schedule,
                                        const Eigen::VectorXd& x0, double t,
                                        const Eigen::VectorXd& eta, const TrainConfig& config) {
  check_mode(net, config);
  check_loss_time(config, schedule, t);
  const double m = schedule.mean_coeff(t);
  const double sigma = std::sqrt(schedule.variance(t));
  const Eigen::VectorXd x = m * x0 + sigma * eta;

  Eigen::VectorXd z(net.input_dim());
  z << x, net.embedding.embed(t);
  const Eigen::VectorXd a1 = net.w1 * z + net.b1;
  const Eigen::VectorXd h1 = a1.cwiseMax(0.0);
  const Eigen::VectorXd a2 = net.w2 * h1 + net.b2;
  const Eigen::VectorXd h2 = a2.cwiseMax(0.0);
  const Eigen::VectorXd out = net.w3 * h2 + net.b3;

  // Both J0(lambda = sigma^2) and I0 target -eta; they differ in what the
  // output parameterizes (sigma s vs s~).
  double loss;
  Eigen::VectorXd d_out;
  if (config.loss == LossKind::Denoising) {
    const Eigen::VectorXd r = out + eta;
    loss = r.squaredNorm();
    d_out = 2.0 * r;
  } else {
    const Eigen::VectorXd r = sigma * out + eta;
    loss = r.squaredNorm();
    d_out = 2.0 * sigma * r;
    if (config.loss == LossKind::TikhonovScoreMatching) {
      loss += config.c * out.squaredNorm();
      d_out += 2.0 * config.c * out;
    }
  }

  NetGrads g;
  g.w3 = d_out * h2.transpose();
  g.b3 = d_out;
  const Eigen::VectorXd d_a2 =
      (net.w3.transpose() * d_out).cwiseProduct((a2.array() > 0.0).cast<double>().matrix());
  g.w2 = d_a2 * h1.transpose();
  g.b2 = d_a2;
  const Eigen::VectorXd d_a1 =
      (net.w2.transpose() * d_a2).cwiseProduct((a1.array() > 0.0).cast<double>().matrix());
  g.w1 = d_a1 * z.transpose();
  g.b1 = d_a1;
  return {loss, std::move(g)};
}

namespace {

struct AdamState {
  NetGrads m, v;
  long step = 0;

  explicit AdamState(const ScoreNet& net)
      : m(NetGrads::zeros_like(net)), v(NetGrads::zeros_like(net)) {}
};

template <typename T>
void adam_update(T& param, T& m, T& v, const T& grad, const TrainConfig& cfg, double bc1,
                 double bc2) {
  m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
  v.array() = cfg.adam_beta2 * v.array() + (1.0 - cfg.adam_beta2) * grad.array().square();
  param.array() -=
      cfg.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.adam_eps);
}

}  // namespace

TrainResult train(ScoreNet& net, const Dataset& data, const Schedule& schedule,
                  const TrainConfig& config,
                  const std::function<void(int, const ScoreNet&)>& snapshot) {
  check_mode(net, config);
  if (config.epochs < 1) throw DomainError("train: epochs must be >= 1");
  if (!(config.learning_rate > 0.0)) throw DomainError("train: learning rate must be > 0");
  if (data.dim() != net.dim) throw DomainError("train: dataset and net dimension mismatch");

  const int n = data.size();
  const int d = net.dim;
  const double T = schedule.final_time();
  const double t_floor = config.loss == LossKind::Denoising ? 0.0 : config.t_floor;

  Rng rng(config.seed);
  AdamState adam(net);
  TrainResult result;
  result.loss_history.reserve(config.epochs);

  Eigen::MatrixXd z(net.input_dim(), n), etas(d, n);
  std::vector<double> sigmas(n);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // One (t, eta) draw per data point.
    for (int j = 0; j < n; ++j) {
      const double t = T - rng.uniform() * (T - t_floor);  // (t_floor, T]
      const double m = schedule.mean_coeff(t);
      const double sigma = std::sqrt(schedule.variance(t));
      sigmas[j] = sigma;
      etas.col(j) = rng.normal_vec(d);
      z.col(j).head(d) = m * data.point(j) + sigma * etas.col(j);
      z.col(j).tail(net.embedding.output_dim()) = net.embedding.embed(t);
    }

    const Eigen::MatrixXd a1 = (net.w1 * z).colwise() + net.b1;
    const Eigen::MatrixXd h1 = a1.cwiseMax(0.0);
    const Eigen::MatrixXd a2 = (net.w2 * h1).colwise() + net.b2;
    const Eigen::MatrixXd h2 = a2.cwiseMax(0.0);
    const Eigen::MatrixXd out = (net.w3 * h2).colwise() + net.b3;

    double loss_sum = 0.0;
    Eigen::MatrixXd d_out(d, n);
    if (config.loss == LossKind::Denoising) {
      const Eigen::MatrixXd r = out + etas;
      loss_sum = r.squaredNorm();
      d_out = 2.0 * r;
    } else {
      Eigen::MatrixXd r = out;
      for (int j = 0; j < n; ++j) r.col(j) = sigmas[j] * out.col(j) + etas.col(j);
      loss_sum = r.squaredNorm();
      for (int j = 0; j < n; ++j) d_out.col(j) = 2.0 * sigmas[j] * r.col(j);
      if (config.loss == LossKind::TikhonovScoreMatching) {
        loss_sum += config.c * out.squaredNorm();
        d_out += 2.0 * config.c * out;
      }
    }
    const double loss = loss_sum / n;
    if (!std::isfinite(loss))
      throw TrainingDivergedError("train: non-finite loss", epoch);
    result.loss_history.push_back(loss);

    const double inv_n = 1.0 / n;
    NetGrads g;
    g.w3 = inv_n * (d_out * h2.transpose());
    g.b3 = inv_n * d_out.rowwise().sum();
    const Eigen::MatrixXd d_a2 =
        (net.w3.transpose() * d_out).cwiseProduct((a2.array() > 0.0).cast<double>().matrix());
    g.w2 = inv_n * (d_a2 * h1.transpose());
    g.b2 = inv_n * d_a2.rowwise().sum();
    const Eigen::MatrixXd d_a1 =
        (net.w2.transpose() * d_a2).cwiseProduct((a1.array() > 0.0).cast<double>().matrix());
    g.w1 = inv_n * (d_a1 * z.transpose());
    g.b1 = inv_n * d_a1.rowwise().sum();

    ++adam.step;
    const double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(adam.step));
    const double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(adam.step));
    adam_update(net.w1, adam.m.w1, adam.v.w1, g.w1, config, bc1, bc2);
    adam_update(net.b1, adam.m.b1, adam.v.b1, g.b1, config, bc1, bc2);
    adam_update(net.w2, adam.m.w2, adam.v.w2, g.w2, config, bc1, bc2);
    adam_update(net.b2, adam.m.b2, adam.v.b2, g.b2, config, bc1, bc2);
    adam_update(net.w3, adam.m.w3, adam.v.w3, g.w3, config, bc1, bc2);
    adam_update(net.b3, adam.m.b3, adam.v.b3, g.b3, config, bc1, bc2);

    if (snapshot) snapshot(epoch + 1, net);
  }
  return result;
}

ScoreModel neural_score_model(std::shared_ptr<const ScoreNet> net, const Schedule& schedule) {
  if (!net) throw DomainError("neural_score_model: null net");
  const bool noise_mode = net->mode == NetMode::NoisePredictor;
  std::ostringstream os;
  os << "neural:" << (noise_mode ? "noise" : "score") << ":w" << net->width;
  Schedule sched = schedule;
  auto fn = [net, sched, noise_mode](const Eigen::VectorXd& x, double t) -> Eigen::VectorXd {
    if (!(t >= 0.0) || t > sched.final_time())
      throw DomainError("neural score: time outside [0, T]");
    if (noise_mode) {
      if (t == 0.0) throw SingularTimeError("neural score: noise-predictor mode at t = 0");
      return net->forward(x, t) / std::sqrt(sched.variance(t));
    }
    return net->forward(x, t);
  };
  return ScoreModel::custom(std::move(fn), os.str(), !noise_mode);
}

std::vector<Eigen::VectorXd> generate_samples_batched(const ScoreNet& net,
                                                      const Schedule& schedule, int count,
                                                      double t_min, std::uint64_t master_seed,
                                                      int steps) {
  if (count < 1) throw DomainError("generate_samples_batched: count must be >= 1");
  if (!(t_min > 0.0)) throw DomainError("generate_samples_batched: t_min must be > 0");
  const TimeGrid grid = TimeGrid::geometric(schedule.final_time(), t_min, steps);
  const bool noise_mode = net.mode == NetMode::NoisePredictor;
  const int d = net.dim;

  Eigen::MatrixXd x(d, count);
  for (int i = 0; i < count; ++i) {
    Rng rng(subseed(master_seed, static_cast<std::uint64_t>(i)));
    x.col(i) = sample_terminal_prior(schedule, d, rng);
  }

  std::vector<double> ts(count);
  auto rhs = [&](const Eigen::MatrixXd& state, double t) -> Eigen::MatrixXd {
    std::fill(ts.begin(), ts.end(), t);
    Eigen::MatrixXd s = net.forward_batch(state, ts);
    if (noise_mode) s /= std::sqrt(schedule.variance(t));
    return (-0.5 * schedule.beta(t)) * state - (0.5 * schedule.g(t)) * s;
  };

  for (int i = 0; i + 1 < static_cast<int>(grid.nodes.size()); ++i) {
    const double t0 = grid.nodes[i];
    const double h = grid.nodes[i + 1] - t0;
    const Eigen::MatrixXd k1 = rhs(x, t0);
    const Eigen::MatrixXd k2 = rhs(x + 0.5 * h * k1, t0 + 0.5 * h);
    const Eigen::MatrixXd k3 = rhs(x + 0.5 * h * k2, t0 + 0.5 * h);
    const Eigen::MatrixXd k4 = rhs(x + h * k3, t0 + h);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite())
      throw DivergenceError("generate_samples_batched: non-finite state", grid.nodes[i + 1],
                            Eigen::VectorXd());
  }

  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(x.col(i));
  return out;
}

void ScoreNet::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw DomainError("ScoreNet::save: cannot write '" + path + "'");
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  f << "scorelab-net 1\n";
  f << "dim " << dim << "\n";
  f << "width " << width << "\n";
  f << "mode " << (mode == NetMode::Score ? "score" : "noise") << "\n";
  f << "seed " << init_seed << "\n";
  f << "frequencies " << embedding.frequencies.size() << "\n";
  for (long i = 0; i < embedding.frequencies.size(); ++i)
    f << (i ? " " : "") << num(embedding.frequencies[i]);
  f << "\n";
  auto dump_m = [&](const char* name, const Eigen::MatrixXd& m) {
    f << name << " " << m.rows() << " " << m.cols() << "\n";
    for (long r = 0; r < m.rows(); ++r) {
      for (long c = 0; c < m.cols(); ++c) f << (c ? " " : "") << num(m(r, c));
      f << "\n";
    }
  };
  auto dump_v = [&](const char* name, const Eigen::VectorXd& v) {
    f << name << " " << v.size() << "\n";
    for (long i = 0; i < v.size(); ++i) f << (i ? " " : "") << num(v[i]);
    f << "\n";
  };
  dump_m("w1", w1);
  dump_v("b1", b1);
  dump_m("w2", w2);
  dump_v("b2", b2);
  dump_m("w3", w3);
  dump_v("b3", b3);
}

ScoreNet ScoreNet::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DomainError("ScoreNet::load: cannot open '" + path + "'");
  std::string magic;
  int version = 0;
  f >> magic >> version;
  if (magic != "scorelab-net" || version != 1)
    throw DomainError("ScoreNet::load: unrecognized checkpoint format");
  ScoreNet net;
  std::string key, mode_str;
  long freq_count = 0;
  f >> key >> net.dim >> key >> net.width >> key >> mode_str >> key >> net.init_seed;
  net.mode = mode_str == "noise" ? NetMode::NoisePredictor : NetMode::Score;
  f >> key >> freq_count;
  net.embedding.frequencies.resize(freq_count);
  for (long i = 0; i < freq_count; ++i) f >> net.embedding.frequencies[i];
  auto read_m = [&](Eigen::MatrixXd& m) {
    long rows = 0, cols = 0;
    f >> key >> rows >> cols;
    m.resize(rows, cols);
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) f >> m(r, c);
  };
  auto read_v = [&](Eigen::VectorXd& v) {
    long n = 0;
    f >> key >> n;
    v.resize(n);
    for (long i = 0; i < n; ++i) f >> v[i];
  };
  read_m(net.w1);
  read_v(net.b1);
  read_m(net.w2);
  read_v(net.b2);
  read_m(net.w3);
  read_v(net.b3);
  if (!f) throw DomainError("ScoreNet::load: truncated checkpoint '" + path + "'");
  return net;
}

}  // namespace scorelab
