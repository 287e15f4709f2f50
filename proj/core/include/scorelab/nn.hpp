#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "scorelab/dataset.hpp"
#include "scorelab/schedule.hpp"
#include "scorelab/score.hpp"

namespace scorelab {

// Eight random frequencies, frozen after construction.  embed(t) is the
// 16-dim vector [sin(2 pi f_k t); cos(2 pi f_k t)].
struct FourierTimeEmbedding {
  Eigen::VectorXd frequencies;

  static FourierTimeEmbedding make(std::uint64_t seed, int count = 8, double scale = 1.0);
  int output_dim() const { return 2 * static_cast<int>(frequencies.size()); }
  Eigen::VectorXd embed(double t) const;
};

// What the network output parameterizes: the score s(x,t) itself, or the
// noise predictor s~(x,t) = sigma(t) s(x,t).
enum class NetMode { Score, NoisePredictor };

// Two hidden rectified-linear layers of equal width over [x; embed(t)].
struct ScoreNet {
  int dim = 2;
  int width = 64;
  NetMode mode = NetMode::Score;
  std::uint64_t init_seed = 0;
  FourierTimeEmbedding embedding;
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  // He fan-in initialization, deterministic in seed.
  static ScoreNet init(int dim, int width, NetMode mode, std::uint64_t seed,
                       double fourier_scale = 1.0);

  int input_dim() const { return dim + embedding.output_dim(); }
  // (d + 16 + 1) W + (W + 1) W + (W + 1) d
  long parameter_count() const;

  Eigen::VectorXd forward(const Eigen::VectorXd& x, double t) const;
  // Columns are samples; ts.size() must equal x.cols().
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x, const std::vector<double>& ts) const;

  // Versioned text checkpoint (widths, frequencies, parameters, mode, seed).
  void save(const std::string& path) const;
  static ScoreNet load(const std::string& path);
};

enum class LossKind {
  ScoreMatching,          // | sigma(t) s(x,t) + eta |^2          (lambda = sigma^2)
  Denoising,              // | s~(x,t) + eta |^2                   (network predicts -eta)
  TikhonovScoreMatching,  // ScoreMatching + c | s(x,t) |^2
};

struct TrainConfig {
  LossKind loss = LossKind::ScoreMatching;
  double c = 0.0;  // Tikhonov weight
  int epochs = 5000;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // Time draws are uniform on (t_floor, T]; the J-losses keep a small floor
  // away from the singular time, the denoising loss can use 0.
  double t_floor = 1e-5;
  std::uint64_t seed = 0;
};

struct NetGrads {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  static NetGrads zeros_like(const ScoreNet& net);
  // Deterministic flattening order: w1, b1, w2, b2, w3, b3 (column-major).
  Eigen::VectorXd flatten() const;
};

// Per-sample loss and exact parameter gradient at x = m(t) x0 + sigma(t) eta.
// The network mode must match the loss (Denoising needs a NoisePredictor net).
std::pair<double, NetGrads> loss_sample(const ScoreNet& net, const Schedule& schedule,
                                        const Eigen::VectorXd& x0, double t,
                                        const Eigen::VectorXd& eta, const TrainConfig& config);

struct TrainResult {
  std::vector<double> loss_history;  // epoch-averaged loss
};

// Full-batch training: one (t, eta) draw per data point per epoch, gradients
// averaged over the batch, one Adam step per epoch.  Deterministic in
// config.seed.  The optional snapshot callback fires after every epoch.
TrainResult train(ScoreNet& net, const Dataset& data, const Schedule& schedule,
                  const TrainConfig& config,
                  const std::function<void(int, const ScoreNet&)>& snapshot = {});

// Wraps a trained net as a ScoreModel (dividing by sigma(t) in noise-predictor
// mode, which is singular at t = 0).
ScoreModel neural_score_model(std::shared_ptr<const ScoreNet> net, const Schedule& schedule);

// Reverse-ODE terminals for `count` samples on a geometric grid, stepping all
// samples together so each RK4 stage is one batched network evaluation.
// Sample i draws its initial condition from subseed(master_seed, i), the same
// splitting rule generate_samples uses.
std::vector<Eigen::VectorXd> generate_samples_batched(const ScoreNet& net,
                                                      const Schedule& schedule, int count,
                                                      double t_min, std::uint64_t master_seed,
                                                      int steps = 400);

}  // namespace scorelab
