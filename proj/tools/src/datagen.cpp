#include "datagen.hpp"

#include <sstream>
#include <vector>

#include "scorelab/rng.hpp"

namespace scorelab::cli {

Dataset gaussian2d(int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("gaussian2d: n must be >= 1");
  Rng rng(seed);
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) pts.push_back(rng.normal_vec(2));
  return Dataset(std::move(pts));
}

Dataset symmetric2() {
  Eigen::VectorXd a(2), b(2);
  a << 1, 0;
  b << -1, 0;
  return Dataset({a, b});
}

Dataset symmetric4() {
  Eigen::VectorXd a(2), b(2), c(2), d(2);
  a << 1, 0;
  b << -1, 0;
  c << 0, 1;
  d << 0, -1;
  return Dataset({a, b, c, d});
}

Dataset paired_linear(int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("paired-linear: n must be >= 1");
  Rng rng(seed);
  std::vector<Eigen::VectorXd> pts, obs;
  pts.reserve(n);
  obs.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = rng.normal_vec(2);
    Eigen::VectorXd y(1);
    y << x[0] + 0.1 * rng.normal();
    pts.push_back(x);
    obs.push_back(y);
  }
  return Dataset(std::move(pts), std::move(obs));
}

Dataset gen_dataset(const std::string& spec) {
  std::vector<std::string> parts;
  std::istringstream is(spec);
  std::string tok;
  while (std::getline(is, tok, ':')) parts.push_back(tok);
  if (parts.empty()) throw ConfigError("empty dataset spec");

  const std::string& name = parts[0];
  auto int_arg = [&](std::size_t i, const char* what) {
    if (parts.size() <= i) throw ConfigError(std::string("dataset spec missing ") + what);
    return std::stoll(parts[i]);
  };
  if (name == "gaussian2d")
    return gaussian2d(static_cast<int>(int_arg(1, "N")),
                      static_cast<std::uint64_t>(int_arg(2, "seed")));
  if (name == "symmetric2") return symmetric2();
  if (name == "symmetric4") return symmetric4();
  if (name == "paired-linear")
    return paired_linear(static_cast<int>(int_arg(1, "N")),
                         static_cast<std::uint64_t>(int_arg(2, "seed")));
  if (name == "file") {
    if (parts.size() < 2) throw ConfigError("dataset spec: file needs a path");
    // the path may contain ':'; rejoin
    std::string path = parts[1];
    for (std::size_t i = 2; i < parts.size(); ++i) path += ":" + parts[i];
    return Dataset::load(path);
  }
  throw ConfigError("unknown dataset generator '" + name + "'");
}

}  // namespace scorelab::cli
