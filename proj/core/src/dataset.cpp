#include "scorelab/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "scorelab/errors.hpp"

namespace scorelab {

Dataset::Dataset(std::vector<Eigen::VectorXd> points, std::vector<Eigen::VectorXd> observations)
    : points_(std::move(points)), observations_(std::move(observations)) {
  if (points_.empty()) throw InvalidDatasetError("dataset: need at least one point");
  const auto d = points_[0].size();
  for (const auto& p : points_) {
    if (p.size() != d) throw InvalidDatasetError("dataset: inconsistent point dimension");
    if (!p.allFinite()) throw InvalidDatasetError("dataset: non-finite point");
  }
  if (!observations_.empty()) {
    if (observations_.size() != points_.size())
      throw InvalidDatasetError("dataset: observations must pair with points");
    const auto m = observations_[0].size();
    for (const auto& y : observations_) {
      if (y.size() != m) throw InvalidDatasetError("dataset: inconsistent observation dimension");
      if (!y.allFinite()) throw InvalidDatasetError("dataset: non-finite observation");
    }
  }
}

bool Dataset::distinct() const {
  for (std::size_t i = 0; i < points_.size(); ++i)
    for (std::size_t j = i + 1; j < points_.size(); ++j)
      if (points_[i] == points_[j]) return false;
  return true;
}

std::vector<int> Dataset::group_indices(const Eigen::VectorXd& y) const {
  std::vector<int> out;
  for (std::size_t n = 0; n < observations_.size(); ++n)
    if (observations_[n] == y) out.push_back(static_cast<int>(n));
  return out;
}

Dataset Dataset::subset(const std::vector<int>& indices) const {
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(indices.size());
  for (int i : indices) pts.push_back(points_.at(i));
  return Dataset(std::move(pts));
}

Dataset Dataset::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidDatasetError("dataset: cannot open '" + path + "'");
  std::string line;
  int d = -1, n = -1, m = -1;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream hs(line);
    if (hs >> d >> n >> m) break;
    d = -1;
  }
  if (d <= 0 || n <= 0 || m < 0)
    throw InvalidDatasetError("dataset: bad header in '" + path + "' (expected 'd N m')");
  std::vector<Eigen::VectorXd> pts, obs;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd p(d), y(m);
    for (int k = 0; k < d; ++k)
      if (!(in >> p[k])) throw InvalidDatasetError("dataset: truncated file '" + path + "'");
    for (int k = 0; k < m; ++k)
      if (!(in >> y[k])) throw InvalidDatasetError("dataset: truncated file '" + path + "'");
    pts.push_back(std::move(p));
    if (m > 0) obs.push_back(std::move(y));
  }
  return Dataset(std::move(pts), std::move(obs));
}

void Dataset::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InvalidDatasetError("dataset: cannot write '" + path + "'");
  char buf[32];
  out << "# d N m\n" << dim() << " " << size() << " " << obs_dim() << "\n";
  for (int n = 0; n < size(); ++n) {
    for (int k = 0; k < dim(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", points_[n][k]);
      out << (k ? " " : "") << buf;
    }
    for (int k = 0; k < obs_dim(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", observations_[n][k]);
      out << " " << buf;
    }
    out << "\n";
  }
}

}  // namespace scorelab
