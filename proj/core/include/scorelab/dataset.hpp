#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace scorelab {

// Immutable training set {x0^n} in R^d, optionally paired with observations
// {y^n} in R^m (same index).  Duplicate points are permitted; distinctness is
// only required by the Voronoi machinery, which checks it.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Eigen::VectorXd> points,
                   std::vector<Eigen::VectorXd> observations = {});

  int size() const { return static_cast<int>(points_.size()); }  // N
  int dim() const { return points_.empty() ? 0 : static_cast<int>(points_[0].size()); }
  int obs_dim() const {
    return observations_.empty() ? 0 : static_cast<int>(observations_[0].size());
  }
  bool has_observations() const { return !observations_.empty(); }

  const Eigen::VectorXd& point(int n) const { return points_[n]; }
  const Eigen::VectorXd& observation(int n) const { return observations_[n]; }
  const std::vector<Eigen::VectorXd>& points() const { return points_; }
  const std::vector<Eigen::VectorXd>& observations() const { return observations_; }

  // Pairwise distinctness under exact equality.
  bool distinct() const;

  // Index set of points whose observation equals y bitwise; empty if y is not
  // in the marginal dataset.
  std::vector<int> group_indices(const Eigen::VectorXd& y) const;

  // Sub-dataset given by indices (points only).
  Dataset subset(const std::vector<int>& indices) const;

  // Two-section delimited text file.  Header line "d N m" after optional
  // '#' comments, then N rows of d point coordinates followed by m
  // observation coordinates.
  static Dataset load(const std::string& path);
  void save(const std::string& path) const;

 private:
  std::vector<Eigen::VectorXd> points_;
  std::vector<Eigen::VectorXd> observations_;
};

}  // namespace scorelab
