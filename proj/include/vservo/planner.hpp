#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vservo::planner {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Sum over waypoints of the normal density of their distance to the goal.
/// Throws NonPositiveSigma for sigma <= 0.
double path_weight_sum(std::span<const Point3> waypoints, const Point3& goal, double sigma);

class CandidatePath {
 public:
  CandidatePath(std::vector<Point3> waypoints, const Point3& goal, double sigma);

  const std::vector<Point3>& waypoints() const noexcept { return waypoints_; }
  double weight_sum() const noexcept { return weight_sum_; }

 private:
  std::vector<Point3> waypoints_;
  double weight_sum_;
};

struct Selection {
  std::size_t best = 0;      // index of the highest weight sum, ties to first
  double ratio = 1.0;        // best_sum / current_sum
  double velocity = 0.0;     // min(v_max, gaussian_velocity * ratio)
};

/// Picks the path with the highest stored sum and scales the Gaussian velocity
/// of the path currently executing (index `current`) by best/current.
/// Throws AllZeroWeights when no path has a positive sum.
Selection select_and_scale(std::span<const CandidatePath> paths, std::size_t current,
                           double gaussian_velocity, double v_max);

/// Same, assuming the best path is the one executing.
Selection select_and_scale(std::span<const CandidatePath> paths, double gaussian_velocity,
                           double v_max);

}  // namespace vservo::planner
