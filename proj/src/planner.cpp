#include "vservo/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vservo/errors.hpp"
#include "vservo/status_control.hpp"

namespace vservo::planner {

double path_weight_sum(std::span<const Point3> waypoints, const Point3& goal, double sigma) {
  if (!(sigma > 0.0)) throw NonPositiveSigma("path weight sigma must be positive");
  double sum = 0.0;
  for (const auto& wp : waypoints) {
    const double d = std::sqrt(std::pow(wp.x - goal.x, 2) + std::pow(wp.y - goal.y, 2) +
                               std::pow(wp.z - goal.z, 2));
    sum += control::gaussian_pdf(d, 0.0, sigma);
  }
  return sum;
}

CandidatePath::CandidatePath(std::vector<Point3> waypoints, const Point3& goal, double sigma)
    : waypoints_(std::move(waypoints)), weight_sum_(path_weight_sum(waypoints_, goal, sigma)) {}

Selection select_and_scale(std::span<const CandidatePath> paths, std::size_t current,
                           double gaussian_velocity, double v_max) {
  if (paths.empty()) throw AllZeroWeights("no candidate paths");
  if (current >= paths.size()) throw Error("current path index out of range");
  Selection sel;
  double best_sum = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (paths[i].weight_sum() > best_sum) {
      best_sum = paths[i].weight_sum();
      sel.best = i;
    }
  }
  if (!(best_sum > 0.0)) throw AllZeroWeights("every candidate path has zero weight");

  const double current_sum = paths[current].weight_sum();
  if (current == sel.best) {
    sel.ratio = 1.0;
  } else if (current_sum > 0.0) {
    sel.ratio = best_sum / current_sum;
  } else {
    sel.ratio = std::numeric_limits<double>::infinity();
  }
  // An infinite ratio on a zero velocity would be NaN; the product is zero.
  sel.velocity = gaussian_velocity == 0.0 ? 0.0 : std::min(v_max, gaussian_velocity * sel.ratio);
  return sel;
}

Selection select_and_scale(std::span<const CandidatePath> paths, double gaussian_velocity,
                           double v_max) {
  if (paths.empty()) throw AllZeroWeights("no candidate paths");
  std::size_t best = 0;
  for (std::size_t i = 1; i < paths.size(); ++i)
    if (paths[i].weight_sum() > paths[best].weight_sum()) best = i;
  return select_and_scale(paths, best, gaussian_velocity, v_max);
}

}  // namespace vservo::planner
