#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace vservo::ekf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct EkfState {
  Vector mean;
  Matrix covariance;
};

/// Process x_t = f(x_{t-1}, u_t) + eps, measurement z_t = g(x_t) + delta and
/// label y_t = h(x_t) + gamma, with their Jacobians and noise covariances.
struct EkfModels {
  std::function<Vector(const Vector&, const Vector&)> dynamics;
  std::function<Matrix(const Vector&, const Vector&)> dynamics_jacobian;
  std::function<Vector(const Vector&)> measurement;
  std::function<Matrix(const Vector&)> measurement_jacobian;
  std::function<Vector(const Vector&)> label;
  std::function<Matrix(const Vector&)> label_jacobian;

  Matrix process_noise;      // covariance of eps
  Matrix measurement_noise;  // covariance of delta
  Matrix label_noise;        // covariance of gamma
};

inline constexpr double kMaxInnovationCondition = 1e12;

/// mean' = f(mean, u); covariance' = F cov F^T + process_noise.
EkfState predict(const EkfState& state, const EkfModels& models, const Vector& u);

/// Standard gain update. Throws SingularInnovation when the innovation
/// covariance is not positive definite or its condition number reaches 1e12.
EkfState update(const EkfState& state, const EkfModels& models, const Vector& z);

/// log N(x; mean, cov). Throws DimensionMismatch or vservo::Error when cov is
/// not positive definite.
double log_normal_density(const Vector& x, const Vector& mean, const Matrix& cov);

/// Joint log density of a state sequence with its transitions, labels and
/// measurements. `controls` has one entry per transition (states.size() - 1);
/// `measurements` and `labels` are either empty (term skipped) or one per state.
double trajectory_log_likelihood(std::span<const Vector> states, std::span<const Vector> controls,
                                 std::span<const Vector> measurements,
                                 std::span<const Vector> labels, const EkfModels& models);

struct LabeledTrajectory {
  EkfState initial;
  std::vector<Vector> controls;      // size measurements.size() - 1
  std::vector<Vector> measurements;  // z_0 .. z_T
  std::vector<Vector> labels;        // y_0 .. y_T
};

/// Runs the filter over the trajectory (update at t = 0, then predict/update)
/// and returns the filtered states.
std::vector<EkfState> run_filter(const LabeledTrajectory& traj, const EkfModels& models);

struct NoiseScaling {
  double process = 1.0;
  double measurement = 1.0;
};

struct TuneResult {
  NoiseScaling best;
  std::size_t best_index = 0;
  double best_score = 0.0;
  std::vector<double> scores;  // one per grid point, scan order
};

/// Label log-likelihood of a filtered run: sum over t of
/// log N(y_t; h(mean_t), H cov_t H^T + label_noise).
double label_log_likelihood(const std::vector<EkfState>& filtered,
                            std::span<const Vector> labels, const EkfModels& models);

/// Grid search over noise scalings. Each point rescales process and
/// measurement noise, filters the trajectory and is scored with
/// label_log_likelihood. Ties keep the first point in scan order.
TuneResult tune_noise_grid(const LabeledTrajectory& traj, const EkfModels& models,
                           std::span<const NoiseScaling> grid);

/// 4-state constant-velocity pixel model (px, py, vx, vy) measuring and
/// labelling (px, py). Controls are optional 2-D accelerations (empty vector
/// for none). Process noise is white acceleration with std accel_sigma.
EkfModels constant_velocity_model(double dt, double accel_sigma, double meas_sigma,
                                  double label_sigma = 1e-3);

/// Symmetrizes in place: (A + A^T) / 2.
void symmetrize(Matrix& m);

}  // namespace vservo::ekf
