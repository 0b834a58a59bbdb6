#include "vservo/ekf.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "vservo/errors.hpp"

namespace vservo::ekf {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DimensionMismatch(what);
}

void check_state(const EkfState& s) {
  require(s.covariance.rows() == s.mean.size() && s.covariance.cols() == s.mean.size(),
          "covariance must be n x n for an n-state mean");
}

}  // namespace

void symmetrize(Matrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

EkfState predict(const EkfState& state, const EkfModels& models, const Vector& u) {
  check_state(state);
  const auto n = state.mean.size();
  const Matrix F = models.dynamics_jacobian(state.mean, u);
  require(F.rows() == n && F.cols() == n, "dynamics Jacobian must be n x n");
  require(models.process_noise.rows() == n && models.process_noise.cols() == n,
          "process noise must be n x n");

  EkfState out;
  out.mean = models.dynamics(state.mean, u);
  require(out.mean.size() == n, "dynamics must preserve the state dimension");
  out.covariance = F * state.covariance * F.transpose() + models.process_noise;
  symmetrize(out.covariance);
  return out;
}

EkfState update(const EkfState& state, const EkfModels& models, const Vector& z) {
  check_state(state);
  const auto n = state.mean.size();
  const Matrix G = models.measurement_jacobian(state.mean);
  const auto m = z.size();
  require(G.rows() == m && G.cols() == n, "measurement Jacobian must be m x n");
  require(models.measurement_noise.rows() == m && models.measurement_noise.cols() == m,
          "measurement noise must be m x m");
  const Vector predicted = models.measurement(state.mean);
  require(predicted.size() == m, "measurement function returns the wrong dimension");

  Matrix S = G * state.covariance * G.transpose() + models.measurement_noise;
  symmetrize(S);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo >= kMaxInnovationCondition)
    throw SingularInnovation("innovation covariance is singular or ill-conditioned");

  // K = Sigma G^T S^-1, solved as S K^T = G Sigma (S and Sigma symmetric).
  const Matrix K = S.ldlt().solve(G * state.covariance).transpose();

  EkfState out;
  out.mean = state.mean + K * (z - predicted);
  out.covariance = (Matrix::Identity(n, n) - K * G) * state.covariance;
  symmetrize(out.covariance);
  return out;
}

double log_normal_density(const Vector& x, const Vector& mean, const Matrix& cov) {
  const auto k = x.size();
  require(mean.size() == k && cov.rows() == k && cov.cols() == k,
          "density arguments have inconsistent dimensions");
  if (k == 0) return 0.0;
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw Error("covariance is not positive definite");
  const Vector r = llt.matrixL().solve(x - mean);
  const Matrix& L = llt.matrixL();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) log_det += 2.0 * std::log(L(i, i));
  return -0.5 * (static_cast<double>(k) * std::log(2.0 * std::numbers::pi) + log_det +
                 r.squaredNorm());
}

double trajectory_log_likelihood(std::span<const Vector> states, std::span<const Vector> controls,
                                 std::span<const Vector> measurements,
                                 std::span<const Vector> labels, const EkfModels& models) {
  const std::size_t n = states.size();
  if (n == 0) {
    require(controls.empty() && measurements.empty() && labels.empty(),
            "empty state sequence with non-empty companions");
    return 0.0;
  }
  require(controls.size() == n - 1, "need one control per transition");
  require(measurements.empty() || measurements.size() == n, "need one measurement per state");
  require(labels.empty() || labels.size() == n, "need one label per state");

  double total = 0.0;
  for (std::size_t t = 1; t < n; ++t)
    total += log_normal_density(states[t], models.dynamics(states[t - 1], controls[t - 1]),
                                models.process_noise);
  for (std::size_t t = 0; t < labels.size(); ++t)
    total += log_normal_density(labels[t], models.label(states[t]), models.label_noise);
  for (std::size_t t = 0; t < measurements.size(); ++t)
    total += log_normal_density(measurements[t], models.measurement(states[t]),
                                models.measurement_noise);
  return total;
}

std::vector<EkfState> run_filter(const LabeledTrajectory& traj, const EkfModels& models) {
  const auto& z = traj.measurements;
  if (z.empty()) return {};
  require(traj.controls.size() == z.size() - 1, "need one control per transition");

  std::vector<EkfState> out;
  out.reserve(z.size());
  EkfState s = update(traj.initial, models, z[0]);
  out.push_back(s);
  for (std::size_t t = 1; t < z.size(); ++t) {
    s = update(predict(s, models, traj.controls[t - 1]), models, z[t]);
    out.push_back(s);
  }
  return out;
}

double label_log_likelihood(const std::vector<EkfState>& filtered, std::span<const Vector> labels,
                            const EkfModels& models) {
  require(filtered.size() == labels.size(), "need one label per filtered state");
  double total = 0.0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const Matrix H = models.label_jacobian(filtered[t].mean);
    Matrix cov = H * filtered[t].covariance * H.transpose() + models.label_noise;
    symmetrize(cov);
    total += log_normal_density(labels[t], models.label(filtered[t].mean), cov);
  }
  return total;
}

TuneResult tune_noise_grid(const LabeledTrajectory& traj, const EkfModels& models,
                           std::span<const NoiseScaling> grid) {
  if (grid.empty()) throw Error("noise grid must not be empty");
  TuneResult result;
  result.best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EkfModels scaled = models;
    scaled.process_noise = models.process_noise * grid[i].process;
    scaled.measurement_noise = models.measurement_noise * grid[i].measurement;
    const double score = label_log_likelihood(run_filter(traj, scaled), traj.labels, scaled);
    result.scores.push_back(score);
    if (score > result.best_score) {
      result.best_score = score;
      result.best = grid[i];
      result.best_index = i;
    }
  }
  return result;
}

EkfModels constant_velocity_model(double dt, double accel_sigma, double meas_sigma,
                                  double label_sigma) {
  if (!(dt > 0.0 && accel_sigma > 0.0 && meas_sigma > 0.0 && label_sigma > 0.0))
    throw Error("constant-velocity model parameters must be positive");

  Matrix F = Matrix::Identity(4, 4);
  F(0, 2) = dt;
  F(1, 3) = dt;
  Matrix B = Matrix::Zero(4, 2);
  B(0, 0) = B(1, 1) = 0.5 * dt * dt;
  B(2, 0) = B(3, 1) = dt;
  Matrix G = Matrix::Zero(2, 4);
  G(0, 0) = G(1, 1) = 1.0;

  EkfModels m;
  m.dynamics = [F, B](const Vector& x, const Vector& u) -> Vector {
    if (u.size() == 0) return F * x;
    if (u.size() != 2) throw DimensionMismatch("constant-velocity control must be 2-D");
    return F * x + B * u;
  };
  m.dynamics_jacobian = [F](const Vector&, const Vector&) -> Matrix { return F; };
  m.measurement = [G](const Vector& x) -> Vector { return G * x; };
  m.measurement_jacobian = [G](const Vector&) -> Matrix { return G; };
  m.label = m.measurement;
  m.label_jacobian = m.measurement_jacobian;

  m.process_noise = accel_sigma * accel_sigma * (B * B.transpose());
  // White-noise acceleration on a 4-state model is rank 2; a tiny diagonal
  // keeps the transition density proper.
  m.process_noise += 1e-12 * Matrix::Identity(4, 4);
  m.measurement_noise = meas_sigma * meas_sigma * Matrix::Identity(2, 2);
  m.label_noise = label_sigma * label_sigma * Matrix::Identity(2, 2);
  return m;
}

}  // namespace vservo::ekf
