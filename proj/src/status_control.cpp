#include "vservo/status_control.hpp"

#include <algorithm>
#include <cmath>

#include "vservo/errors.hpp"

namespace vservo::control {
namespace {

constexpr double unit_step(double t) { return t < 0.0 ? 0.0 : 1.0; }

constexpr double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double half_diagonal(FrameDims dims) {
  return std::hypot(dims.width / 2.0, dims.height / 2.0);
}

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

}  // namespace

GaussianModel GaussianModel::initial(FrameDims dims) {
  GaussianModel m;
  m.mean_x = dims.width / 2.0;
  m.mean_y = dims.height / 2.0;
  m.sigma_centroid = dims.width / 4.0;
  m.frozen_sigma = dims.width / 4.0;
  return m;
}

void ControlLimits::validate() const {
  if (!(v_max_forward > 0.0 && a_max > 0.0 && yaw_rate_max > 0.0 && range_gate > 0.0))
    throw Error("control limits must be strictly positive");
}

double axis_magnitude(double pos, double extent) {
  const double window = unit_step(pos - extent / 4.0) - unit_step(pos - 3.0 * extent / 4.0);
  const double inner = 1.0 - (4.0 / extent) * std::fabs(pos - extent / 2.0);
  return std::clamp(1.0 - window * inner, 0.0, 1.0);
}

double yaw_command(double x, double width) {
  return sign_of(x - width / 2.0) * axis_magnitude(x, width);
}

double throttle_command(double y, double height) {
  return sign_of(height / 2.0 - y) * axis_magnitude(y, height);
}

double distance_from_center(double cx, double cy, FrameDims dims) {
  return std::hypot(cx - dims.width / 2.0, cy - dims.height / 2.0);
}

GaussianModel sigma_update(GaussianModel model, double cx, double cy, FrameDims dims,
                           double sigma_floor) {
  const double d = distance_from_center(cx, cy, dims);
  const double previous = model.frozen_sigma;
  model.sum_sq_dist += d * d;
  model.n += 1;
  model.sigma_centroid = std::sqrt(model.sum_sq_dist / static_cast<double>(model.n));
  if (d <= previous) model.frozen_sigma = std::max(model.sigma_centroid, sigma_floor);
  return model;
}

double forward_command(const GaussianModel& model, double d, FrameDims dims,
                       const ControlLimits& limits) {
  if (d < 0.0) throw Error("centroid distance must be non-negative");
  if (!(model.frozen_sigma > 0.0)) throw NonPositiveSigma("frozen sigma must be positive");
  const double diag = half_diagonal(dims);
  const double d_hat = d / diag;
  const double s_hat = model.frozen_sigma / diag;
  const double v = limits.v_max_forward / (s_hat * std::sqrt(2.0 * std::numbers::pi)) *
                   std::exp(-(d_hat * d_hat) / (2.0 * s_hat * s_hat));
  return std::min(limits.v_max_forward, v);
}

double sigma_color(const GaussianModel& model, FrameDims dims) {
  return std::max(kColorChannelSpan * model.frozen_sigma / half_diagonal(dims), kSigmaColorFloor);
}

imaging::ColorTolerance tolerance_for_sigma_color(double sigma_color_value,
                                                  const imaging::ColorTolerance& base) {
  const double scale = std::max(1.0, sigma_color_value / kSigmaColorFloor);
  return {std::min(180.0, base.hue_half_width * scale),
          std::min(0.5, base.sat_half_width * scale),
          std::min(0.5, base.val_half_width * scale)};
}

double gaussian_pdf(double x, double mu, double sigma) {
  if (!(sigma > 0.0)) throw NonPositiveSigma("gaussian sigma must be positive");
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

ControlCommand status_command(const imaging::BlobObservation& obs, const GaussianModel& model,
                              FrameDims dims, const ControlLimits& limits) {
  ControlCommand cmd;
  if (!obs.valid) return cmd;
  cmd.yaw = yaw_command(obs.centroid_x, dims.width);
  cmd.throttle = throttle_command(obs.centroid_y, dims.height);
  cmd.forward = forward_command(model, distance_from_center(obs.centroid_x, obs.centroid_y, dims),
                                dims, limits);
  return cmd;
}

ControlCommand safety_gate(ControlCommand cmd, double range_m, const ControlLimits& limits) {
  if (range_m < limits.range_gate) cmd.forward = 0.0;
  return cmd;
}

ControlCommand safety_gate(ControlCommand cmd, const RangeReading& reading,
                           const ControlLimits& limits) {
  if (reading.age_s > kRangeStaleAfter) return cmd;
  return safety_gate(cmd, reading.range_m, limits);
}

RcOutput to_rc(const ControlCommand& cmd, const ControlLimits& limits, const RcTrim& trim) {
  auto channel = [&trim](int center, double normalized) {
    const double us = center + trim.span_us * std::clamp(normalized, -1.0, 1.0);
    return std::clamp(round_half_up(us), trim.min_us, trim.max_us);
  };
  RcOutput rc;
  rc.roll_us = trim.roll_us;
  rc.yaw_us = channel(trim.yaw_us, cmd.yaw);
  rc.throttle_us = channel(trim.throttle_us, cmd.throttle);
  rc.pitch_us = channel(trim.pitch_us, std::max(0.0, cmd.forward / limits.v_max_forward));
  return rc;
}

}  // namespace vservo::control
