#pragma once

#include <cstddef>
#include <numbers>

#include "vservo/imaging.hpp"

// Image-plane control laws: yaw and throttle from the blob position, forward
// velocity from a Gaussian of the centroid distance whose width is learned
// online, plus the range safety gate and RC pulse mapping.

namespace vservo::control {

using imaging::FrameDims;

inline constexpr double kDefaultSigmaFloor = 1.0;  // px
inline constexpr double kColorChannelSpan = 3.0 * 256.0;
inline constexpr double kSigmaColorFloor = 256.0 / 6.0;
inline constexpr double kRangeStaleAfter = 0.060;  // s

struct GaussianModel {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double sigma_centroid = 0.0;
  std::size_t n = 0;
  double sum_sq_dist = 0.0;
  /// Width actually used for control; held while new samples are outliers.
  double frozen_sigma = 0.0;

  /// Mean at the image center and sigma = width / 4, before any sample.
  static GaussianModel initial(FrameDims dims);
};

struct ControlCommand {
  double yaw = 0.0;       // [-1, 1], positive turns right
  double throttle = 0.0;  // [-1, 1], positive climbs
  double forward = 0.0;   // [0, v_max] m/s

  friend bool operator==(const ControlCommand&, const ControlCommand&) = default;
};

struct ControlLimits {
  double v_max_forward = 5.0;  // m/s
  double a_max = 2.5;          // m/s^2
  double yaw_rate_max = 1.0;   // rad/s
  double range_gate = 1.0;     // m

  void validate() const;
};

struct RcOutput {
  int roll_us = 1500;
  int pitch_us = 1500;
  int throttle_us = 1480;
  int yaw_us = 1500;

  friend bool operator==(const RcOutput&, const RcOutput&) = default;
};

struct RcTrim {
  int roll_us = 1500;
  int pitch_us = 1500;
  int throttle_us = 1480;
  int yaw_us = 1500;
  int span_us = 100;  // full-scale deflection either side of trim
  int min_us = 1400;
  int max_us = 1600;
};

/// Magnitude of the piecewise-linear law along one image axis: 1 on the outer
/// quarters, falling linearly to 0 at the center.
double axis_magnitude(double pos, double extent);

/// Signed yaw in [-1, 1]; positive when the target is right of center.
double yaw_command(double x, double width);

/// Signed throttle in [-1, 1]; negative (descend) when the target is below center.
double throttle_command(double y, double height);

double distance_from_center(double cx, double cy, FrameDims dims);

/// Adds one centroid sample. The running sigma always absorbs it; the frozen
/// sigma only follows when the sample lies within the previous frozen sigma.
/// frozen_sigma never drops below sigma_floor.
GaussianModel sigma_update(GaussianModel model, double cx, double cy, FrameDims dims,
                           double sigma_floor = kDefaultSigmaFloor);

/// Forward speed from the normalized Gaussian of the centroid distance.
/// Distances and sigma are scaled by the image half-diagonal; output is
/// clamped to limits.v_max_forward.
double forward_command(const GaussianModel& model, double d, FrameDims dims,
                       const ControlLimits& limits);

/// Color spread implied by the learned centroid spread, floored at 1/6 of
/// one 256-level channel.
double sigma_color(const GaussianModel& model, FrameDims dims);

/// Mask tolerance widened in proportion to sigma_color relative to its floor.
/// At the floor the base tolerance is returned unchanged.
imaging::ColorTolerance tolerance_for_sigma_color(double sigma_color,
                                                  const imaging::ColorTolerance& base);

/// Throws NonPositiveSigma for sigma <= 0.
double gaussian_pdf(double x, double mu, double sigma);

/// Full STATUS command for a valid observation under the given model.
ControlCommand status_command(const imaging::BlobObservation& obs, const GaussianModel& model,
                              FrameDims dims, const ControlLimits& limits);

/// Zeroes forward motion when an obstacle is closer than the range gate.
ControlCommand safety_gate(ControlCommand cmd, double range_m, const ControlLimits& limits);

struct RangeReading {
  double range_m = 0.0;
  double age_s = 0.0;
};

/// Readings older than 60 ms are treated as absent (no gating).
ControlCommand safety_gate(ControlCommand cmd, const RangeReading& reading,
                           const ControlLimits& limits);

RcOutput to_rc(const ControlCommand& cmd, const ControlLimits& limits, const RcTrim& trim = {});

}  // namespace vservo::control
