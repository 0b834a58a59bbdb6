#pragma once

namespace vservo::stereo {

/// Two-view geometry: focal length in pixels and baseline in the length unit
/// the depth is wanted in.
struct StereoGeometry {
  double focal = 1.0;
  double baseline = 1.0;

  void validate() const;
};

/// h = f * d / (p2 - p1) - f. Negative depths are returned as-is; use
/// is_physical() to classify. Throws ZeroDisparity when p2 == p1.
double depth(const StereoGeometry& geom, double p1, double p2);

/// Disparity (p2 - p1) that yields depth h; inverse of depth().
double disparity_for_depth(const StereoGeometry& geom, double h);

inline bool is_physical(double h) { return h >= 0.0; }

}  // namespace vservo::stereo
