#include "vservo/stereo.hpp"

#include "vservo/errors.hpp"

namespace vservo::stereo {

void StereoGeometry::validate() const {
  if (!(focal > 0.0 && baseline > 0.0)) throw Error("focal length and baseline must be positive");
}

double depth(const StereoGeometry& geom, double p1, double p2) {
  geom.validate();
  const double disparity = p2 - p1;
  if (disparity == 0.0) throw ZeroDisparity("zero disparity: point at infinity");
  return geom.focal * geom.baseline / disparity - geom.focal;
}

double disparity_for_depth(const StereoGeometry& geom, double h) {
  geom.validate();
  if (h + geom.focal == 0.0) throw Error("depth -f has no finite disparity");
  return geom.focal * geom.baseline / (h + geom.focal);
}

}  // namespace vservo::stereo
