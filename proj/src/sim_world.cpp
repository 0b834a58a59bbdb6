#include <algorithm>
#include <cmath>
#include <numbers>

#include "vservo/errors.hpp"
#include "vservo/sim.hpp"

namespace vservo::sim {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kArcTableSamples = 8192;
constexpr double kNearPlane = 0.05;  // m

double wrap_angle(double a) {
  a = std::fmod(a + std::numbers::pi, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a - std::numbers::pi;
}

struct CameraAxes {
  Vec3 forward;
  Vec3 right;
};

CameraAxes camera_axes(double heading) {
  return {{std::sin(heading), std::cos(heading), 0.0}, {std::cos(heading), -std::sin(heading), 0.0}};
}

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 sub(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }

}  // namespace

std::string_view to_string(PathKind kind) {
  switch (kind) {
    case PathKind::line: return "line";
    case PathKind::circle: return "circle";
    case PathKind::figure_eight: return "figure-eight";
  }
  return "unknown";
}

std::optional<PathKind> path_kind_from_string(std::string_view name) {
  if (name == "line") return PathKind::line;
  if (name == "circle") return PathKind::circle;
  if (name == "figure-eight") return PathKind::figure_eight;
  return std::nullopt;
}

// Figure-eight is the Gerono lemniscate (R sin t, R sin t cos t), starting at
// the crossing point and heading north-east.
Vec3 PathTracker::parametric(double theta) const {
  const double r = path_.radius;
  return {r * std::sin(theta), r * std::sin(theta) * std::cos(theta), path_.height};
}

PathTracker::PathTracker(const TargetPath& path) : path_(path) {
  if (path.speed < 0.0) throw Error("target speed must be non-negative");
  switch (path.kind) {
    case PathKind::line:
      if (!(path.length > 0.0)) throw Error("line length must be positive");
      break;
    case PathKind::circle:
      if (!(path.radius > 0.0)) throw Error("path radius must be positive");
      loop_length_ = kTwoPi * path.radius;
      // Constant curvature: every point is a maximum, the first is the origin.
      halt_arc_ = 0.0;
      break;
    case PathKind::figure_eight: {
      if (!(path.radius > 0.0)) throw Error("path radius must be positive");
      const double r = path.radius;
      auto speed = [r](double th) { return r * std::hypot(std::cos(th), std::cos(2.0 * th)); };
      auto curvature = [r](double th) {
        const double xd = r * std::cos(th), xdd = -r * std::sin(th);
        const double yd = r * std::cos(2.0 * th), ydd = -2.0 * r * std::sin(2.0 * th);
        return std::fabs(xd * ydd - yd * xdd) / std::pow(xd * xd + yd * yd, 1.5);
      };
      table_theta_.resize(kArcTableSamples + 1);
      table_arc_.resize(kArcTableSamples + 1);
      const double h = kTwoPi / kArcTableSamples;
      double best_k = -1.0;
      std::size_t best_i = 0;
      for (std::size_t i = 0; i <= kArcTableSamples; ++i) {
        const double th = h * static_cast<double>(i);
        table_theta_[i] = th;
        if (i == 0) {
          table_arc_[i] = 0.0;
        } else {
          // Simpson on each cell.
          const double a = table_theta_[i - 1];
          table_arc_[i] = table_arc_[i - 1] +
                          h / 6.0 * (speed(a) + 4.0 * speed(a + h / 2.0) + speed(th));
        }
        const double k = curvature(th);
        if (k > best_k * (1.0 + 1e-9)) {
          best_k = k;
          best_i = i;
        }
      }
      loop_length_ = table_arc_.back();
      halt_arc_ = table_arc_[best_i];
      break;
    }
  }
  if (!(path.speed > path.toppling_speed)) halt_arc_.reset();
}

Vec3 PathTracker::position_at_arc(double s) const {
  switch (path_.kind) {
    case PathKind::line: {
      const double d = std::clamp(s, 0.0, path_.length);
      return {d * std::cos(path_.heading), d * std::sin(path_.heading), path_.height};
    }
    case PathKind::circle: {
      const double a = s / path_.radius;
      return {path_.radius * std::cos(a), path_.radius * std::sin(a), path_.height};
    }
    case PathKind::figure_eight: {
      const double loops = std::floor(s / loop_length_);
      const double rem = s - loops * loop_length_;
      const auto it = std::upper_bound(table_arc_.begin(), table_arc_.end(), rem);
      const std::size_t hi = std::clamp<std::size_t>(
          static_cast<std::size_t>(it - table_arc_.begin()), 1, table_arc_.size() - 1);
      const std::size_t lo = hi - 1;
      const double span = table_arc_[hi] - table_arc_[lo];
      const double f = span > 0.0 ? (rem - table_arc_[lo]) / span : 0.0;
      return parametric(table_theta_[lo] + f * (table_theta_[hi] - table_theta_[lo]));
    }
  }
  return {};
}

Vec3 PathTracker::tangent_at_arc(double s) const {
  switch (path_.kind) {
    case PathKind::line:
      return {std::cos(path_.heading), std::sin(path_.heading), 0.0};
    case PathKind::circle: {
      const double a = s / path_.radius;
      return {-std::sin(a), std::cos(a), 0.0};
    }
    case PathKind::figure_eight: {
      const double eps = 1e-4 * path_.radius;
      const Vec3 a = position_at_arc(s);
      const Vec3 b = position_at_arc(s + eps);
      const double n = std::hypot(b.x - a.x, b.y - a.y);
      return {(b.x - a.x) / n, (b.y - a.y) / n, 0.0};
    }
  }
  return {};
}

Vec3 PathTracker::position_at(double t) const {
  if (t < 0.0) throw Error("path time must be non-negative");
  double s = path_.speed * t;
  if (halt_arc_) s = std::min(s, *halt_arc_);
  return position_at_arc(s);
}

Vec3 step_target(const TargetPath& path, double t) { return PathTracker(path).position_at(t); }

double CameraModel::focal_px() const {
  return (width / 2.0) / std::tan(hfov_deg * std::numbers::pi / 360.0);
}

FeatureBank make_feature_bank(SimRng& rng, std::size_t descriptor_bits) {
  FeatureBank bank;
  for (std::size_t i = 0; i < kTargetFeatureCount; ++i) {
    features::Feature f;
    f.descriptor = features::Descriptor(descriptor_bits);
    for (auto& w : f.descriptor.words()) w = rng.next();
    f.descriptor.trim();
    bank.templates.push_back(std::move(f));
  }
  return bank;
}

std::optional<Projection> project_target(const WorldState& world, const CameraModel& cam,
                                         const TargetAppearance& appearance) {
  if (!world.target_present) return std::nullopt;
  const auto axes = camera_axes(world.quad_yaw);
  const Vec3 rel = sub(world.target_pos, world.quad_pos);
  const double depth = dot(rel, axes.forward);
  if (depth <= kNearPlane) return std::nullopt;
  const double f = cam.focal_px();
  Projection p;
  p.depth = depth;
  p.u = cam.width / 2.0 + f * dot(rel, axes.right) / depth;
  p.v = cam.height / 2.0 - f * rel.z / depth;
  p.radius_px = f * appearance.radius_m / depth;
  p.center_in_frame = p.u >= 0.0 && p.u < cam.width && p.v >= 0.0 && p.v < cam.height;
  return p;
}

RenderResult render(WorldState& world, const CameraModel& cam, const TargetAppearance& appearance,
                    const RenderOptions& options, const FeatureBank& bank) {
  RenderResult out;
  out.frame = imaging::Frame(cam.width, cam.height, options.background);
  out.truth = project_target(world, cam, appearance);

  const imaging::Rgb target_rgb = imaging::hsv_to_rgb(appearance.color);
  const double r2 = out.truth ? out.truth->radius_px * out.truth->radius_px : -1.0;
  const int noise = std::max(0, options.pixel_noise);
  const auto levels = static_cast<std::uint64_t>(2 * noise + 1);

  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      imaging::Rgb base = options.background;
      if (out.truth) {
        const double dx = x - out.truth->u;
        const double dy = y - out.truth->v;
        if (dx * dx + dy * dy <= r2) base = target_rgb;
      }
      if (noise > 0) {
        const std::uint64_t bits = world.rng.next();
        auto jitter = [&](std::uint8_t c, int shift) {
          const int n = static_cast<int>((bits >> shift) % levels) - noise;
          return static_cast<std::uint8_t>(std::clamp(int(c) + n, 0, 255));
        };
        base = {jitter(base.r, 0), jitter(base.g, 16), jitter(base.b, 32)};
      }
      out.frame.at(x, y) = base;
    }
  }

  // Target features: the center plus eight points just inside the rim, so
  // each lands on a disc pixel.
  if (out.truth) {
    const double rim = std::max(0.0, out.truth->radius_px - 1.0);
    for (std::size_t i = 0; i < kTargetFeatureCount; ++i) {
      features::Feature f = bank.templates.at(i);
      std::size_t flips = 0;
      for (std::size_t b = 0; b < f.descriptor.size(); ++b) {
        if (world.rng.bernoulli(options.feature_bit_noise)) {
          f.descriptor.flip(b);
          ++flips;
        }
      }
      const double angle = i == 0 ? 0.0 : (static_cast<double>(i - 1) * std::numbers::pi / 4.0);
      const double radius = i == 0 ? 0.0 : rim;
      f.x = out.truth->u + radius * std::cos(angle);
      f.y = out.truth->v - radius * std::sin(angle);
      f.confidence =
          std::max(0.05, 1.0 - static_cast<double>(flips) / static_cast<double>(f.descriptor.size()));
      if (f.x >= 0.0 && f.x < cam.width && f.y >= 0.0 && f.y < cam.height)
        out.features.push_back(std::move(f));
    }
  }

  for (int i = 0; i < options.clutter_features; ++i) {
    features::Feature f;
    f.descriptor = features::Descriptor(options.descriptor_bits);
    for (auto& w : f.descriptor.words()) w = world.rng.next();
    f.descriptor.trim();
    f.x = world.rng.uniform(0.0, static_cast<double>(cam.width));
    f.y = world.rng.uniform(0.0, static_cast<double>(cam.height));
    f.confidence = world.rng.uniform(0.2, 1.0);
    out.features.push_back(std::move(f));
  }
  return out;
}

std::optional<double> ultrasonic_range(const WorldState& world, const TargetAppearance& appearance,
                                       const RangeSensor& sensor) {
  if (!world.target_present) return std::nullopt;
  const Vec3 rel = sub(world.target_pos, world.quad_pos);
  const double dist = std::sqrt(dot(rel, rel));
  if (dist <= 0.0) return 0.0;
  const double cos_angle = dot(rel, camera_axes(world.quad_yaw).forward) / dist;
  if (cos_angle < std::cos(sensor.half_angle_deg * std::numbers::pi / 180.0)) return std::nullopt;
  const double surface = std::max(0.0, dist - appearance.radius_m);
  if (surface > sensor.max_range) return std::nullopt;
  return surface;
}

WorldState step_quad(WorldState world, const control::ControlCommand& cmd,
                     const control::ControlLimits& limits, double dt, double v_climb_max) {
  if (!(dt > 0.0)) throw Error("dt must be positive");
  const double yaw_cmd = std::clamp(cmd.yaw, -1.0, 1.0);
  const double throttle_cmd = std::clamp(cmd.throttle, -1.0, 1.0);
  const double forward_cmd = std::clamp(cmd.forward, 0.0, limits.v_max_forward);

  world.quad_yaw = wrap_angle(world.quad_yaw + yaw_cmd * limits.yaw_rate_max * dt);
  const double dv = std::clamp(forward_cmd - world.forward_speed, -limits.a_max * dt,
                               limits.a_max * dt);
  world.forward_speed += dv;
  world.vertical_speed = throttle_cmd * v_climb_max;

  world.quad_pos.x += world.forward_speed * std::sin(world.quad_yaw) * dt;
  world.quad_pos.y += world.forward_speed * std::cos(world.quad_yaw) * dt;
  world.quad_pos.z += world.vertical_speed * dt;
  if (world.quad_pos.z < 0.0) {
    world.quad_pos.z = 0.0;
    world.vertical_speed = 0.0;
  }
  return world;
}

}  // namespace vservo::sim
