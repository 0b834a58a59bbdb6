#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vservo/features.hpp"
#include "vservo/imaging.hpp"
#include "vservo/rng.hpp"
#include "vservo/status_control.hpp"

// Deterministic closed-loop world. Frame: x east, y north, z up (meters).
// Quad heading is a compass angle, clockwise from north, so a positive yaw
// command turns right. The camera looks along the heading with zero pitch.

namespace vservo::sim {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

struct WorldState {
  double t = 0.0;
  Vec3 quad_pos;
  double quad_yaw = 0.0;
  double forward_speed = 0.0;   // m/s along the heading
  double vertical_speed = 0.0;  // m/s, positive up
  Vec3 target_pos;
  bool target_present = true;
  SimRng rng;
};

enum class PathKind { line, circle, figure_eight };

std::string_view to_string(PathKind kind);
std::optional<PathKind> path_kind_from_string(std::string_view name);

struct TargetPath {
  PathKind kind = PathKind::circle;
  double speed = 0.5;            // m/s; 0 parks the target at the path origin
  double radius = 5.0;           // circle radius / figure-eight half-width (m)
  double length = 100.0;         // line length (m); the target stops at the end
  double heading = 0.0;          // line direction, radians from +x
  double height = 0.5;           // target center height (m)
  double toppling_speed = 0.75;  // above this the target halts at the first curvature maximum
};

/// Arc-length parametrization of a TargetPath. Construct once per scenario;
/// figure-eight paths precompute an arc-length table.
class PathTracker {
 public:
  explicit PathTracker(const TargetPath& path);

  Vec3 position_at(double t) const;
  Vec3 position_at_arc(double s) const;
  /// Unit tangent (xy) at arc length s.
  Vec3 tangent_at_arc(double s) const;
  /// Arc length where a toppled target halts; nullopt when it never topples.
  std::optional<double> halt_arc() const { return halt_arc_; }

 private:
  Vec3 parametric(double theta) const;

  TargetPath path_;
  std::vector<double> table_theta_;
  std::vector<double> table_arc_;
  double loop_length_ = 0.0;
  std::optional<double> halt_arc_;
};

Vec3 step_target(const TargetPath& path, double t);

struct CameraModel {
  int width = 320;
  int height = 240;
  double hfov_deg = 60.0;
  double rate_hz = 5.0;

  double focal_px() const;
  imaging::FrameDims dims() const { return {width, height}; }
};

struct TargetAppearance {
  imaging::HsvColor color{0.0, 0.85, 0.85};
  double radius_m = 0.25;
};

struct RenderOptions {
  imaging::Rgb background{140, 150, 160};
  int pixel_noise = 4;              // uniform +/- levels per channel
  double feature_bit_noise = 0.03;  // per-bit flip probability
  int clutter_features = 6;
  std::size_t descriptor_bits = features::kDefaultDescriptorBits;
};

/// Template descriptors of the nine synthetic target features (center first,
/// then eight boundary points counter-clockwise from +x in image space).
struct FeatureBank {
  features::FeatureSet templates;
};

inline constexpr std::size_t kTargetFeatureCount = 9;

FeatureBank make_feature_bank(SimRng& rng, std::size_t descriptor_bits);

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double radius_px = 0.0;
  double depth = 0.0;
  bool center_in_frame = false;
};

/// Pinhole projection of the target center; nullopt when absent or behind the camera.
std::optional<Projection> project_target(const WorldState& world, const CameraModel& cam,
                                         const TargetAppearance& appearance);

struct RenderResult {
  imaging::Frame frame;
  features::FeatureSet features;
  std::optional<Projection> truth;
};

/// Draws the target disc over a noisy uniform background and synthesizes
/// features. Consumes draws from world.rng.
RenderResult render(WorldState& world, const CameraModel& cam, const TargetAppearance& appearance,
                    const RenderOptions& options, const FeatureBank& bank);

struct RangeSensor {
  double half_angle_deg = 15.0;
  double max_range = 4.0;
};

/// Distance from the quad to the target surface when the target is inside the
/// sensor cone and range; nullopt otherwise.
std::optional<double> ultrasonic_range(const WorldState& world, const TargetAppearance& appearance,
                                       const RangeSensor& sensor);

inline constexpr double kDefaultClimbRate = 2.0;  // m/s

WorldState step_quad(WorldState world, const control::ControlCommand& cmd,
                     const control::ControlLimits& limits, double dt,
                     double v_climb_max = kDefaultClimbRate);

enum class Pipeline { color_blob, feature_kernel, ekf_assisted, status_sitl };

std::string_view to_string(Pipeline p);
std::optional<Pipeline> pipeline_from_string(std::string_view name);

struct FeatureParams {
  features::MatchThreshold threshold{20, 0, 256, 2, 1};
  int kernel_size = 9;
  std::size_t kernel_frames = 10;
  double color_half_width = 360.0 / 12.0;
};

struct EkfParams {
  double accel_sigma = 40.0;  // px/s^2
  double meas_sigma = 2.0;    // px
  std::size_t coast_frames = 5;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  double duration = 120.0;
  Pipeline pipeline = Pipeline::color_blob;
  double dt = 0.05;

  CameraModel camera;
  control::ControlLimits limits{1.0, 2.5, 1.0, 1.0};
  double v_climb_max = kDefaultClimbRate;
  control::RcTrim rc;

  TargetPath path;
  bool target_present = true;
  TargetAppearance appearance;

  double start_range = 3.0;
  double start_height = 0.5;

  RenderOptions render;
  RangeSensor sensor;

  imaging::ColorTolerance tolerance;
  std::size_t min_blob_pixels = imaging::kDefaultMinBlobPixels;
  bool sigma_color_tolerance = false;
  double sigma_floor = control::kDefaultSigmaFloor;

  FeatureParams features;
  EkfParams ekf;

  std::size_t lost_frames = 25;

  /// Physics substeps per camera frame.
  std::size_t substeps() const;
  std::size_t frame_count() const;
  /// Throws ConfigError naming the first offending key.
  void validate() const;
};

struct TraceRow {
  double t = 0.0;
  Vec3 target;
  Vec3 quad;
  double quad_yaw = 0.0;
  double px = 0.0;
  double py = 0.0;
  double rms_radius = 0.0;
  bool detected = false;
  control::ControlCommand cmd;
  control::RcOutput rc;
};

struct Metrics {
  double detection_rate = 0.0;
  double tracking_efficiency = 0.0;
  std::optional<double> mean_pixel_error;
  std::size_t frames = 0;
  std::optional<double> lost_at;
};

struct MetricsParams {
  int width = 320;
  int height = 240;
  std::size_t lost_frames = 25;
};

/// detection_rate: detected / frames. tracking_efficiency: detected frames
/// whose centroid lies in the central half-rectangle, over all frames.
/// mean_pixel_error: mean centroid distance from the image center over
/// detected frames. lost_at: start time of the first run of lost_frames
/// consecutive undetected frames. Throws EmptyTrace.
Metrics compute_metrics(std::span<const TraceRow> trace, const MetricsParams& params = {});

struct ScenarioResult {
  std::vector<TraceRow> trace;
  std::vector<std::optional<Projection>> truth;  // per frame, ground-truth projection
  Metrics metrics;
};

using FrameSink = std::function<void(std::size_t frame_index, const imaging::Frame&)>;

ScenarioResult run_scenario(const ScenarioConfig& config, const FrameSink& sink = {});

void write_trace_csv(std::ostream& os, std::span<const TraceRow> trace);
std::vector<TraceRow> read_trace_csv(std::istream& is);

void write_metrics_json(std::ostream& os, const Metrics& m);
void write_metrics_text(std::ostream& os, const Metrics& m);

}  // namespace vservo::sim
