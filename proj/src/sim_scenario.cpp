#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "vservo/ekf.hpp"
#include "vservo/errors.hpp"
#include "vservo/sim.hpp"

namespace vservo::sim {

std::string_view to_string(Pipeline p) {
  switch (p) {
    case Pipeline::color_blob: return "color-blob";
    case Pipeline::feature_kernel: return "feature-kernel";
    case Pipeline::ekf_assisted: return "ekf-assisted";
    case Pipeline::status_sitl: return "status-sitl";
  }
  return "unknown";
}

std::optional<Pipeline> pipeline_from_string(std::string_view name) {
  if (name == "color-blob") return Pipeline::color_blob;
  if (name == "feature-kernel") return Pipeline::feature_kernel;
  if (name == "ekf-assisted") return Pipeline::ekf_assisted;
  if (name == "status-sitl") return Pipeline::status_sitl;
  return std::nullopt;
}

std::size_t ScenarioConfig::substeps() const {
  return static_cast<std::size_t>(std::llround(1.0 / (camera.rate_hz * dt)));
}

std::size_t ScenarioConfig::frame_count() const {
  return static_cast<std::size_t>(std::floor(duration * camera.rate_hz + 1e-9));
}

void ScenarioConfig::validate() const {
  auto fail = [](const char* key, const char* what) { throw ConfigError(key, 0, what); };
  if (!(duration > 0.0)) fail("duration", "must be positive");
  if (!(dt > 0.0)) fail("sim.dt", "must be positive");
  if (camera.width < 4 || camera.height < 4) fail("camera.width", "frame must be at least 4x4");
  if (!(camera.hfov_deg > 0.0 && camera.hfov_deg < 180.0))
    fail("camera.hfov_deg", "must lie in (0, 180)");
  if (!(camera.rate_hz > 0.0)) fail("camera.rate_hz", "must be positive");
  const double ratio = 1.0 / (camera.rate_hz * dt);
  if (ratio < 1.0 - 1e-9 || std::fabs(ratio - std::round(ratio)) > 1e-6)
    fail("camera.rate_hz", "camera period must be a whole number of physics steps (sim.dt)");
  if (!(limits.v_max_forward > 0.0)) fail("limits.v_max_forward", "must be positive");
  if (!(limits.a_max > 0.0)) fail("limits.a_max", "must be positive");
  if (!(limits.yaw_rate_max > 0.0)) fail("limits.yaw_rate_max", "must be positive");
  if (!(limits.range_gate > 0.0)) fail("limits.range_gate", "must be positive");
  if (!(v_climb_max > 0.0)) fail("limits.v_climb_max", "must be positive");
  if (!(rc.min_us <= rc.throttle_us && rc.throttle_us <= rc.max_us))
    fail("rc.throttle_trim", "must lie inside the RC range");
  if (path.speed < 0.0) fail("path.speed", "must be non-negative");
  if (!(path.radius > 0.0)) fail("path.radius", "must be positive");
  if (!(path.length > 0.0)) fail("path.length", "must be positive");
  if (!(path.toppling_speed > 0.0)) fail("path.toppling_speed", "must be positive");
  if (path.height < 0.0) fail("path.height", "must be non-negative");
  if (!(appearance.radius_m > 0.0)) fail("target.radius", "must be positive");
  if (appearance.color.hue < 0.0 || appearance.color.hue >= 360.0)
    fail("target.hue", "must lie in [0, 360)");
  if (appearance.color.saturation < 0.0 || appearance.color.saturation > 1.0)
    fail("target.saturation", "must lie in [0, 1]");
  if (appearance.color.value < 0.0 || appearance.color.value > 1.0)
    fail("target.value", "must lie in [0, 1]");
  if (!(start_range > 0.0)) fail("quad.start_range", "must be positive");
  if (start_height < 0.0) fail("quad.start_height", "must be non-negative");
  if (render.pixel_noise < 0 || render.pixel_noise > 127)
    fail("render.pixel_noise", "must lie in [0, 127]");
  if (render.feature_bit_noise < 0.0 || render.feature_bit_noise > 1.0)
    fail("render.feature_bit_noise", "must lie in [0, 1]");
  if (render.clutter_features < 0) fail("render.clutter_features", "must be non-negative");
  if (render.descriptor_bits == 0) fail("render.descriptor_bits", "must be positive");
  if (!(sensor.half_angle_deg > 0.0 && sensor.half_angle_deg < 90.0))
    fail("sensor.half_angle_deg", "must lie in (0, 90)");
  if (!(sensor.max_range > 0.0)) fail("sensor.max_range", "must be positive");
  if (!(tolerance.hue_half_width > 0.0 && tolerance.hue_half_width <= 180.0))
    fail("imaging.hue_half_width", "must lie in (0, 180]");
  if (!(tolerance.sat_half_width > 0.0 && tolerance.sat_half_width <= 0.5))
    fail("imaging.sat_half_width", "must lie in (0, 0.5]");
  if (!(tolerance.val_half_width > 0.0 && tolerance.val_half_width <= 0.5))
    fail("imaging.val_half_width", "must lie in (0, 0.5]");
  if (min_blob_pixels == 0) fail("imaging.min_blob_pixels", "must be at least 1");
  if (!(sigma_floor > 0.0)) fail("control.sigma_floor", "must be positive");
  const auto& thr = features.threshold;
  if (!(thr.min_value <= thr.value && thr.value <= thr.max_value))
    fail("features.threshold", "must lie in [threshold_min, threshold_max]");
  if (thr.increment < 0 || thr.decrement < 0) fail("features.increment", "must be non-negative");
  if (features.kernel_size < 1) fail("features.kernel_size", "must be at least 1");
  if (features.kernel_frames < 1) fail("features.kernel_frames", "must be at least 1");
  if (!(features.color_half_width > 0.0 && features.color_half_width <= 180.0))
    fail("features.color_half_width", "must lie in (0, 180]");
  if (!(ekf.accel_sigma > 0.0)) fail("ekf.accel_sigma", "must be positive");
  if (!(ekf.meas_sigma > 0.0)) fail("ekf.meas_sigma", "must be positive");
  if (lost_frames == 0) fail("metrics.lost_frames", "must be at least 1");
}

namespace {

using imaging::BlobObservation;

class Observer {
 public:
  virtual ~Observer() = default;
  virtual BlobObservation observe(const RenderResult& rr, const control::GaussianModel& model) = 0;
};

// Prominent color is taken once, from the ROI a user would swipe over the
// target's bounding box; afterwards every frame is color-thresholded.
class ColorBlobObserver final : public Observer {
 public:
  explicit ColorBlobObserver(const ScenarioConfig& cfg) : cfg_(cfg) {}

  BlobObservation observe(const RenderResult& rr, const control::GaussianModel& model) override {
    if (!target_color_ && !try_initialize(rr)) return {};
    auto tol = cfg_.tolerance;
    if (cfg_.sigma_color_tolerance)
      tol = control::tolerance_for_sigma_color(control::sigma_color(model, cfg_.camera.dims()), tol);
    return imaging::blob_observe(imaging::hsv_mask(rr.frame, *target_color_, tol),
                                 cfg_.min_blob_pixels);
  }

 private:
  bool try_initialize(const RenderResult& rr) {
    if (!rr.truth || rr.truth->radius_px < 1.0) return false;
    const auto& p = *rr.truth;
    const int x0 = std::max(0, static_cast<int>(std::floor(p.u - p.radius_px)));
    const int y0 = std::max(0, static_cast<int>(std::floor(p.v - p.radius_px)));
    const int x1 = std::min(rr.frame.width() - 1, static_cast<int>(std::ceil(p.u + p.radius_px)));
    const int y1 = std::min(rr.frame.height() - 1, static_cast<int>(std::ceil(p.v + p.radius_px)));
    if (x1 < x0 || y1 < y0) return false;
    try {
      target_color_ = imaging::prominent_color(rr.frame, {x0, y0, x1 - x0 + 1, y1 - y0 + 1});
    } catch (const AllPixelsAchromatic&) {
      return false;
    }
    return true;
  }

  const ScenarioConfig& cfg_;
  std::optional<imaging::HsvColor> target_color_;
};

class FeatureKernelObserver final : public Observer {
 public:
  FeatureKernelObserver(const ScenarioConfig& cfg, const FeatureBank& bank)
      : cfg_(cfg),
        templates_(bank.templates),
        threshold_(cfg.features.threshold),
        mean_color_(cfg.appearance.color),
        kernel_(cfg.features.kernel_frames, cfg.features.kernel_size) {}

  BlobObservation observe(const RenderResult& rr, const control::GaussianModel&) override {
    const auto matched = features::hamming_match(templates_, rr.features, threshold_);
    threshold_ = features::adapt_threshold(threshold_, matched.size());
    const auto kept =
        features::filter_by_color(matched, rr.frame, mean_color_, cfg_.features.color_half_width);
    mean_color_ = features::mean_feature_color(kept, rr.frame, mean_color_);

    if (features::weighted_centroid(kept).valid) {
      frames_since_lock_ = 0;
    } else if (frames_since_lock_ < std::numeric_limits<std::size_t>::max()) {
      ++frames_since_lock_;
    }
    kernel_ = features::kernel_update(std::move(kernel_), kept, cfg_.camera.dims());
    auto obs = features::kernel_estimate(kernel_);
    // Occluded once a whole window passes without three non-collinear features.
    obs.valid = obs.valid && frames_since_lock_ < kernel_.capacity();
    return obs;
  }

 private:
  const ScenarioConfig& cfg_;
  features::FeatureSet templates_;
  features::MatchThreshold threshold_;
  imaging::HsvColor mean_color_;
  features::KernelBuffer kernel_;
  std::size_t frames_since_lock_ = std::numeric_limits<std::size_t>::max();
};

// Color blob measurements smoothed by a pixel-space constant-velocity filter
// that coasts through short dropouts.
class EkfAssistedObserver final : public Observer {
 public:
  explicit EkfAssistedObserver(const ScenarioConfig& cfg)
      : cfg_(cfg),
        blob_(cfg),
        models_(ekf::constant_velocity_model(1.0 / cfg.camera.rate_hz, cfg.ekf.accel_sigma,
                                             cfg.ekf.meas_sigma)) {}

  BlobObservation observe(const RenderResult& rr, const control::GaussianModel& model) override {
    BlobObservation obs = blob_.observe(rr, model);
    const ekf::Vector no_control;
    if (obs.valid) {
      ekf::Vector z(2);
      z << obs.centroid_x, obs.centroid_y;
      if (!state_) {
        ekf::EkfState s;
        s.mean = ekf::Vector::Zero(4);
        s.mean.head<2>() = z;
        s.covariance = ekf::Matrix::Zero(4, 4);
        s.covariance.diagonal() << 1e4, 1e4, 1e4, 1e4;
        state_ = ekf::update(s, models_, z);
      } else {
        state_ = ekf::update(ekf::predict(*state_, models_, no_control), models_, z);
      }
      coasted_ = 0;
      last_radius_ = obs.rms_radius;
      last_count_ = obs.pixel_count;
    } else if (state_ && coasted_ < cfg_.ekf.coast_frames) {
      state_ = ekf::predict(*state_, models_, no_control);
      ++coasted_;
    } else {
      state_.reset();
      return obs;
    }
    const double w = cfg_.camera.width;
    const double h = cfg_.camera.height;
    BlobObservation out;
    out.centroid_x = std::clamp(state_->mean(0), 0.0, std::nextafter(w, 0.0));
    out.centroid_y = std::clamp(state_->mean(1), 0.0, std::nextafter(h, 0.0));
    out.rms_radius = last_radius_;
    out.pixel_count = last_count_;
    out.valid = true;
    return out;
  }

 private:
  const ScenarioConfig& cfg_;
  ColorBlobObserver blob_;
  ekf::EkfModels models_;
  std::optional<ekf::EkfState> state_;
  std::size_t coasted_ = 0;
  double last_radius_ = 0.0;
  std::size_t last_count_ = 0;
};

std::unique_ptr<Observer> make_observer(const ScenarioConfig& cfg, const FeatureBank& bank) {
  switch (cfg.pipeline) {
    case Pipeline::color_blob:
    case Pipeline::status_sitl:
      return std::make_unique<ColorBlobObserver>(cfg);
    case Pipeline::feature_kernel:
      return std::make_unique<FeatureKernelObserver>(cfg, bank);
    case Pipeline::ekf_assisted:
      return std::make_unique<EkfAssistedObserver>(cfg);
  }
  throw ConfigError("pipeline", 0, "unknown pipeline");
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config, const FrameSink& sink) {
  config.validate();
  const auto dims = config.camera.dims();
  const std::size_t substeps = config.substeps();
  const std::size_t frames = config.frame_count();

  WorldState world;
  world.rng = SimRng(config.seed);
  world.target_present = config.target_present;
  const FeatureBank bank = make_feature_bank(world.rng, config.render.descriptor_bits);

  const PathTracker tracker(config.path);
  world.target_pos = tracker.position_at(0.0);
  const Vec3 tangent = tracker.tangent_at_arc(0.0);
  world.quad_pos = {world.target_pos.x - config.start_range * tangent.x,
                    world.target_pos.y - config.start_range * tangent.y, config.start_height};
  world.quad_yaw = std::atan2(tangent.x, tangent.y);

  auto observer = make_observer(config, bank);
  auto model = control::GaussianModel::initial(dims);

  ScenarioResult result;
  result.trace.reserve(frames);
  result.truth.reserve(frames);
  std::size_t step = 0;

  for (std::size_t i = 0; i < frames; ++i) {
    RenderResult rr = render(world, config.camera, config.appearance, config.render, bank);
    if (sink) sink(i, rr.frame);

    const BlobObservation obs = observer->observe(rr, model);
    control::ControlCommand cmd;
    if (obs.valid) {
      if (config.pipeline == Pipeline::status_sitl) {
        // Fixed Gaussian at the image center whose variance is the blob area.
        model = control::GaussianModel::initial(dims);
        model.sigma_centroid = model.frozen_sigma =
            std::max(std::sqrt(static_cast<double>(obs.pixel_count)), config.sigma_floor);
      } else {
        model = control::sigma_update(model, obs.centroid_x, obs.centroid_y, dims,
                                      config.sigma_floor);
      }
      cmd = control::status_command(obs, model, dims, config.limits);
    }
    const double range = ultrasonic_range(world, config.appearance, config.sensor)
                             .value_or(std::numeric_limits<double>::infinity());
    cmd = control::safety_gate(cmd, range, config.limits);
    const auto rc = control::to_rc(cmd, config.limits, config.rc);

    TraceRow row;
    row.t = world.t;
    row.target = world.target_pos;
    row.quad = world.quad_pos;
    row.quad_yaw = world.quad_yaw;
    row.detected = obs.valid;
    if (obs.valid) {
      row.px = obs.centroid_x;
      row.py = obs.centroid_y;
      row.rms_radius = obs.rms_radius;
    } else {
      row.px = row.py = row.rms_radius = std::numeric_limits<double>::quiet_NaN();
    }
    row.cmd = cmd;
    row.rc = rc;
    result.trace.push_back(row);
    result.truth.push_back(rr.truth);

    for (std::size_t k = 0; k < substeps; ++k) {
      world = step_quad(std::move(world), cmd, config.limits, config.dt, config.v_climb_max);
      ++step;
      world.t = static_cast<double>(step) * config.dt;
      world.target_pos = tracker.position_at(world.t);
    }
  }

  if (!result.trace.empty())
    result.metrics = compute_metrics(result.trace, {dims.width, dims.height, config.lost_frames});
  return result;
}

}  // namespace vservo::sim
