#include "vservo/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "vservo/errors.hpp"
#include "vservo/rng.hpp"
#include "vservo/status_control.hpp"
#include "vservo/stereo.hpp"

namespace vservo::selfcheck {
namespace {

// "1e-06" -> "1e-6", to match the way tolerances are usually written.
std::string short_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  std::string s = buf;
  for (const char* pat : {"e-0", "e+0"}) {
    if (const auto at = s.find(pat); at != std::string::npos) s.erase(at + 2, 1);
  }
  return s;
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

CheckResult normalization(double tol) {
  CheckResult r{"normalization: 1 ± " + short_real(tol), true, ""};
  for (double sigma : {0.1, 1.0, 80.0}) {
    const double integral = simpson(
        [sigma](double x) { return control::gaussian_pdf(x, 0.0, sigma); }, -8.0 * sigma,
        8.0 * sigma, 4000);
    const double err = std::fabs(integral - 1.0);
    if (!(err <= tol)) r.passed = false;
    if (!r.detail.empty()) r.detail += ", ";
    r.detail += fmt("sigma=%g: |I-1|=%.3g", sigma, err);
  }
  return r;
}

CheckResult axis_laws() {
  CheckResult r{"status laws: yaw/throttle table and sweep", true, ""};
  const double w = 320.0;
  const double h = 240.0;
  auto expect = [&](bool ok, const char* what) {
    if (!ok && r.passed) {
      r.passed = false;
      r.detail = what;
    }
  };
  expect(control::yaw_command(w / 2, w) == 0.0, "yaw at center is not 0");
  expect(std::fabs(control::yaw_command(0.0, w)) == 1.0, "yaw at left edge is not saturated");
  expect(std::fabs(std::fabs(control::yaw_command(3 * w / 8, w)) - 0.5) <= 1e-12,
         "yaw at 3w/8 is not 0.5");
  expect(control::throttle_command(h / 2, h) == 0.0, "throttle at center is not 0");
  expect(std::fabs(control::throttle_command(0.0, h)) == 1.0, "throttle at top is not saturated");
  expect(std::fabs(std::fabs(control::throttle_command(3 * h / 8, h)) - 0.5) <= 1e-12,
         "throttle at 3h/8 is not 0.5");
  constexpr int kSweep = 100000;
  for (int i = 0; i <= kSweep && r.passed; ++i) {
    const double x = w * i / kSweep;
    const double m = std::fabs(control::yaw_command(x, w));
    expect(m >= 0.0 && m <= 1.0, "yaw magnitude outside [0, 1]");
    if (x <= w / 4 || x >= 3 * w / 4) expect(m == 1.0, "outer quarter not saturated");
  }
  if (r.passed) r.detail = "1e5-point sweep";
  return r;
}

CheckResult forward_law() {
  CheckResult r{"forward law: bounded by v_max, peak at center", true, ""};
  const control::FrameDims dims{320, 240};
  const control::ControlLimits limits;
  auto model = control::GaussianModel::initial(dims);
  double prev = control::forward_command(model, 0.0, dims, limits);
  for (int i = 1; i <= 1000; ++i) {
    const double v = control::forward_command(model, 0.2 * i, dims, limits);
    if (v < 0.0 || v > limits.v_max_forward || v > prev + 1e-15) {
      r.passed = false;
      r.detail = fmt("non-monotone or out of range at d=%g", 0.2 * i);
      return r;
    }
    prev = v;
  }
  r.detail = "1000 distances";
  return r;
}

CheckResult sigma_rms() {
  CheckResult r{"sigma: running value equals batch RMS", true, ""};
  const control::FrameDims dims{320, 240};
  SimRng rng(7);
  auto model = control::GaussianModel::initial(dims);
  double sum_sq = 0.0;
  double worst = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double x = rng.uniform(0.0, 320.0);
    const double y = rng.uniform(0.0, 240.0);
    model = control::sigma_update(model, x, y, dims);
    const double d = std::hypot(x - 160.0, y - 120.0);
    sum_sq += d * d;
    worst = std::max(worst, std::fabs(model.sigma_centroid - std::sqrt(sum_sq / i)));
  }
  r.passed = worst <= 1e-9;
  r.detail = fmt("max deviation %.3g", worst);
  return r;
}

CheckResult stereo_round_trip() {
  CheckResult r{"stereo: depth/disparity round trip", true, ""};
  SimRng rng(11);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const stereo::StereoGeometry g{rng.uniform(100.0, 1000.0), rng.uniform(0.05, 0.5)};
    const double h = rng.uniform(0.0, 50.0);
    const double p1 = rng.uniform(-100.0, 100.0);
    const double back = stereo::depth(g, p1, p1 + stereo::disparity_for_depth(g, h));
    worst = std::max(worst, std::fabs(back - h) / std::max(1.0, h));
  }
  r.passed = worst <= 1e-9;
  r.detail = fmt("max relative error %.3g", worst);
  return r;
}

CheckResult rc_range() {
  CheckResult r{"rc: outputs within [1400, 1600], gate below 1 m", true, ""};
  SimRng rng(13);
  const control::ControlLimits limits;
  for (int i = 0; i < 10000; ++i) {
    control::ControlCommand cmd{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                                rng.uniform(-10.0, 10.0)};
    const double range = rng.uniform(0.0, 3.0);
    cmd = control::safety_gate(cmd, range, limits);
    const auto rc = control::to_rc(cmd, limits);
    const bool in = [&] {
      for (int v : {rc.roll_us, rc.pitch_us, rc.throttle_us, rc.yaw_us})
        if (v < 1400 || v > 1600) return false;
      return true;
    }();
    if (!in || (range < limits.range_gate && cmd.forward != 0.0)) {
      r.passed = false;
      r.detail = fmt("violation at range %g", range);
      return r;
    }
  }
  r.detail = "10000 random commands";
  return r;
}

}  // namespace

std::vector<CheckResult> run(const Options& options) {
  std::vector<CheckResult> out;
  auto guarded = [&out](const char* name, auto&& fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("threw: ") + e.what()});
    }
  };
  guarded("normalization", [&] { return normalization(options.normalization_tolerance); });
  guarded("status laws", axis_laws);
  guarded("forward law", forward_law);
  guarded("sigma", sigma_rms);
  guarded("stereo", stereo_round_trip);
  guarded("rc", rc_range);
  return out;
}

}  // namespace vservo::selfcheck
