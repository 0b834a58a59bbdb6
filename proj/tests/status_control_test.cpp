#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "vservo/errors.hpp"
#include "vservo/status_control.hpp"

using namespace vservo;
using namespace vservo::control;

namespace {
constexpr FrameDims kDims{320, 240};
}

TEST(YawCommand, Table) {
  EXPECT_EQ(yaw_command(160, 320), 0.0);
  EXPECT_EQ(yaw_command(0, 320), -1.0);
  EXPECT_NEAR(yaw_command(120, 320), -0.5, 1e-12);
  EXPECT_NEAR(yaw_command(200, 320), 0.5, 1e-12);
  EXPECT_EQ(yaw_command(319, 320), 1.0);
}

TEST(ThrottleCommand, Table) {
  EXPECT_EQ(throttle_command(120, 240), 0.0);
  EXPECT_EQ(std::fabs(throttle_command(0, 240)), 1.0);
  EXPECT_GT(throttle_command(0, 240), 0.0) << "target above center climbs";
  EXPECT_NEAR(throttle_command(150, 240), -0.5, 1e-12);
}

TEST(YawCommand, SweepRangeSaturationAndSymmetry) {
  const double w = 320.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = w * i / 100000.0;
    const double y = yaw_command(x, w);
    ASSERT_LE(std::fabs(y), 1.0);
    if (x <= w / 4 || x >= 3 * w / 4) ASSERT_EQ(std::fabs(y), 1.0) << x;
    const double a = x - w / 2;
    const double mirror = yaw_command(w / 2 - a, w);
    ASSERT_NEAR(std::fabs(mirror), std::fabs(y), 1e-12);
    if (a != 0.0 && y != 0.0) ASSERT_LT(mirror * y, 0.0);
  }
}

TEST(AxisMagnitude, MatchesClosedFormInsideWindow) {
  for (double x = 80.0; x < 240.0; x += 0.37)
    EXPECT_NEAR(axis_magnitude(x, 320), 4.0 / 320 * std::fabs(x - 160), 1e-12);
}

TEST(SigmaUpdate, FreshModelStartsAtQuarterWidth) {
  const auto m = GaussianModel::initial(kDims);
  EXPECT_EQ(m.n, 0u);
  EXPECT_DOUBLE_EQ(m.frozen_sigma, 80.0);
  EXPECT_DOUBLE_EQ(m.mean_x, 160.0);
  EXPECT_DOUBLE_EQ(m.mean_y, 120.0);
}

TEST(SigmaUpdate, RmsOfThreeAndFour) {
  auto m = GaussianModel::initial(kDims);
  m = sigma_update(m, 163, 120, kDims);
  m = sigma_update(m, 160, 124, kDims);
  EXPECT_NEAR(m.sigma_centroid, std::sqrt(12.5), 1e-12);
  EXPECT_NEAR(m.sigma_centroid, 3.5355, 1e-4);
}

TEST(SigmaUpdate, OutlierKeepsFrozenSigma) {
  auto m = GaussianModel::initial(kDims);
  m.frozen_sigma = 10.0;
  const auto after = sigma_update(m, 160 + 25, 120, kDims);
  EXPECT_DOUBLE_EQ(after.frozen_sigma, 10.0);
  EXPECT_DOUBLE_EQ(after.sum_sq_dist, 625.0);
  EXPECT_EQ(after.n, 1u);
  EXPECT_DOUBLE_EQ(after.sigma_centroid, 25.0);
}

TEST(SigmaUpdate, FrozenSigmaHasFloor) {
  auto m = GaussianModel::initial(kDims);
  m = sigma_update(m, 160, 120, kDims, 1.0);
  EXPECT_DOUBLE_EQ(m.sigma_centroid, 0.0);
  EXPECT_DOUBLE_EQ(m.frozen_sigma, 1.0);
}

TEST(SigmaUpdate, RandomSequencesMatchBatchAndFrozenOracles) {
  oracle::SplitMix rng{123};
  for (int seq = 0; seq < 200; ++seq) {
    auto m = GaussianModel::initial(kDims);
    oracle::FrozenSigma ref{80.0, 1.0, {}};
    std::vector<std::pair<double, double>> pts;
    const int n = 1 + static_cast<int>(rng.next() % 60);
    const double spread = rng.uniform(1.0, 150.0);
    for (int i = 0; i < n; ++i) {
      const double x = 160 + spread * rng.normal();
      const double y = 120 + spread * rng.normal();
      m = sigma_update(m, x, y, kDims);
      pts.emplace_back(x, y);
      ref.add(std::hypot(x - 160, y - 120));
      ASSERT_NEAR(m.sigma_centroid, oracle::batch_rms(pts, 160, 120), 1e-9);
      ASSERT_NEAR(m.sigma_centroid, std::sqrt(m.sum_sq_dist / static_cast<double>(m.n)), 1e-9);
      ASSERT_NEAR(m.frozen_sigma, ref.frozen, 1e-9);
      ASSERT_GT(m.frozen_sigma, 0.0);
    }
  }
}

TEST(ForwardCommand, PeakEqualsVmaxAtMatchingSigma) {
  ControlLimits lim;
  auto m = GaussianModel::initial(kDims);
  const double D = 200.0;
  m.frozen_sigma = D / std::sqrt(2.0 * std::numbers::pi);
  EXPECT_NEAR(forward_command(m, 0.0, kDims, lim), lim.v_max_forward, 1e-12);
}

TEST(ForwardCommand, FiveSigmaIsNegligible) {
  ControlLimits lim;
  auto m = GaussianModel::initial(kDims);
  m.frozen_sigma = 0.2 * 200.0;
  const double v = forward_command(m, 5.0 * m.frozen_sigma, kDims, lim);
  EXPECT_LT(v, 1e-4 * lim.v_max_forward);
  EXPECT_NEAR(v, lim.v_max_forward / (0.2 * std::sqrt(2 * std::numbers::pi)) * std::exp(-12.5),
              1e-15);
}

TEST(ForwardCommand, ClampsNarrowGaussian) {
  ControlLimits lim;
  auto m = GaussianModel::initial(kDims);
  m.frozen_sigma = 0.1 * 200.0;
  EXPECT_DOUBLE_EQ(forward_command(m, 0.0, kDims, lim), lim.v_max_forward);
  EXPECT_NEAR(1.0 / (0.1 * std::sqrt(2 * std::numbers::pi)), 3.9894, 1e-4);
}

TEST(ForwardCommand, NonIncreasingAndBounded) {
  ControlLimits lim;
  oracle::SplitMix rng{17};
  for (int k = 0; k < 50; ++k) {
    auto m = GaussianModel::initial(kDims);
    m.frozen_sigma = rng.uniform(1.0, 300.0);
    double prev = forward_command(m, 0.0, kDims, lim);
    for (double d = 0.5; d < 400.0; d += 0.5) {
      const double v = forward_command(m, d, kDims, lim);
      ASSERT_LE(v, prev);
      ASSERT_LE(v, lim.v_max_forward);
      ASSERT_GE(v, 0.0);
      prev = v;
    }
  }
}

TEST(SigmaColor, Examples) {
  auto m = GaussianModel::initial(kDims);
  m.frozen_sigma = 200.0;
  EXPECT_DOUBLE_EQ(sigma_color(m, kDims), 768.0);
  m.frozen_sigma = 50.0;
  EXPECT_DOUBLE_EQ(sigma_color(m, kDims), 192.0);
  m.frozen_sigma = 1e-9;
  EXPECT_NEAR(sigma_color(m, kDims), 256.0 / 6.0, 1e-12);
}

TEST(SigmaColor, ToleranceHookScalesFromFloor) {
  const imaging::ColorTolerance base;
  const auto same = tolerance_for_sigma_color(256.0 / 6.0, base);
  EXPECT_DOUBLE_EQ(same.hue_half_width, base.hue_half_width);
  const auto wider = tolerance_for_sigma_color(2 * 256.0 / 6.0, base);
  EXPECT_DOUBLE_EQ(wider.hue_half_width, 60.0);
  EXPECT_DOUBLE_EQ(wider.sat_half_width, 0.5);
  const auto capped = tolerance_for_sigma_color(768.0, base);
  EXPECT_LE(capped.hue_half_width, 180.0);
}

TEST(GaussianPdf, ValueSymmetryAndErrors) {
  EXPECT_NEAR(gaussian_pdf(0, 0, 1), 0.3989422804, 1e-10);
  for (double a : {0.1, 1.0, 3.7, 11.0}) EXPECT_EQ(gaussian_pdf(2 + a, 2, 1.5), gaussian_pdf(2 - a, 2, 1.5));
  EXPECT_THROW(gaussian_pdf(0, 0, 0), NonPositiveSigma);
  EXPECT_THROW(gaussian_pdf(0, 0, -1), NonPositiveSigma);
}

TEST(GaussianPdf, IntegratesToOne) {
  for (double sigma : {0.1, 1.0, 80.0}) {
    const double integral = oracle::gauss_legendre(
        [sigma](double x) { return gaussian_pdf(x, 3.0, sigma); }, 3.0 - 8 * sigma,
        3.0 + 8 * sigma, 64);
    EXPECT_NEAR(integral, 1.0, 1e-6);
  }
}

TEST(SafetyGate, Examples) {
  ControlLimits lim;
  const ControlCommand cmd{0.3, -0.2, 3.0};
  const auto near = safety_gate(cmd, 0.5, lim);
  EXPECT_EQ(near.forward, 0.0);
  EXPECT_EQ(near.yaw, 0.3);
  EXPECT_EQ(near.throttle, -0.2);
  EXPECT_EQ(safety_gate(cmd, 1.5, lim), cmd);
  EXPECT_EQ(safety_gate(cmd, 1.0, lim), cmd);
  EXPECT_EQ(safety_gate(safety_gate(cmd, 0.5, lim), 0.5, lim), near);
}

TEST(SafetyGate, StaleReadingIsIgnored) {
  ControlLimits lim;
  const ControlCommand cmd{0, 0, 2.0};
  EXPECT_EQ(safety_gate(cmd, RangeReading{0.5, 0.05}, lim).forward, 0.0);
  EXPECT_EQ(safety_gate(cmd, RangeReading{0.5, 0.06}, lim).forward, 0.0);
  EXPECT_EQ(safety_gate(cmd, RangeReading{0.5, 0.061}, lim).forward, 2.0);
}

TEST(ToRc, Examples) {
  ControlLimits lim;
  const auto zero = to_rc({}, lim);
  EXPECT_EQ(zero.roll_us, 1500);
  EXPECT_EQ(zero.pitch_us, 1500);
  EXPECT_EQ(zero.throttle_us, 1480);
  EXPECT_EQ(zero.yaw_us, 1500);
  EXPECT_EQ(to_rc({1, 0, 0}, lim).yaw_us, 1600);
  EXPECT_EQ(to_rc({-1, 0, 0}, lim).yaw_us, 1400);
  EXPECT_EQ(to_rc({0, 0, lim.v_max_forward}, lim).pitch_us, 1600);
  EXPECT_EQ(to_rc({0, 1, 0}, lim).throttle_us, 1580);
  EXPECT_EQ(to_rc({0, -1, 0}, lim).throttle_us, 1400) << "1380 clamps to the range floor";
  EXPECT_EQ(to_rc({0.125, 0, 0}, lim).yaw_us, 1513) << "half rounds up";
  EXPECT_EQ(to_rc({-0.125, 0, 0}, lim).yaw_us, 1488) << "half rounds up";
}

TEST(ToRc, AlwaysInRangeAndRollFixed) {
  ControlLimits lim;
  oracle::SplitMix rng{21};
  for (int i = 0; i < 20000; ++i) {
    const ControlCommand cmd{rng.uniform(-1, 1), rng.uniform(-1, 1),
                             rng.uniform(0, lim.v_max_forward)};
    const auto rc = to_rc(cmd, lim);
    for (int v : {rc.roll_us, rc.pitch_us, rc.throttle_us, rc.yaw_us}) {
      ASSERT_GE(v, 1400);
      ASSERT_LE(v, 1600);
    }
    ASSERT_EQ(rc.roll_us, 1500);
  }
}

TEST(StatusCommand, InvalidObservationGivesZero) {
  const auto m = GaussianModel::initial(kDims);
  EXPECT_EQ(status_command({}, m, kDims, ControlLimits{}), ControlCommand{});
}

TEST(StatusCommand, CombinesTheThreeLaws) {
  const auto m = GaussianModel::initial(kDims);
  imaging::BlobObservation obs;
  obs.centroid_x = 200;
  obs.centroid_y = 150;
  obs.valid = true;
  const ControlLimits lim;
  const auto cmd = status_command(obs, m, kDims, lim);
  EXPECT_EQ(cmd.yaw, yaw_command(200, 320));
  EXPECT_EQ(cmd.throttle, throttle_command(150, 240));
  EXPECT_EQ(cmd.forward, forward_command(m, 50.0, kDims, lim));
}

TEST(ControlLimits, ValidateRejectsNonPositive) {
  ControlLimits lim;
  EXPECT_NO_THROW(lim.validate());
  lim.a_max = 0;
  EXPECT_THROW(lim.validate(), Error);
}
