#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "oracles.hpp"
#include "vservo/config.hpp"
#include "vservo/errors.hpp"

using namespace vservo;

namespace {

sim::ScenarioConfig parse_text(const std::string& text) {
  std::istringstream is(text);
  return config::parse(is);
}

std::size_t error_line(const std::string& text, std::string* key = nullptr) {
  try {
    parse_text(text);
  } catch (const ConfigError& e) {
    if (key) *key = e.key();
    return e.line();
  }
  ADD_FAILURE() << "expected ConfigError";
  return 0;
}

}  // namespace

TEST(ConfigParse, SectionsCommentsAndTopLevelKeys) {
  const auto c = parse_text(
      "\xEF\xBB\xBF# scenario\n"
      "seed = 42\n"
      "pipeline = \"ekf-assisted\"   # trailing comment\n"
      "\n"
      "[camera]\n"
      "width = 640\n"
      "rate_hz = 10\n"
      "[path]\n"
      "kind = line\n"
      "speed = 0.25\n"
      "[]\n"
      "duration = 12.5\n"
      "target.present = no\n");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.pipeline, sim::Pipeline::ekf_assisted);
  EXPECT_EQ(c.camera.width, 640);
  EXPECT_EQ(c.camera.rate_hz, 10.0);
  EXPECT_EQ(c.path.kind, sim::PathKind::line);
  EXPECT_EQ(c.path.speed, 0.25);
  EXPECT_EQ(c.duration, 12.5);
  EXPECT_FALSE(c.target_present);
  // Untouched keys keep their defaults.
  EXPECT_EQ(c.camera.height, sim::ScenarioConfig{}.camera.height);
}

TEST(ConfigParse, UnknownKeyReportsKeyAndLine) {
  std::string key;
  EXPECT_EQ(error_line("seed = 1\n\n[camera]\nwidht = 3\n", &key), 4u);
  EXPECT_EQ(key, "camera.widht");
}

TEST(ConfigParse, DuplicateKeyIsAnError) {
  std::string key;
  EXPECT_EQ(error_line("camera.width = 320\n[camera]\nwidth = 640\n", &key), 3u);
  EXPECT_EQ(key, "camera.width");
}

TEST(ConfigParse, MalformedLinesAndValues) {
  EXPECT_EQ(error_line("seed 1\n"), 1u);
  EXPECT_EQ(error_line("seed=1\n[camera\n"), 2u);
  std::string key;
  EXPECT_EQ(error_line("\n[camera]\nwidth = wide\n", &key), 3u);
  EXPECT_EQ(key, "camera.width");
  EXPECT_EQ(error_line("duration = nan\n", &key), 1u);
  EXPECT_EQ(error_line("pipeline = magic\n", &key), 1u);
  EXPECT_EQ(key, "pipeline");
  EXPECT_EQ(error_line("target.present = maybe\n"), 1u);
  EXPECT_EQ(error_line("seed = -1\n"), 1u);
}

TEST(ConfigDump, RoundTripsDefaultsAndRandomValues) {
  const sim::ScenarioConfig defaults;
  EXPECT_EQ(config::dump(parse_text(config::dump(defaults))), config::dump(defaults));

  oracle::SplitMix rng{99};
  for (int trial = 0; trial < 50; ++trial) {
    sim::ScenarioConfig c;
    c.seed = rng.next();
    c.duration = rng.uniform(1, 500);
    c.path.speed = rng.uniform(0, 2);
    c.path.heading = rng.uniform(-3.2, 3.2);
    c.ekf.accel_sigma = rng.uniform(0.01, 100);
    c.render.feature_bit_noise = rng.uniform(0, 0.5);
    const auto text = config::dump(c);
    const auto back = parse_text(text);
    EXPECT_EQ(back.seed, c.seed);
    EXPECT_EQ(back.duration, c.duration);
    EXPECT_EQ(back.path.heading, c.path.heading);
    EXPECT_EQ(back.ekf.accel_sigma, c.ekf.accel_sigma);
    EXPECT_EQ(config::dump(back), text);
  }
}

TEST(ConfigDump, ListsEveryKnownKeyOnce) {
  const auto text = "\n" + config::dump({});
  for (const auto& key : config::known_keys()) {
    const auto dot = key.find('.');
    const auto local = dot == std::string::npos ? key : key.substr(dot + 1);
    EXPECT_NE(text.find("\n" + local + " = "), std::string::npos) << key;
  }
  const auto keys = config::known_keys();
  EXPECT_EQ(std::set<std::string>(keys.begin(), keys.end()).size(), keys.size());
}

TEST(ConfigEnvironment, MapsPrefixedVariables) {
  sim::ScenarioConfig c;
  const std::vector<std::string> env{"HOME=/root", "VSERVO_CAMERA__WIDTH=400",
                                     "VSERVO_PATH__SPEED=0.3", "VSERVO_PIPELINE=status-sitl"};
  config::apply_environment(c, env);
  EXPECT_EQ(c.camera.width, 400);
  EXPECT_EQ(c.path.speed, 0.3);
  EXPECT_EQ(c.pipeline, sim::Pipeline::status_sitl);

  const std::vector<std::string> bad{"VSERVO_CAMERA__DEPTH=1"};
  try {
    config::apply_environment(c, bad);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "camera.depth");
  }
}

TEST(ConfigOverride, KeyEqualsValue) {
  sim::ScenarioConfig c;
  config::apply_override(c, "limits.v_max_forward=2.5");
  EXPECT_EQ(c.limits.v_max_forward, 2.5);
  config::apply_override(c, " seed = 7 ");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_THROW(config::apply_override(c, "seed"), ConfigError);
  EXPECT_THROW(config::apply_override(c, "nope=1"), ConfigError);
}

TEST(ConfigLoad, MissingFileIsIoError) {
  EXPECT_THROW(config::load("/nonexistent/dir/scenario.cfg"), IoError);
}

TEST(ScenarioValidate, RejectsInconsistentRates) {
  sim::ScenarioConfig c;
  EXPECT_NO_THROW(c.validate());
  c.camera.rate_hz = 7.0;  // 1 / (7 * 0.05) is not an integer
  try {
    c.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "camera.rate_hz");
  }
  c = {};
  c.camera.width = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}
