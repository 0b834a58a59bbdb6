#include "vservo/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "vservo/errors.hpp"

extern char** environ;

namespace vservo::config {
namespace {

using sim::ScenarioConfig;

struct Entry {
  std::string key;
  std::function<void(ScenarioConfig&, std::string_view, std::size_t)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Shortest text that parses back to the same double.
std::string format_real(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_real(std::string_view key, std::string_view v, std::size_t line) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(std::string(key), line, "expected a finite number, got '" + std::string(v) + "'");
  return out;
}

template <typename Int>
Int parse_integer(std::string_view key, std::string_view v, std::size_t line) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(std::string(key), line, "expected an integer, got '" + std::string(v) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v, std::size_t line) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(std::string(key), line, "expected true or false, got '" + std::string(v) + "'");
}

class Registry {
 public:
  Registry();

  const Entry* find(std::string_view key) const {
    for (const auto& e : entries_)
      if (e.key == key) return &e;
    return nullptr;
  }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  template <typename Access>
  void real(std::string key, Access access) {
    const std::string k = key;
    entries_.push_back({std::move(key),
                        [access, k](ScenarioConfig& c, std::string_view v, std::size_t line) {
                          access(c) = parse_real(k, v, line);
                        },
                        [access](const ScenarioConfig& c) {
                          auto copy = c;
                          return format_real(access(copy));
                        }});
  }

  template <typename Int, typename Access>
  void integer(std::string key, Access access) {
    const std::string k = key;
    entries_.push_back({std::move(key),
                        [access, k](ScenarioConfig& c, std::string_view v, std::size_t line) {
                          access(c) = parse_integer<Int>(k, v, line);
                        },
                        [access](const ScenarioConfig& c) {
                          auto copy = c;
                          return std::to_string(access(copy));
                        }});
  }

  template <typename Access>
  void boolean(std::string key, Access access) {
    const std::string k = key;
    entries_.push_back({std::move(key),
                        [access, k](ScenarioConfig& c, std::string_view v, std::size_t line) {
                          access(c) = parse_bool(k, v, line);
                        },
                        [access](const ScenarioConfig& c) {
                          auto copy = c;
                          return std::string(access(copy) ? "true" : "false");
                        }});
  }

  void custom(std::string key, std::function<void(ScenarioConfig&, std::string_view, std::size_t)> set,
              std::function<std::string(const ScenarioConfig&)> get) {
    entries_.push_back({std::move(key), std::move(set), std::move(get)});
  }

  std::vector<Entry> entries_;
};

Registry::Registry() {
  integer<std::uint64_t>("seed", [](ScenarioConfig& c) -> std::uint64_t& { return c.seed; });
  real("duration", [](ScenarioConfig& c) -> double& { return c.duration; });
  custom(
      "pipeline",
      [](ScenarioConfig& c, std::string_view v, std::size_t line) {
        const auto p = sim::pipeline_from_string(v);
        if (!p)
          throw ConfigError("pipeline", line,
                            "unknown pipeline '" + std::string(v) +
                                "' (expected color-blob, feature-kernel, ekf-assisted or status-sitl)");
        c.pipeline = *p;
      },
      [](const ScenarioConfig& c) { return std::string(sim::to_string(c.pipeline)); });
  real("sim.dt", [](ScenarioConfig& c) -> double& { return c.dt; });

  integer<int>("camera.width", [](ScenarioConfig& c) -> int& { return c.camera.width; });
  integer<int>("camera.height", [](ScenarioConfig& c) -> int& { return c.camera.height; });
  real("camera.hfov_deg", [](ScenarioConfig& c) -> double& { return c.camera.hfov_deg; });
  real("camera.rate_hz", [](ScenarioConfig& c) -> double& { return c.camera.rate_hz; });

  real("limits.v_max_forward", [](ScenarioConfig& c) -> double& { return c.limits.v_max_forward; });
  real("limits.a_max", [](ScenarioConfig& c) -> double& { return c.limits.a_max; });
  real("limits.yaw_rate_max", [](ScenarioConfig& c) -> double& { return c.limits.yaw_rate_max; });
  real("limits.range_gate", [](ScenarioConfig& c) -> double& { return c.limits.range_gate; });
  real("limits.v_climb_max", [](ScenarioConfig& c) -> double& { return c.v_climb_max; });

  integer<int>("rc.roll_trim", [](ScenarioConfig& c) -> int& { return c.rc.roll_us; });
  integer<int>("rc.pitch_trim", [](ScenarioConfig& c) -> int& { return c.rc.pitch_us; });
  integer<int>("rc.throttle_trim", [](ScenarioConfig& c) -> int& { return c.rc.throttle_us; });
  integer<int>("rc.yaw_trim", [](ScenarioConfig& c) -> int& { return c.rc.yaw_us; });
  integer<int>("rc.span", [](ScenarioConfig& c) -> int& { return c.rc.span_us; });
  integer<int>("rc.min", [](ScenarioConfig& c) -> int& { return c.rc.min_us; });
  integer<int>("rc.max", [](ScenarioConfig& c) -> int& { return c.rc.max_us; });

  custom(
      "path.kind",
      [](ScenarioConfig& c, std::string_view v, std::size_t line) {
        const auto k = sim::path_kind_from_string(v);
        if (!k)
          throw ConfigError("path.kind", line,
                            "unknown path kind '" + std::string(v) +
                                "' (expected line, circle or figure-eight)");
        c.path.kind = *k;
      },
      [](const ScenarioConfig& c) { return std::string(sim::to_string(c.path.kind)); });
  real("path.speed", [](ScenarioConfig& c) -> double& { return c.path.speed; });
  real("path.radius", [](ScenarioConfig& c) -> double& { return c.path.radius; });
  real("path.length", [](ScenarioConfig& c) -> double& { return c.path.length; });
  real("path.heading", [](ScenarioConfig& c) -> double& { return c.path.heading; });
  real("path.height", [](ScenarioConfig& c) -> double& { return c.path.height; });
  real("path.toppling_speed", [](ScenarioConfig& c) -> double& { return c.path.toppling_speed; });

  boolean("target.present", [](ScenarioConfig& c) -> bool& { return c.target_present; });
  real("target.hue", [](ScenarioConfig& c) -> double& { return c.appearance.color.hue; });
  real("target.saturation",
       [](ScenarioConfig& c) -> double& { return c.appearance.color.saturation; });
  real("target.value", [](ScenarioConfig& c) -> double& { return c.appearance.color.value; });
  real("target.radius", [](ScenarioConfig& c) -> double& { return c.appearance.radius_m; });

  real("quad.start_range", [](ScenarioConfig& c) -> double& { return c.start_range; });
  real("quad.start_height", [](ScenarioConfig& c) -> double& { return c.start_height; });

  const char* channels[] = {"render.background_r", "render.background_g", "render.background_b"};
  for (int ch = 0; ch < 3; ++ch) {
    const std::string key = channels[ch];
    custom(
        key,
        [key, ch](ScenarioConfig& c, std::string_view v, std::size_t line) {
          const int level = parse_integer<int>(key, v, line);
          if (level < 0 || level > 255) throw ConfigError(key, line, "must lie in [0, 255]");
          auto& bg = c.render.background;
          (ch == 0 ? bg.r : ch == 1 ? bg.g : bg.b) = static_cast<std::uint8_t>(level);
        },
        [ch](const ScenarioConfig& c) {
          const auto& bg = c.render.background;
          return std::to_string(ch == 0 ? bg.r : ch == 1 ? bg.g : bg.b);
        });
  }
  integer<int>("render.pixel_noise", [](ScenarioConfig& c) -> int& { return c.render.pixel_noise; });
  real("render.feature_bit_noise",
       [](ScenarioConfig& c) -> double& { return c.render.feature_bit_noise; });
  integer<int>("render.clutter_features",
               [](ScenarioConfig& c) -> int& { return c.render.clutter_features; });
  integer<std::size_t>("render.descriptor_bits",
                       [](ScenarioConfig& c) -> std::size_t& { return c.render.descriptor_bits; });

  real("sensor.half_angle_deg", [](ScenarioConfig& c) -> double& { return c.sensor.half_angle_deg; });
  real("sensor.max_range", [](ScenarioConfig& c) -> double& { return c.sensor.max_range; });

  real("imaging.hue_half_width",
       [](ScenarioConfig& c) -> double& { return c.tolerance.hue_half_width; });
  real("imaging.sat_half_width",
       [](ScenarioConfig& c) -> double& { return c.tolerance.sat_half_width; });
  real("imaging.val_half_width",
       [](ScenarioConfig& c) -> double& { return c.tolerance.val_half_width; });
  integer<std::size_t>("imaging.min_blob_pixels",
                       [](ScenarioConfig& c) -> std::size_t& { return c.min_blob_pixels; });
  boolean("imaging.sigma_color_tolerance",
          [](ScenarioConfig& c) -> bool& { return c.sigma_color_tolerance; });

  real("control.sigma_floor", [](ScenarioConfig& c) -> double& { return c.sigma_floor; });

  integer<int>("features.threshold",
               [](ScenarioConfig& c) -> int& { return c.features.threshold.value; });
  integer<int>("features.threshold_min",
               [](ScenarioConfig& c) -> int& { return c.features.threshold.min_value; });
  integer<int>("features.threshold_max",
               [](ScenarioConfig& c) -> int& { return c.features.threshold.max_value; });
  integer<int>("features.increment",
               [](ScenarioConfig& c) -> int& { return c.features.threshold.increment; });
  integer<int>("features.decrement",
               [](ScenarioConfig& c) -> int& { return c.features.threshold.decrement; });
  integer<int>("features.kernel_size", [](ScenarioConfig& c) -> int& { return c.features.kernel_size; });
  integer<std::size_t>("features.kernel_frames",
                       [](ScenarioConfig& c) -> std::size_t& { return c.features.kernel_frames; });
  real("features.color_half_width",
       [](ScenarioConfig& c) -> double& { return c.features.color_half_width; });

  real("ekf.accel_sigma", [](ScenarioConfig& c) -> double& { return c.ekf.accel_sigma; });
  real("ekf.meas_sigma", [](ScenarioConfig& c) -> double& { return c.ekf.meas_sigma; });
  integer<std::size_t>("ekf.coast_frames",
                       [](ScenarioConfig& c) -> std::size_t& { return c.ekf.coast_frames; });

  integer<std::size_t>("metrics.lost_frames",
                       [](ScenarioConfig& c) -> std::size_t& { return c.lost_frames; });
}

const Registry& registry() {
  static const Registry r;
  return r;
}

std::string_view unquote(std::string_view v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

bool valid_key_text(std::string_view k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](unsigned char ch) {
    return std::islower(ch) || std::isdigit(ch) || ch == '_' || ch == '.';
  });
}

}  // namespace

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& e : registry().entries()) out.push_back(e.key);
  return out;
}

void set_value(ScenarioConfig& cfg, std::string_view key, std::string_view value,
               std::size_t line) {
  const Entry* e = registry().find(key);
  if (!e) throw ConfigError(std::string(key), line, "unknown key");
  e->set(cfg, unquote(trim(value)), line);
}

ScenarioConfig parse(std::istream& is, ScenarioConfig base) {
  std::string raw;
  std::string section;
  std::set<std::string, std::less<>> seen;
  std::size_t lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (lineno == 1 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", lineno, "unterminated section header");
      const auto name = trim(line.substr(1, line.size() - 2));
      if (!name.empty() && !valid_key_text(name))
        throw ConfigError(std::string(name), lineno, "invalid section name");
      section = std::string(name);
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("", lineno, "expected 'key = value'");
    const auto local = trim(line.substr(0, eq));
    if (!valid_key_text(local))
      throw ConfigError(std::string(local), lineno, "invalid key (use lowercase dotted names)");
    const std::string key = section.empty() ? std::string(local) : section + "." + std::string(local);
    if (!seen.insert(key).second) throw ConfigError(key, lineno, "key given more than once");
    set_value(base, key, line.substr(eq + 1), lineno);
  }
  return base;
}

ScenarioConfig load(const std::filesystem::path& path, ScenarioConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  return parse(in, std::move(base));
}

void apply_override(ScenarioConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError(std::string(trim(assignment)), 0, "override must look like key=value");
  set_value(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void apply_environment(ScenarioConfig& cfg, std::span<const std::string> entries) {
  for (const auto& entry : entries) {
    std::string_view sv = entry;
    if (sv.substr(0, kEnvPrefix.size()) != kEnvPrefix) continue;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos) continue;
    const std::string_view name = sv.substr(kEnvPrefix.size(), eq - kEnvPrefix.size());
    std::string key;
    for (std::size_t i = 0; i < name.size(); ++i) {
      if (name[i] == '_' && i + 1 < name.size() && name[i + 1] == '_') {
        key += '.';
        ++i;
      } else {
        key += static_cast<char>(std::tolower(static_cast<unsigned char>(name[i])));
      }
    }
    const Entry* e = registry().find(key);
    if (!e)
      throw ConfigError(key, 0,
                        "unknown key from environment variable " + std::string(sv.substr(0, eq)));
    e->set(cfg, unquote(trim(sv.substr(eq + 1))), 0);
  }
}

std::vector<std::string> process_environment() {
  std::vector<std::string> out;
  for (char** e = environ; e && *e; ++e) out.emplace_back(*e);
  return out;
}

std::string dump(const ScenarioConfig& cfg) {
  std::ostringstream os;
  std::string section;
  for (const auto& e : registry().entries()) {
    const auto dot = e.key.find('.');
    const std::string sec = dot == std::string::npos ? "" : e.key.substr(0, dot);
    const std::string local = dot == std::string::npos ? e.key : e.key.substr(dot + 1);
    if (sec != section) {
      os << "\n[" << sec << "]\n";
      section = sec;
    }
    os << local << " = " << e.get(cfg) << '\n';
  }
  return os.str();
}

}  // namespace vservo::config
