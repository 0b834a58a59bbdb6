#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"

#include "vservo/errors.hpp"
#include "vservo/sim.hpp"

namespace vservo::sim {
namespace {

constexpr const char* kTraceHeader =
    "t,target_x,target_y,target_z,quad_x,quad_y,quad_z,quad_yaw,px,py,rms_radius,detected,"
    "yaw_cmd,throttle_cmd,forward_cmd,rc_roll,rc_pitch,rc_throttle,rc_yaw";
constexpr std::size_t kTraceColumns = 19;

void put_real(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);  // no "-0"
  out += buf;
}

double parse_real(std::string_view s, std::size_t line) {
  if (s == "nan") return std::nan("");
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw IoError("trace line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  return v;
}

int parse_int(std::string_view s, std::size_t line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw IoError("trace line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
  return v;
}

}  // namespace

void write_trace_csv(std::ostream& os, std::span<const TraceRow> trace) {
  std::string line;
  os << kTraceHeader << '\n';
  for (const auto& r : trace) {
    line.clear();
    for (double v : {r.t, r.target.x, r.target.y, r.target.z, r.quad.x, r.quad.y, r.quad.z,
                     r.quad_yaw, r.px, r.py, r.rms_radius}) {
      put_real(line, v);
      line += ',';
    }
    line += r.detected ? "1," : "0,";
    for (double v : {r.cmd.yaw, r.cmd.throttle, r.cmd.forward}) {
      put_real(line, v);
      line += ',';
    }
    line += std::to_string(r.rc.roll_us) + ',' + std::to_string(r.rc.pitch_us) + ',' +
            std::to_string(r.rc.throttle_us) + ',' + std::to_string(r.rc.yaw_us);
    os << line << '\n';
  }
  if (!os) throw IoError("failed writing trace");
}

std::vector<TraceRow> read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("trace is empty (no header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw IoError("trace header does not match the expected columns");

  std::vector<TraceRow> rows;
  std::size_t lineno = 1;
  std::vector<std::string_view> cols;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    cols.clear();
    std::string_view rest = line;
    for (;;) {
      const auto comma = rest.find(',');
      cols.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols.size() != kTraceColumns)
      throw IoError("trace line " + std::to_string(lineno) + ": expected " +
                    std::to_string(kTraceColumns) + " columns");
    TraceRow r;
    std::size_t c = 0;
    auto real = [&] { return parse_real(cols[c++], lineno); };
    r.t = real();
    r.target = {real(), real(), real()};
    r.quad = {real(), real(), real()};
    r.quad_yaw = real();
    r.px = real();
    r.py = real();
    r.rms_radius = real();
    const int det = parse_int(cols[c++], lineno);
    if (det != 0 && det != 1)
      throw IoError("trace line " + std::to_string(lineno) + ": detected must be 0 or 1");
    r.detected = det == 1;
    r.cmd.yaw = real();
    r.cmd.throttle = real();
    r.cmd.forward = real();
    r.rc.roll_us = parse_int(cols[c++], lineno);
    r.rc.pitch_us = parse_int(cols[c++], lineno);
    r.rc.throttle_us = parse_int(cols[c++], lineno);
    r.rc.yaw_us = parse_int(cols[c++], lineno);
    rows.push_back(r);
  }
  return rows;
}

Metrics compute_metrics(std::span<const TraceRow> trace, const MetricsParams& params) {
  if (trace.empty()) throw EmptyTrace("cannot compute metrics of an empty trace");
  const double w = params.width;
  const double h = params.height;
  const double cx = w / 2.0;
  const double cy = h / 2.0;

  Metrics m;
  m.frames = trace.size();
  std::size_t detected = 0;
  std::size_t centered = 0;
  double err_sum = 0.0;
  std::size_t run = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& r = trace[i];
    if (r.detected) {
      ++detected;
      run = 0;
      if (r.px >= w / 4.0 && r.px <= 3.0 * w / 4.0 && r.py >= h / 4.0 && r.py <= 3.0 * h / 4.0)
        ++centered;
      err_sum += std::hypot(r.px - cx, r.py - cy);
    } else if (++run == params.lost_frames && !m.lost_at) {
      m.lost_at = trace[i + 1 - run].t;
    }
  }
  const double n = static_cast<double>(trace.size());
  m.detection_rate = static_cast<double>(detected) / n;
  m.tracking_efficiency = static_cast<double>(centered) / n;
  if (detected > 0) m.mean_pixel_error = err_sum / static_cast<double>(detected);
  return m;
}

void write_metrics_json(std::ostream& os, const Metrics& m) {
  nlohmann::ordered_json j;
  j["detection_rate"] = m.detection_rate;
  j["tracking_efficiency"] = m.tracking_efficiency;
  j["mean_pixel_error"] = m.mean_pixel_error ? nlohmann::ordered_json(*m.mean_pixel_error) : nullptr;
  j["frames"] = m.frames;
  j["lost_at"] = m.lost_at ? nlohmann::ordered_json(*m.lost_at) : nullptr;
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing metrics");
}

void write_metrics_text(std::ostream& os, const Metrics& m) {
  auto real = [](std::optional<double> v) {
    if (!v) return std::string("none");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", *v);
    return std::string(buf);
  };
  os << "detection_rate: " << real(m.detection_rate) << '\n'
     << "tracking_efficiency: " << real(m.tracking_efficiency) << '\n'
     << "mean_pixel_error: " << real(m.mean_pixel_error) << '\n'
     << "frames: " << m.frames << '\n'
     << "lost_at: " << real(m.lost_at) << '\n';
  if (!os) throw IoError("failed writing metrics");
}

}  // namespace vservo::sim
