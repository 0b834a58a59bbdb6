#include "vservo/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "vservo/errors.hpp"

namespace vservo::imaging {

Frame::Frame(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw Error("frame dimensions must be >= 1");
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                 fill);
}

Mask::Mask(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw Error("mask dimensions must be >= 1");
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
               0);
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

void ColorTolerance::validate() const {
  if (!(hue_half_width > 0.0 && hue_half_width <= 180.0))
    throw Error("hue half-width must lie in (0, 180]");
  if (!(sat_half_width > 0.0 && sat_half_width <= 0.5))
    throw Error("saturation half-width must lie in (0, 0.5]");
  if (!(val_half_width > 0.0 && val_half_width <= 0.5))
    throw Error("value half-width must lie in (0, 0.5]");
}

HsvColor rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  const double r = r8;
  const double g = g8;
  const double b = b8;
  const double hi = std::max({r, g, b});
  const double lo = std::min({r, g, b});
  const double delta = hi - lo;

  HsvColor out;
  out.value = hi / 255.0;
  out.saturation = hi > 0.0 ? delta / hi : 0.0;
  if (delta == 0.0) return out;  // achromatic: hue pinned to 0

  double h;
  if (hi == r) {
    h = 60.0 * ((g - b) / delta);
  } else if (hi == g) {
    h = 60.0 * (2.0 + (b - r) / delta);
  } else {
    h = 60.0 * (4.0 + (r - g) / delta);
  }
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.hue = h;
  return out;
}

Rgb hsv_to_rgb(const HsvColor& c) {
  const double v = std::clamp(c.value, 0.0, 1.0);
  const double s = std::clamp(c.saturation, 0.0, 1.0);
  double h = std::fmod(c.hue, 360.0);
  if (h < 0.0) h += 360.0;

  const double chroma = v * s;
  const double sector = h / 60.0;
  const double x = chroma * (1.0 - std::fabs(std::fmod(sector, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(sector)) {
    case 0: r = chroma; g = x; break;
    case 1: r = x; g = chroma; break;
    case 2: g = chroma; b = x; break;
    case 3: g = x; b = chroma; break;
    case 4: r = x; b = chroma; break;
    default: r = chroma; b = x; break;
  }
  const double m = v - chroma;
  auto to8 = [m](double ch) {
    return static_cast<std::uint8_t>(std::lround(std::clamp((ch + m) * 255.0, 0.0, 255.0)));
  };
  return {to8(r), to8(g), to8(b)};
}

double hue_distance(double a, double b) {
  double d = std::fmod(std::fabs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

HsvColor prominent_color(const Frame& frame, const Roi& roi) {
  if (roi.width <= 0 || roi.height <= 0 || roi.x < 0 || roi.y < 0 ||
      roi.x + roi.width > frame.width() || roi.y + roi.height > frame.height()) {
    throw Error("roi must be non-empty and inside the frame");
  }

  constexpr int kBins = static_cast<int>(360.0 / kProminenceBinDegrees);
  struct Bin {
    std::size_t count = 0;
    double sat_sum = 0.0;
    double val_sum = 0.0;
  };
  std::array<Bin, kBins> bins{};

  for (int y = roi.y; y < roi.y + roi.height; ++y) {
    for (int x = roi.x; x < roi.x + roi.width; ++x) {
      const HsvColor c = rgb_to_hsv(frame.at(x, y));
      if (c.saturation < kChromaFloor || c.value < kChromaFloor) continue;
      const int k = std::min(kBins - 1, static_cast<int>(c.hue / kProminenceBinDegrees));
      bins[k].count++;
      bins[k].sat_sum += c.saturation;
      bins[k].val_sum += c.value;
    }
  }

  int best = -1;
  for (int k = 0; k < kBins; ++k) {
    if (bins[k].count == 0) continue;
    if (best < 0 || bins[k].count > bins[best].count) best = k;
  }
  if (best < 0) throw AllPixelsAchromatic("no chromatic pixel inside the roi");

  const auto n = static_cast<double>(bins[best].count);
  return {(best + 0.5) * kProminenceBinDegrees, bins[best].sat_sum / n,
          bins[best].val_sum / n};
}

Mask hsv_mask(const Frame& frame, const HsvColor& target, const ColorTolerance& tol) {
  Mask mask(frame.width(), frame.height());
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      const HsvColor c = rgb_to_hsv(frame.at(x, y));
      const bool inside = hue_distance(c.hue, target.hue) <= tol.hue_half_width &&
                          std::fabs(c.saturation - target.saturation) <= tol.sat_half_width &&
                          std::fabs(c.value - target.value) <= tol.val_half_width;
      mask.set(x, y, inside);
    }
  }
  return mask;
}

namespace {

BlobObservation summarize(std::size_t n, double sum_x, double sum_y,
                          auto&& for_each_point, std::size_t min_points) {
  BlobObservation obs;
  obs.pixel_count = n;
  if (n == 0) return obs;

  obs.centroid_x = sum_x / static_cast<double>(n);
  obs.centroid_y = sum_y / static_cast<double>(n);
  double sq = 0.0;
  for_each_point([&](double x, double y) {
    const double dx = x - obs.centroid_x;
    const double dy = y - obs.centroid_y;
    sq += dx * dx + dy * dy;
  });
  obs.rms_radius = n > 1 ? std::sqrt(sq / static_cast<double>(n)) : 0.0;
  obs.valid = n >= min_points;
  return obs;
}

}  // namespace

BlobObservation blob_observe(const Mask& mask, std::size_t min_blob_pixels) {
  std::size_t n = 0;
  double sx = 0.0;
  double sy = 0.0;
  auto visit = [&mask](auto&& fn) {
    for (int y = 0; y < mask.height(); ++y)
      for (int x = 0; x < mask.width(); ++x)
        if (mask.on(x, y)) fn(static_cast<double>(x), static_cast<double>(y));
  };
  visit([&](double x, double y) {
    ++n;
    sx += x;
    sy += y;
  });
  return summarize(n, sx, sy, visit, min_blob_pixels);
}

BlobObservation blob_from_points(std::span<const Point2> points, std::size_t min_points) {
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& p : points) {
    sx += p.x;
    sy += p.y;
  }
  auto visit = [points](auto&& fn) {
    for (const auto& p : points) fn(p.x, p.y);
  };
  return summarize(points.size(), sx, sy, visit, min_points);
}

}  // namespace vservo::imaging
