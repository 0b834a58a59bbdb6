#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vservo::imaging {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major RGB raster. Pixel (x, y) has its center at integer coordinates.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, Rgb fill = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  Rgb& at(int x, int y) { return pixels_[index(x, y)]; }
  const Rgb& at(int x, int y) const { return pixels_[index(x, y)]; }

  std::span<Rgb> pixels() noexcept { return pixels_; }
  std::span<const Rgb> pixels() const noexcept { return pixels_; }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb> pixels_;
};

/// Binary mask with the same geometry as a Frame; cells hold 0 or 1.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool on(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool value) { bits_[index(x, y)] = value ? 1 : 0; }
  std::size_t count() const;

  std::span<const std::uint8_t> data() const noexcept { return bits_; }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Hexagonal-model HSV. hue in degrees [0, 360); saturation and value in [0, 1].
struct HsvColor {
  double hue = 0.0;
  double saturation = 0.0;
  double value = 0.0;
};

/// Half-widths of the acceptance window around a target color. The defaults
/// span 1/6 of the hue circle and 1/2 of the saturation and value ranges.
struct ColorTolerance {
  double hue_half_width = 30.0;
  double sat_half_width = 0.25;
  double val_half_width = 0.25;

  /// Throws vservo::Error when a half-width is outside its allowed range.
  void validate() const;
};

struct Roi {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

struct BlobObservation {
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  double rms_radius = 0.0;
  std::size_t pixel_count = 0;
  bool valid = false;
};

struct FrameDims {
  int width = 0;
  int height = 0;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline constexpr std::size_t kDefaultMinBlobPixels = 9;
inline constexpr double kProminenceBinDegrees = 10.0;
inline constexpr double kChromaFloor = 0.2;

HsvColor rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b);
inline HsvColor rgb_to_hsv(Rgb c) { return rgb_to_hsv(c.r, c.g, c.b); }

/// Inverse of rgb_to_hsv up to 8-bit quantization.
Rgb hsv_to_rgb(const HsvColor& c);

/// Shortest angular distance between two hues, in [0, 180].
double hue_distance(double a, double b);

/// Mode of the hue histogram (10 degree bins) over chromatic pixels of the
/// ROI. Hue is the modal bin center; saturation and value are the means over
/// the pixels of that bin. Ties go to the lower hue bin.
/// Throws AllPixelsAchromatic if no pixel has saturation and value >= 0.2.
HsvColor prominent_color(const Frame& frame, const Roi& roi);

Mask hsv_mask(const Frame& frame, const HsvColor& target,
              const ColorTolerance& tol);

BlobObservation blob_observe(const Mask& mask,
                             std::size_t min_blob_pixels = kDefaultMinBlobPixels);

/// Centroid / RMS radius over an arbitrary real-valued point list. Shares the
/// statistics used by blob_observe; valid iff points.size() >= min_points.
BlobObservation blob_from_points(std::span<const Point2> points,
                                 std::size_t min_points = 1);

}  // namespace vservo::imaging
