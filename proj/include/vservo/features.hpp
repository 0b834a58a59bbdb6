#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vservo/imaging.hpp"

namespace vservo::features {

inline constexpr std::size_t kDefaultDescriptorBits = 256;
inline constexpr std::size_t kTargetMatches = 3;

/// Fixed-length bit string. Bits past size() in the last word are kept zero.
class Descriptor {
 public:
  Descriptor() = default;
  explicit Descriptor(std::size_t bits);

  std::size_t size() const noexcept { return bits_; }
  bool bit(std::size_t i) const;
  void set_bit(std::size_t i, bool value);
  void flip(std::size_t i);

  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::span<std::uint64_t> words() noexcept { return words_; }
  /// Clears any bits beyond size() after raw word writes.
  void trim();

  /// Lowercase hex, most significant nibble first; length = ceil(bits / 4).
  std::string to_hex() const;
  static Descriptor from_hex(std::string_view hex);

  friend bool operator==(const Descriptor&, const Descriptor&) = default;

 private:
  std::size_t bits_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Throws DescriptorLengthMismatch when lengths differ.
std::size_t hamming_distance(const Descriptor& a, const Descriptor& b);

struct Feature {
  double x = 0.0;
  double y = 0.0;
  Descriptor descriptor;
  double confidence = 1.0;
};

using FeatureSet = std::vector<Feature>;

struct MatchThreshold {
  int value = 20;
  int min_value = 0;
  int max_value = 256;
  int increment = 2;
  int decrement = 1;
};

/// Brute-force Hamming matching. A scene feature is kept iff the distance to
/// its nearest template descriptor (ties to the lowest template index) is at
/// most thr.value. Scene order is preserved.
FeatureSet hamming_match(const FeatureSet& templ, const FeatureSet& scene,
                         const MatchThreshold& thr);

/// +increment below three matches, -decrement above, clamped to [min, max].
MatchThreshold adapt_threshold(MatchThreshold thr, std::size_t match_count);

/// Keeps features whose pixel hue is within hue_half_width of mean_color.hue.
/// The default window is 1/12 of the hue circle on either side.
FeatureSet filter_by_color(const FeatureSet& matches, const imaging::Frame& frame,
                           const imaging::HsvColor& mean_color,
                           double hue_half_width = 360.0 / 12.0);

/// Circular mean of the pixel hues under the features, with mean saturation
/// and value. Returns `fallback` for an empty set.
imaging::HsvColor mean_feature_color(const FeatureSet& features,
                                     const imaging::Frame& frame,
                                     const imaging::HsvColor& fallback);

struct WeightedCentroid {
  double x = 0.0;
  double y = 0.0;
  bool valid = false;
};

inline constexpr double kCollinearAreaTolerance = 1e-9;

/// Confidence-weighted mean position. Valid with at least three features that
/// are not all collinear.
WeightedCentroid weighted_centroid(const FeatureSet& matches);

using imaging::FrameDims;

/// Ring of down-scaled feature occupancy grids.
class KernelBuffer {
 public:
  explicit KernelBuffer(std::size_t capacity = 10, int kernel_size = 9);

  using Grid = std::vector<int>;  // row-major kernel_size x kernel_size

  std::size_t capacity() const noexcept { return capacity_; }
  int kernel_size() const noexcept { return kernel_; }
  std::size_t size() const noexcept { return grids_.size(); }
  bool empty() const noexcept { return grids_.empty(); }
  std::size_t frame_count() const noexcept { return frame_count_; }
  FrameDims dims() const noexcept { return dims_; }

  const std::deque<Grid>& grids() const noexcept { return grids_; }
  int count(std::size_t grid, int col, int row) const;

  /// Appends a grid, dropping the oldest once capacity is exceeded.
  void push(Grid grid, FrameDims dims);

 private:
  std::size_t capacity_;
  int kernel_;
  std::size_t frame_count_ = 0;
  FrameDims dims_{};
  std::deque<Grid> grids_;
};

KernelBuffer kernel_update(KernelBuffer buf, const FeatureSet& features, FrameDims dims);

/// Temporal vote: a cell is active when occupied in more than capacity/4
/// grids. Centroid and RMS radius are taken over the active cell centers in
/// pixel coordinates; valid iff at least one cell is active.
imaging::BlobObservation kernel_estimate(const KernelBuffer& buf);

// Line-oriented feature text: "x y confidence hex-descriptor" per line,
// '#' starts a comment, blank lines ignored.
void write_features(std::ostream& os, const FeatureSet& features);
FeatureSet read_features(std::istream& is);

}  // namespace vservo::features
