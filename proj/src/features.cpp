#include "vservo/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "vservo/errors.hpp"

namespace vservo::features {

Descriptor::Descriptor(std::size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

bool Descriptor::bit(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }

void Descriptor::set_bit(std::size_t i, bool value) {
  const std::uint64_t m = std::uint64_t{1} << (i % 64);
  if (value) {
    words_[i / 64] |= m;
  } else {
    words_[i / 64] &= ~m;
  }
}

void Descriptor::flip(std::size_t i) { words_[i / 64] ^= std::uint64_t{1} << (i % 64); }

void Descriptor::trim() {
  if (bits_ % 64 != 0 && !words_.empty())
    words_.back() &= (std::uint64_t{1} << (bits_ % 64)) - 1;
}

std::string Descriptor::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t nibbles = (bits_ + 3) / 4;
  std::string out(nibbles, '0');
  for (std::size_t k = 0; k < nibbles; ++k) {
    const std::size_t lsb = 4 * (nibbles - 1 - k);
    unsigned v = 0;
    for (std::size_t j = 0; j < 4 && lsb + j < bits_; ++j) v |= unsigned(bit(lsb + j)) << j;
    out[k] = kDigits[v];
  }
  return out;
}

Descriptor Descriptor::from_hex(std::string_view hex) {
  Descriptor d(hex.size() * 4);
  for (std::size_t k = 0; k < hex.size(); ++k) {
    const char c = hex[k];
    unsigned v;
    if (c >= '0' && c <= '9') {
      v = unsigned(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      v = unsigned(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
      v = unsigned(c - 'A' + 10);
    } else {
      throw Error(std::string("invalid hex digit '") + c + "' in descriptor");
    }
    const std::size_t lsb = 4 * (hex.size() - 1 - k);
    for (std::size_t j = 0; j < 4; ++j) d.set_bit(lsb + j, (v >> j) & 1u);
  }
  return d;
}

std::size_t hamming_distance(const Descriptor& a, const Descriptor& b) {
  if (a.size() != b.size())
    throw DescriptorLengthMismatch("descriptor lengths " + std::to_string(a.size()) +
                                   " and " + std::to_string(b.size()) + " differ");
  std::size_t d = 0;
  const auto wa = a.words();
  const auto wb = b.words();
  for (std::size_t i = 0; i < wa.size(); ++i) d += std::popcount(wa[i] ^ wb[i]);
  return d;
}

FeatureSet hamming_match(const FeatureSet& templ, const FeatureSet& scene,
                         const MatchThreshold& thr) {
  if (templ.empty() || scene.empty()) return {};
  const std::size_t bits = templ.front().descriptor.size();
  for (const auto& f : templ)
    if (f.descriptor.size() != bits)
      throw DescriptorLengthMismatch("template descriptors have mixed lengths");
  for (const auto& f : scene)
    if (f.descriptor.size() != bits)
      throw DescriptorLengthMismatch("scene descriptor length differs from template");

  FeatureSet matched;
  for (const auto& s : scene) {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (const auto& t : templ) best = std::min(best, hamming_distance(s.descriptor, t.descriptor));
    if (thr.value >= 0 && best <= static_cast<std::size_t>(thr.value)) matched.push_back(s);
  }
  return matched;
}

MatchThreshold adapt_threshold(MatchThreshold thr, std::size_t match_count) {
  if (match_count < kTargetMatches) {
    thr.value += thr.increment;
  } else if (match_count > kTargetMatches) {
    thr.value -= thr.decrement;
  }
  thr.value = std::clamp(thr.value, thr.min_value, thr.max_value);
  return thr;
}

namespace {

imaging::Rgb pixel_under(const imaging::Frame& frame, const Feature& f) {
  const int x = std::clamp(static_cast<int>(std::lround(f.x)), 0, frame.width() - 1);
  const int y = std::clamp(static_cast<int>(std::lround(f.y)), 0, frame.height() - 1);
  return frame.at(x, y);
}

}  // namespace

FeatureSet filter_by_color(const FeatureSet& matches, const imaging::Frame& frame,
                           const imaging::HsvColor& mean_color, double hue_half_width) {
  FeatureSet kept;
  for (const auto& f : matches) {
    const auto c = imaging::rgb_to_hsv(pixel_under(frame, f));
    if (imaging::hue_distance(c.hue, mean_color.hue) <= hue_half_width) kept.push_back(f);
  }
  return kept;
}

imaging::HsvColor mean_feature_color(const FeatureSet& features, const imaging::Frame& frame,
                                     const imaging::HsvColor& fallback) {
  if (features.empty()) return fallback;
  double sx = 0.0, sy = 0.0, ss = 0.0, sv = 0.0;
  for (const auto& f : features) {
    const auto c = imaging::rgb_to_hsv(pixel_under(frame, f));
    const double rad = c.hue * std::numbers::pi / 180.0;
    sx += std::cos(rad);
    sy += std::sin(rad);
    ss += c.saturation;
    sv += c.value;
  }
  const auto n = static_cast<double>(features.size());
  imaging::HsvColor out{fallback.hue, ss / n, sv / n};
  if (std::hypot(sx, sy) > 1e-12) {
    double h = std::atan2(sy, sx) * 180.0 / std::numbers::pi;
    if (h < 0.0) h += 360.0;
    out.hue = h >= 360.0 ? 0.0 : h;
  }
  return out;
}

WeightedCentroid weighted_centroid(const FeatureSet& matches) {
  WeightedCentroid out;
  if (matches.empty()) return out;

  double wsum = 0.0;
  for (const auto& f : matches) {
    out.x += f.confidence * f.x;
    out.y += f.confidence * f.y;
    wsum += f.confidence;
  }
  if (wsum <= 0.0) return {};
  out.x /= wsum;
  out.y /= wsum;

  if (matches.size() < kTargetMatches) return out;

  // Anchor on the first point and the point farthest from it; the set is
  // collinear iff every other point spans zero area with that pair.
  const auto& a = matches.front();
  std::size_t far = 0;
  double far_d2 = 0.0;
  for (std::size_t i = 1; i < matches.size(); ++i) {
    const double d2 = std::pow(matches[i].x - a.x, 2) + std::pow(matches[i].y - a.y, 2);
    if (d2 > far_d2) {
      far_d2 = d2;
      far = i;
    }
  }
  double max_area = 0.0;
  if (far != 0) {
    const double bx = matches[far].x - a.x;
    const double by = matches[far].y - a.y;
    for (const auto& c : matches) {
      const double area = 0.5 * std::fabs(bx * (c.y - a.y) - by * (c.x - a.x));
      max_area = std::max(max_area, area);
    }
  }
  out.valid = max_area > kCollinearAreaTolerance;
  return out;
}

KernelBuffer::KernelBuffer(std::size_t capacity, int kernel_size)
    : capacity_(capacity), kernel_(kernel_size) {
  if (capacity == 0) throw Error("kernel buffer capacity must be >= 1");
  if (kernel_size < 1) throw Error("kernel size must be >= 1");
}

int KernelBuffer::count(std::size_t grid, int col, int row) const {
  return grids_.at(grid).at(static_cast<std::size_t>(row * kernel_ + col));
}

void KernelBuffer::push(Grid grid, FrameDims dims) {
  if (grid.size() != static_cast<std::size_t>(kernel_ * kernel_))
    throw DimensionMismatch("kernel grid has wrong size");
  dims_ = dims;
  grids_.push_back(std::move(grid));
  while (grids_.size() > capacity_) grids_.pop_front();
  ++frame_count_;
}

KernelBuffer kernel_update(KernelBuffer buf, const FeatureSet& features, FrameDims dims) {
  if (dims.width < 1 || dims.height < 1) throw Error("frame dimensions must be >= 1");
  const int k = buf.kernel_size();
  KernelBuffer::Grid grid(static_cast<std::size_t>(k * k), 0);
  for (const auto& f : features) {
    const int col = std::clamp(static_cast<int>(std::floor(f.x * k / dims.width)), 0, k - 1);
    const int row = std::clamp(static_cast<int>(std::floor(f.y * k / dims.height)), 0, k - 1);
    ++grid[static_cast<std::size_t>(row * k + col)];
  }
  buf.push(std::move(grid), dims);
  return buf;
}

imaging::BlobObservation kernel_estimate(const KernelBuffer& buf) {
  if (buf.empty()) throw Error("kernel_estimate needs at least one grid");
  const int k = buf.kernel_size();
  const std::size_t threshold = buf.capacity() / 4;
  const double cell_w = static_cast<double>(buf.dims().width) / k;
  const double cell_h = static_cast<double>(buf.dims().height) / k;

  std::vector<imaging::Point2> active;
  for (int row = 0; row < k; ++row) {
    for (int col = 0; col < k; ++col) {
      std::size_t occupied = 0;
      for (const auto& g : buf.grids())
        if (g[static_cast<std::size_t>(row * k + col)] > 0) ++occupied;
      if (occupied > threshold) active.push_back({(col + 0.5) * cell_w, (row + 0.5) * cell_h});
    }
  }
  return imaging::blob_from_points(active, 1);
}

void write_features(std::ostream& os, const FeatureSet& features) {
  const auto old = os.precision(17);
  for (const auto& f : features)
    os << f.x << ' ' << f.y << ' ' << f.confidence << ' ' << f.descriptor.to_hex() << '\n';
  os.precision(old);
}

FeatureSet read_features(std::istream& is) {
  FeatureSet out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    Feature f;
    std::string hex;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string extra;
    if (!(ls >> f.x >> f.y >> f.confidence >> hex) || (ls >> extra))
      throw IoError("malformed feature on line " + std::to_string(lineno));
    if (!(f.confidence > 0.0))
      throw IoError("non-positive confidence on line " + std::to_string(lineno));
    f.descriptor = Descriptor::from_hex(hex);
    if (!out.empty() && out.front().descriptor.size() != f.descriptor.size())
      throw DescriptorLengthMismatch("descriptor length changes on line " +
                                     std::to_string(lineno));
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace vservo::features
