#pragma once

// Reference computations the tests compare the library against. None of
// these call into the library, so a shared mistake cannot cancel out.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

/// Hexagonal HSV straight from the textbook case analysis.
struct Hsv {
  double h, s, v;
};

inline Hsv hexcone(int r, int g, int b) {
  const double R = r / 255.0, G = g / 255.0, B = b / 255.0;
  const double mx = std::max({R, G, B});
  const double mn = std::min({R, G, B});
  const double c = mx - mn;
  double h = 0.0;
  if (c > 0.0) {
    if (mx == R) {
      h = 60.0 * std::fmod((G - B) / c + 6.0, 6.0);
    } else if (mx == G) {
      h = 60.0 * ((B - R) / c + 2.0);
    } else {
      h = 60.0 * ((R - G) / c + 4.0);
    }
  }
  return {h, mx > 0.0 ? c / mx : 0.0, mx};
}

inline double normal_density(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

/// Composite 8-point Gauss-Legendre quadrature over n panels.
template <typename F>
double gauss_legendre(F&& f, double a, double b, int panels) {
  static constexpr std::array<std::pair<double, double>, 4> half = {{
      {0.1834346424956498, 0.3626837833783620},
      {0.5255324099163290, 0.3137066458778873},
      {0.7966664774136267, 0.2223810344533745},
      {0.9602898564975363, 0.1012285362903763},
  }};
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (const auto& [x, w] : half) total += w * (f(mid - 0.5 * h * x) + f(mid + 0.5 * h * x));
  }
  return total * 0.5 * h;
}

/// Batch RMS distance of stored samples from a fixed center.
inline double batch_rms(const std::vector<std::pair<double, double>>& pts, double cx, double cy) {
  double s = 0.0;
  for (const auto& [x, y] : pts) s += (x - cx) * (x - cx) + (y - cy) * (y - cy);
  return std::sqrt(s / static_cast<double>(pts.size()));
}

/// Frozen-sigma rule rewritten from its prose: the sample always joins the
/// statistics; the control sigma follows only if the sample was no farther
/// than the sigma in force before it.
struct FrozenSigma {
  double frozen;
  double floor;
  std::vector<double> distances;

  double running() const {
    double s = 0.0;
    for (double d : distances) s += d * d;
    return std::sqrt(s / static_cast<double>(distances.size()));
  }
  void add(double d) {
    const double before = frozen;
    distances.push_back(d);
    if (!(d > before)) frozen = std::max(running(), floor);
  }
};

/// Bit-by-bit Hamming distance over little-endian 64-bit words.
inline int hamming(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b,
                   std::size_t bits) {
  int d = 0;
  for (std::size_t i = 0; i < bits; ++i) {
    const bool x = (a[i / 64] >> (i % 64)) & 1u;
    const bool y = (b[i / 64] >> (i % 64)) & 1u;
    d += x != y;
  }
  return d;
}

/// Dense row-major matrix helpers for the reference Kalman filter.
struct Mat {
  int r = 0, c = 0;
  std::vector<double> a;
  Mat() = default;
  Mat(int rows, int cols) : r(rows), c(cols), a(static_cast<std::size_t>(rows * cols), 0.0) {}
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i * c + j)]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i * c + j)]; }
  static Mat eye(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline Mat mul(const Mat& x, const Mat& y) {
  Mat out(x.r, y.c);
  for (int i = 0; i < x.r; ++i)
    for (int k = 0; k < x.c; ++k)
      for (int j = 0; j < y.c; ++j) out(i, j) += x(i, k) * y(k, j);
  return out;
}

inline Mat add(const Mat& x, const Mat& y, double sy = 1.0) {
  Mat out = x;
  for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] += sy * y.a[i];
  return out;
}

inline Mat transpose(const Mat& x) {
  Mat out(x.c, x.r);
  for (int i = 0; i < x.r; ++i)
    for (int j = 0; j < x.c; ++j) out(j, i) = x(i, j);
  return out;
}

/// Gauss-Jordan inverse with partial pivoting.
inline Mat inverse(Mat m) {
  const int n = m.r;
  Mat inv = Mat::eye(n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int i = col + 1; i < n; ++i)
      if (std::fabs(m(i, col)) > std::fabs(m(piv, col))) piv = i;
    for (int j = 0; j < n; ++j) {
      std::swap(m(col, j), m(piv, j));
      std::swap(inv(col, j), inv(piv, j));
    }
    const double p = m(col, col);
    for (int j = 0; j < n; ++j) {
      m(col, j) /= p;
      inv(col, j) /= p;
    }
    for (int i = 0; i < n; ++i) {
      if (i == col) continue;
      const double f = m(i, col);
      for (int j = 0; j < n; ++j) {
        m(i, j) -= f * m(col, j);
        inv(i, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

/// Textbook linear Kalman filter: x' = F x + B u, z = H x.
struct LinearKalman {
  Mat F, B, H, R, Q;
  Mat x, P;

  void predict(const Mat& u) {
    x = add(mul(F, x), mul(B, u));
    P = add(mul(mul(F, P), transpose(F)), R);
  }
  void update(const Mat& z) {
    const Mat S = add(mul(mul(H, P), transpose(H)), Q);
    const Mat K = mul(mul(P, transpose(H)), inverse(S));
    x = add(x, mul(K, add(z, mul(H, x), -1.0)));
    P = mul(add(Mat::eye(P.r), mul(K, H), -1.0), P);
  }
};

/// Exact 64-bit mixer used to build deterministic fixtures without the
/// library's generator.
struct SplitMix {
  std::uint64_t s;
  std::uint64_t next() {
    std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * uniform());
  }
};

}  // namespace oracle
