#pragma once

#include <string>
#include <vector>

// Built-in consistency checks of the control laws, the Gaussian
// normalization, the stereo relation and the RC mapping.

namespace vservo::selfcheck {

struct Options {
  /// Allowed |integral - 1| for the Gaussian normalization check.
  double normalization_tolerance = 1e-6;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> run(const Options& options = {});

/// Simpson's rule with n (even) intervals.
template <typename F>
double simpson(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return sum * h / 3.0;
}

}  // namespace vservo::selfcheck
