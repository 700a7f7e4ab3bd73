#pragma once

// shared helpers for the test suite

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace testutil {

// relative error of a vector of derivatives against a reference vector,
// scaled by the largest reference magnitude
inline double rel_err(std::span<const double> got, std::span<const double> ref) {
  double scale = 1e-12;
  for (double r : ref) scale = std::max(scale, std::abs(r));
  double worst = 0.0;
  for (size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - ref[i]));
  return worst / scale;
}

inline double rel_err(double got, double ref) {
  return rel_err(std::span<const double>(&got, 1), std::span<const double>(&ref, 1));
}

}  // namespace testutil
