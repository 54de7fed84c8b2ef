#pragma once

// Dyadic lattice for model coordinates.
//
// Car positions and clock points are multiples of 2^-30 bounded by 2^22 in
// magnitude. Sums and differences of two such values are then exact in
// binary64, so the schedule recursion and the walk read-off produce
// identical doubles regardless of how the additions are grouped.

#include <cmath>
#include <stdexcept>

namespace slowstart::grid {

inline constexpr double kScale = 1073741824.0;  // 2^30
inline constexpr double kStep = 1.0 / kScale;
inline constexpr double kMaxMagnitude = 4194304.0;  // 2^22

inline void check_range(double x) {
  if (!(std::fabs(x) <= kMaxMagnitude)) {
    throw std::domain_error("coordinate outside the exact dyadic range (|x| <= 2^22)");
  }
}

/// Smallest grid point >= x.
inline double snap_up(double x) {
  check_range(x);
  return std::ceil(x * kScale) / kScale;
}

/// Nearest grid point (ties to even).
inline double snap(double x) {
  check_range(x);
  return std::nearbyint(x * kScale) / kScale;
}

inline bool on_grid(double x) { return std::fabs(x) <= kMaxMagnitude && snap(x) == x; }

}  // namespace slowstart::grid
