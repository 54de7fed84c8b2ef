#pragma once

// Grid-discretized oracles for the two scaling limits.
//
// Coalescing Brownian motions with masses: a standard Brownian path starts at
// every grid point z of the extent at time 0; adjacent paths merge the first
// step their order would reverse or they meet (merged value = mean). At time
// t every pair of adjacent coalescence classes gives one point: position the
// midpoint between the flanking starters, mass the gap between class values.
//
// Reflected web: a driving Brownian path W runs over the time axis; the path
// of starter x is born at time x at W_x, moves by free Gaussian increments and
// is clipped to stay below W (discrete Skorokhod map), coalescing as above.
// The candidate boundary y between adjacent starters is evaluated at time
// y + t.
//
// Randomness: starter k uses the stream oracle(k * stride) and W uses
// driving_path(), each step consuming `substeps` normals. A class draws from
// the stream of its member with the largest power of two dividing the stream
// index. With stride 2 and substeps 2, a run at (h, dt) reproduces the
// increments of a run at (h/2, dt/2), so the two resolutions are paired.

#include <cstdint>
#include <vector>

#include "slowstart/model.hpp"

namespace slowstart {

class ResolutionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GridParams {
  Interval extent{-1.0, 1.0};
  double h = 0.02;   // starter spacing
  double dt = 2e-4;  // requested time step; the step used divides h evenly
  double t = 1.0;

  /// Throws ResolutionError when dt > h^2, std::invalid_argument otherwise.
  void validate() const;
  /// Number of time steps per starter spacing (even, so midpoints fall on
  /// the time grid).
  std::int64_t steps_per_spacing() const;
  double step() const { return h / static_cast<double>(steps_per_spacing()); }
  std::int64_t starters() const;
};

struct Coupling {
  std::int64_t stride = 1;
  int substeps = 1;

  /// Coupling of a run at (h, dt) with the run at (h/2, dt/2) using `fine`.
  static Coupling coarser(const Coupling& fine) { return {fine.stride * 2, fine.substeps * 2}; }
};

struct ContinuumDiagnostics {
  std::uint64_t steps = 0;
  std::uint64_t merges = 0;
  std::uint64_t reflection_violations = 0;  // path value above W after a step
  std::uint64_t order_violations = 0;       // adjacent classes out of order after merging
};

struct ContinuumRun {
  std::vector<MarkedPointSet> snapshots;  // one per requested time, in order
  std::vector<double> spreads;  // top minus bottom class value (coalescing BM only)
  ContinuumDiagnostics diagnostics;
};

/// Coalescing Brownian motions with masses at each time in `times`.
ContinuumRun simulate_coalescing_bm(const GridParams& grid, const std::vector<double>& times,
                                    std::uint64_t seed, Coupling coupling = {});
MarkedPointSet simulate_coalescing_bm(const GridParams& grid, std::uint64_t seed);

/// Reflected coalescing web; boundaries with midpoint y in the extent such
/// that y + t lies in the simulated range. The driving path is simulated on
/// [extent.lo, extent.hi + max(times)].
ContinuumRun simulate_reflected_web(const GridParams& grid, const std::vector<double>& times,
                                    std::uint64_t seed, Coupling coupling = {});
MarkedPointSet simulate_reflected_web(const GridParams& grid, std::uint64_t seed);

struct Functionals {
  std::size_t count = 0;
  double total_mass = 0.0;
  double max_mass = 0.0;
  std::vector<double> spacings;  // consecutive nearest-neighbor distances

  bool operator==(const Functionals&) const = default;
};

/// Summary of the points in `window` with mass strictly above `mass_floor`.
Functionals extract_functionals(const MarkedPointSet& mps, Interval window,
                                double mass_floor = 0.0);

}  // namespace slowstart
