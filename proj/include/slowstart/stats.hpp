#pragma once

// Monte Carlo estimators for the model's quantitative claims.
//
// Every estimator runs `replicas` independent replicas; replica r draws all
// its randomness from replica_seed(seed, r). Confidence intervals are
// estimate +- 3 SE throughout.

#include <cstdint>
#include <string>
#include <vector>

#include "slowstart/continuum.hpp"
#include "slowstart/ks.hpp"
#include "slowstart/model.hpp"
#include "slowstart/walks.hpp"

namespace slowstart {

struct EstimateWithCI {
  std::string tag;
  double estimate = 0.0;
  double se = 0.0;
  std::size_t replicas = 0;

  double half_width() const { return 3.0 * se; }
  bool covers(double value) const { return std::abs(estimate - value) <= half_width(); }
};

/// Sample mean with standard error sd / sqrt(n).
EstimateWithCI mean_estimate(std::string tag, const std::vector<double>& xs);
/// sum(num) / sum(den) over replicas with a delta-method standard error.
EstimateWithCI ratio_estimate(std::string tag, const std::vector<double>& num,
                              const std::vector<double>& den);

struct SlopeFit {
  std::vector<double> x;
  std::vector<double> y;
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
};

/// Ordinary least squares y = intercept + slope * x; needs >= 3 points.
SlopeFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
/// Fit in log-log coordinates; every value must be positive.
SlopeFit fit_power_law(const std::vector<double>& t, const std::vector<double>& value);

enum class Regime { Supercritical, Critical };
std::string regime_name(Regime regime);
/// Throws std::invalid_argument listing the valid names.
Regime parse_regime(const std::string& name);

struct RescaleSpec {
  double L = 1.0;
  double lambda = 1.0;
  Regime regime = Regime::Critical;

  void validate() const;
  /// Lattice positions per rescaled unit of length.
  double position_scale() const;
  Interval lattice_window(Interval rescaled) const;
  double lattice_time(double t) const { return L * t; }
};

/// Lattice jams at lattice time L t mapped to the rescaled frame at time t.
MarkedPointSet rescale(const MarkedPointSet& mps, const RescaleSpec& rescaling);

struct RunOptions {
  std::uint64_t seed = 0;
  std::size_t replicas = 100;
  int threads = 1;
};

// Velocity of the tracked car.

struct VelocityReport {
  EstimateWithCI velocity;
  double target = 0.0;
  std::vector<double> samples;  // -pi_0(t) / t per replica
};

/// Palm configuration, car 0 at the origin; mean of -pi_0(t) / t. Only cars
/// in [-t, 0] influence car 0 up to time t.
VelocityReport estimate_velocity(double lambda, double t, const RunOptions& opts);

struct WalkVelocity {
  double velocity = 0.0;    // -y_{-n} / (T(-n,0) - y_{-n})
  double jump_ratio = 0.0;  // n / (T(-n,0) - y_{-n})
};

/// Finite-n ratios read off the walk started at the n-th car left of the
/// palm car. The family must cover labels -n..0.
WalkVelocity velocity_via_walks(const WalkFamily& walks, std::int64_t n);

struct WalkVelocityReport {
  EstimateWithCI velocity;
  EstimateWithCI jump_ratio;
};
WalkVelocityReport estimate_velocity_via_walks(double lambda, std::int64_t n,
                                               const RunOptions& opts);

// Moving cars.

struct PoissonReport {
  EstimateWithCI intensity;  // moving cars per unit length
  double target = 0.0;
  KsResult spacing_ks;  // forward spacings vs Exponential(target)
  std::size_t spacings = 0;
  bool empty_sample = false;
  std::vector<double> spacing_sample;
};

PoissonReport moving_car_test(double lambda, double t, Interval window, const RunOptions& opts);

// Jam statistics over a time sweep.

struct JamSweepPoint {
  double t = 0.0;
  EstimateWithCI intensity;      // jams per unit length
  EstimateWithCI mean_mass;      // stopped cars per jam
  EstimateWithCI spacing;        // window length / mean count
  EstimateWithCI stopped_fraction;  // stopped cars / (lambda * length)
};

struct JamSweep {
  double lambda = 1.0;
  Interval window;
  std::vector<JamSweepPoint> points;
};

JamSweep jam_sweep(double lambda, const std::vector<double>& times, Interval window,
                   const RunOptions& opts);

struct DecayReport {
  JamSweep sweep;
  SlopeFit intensity_fit;  // expected -1/2
  SlopeFit mass_fit;       // expected 1/2
  std::vector<double> dropped_times;  // no jams observed
};

/// Needs lambda > 1 and at least three times.
DecayReport jam_decay_fit(double lambda, const std::vector<double>& times, Interval window,
                          const RunOptions& opts);

struct CriticalReport {
  JamSweep sweep;
  SlopeFit mass_fit;     // expected 1/2
  SlopeFit spacing_fit;  // expected 1
  bool stopped_decreasing = false;
  std::vector<double> dropped_times;
};

CriticalReport critical_growth_fit(const std::vector<double>& times, Interval window,
                                   const RunOptions& opts);

// Condensation.

struct CondensationReport {
  std::int64_t first_car = 0;
  std::int64_t second_car = 0;
  double t = 0.0;
  EstimateWithCI both_moving;
  EstimateWithCI same_jam;
  EstimateWithCI otherwise;
  EstimateWithCI moving_or_same;        // both moving or stopped in the same jam
  EstimateWithCI stopped;               // first car stopped
  EstimateWithCI same_given_stopped;    // same jam | at least one stopped
};

/// Palm configuration; 0 <= first < second.
CondensationReport condensation_probe(double lambda, std::int64_t first, std::int64_t second,
                                      double t, const RunOptions& opts);

// Origin crossings.

/// Departure times in [0, horizon] of an M/M/1 queue started empty, with
/// Poisson(lambda) arrivals and Exponential(1) services (Lindley recursion).
std::vector<double> mm1_departures(double lambda, double horizon, RngStream& stream);

struct CrossingReport {
  EstimateWithCI late_rate;  // crossings per unit time over (horizon/2, horizon]
  double target = 0.0;
  KsResult spacing_vs_queue;        // inter-crossing vs inter-departure times
  KsResult late_vs_exponential;     // late inter-crossing times vs Exponential(target)
  std::size_t crossings = 0;
  std::size_t departures = 0;
  std::vector<double> crossing_spacings;
  std::vector<double> departure_spacings;
};

/// Times at which cars cross the origin up to `horizon`; these are the jump
/// points of the walk of car 1 and need the cars in [0, horizon].
std::vector<double> origin_crossing_times(const WalkFamily& walks, double horizon);

CrossingReport origin_crossings(double lambda, double horizon, const RunOptions& opts);

// Scaling comparison.

struct ScalingSettings {
  Regime regime = Regime::Critical;
  double lambda = 1.0;
  std::vector<double> scales;  // L values, increasing
  std::vector<double> times;   // rescaled times
  Interval window{-1.0, 0.0};  // rescaled window
  std::size_t translations = 8;  // disjoint copies of the window pooled per replica
  std::size_t lattice_replicas = 300;
  std::size_t continuum_replicas = 3000;
  double grid_step = 0.02;
  double dt = 2e-4;
  double margin = 0.5;       // continuum starters beyond the window
  double mass_floor = 0.0;   // points with rescaled mass <= floor are ignored
};

struct ScalingCell {
  double L = 0.0;
  double t = 0.0;
  KsResult count;
  KsResult total_mass;
  KsResult max_mass;
  double lattice_mean_count = 0.0;
  double continuum_mean_count = 0.0;
  double lattice_mean_mass = 0.0;
  double continuum_mean_mass = 0.0;
};

struct ScalingReport {
  ScalingSettings settings;
  std::vector<ScalingCell> cells;   // ordered by L, then t
  std::vector<double> mean_target_distance;  // per L, target functional averaged over times
  std::vector<double> mean_distance;  // per L, all three functionals and all times
  bool monotone = false;              // mean_distance non-increasing in L
  double final_target_distance = 0.0;  // max over times at the largest L
  // Mean distance between the first lattice_replicas continuum replicas and
  // the rest: the value mean_distance takes when the lattice law equals the
  // continuum law.
  double noise_floor = 0.0;
  std::vector<Functionals> continuum_sample;  // replica-major, then time, then window
};

/// Target functional: jam count (critical) or total mass (supercritical).
ScalingReport scaling_comparison(const ScalingSettings& settings, const RunOptions& opts);

/// Whether a sequence is non-increasing.
bool non_increasing(const std::vector<double>& values);

struct SelfConvergenceReport {
  KsResult count;
  KsResult total_mass;
  KsResult max_mass;
  double count_within_one = 0.0;  // fraction of paired replicas with |count change| <= 1
  std::uint64_t reflection_violations = 0;
  std::uint64_t order_violations = 0;
};

/// Paired runs at (h, dt) and (h/2, dt/2) on the same seeds.
SelfConvergenceReport continuum_self_convergence(Regime regime, const GridParams& coarse,
                                                 Interval window, double mass_floor,
                                                 const RunOptions& opts);

struct MeetingReport {
  EstimateWithCI distinct;  // P(two paths still apart at t)
  double target = 0.0;      // erf(c / (2 sqrt t))
};

/// Two starters at 0 and c, coalescing Brownian motions up to time t.
MeetingReport two_path_meeting(double c, double t, double dt, const RunOptions& opts);

}  // namespace slowstart
