#pragma once

// The slow-to-start traffic model: initial configuration, per-site departure
// clocks, the arrival/departure schedule recursion and the read-off of
// trajectories and traffic jams.
//
// Cars move from right to left. Car j arrives at the position y_i of car i
// (i <= j) at time A(i,j) and leaves it at D(i,j):
//
//   A(i,i) = 0,  D(i,i) = d(i,i)
//   A(i,j) = D(i+1,j) + y_{i+1} - y_i
//   D(i,j) = A(i,j)  if A(i,j) >= D(i,j-1)   (passes through)
//          = d(i,j)  otherwise               (stopped in the jam at y_i)
//
// The equality case has probability zero; it is resolved as a pass-through
// and counted in ScheduleTable::ties().

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "slowstart/rng.hpp"

namespace slowstart {

/// Raised when a requested read-off needs cars outside the simulated extent.
class WindowViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

struct ModelParams {
  double lambda = 1.0;
  Interval window{-10.0, 10.0};
  double horizon = 10.0;
  bool palm = false;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// Extent that makes jams in `window` exact up to `horizon`:
  /// [window.lo, window.hi + horizon].
  Interval jam_extent() const { return {window.lo, window.hi + horizon}; }
};

/// Labeled initial positions, a Poisson(lambda) realization on `extent`.
/// Labels are consecutive; the label convention y_0 <= 0 < y_1 is anchored
/// at the origin independently of the extent.
class InitialConfig {
 public:
  InitialConfig() = default;
  InitialConfig(Interval extent, bool palm, std::int64_t first_label,
                std::vector<double> positions);

  const Interval& extent() const { return extent_; }
  bool palm() const { return palm_; }
  std::size_t size() const { return positions_.size(); }
  bool empty() const { return positions_.empty(); }

  std::int64_t first_label() const { return first_label_; }
  /// One past the last label.
  std::int64_t end_label() const { return first_label_ + static_cast<std::int64_t>(size()); }
  bool has_label(std::int64_t label) const {
    return label >= first_label_ && label < end_label();
  }
  double position(std::int64_t label) const {
    return positions_[static_cast<std::size_t>(label - first_label_)];
  }
  const std::vector<double>& positions() const { return positions_; }

  /// Smallest label whose position is >= x (end_label() when none).
  std::int64_t first_label_at_or_above(double x) const;

  /// Whether the labels [i_min, i_max] contain every car of the infinite
  /// configuration whose position lies in [lo, hi].
  bool covers(std::int64_t i_min, std::int64_t i_max, double lo, double hi) const;

 private:
  Interval extent_{};
  bool palm_ = false;
  std::int64_t first_label_ = 1;
  std::vector<double> positions_;
};

InitialConfig generate_initial(const ModelParams& params, Interval extent);

/// Per-site Poisson(1) clocks 0 < d(i,i) < d(i,i+1) < ..., materialized on
/// demand from the stream (seed, clocks(i)). Extension never changes
/// values already handed out.
class DepartureClocks {
 public:
  explicit DepartureClocks(std::uint64_t seed) : seed_(seed) {}

  /// d(i, j) for j >= i.
  double at(std::int64_t site, std::int64_t j);
  /// Hand-set clock values for a site (tests and worked examples).
  void set(std::int64_t site, std::vector<double> values);

  std::uint64_t seed() const { return seed_; }

 private:
  struct Site {
    RngStream stream;
    std::vector<double> values;
    bool fixed = false;
  };
  Site& site(std::int64_t label);

  std::uint64_t seed_;
  std::unordered_map<std::int64_t, Site> sites_;
  std::int64_t cached_label_ = 0;
  Site* cached_ = nullptr;
};

/// Triangular table of A(i,j), D(i,j) for i_min <= i <= j <= i_max.
class ScheduleTable {
 public:
  std::int64_t i_min() const { return i_min_; }
  std::int64_t i_max() const { return i_max_; }
  bool empty() const { return i_max_ < i_min_; }
  bool contains(std::int64_t i, std::int64_t j) const {
    return i_min_ <= i && i <= j && j <= i_max_;
  }

  double arrival(std::int64_t i, std::int64_t j) const { return a_[offset(i, j)]; }
  double departure(std::int64_t i, std::int64_t j) const { return d_[offset(i, j)]; }
  bool stopped(std::int64_t i, std::int64_t j) const {
    return departure(i, j) != arrival(i, j);
  }
  std::size_t ties() const { return ties_; }

 private:
  friend ScheduleTable build_schedule(const InitialConfig&, DepartureClocks&, std::int64_t,
                                      std::int64_t);
  std::size_t offset(std::int64_t i, std::int64_t j) const {
    const auto col = static_cast<std::size_t>(j - i_min_);
    return col * (col + 1) / 2 + static_cast<std::size_t>(i - i_min_);
  }

  std::int64_t i_min_ = 0;
  std::int64_t i_max_ = -1;
  std::vector<double> a_;
  std::vector<double> d_;
  std::size_t ties_ = 0;
};

ScheduleTable build_schedule(const InitialConfig& config, DepartureClocks& clocks,
                             std::int64_t i_min, std::int64_t i_max);
/// Whole configuration.
ScheduleTable build_schedule(const InitialConfig& config, DepartureClocks& clocks);

struct Segment {
  double t_start;
  double t_end;
  double position_start;
  int speed;  // 0 stopped, 1 moving left
};

struct CarState {
  double position;
  int speed;
};

class TrajectorySample {
 public:
  TrajectorySample(std::int64_t car, std::vector<Segment> segments)
      : car_(car), segments_(std::move(segments)) {}

  std::int64_t car() const { return car_; }
  const std::vector<Segment>& segments() const { return segments_; }
  /// Right-continuous state at time t within the sampled span.
  CarState at(double t) const;

 private:
  std::int64_t car_;
  std::vector<Segment> segments_;
};

TrajectorySample trajectory(const ScheduleTable& schedule, const InitialConfig& config,
                            std::int64_t car, double horizon);

enum class Frame { Lattice, RescaledSupercritical, RescaledCritical, Continuum };
std::string frame_name(Frame frame);

struct MarkedPoint {
  double position;
  double mass;
  bool operator==(const MarkedPoint&) const = default;
};

struct MarkedPointSet {
  double t = 0.0;
  Frame frame = Frame::Lattice;
  std::vector<MarkedPoint> points;  // strictly increasing positions

  double total_mass() const;
  bool operator==(const MarkedPointSet&) const = default;
};

/// Jams (y_i, N_i(t)) with y_i in `window`. t is snapped to the dyadic grid.
MarkedPointSet jam_configuration(const ScheduleTable& schedule, const InitialConfig& config,
                                 double t, Interval window);

}  // namespace slowstart
