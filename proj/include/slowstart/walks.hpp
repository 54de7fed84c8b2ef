#pragma once

// Coalescing counting walks reflected from above by the counting process Y.
//
// Walk B^i equals i before y_i, then jumps by one at y_i + d(i,i),
// y_i + d(i,i+1), ... until the jump that lands on the current value of
// B^{i+1}; from there on it follows B^{i+1}. Walks are built right to left
// from the top car; the walk above the top car is the constant i_max + 1.
//
// Each walk stores only its own jumps (the last one being the coalescing
// jump) and a skip link: the nearest walk above whose coalescence point lies
// strictly further right. Everything between has already merged by then, so
// value queries jump straight along the links.
//
// T(i,j) = inf{x >= y_i : B^i_x = j + 1} is the point where walk i leaves
// level j. In model terms car j arrives at y_i at T(i+1,j) - y_i (j > i) and
// leaves at T(i,j) - y_i.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "slowstart/model.hpp"

namespace slowstart {

/// Query outside the region where the walk family is exact.
class OutOfDomain : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class WalkFamily {
 public:
  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  const InitialConfig& config() const { return *config_; }
  double cutoff() const { return cutoff_; }
  std::int64_t first_label() const { return first_label_; }
  /// Label of the constant walk above the top car.
  std::int64_t top_label() const { return first_label_ + static_cast<std::int64_t>(walks_.size()) - 1; }

  /// B^i_x (right-continuous). Valid for x <= cutoff.
  std::int64_t value(std::int64_t i, double x) const;
  /// B^i_{x-}.
  std::int64_t value_before(std::int64_t i, double x) const;

  /// T(i,j) for j >= i - 1; T(i,i-1) = y_i. Throws OutOfDomain when the
  /// point lies beyond the cutoff or j is above every simulated car.
  double leave_time(std::int64_t i, std::int64_t j) const;
  /// Same, returning +inf instead of throwing.
  double leave_time_or_inf(std::int64_t i, std::int64_t j) const;

  /// Jump locations of B^i in (lo, hi], one entry per unit of jump.
  void jumps_between(std::int64_t i, double lo, double hi, std::vector<double>& out) const;

  // Raw representation, used by the CSV dump and the invariant tests.
  std::size_t own_jump_count(std::int64_t i) const { return walk(i).own_count; }
  double own_jump(std::int64_t i, std::size_t k) const {
    return own_[walk(i).own_begin + k];
  }
  /// Coalescence point with B^{i+1}, +inf if it lies beyond the cutoff.
  double coalescence_point(std::int64_t i) const { return walk(i).coalesce_at; }
  bool coalesced(std::int64_t i) const { return walk(i).coalesce_at != kInfinity; }
  /// Skip link: the label this walk follows after its coalescence point.
  std::int64_t skip_link(std::int64_t i) const {
    return first_label_ + static_cast<std::int64_t>(walk(i).next);
  }
  std::size_t total_own_jumps() const { return own_.size(); }
  std::size_t ties() const { return ties_; }

 private:
  friend WalkFamily build_walks(const InitialConfig&, DepartureClocks&, double);

  struct Walk {
    std::size_t own_begin = 0;
    std::uint32_t own_count = 0;
    std::uint32_t next = 0;  // index into walks_
    double start = kInfinity;
    double coalesce_at = kInfinity;
  };

  const Walk& walk(std::int64_t label) const {
    if (label < first_label_ || label > top_label()) {
      throw std::out_of_range("walk label outside the family");
    }
    return walks_[static_cast<std::size_t>(label - first_label_)];
  }
  std::size_t index(std::int64_t label) const {
    return static_cast<std::size_t>(label - first_label_);
  }
  std::int64_t label_of(std::size_t idx) const {
    return first_label_ + static_cast<std::int64_t>(idx);
  }
  void check_x(double x) const;
  std::int64_t value_impl(std::size_t idx, double x, bool left_limit) const;

  const InitialConfig* config_ = nullptr;
  double cutoff_ = kInfinity;
  std::int64_t first_label_ = 0;
  std::vector<Walk> walks_;  // last entry is the constant top walk
  std::vector<double> own_;
  std::size_t ties_ = 0;
};

/// Builds B^i for every car of `config`, exact for x <= cutoff. Jumps beyond
/// the cutoff are not generated. The config must outlive the family.
WalkFamily build_walks(const InitialConfig& config, DepartureClocks& clocks,
                       double cutoff = WalkFamily::kInfinity);

/// T(i,j) materialized for i_min <= i <= i_max + 1 and i - 1 <= j <= i_max.
class LeaveTimes {
 public:
  std::int64_t i_min() const { return i_min_; }
  std::int64_t i_max() const { return i_max_; }
  double at(std::int64_t i, std::int64_t j) const;

 private:
  friend LeaveTimes leave_times(const WalkFamily&, std::int64_t, std::int64_t);
  std::size_t offset(std::int64_t i, std::int64_t j) const;

  std::int64_t i_min_ = 0;
  std::int64_t i_max_ = -1;
  std::vector<double> values_;
};

LeaveTimes leave_times(const WalkFamily& walks, std::int64_t i_min, std::int64_t i_max);
LeaveTimes leave_times(const WalkFamily& walks);

/// Jams (y_i, B^{i+1}_{y_i+t} - B^i_{y_i+t}) with y_i in `window`; t is
/// snapped to the dyadic grid.
MarkedPointSet jams_from_walks(const WalkFamily& walks, double t, Interval window);

/// Positions at time t of the moving cars inside `window`, increasing.
std::vector<double> moving_cars(const WalkFamily& walks, double t, Interval window);

/// State of car j at time t read off the leave times.
CarState car_state(const WalkFamily& walks, std::int64_t car, double t);

struct EquivalenceReport {
  std::size_t entries_checked = 0;
  std::size_t arrival_violations = 0;
  std::size_t departure_violations = 0;
  double max_discrepancy = 0.0;

  std::size_t violations() const { return arrival_violations + departure_violations; }
};

/// Checks A(i,j) = T(i+1,j) - y_i (j > i; A(i,i) = 0) and D(i,j) = T(i,j) - y_i
/// at exact equality over the whole table.
EquivalenceReport check_equivalence(const ScheduleTable& schedule, const LeaveTimes& leave,
                                    const InitialConfig& config);

}  // namespace slowstart
