#pragma once

// Direct event-driven simulation of the defining dynamics: every stopped car
// that is not blocked by its predecessor starts after a fresh Exponential(1)
// wait; a moving car stops when it reaches its stopped predecessor. Shares no
// randomness with the schedule construction.

#include <cstdint>
#include <vector>

#include "slowstart/model.hpp"
#include "slowstart/rng.hpp"

namespace slowstart {

enum class EventKind { Start, Stop };

struct CarEvent {
  double time;
  double position;
  EventKind kind;
};

class EventLog {
 public:
  EventLog(const InitialConfig& config, std::vector<std::vector<CarEvent>> events,
           double horizon);

  std::int64_t first_label() const { return first_label_; }
  std::size_t cars() const { return events_.size(); }
  double horizon() const { return horizon_; }
  const std::vector<CarEvent>& events(std::int64_t car) const {
    return events_[static_cast<std::size_t>(car - first_label_)];
  }

  CarState state(std::int64_t car, double t) const;
  /// Time at which the car leaves position y (passing through counts);
  /// +inf if that happens after the horizon.
  double leave_time(std::int64_t car, double y) const;
  MarkedPointSet jams(double t) const;

 private:
  std::int64_t first_label_;
  std::vector<double> initial_;
  std::vector<std::vector<CarEvent>> events_;
  double horizon_;
};

EventLog naive_simulate(const InitialConfig& config, RngStream& stream, double horizon);

}  // namespace slowstart
