#include "slowstart/naive.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace slowstart {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

struct CarSim {
  double position;  // at time `since`
  double since;
  bool moving;
  double start_at;  // scheduled start, +inf while blocked or moving
};
}  // namespace

EventLog::EventLog(const InitialConfig& config, std::vector<std::vector<CarEvent>> events,
                   double horizon)
    : first_label_(config.first_label()),
      initial_(config.positions()),
      events_(std::move(events)),
      horizon_(horizon) {}

CarState EventLog::state(std::int64_t car, double t) const {
  const auto idx = static_cast<std::size_t>(car - first_label_);
  CarState s{initial_[idx], 0};
  double since = 0.0;
  for (const auto& e : events_[idx]) {
    if (e.time > t) break;
    s = {e.position, e.kind == EventKind::Start ? 1 : 0};
    since = e.time;
  }
  if (s.speed == 1) s.position -= t - since;
  return s;
}

double EventLog::leave_time(std::int64_t car, double y) const {
  const auto idx = static_cast<std::size_t>(car - first_label_);
  const auto& ev = events_[idx];
  for (std::size_t k = 0; k < ev.size(); ++k) {
    if (ev[k].kind != EventKind::Start) continue;
    const double from = ev[k].position;
    if (from < y) break;
    // A stop at or above y means a later start passes y (or leaves it).
    if (k + 1 < ev.size() && ev[k + 1].position >= y) continue;
    const double crossing = ev[k].time + (from - y);
    return crossing <= horizon_ ? crossing : kInf;
  }
  return kInf;
}

MarkedPointSet EventLog::jams(double t) const {
  std::map<double, double> mass;
  for (std::size_t idx = 0; idx < events_.size(); ++idx) {
    const auto s = state(first_label_ + static_cast<std::int64_t>(idx), t);
    if (s.speed == 0) mass[s.position] += 1.0;
  }
  MarkedPointSet out;
  out.t = t;
  for (const auto& [position, m] : mass) out.points.push_back({position, m});
  return out;
}

EventLog naive_simulate(const InitialConfig& config, RngStream& stream, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  const std::size_t n = config.size();
  std::vector<CarSim> cars(n);
  std::vector<std::vector<CarEvent>> events(n);
  for (std::size_t k = 0; k < n; ++k) {
    cars[k] = {config.positions()[k], 0.0, false, sample_exponential(stream, 1.0)};
  }
  double now = 0.0;
  while (true) {
    // Next event: a scheduled start, or a moving car reaching its stopped
    // predecessor. O(n) scan per event.
    double best = kInf;
    std::size_t who = n;
    bool is_start = false;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& c = cars[k];
      if (!c.moving) {
        if (c.start_at < best) {
          best = c.start_at;
          who = k;
          is_start = true;
        }
      } else if (k > 0 && !cars[k - 1].moving) {
        const double hit = c.since + (c.position - cars[k - 1].position);
        if (hit < best) {
          best = hit;
          who = k;
          is_start = false;
        }
      }
    }
    if (who == n || best > horizon) break;
    now = best;
    auto& c = cars[who];
    if (is_start) {
      c.moving = true;
      c.since = now;
      c.start_at = kInf;
      events[who].push_back({now, c.position, EventKind::Start});
      // The follower, if blocked at this position, is released.
      if (who + 1 < n && !cars[who + 1].moving && cars[who + 1].position == c.position) {
        cars[who + 1].start_at = now + sample_exponential(stream, 1.0);
      }
    } else {
      c.position = cars[who - 1].position;
      c.since = now;
      c.moving = false;
      c.start_at = kInf;
      events[who].push_back({now, c.position, EventKind::Stop});
    }
  }
  return EventLog(config, std::move(events), horizon);
}

}  // namespace slowstart
