#include "slowstart/walks.hpp"

#include <algorithm>
#include <cmath>

#include "slowstart/grid.hpp"

namespace slowstart {

WalkFamily build_walks(const InitialConfig& config, DepartureClocks& clocks, double cutoff) {
  WalkFamily family;
  family.config_ = &config;
  family.cutoff_ = cutoff;
  family.first_label_ = config.first_label();
  const std::size_t n = config.size();
  family.walks_.resize(n + 1);
  auto& walks = family.walks_;
  auto& own = family.own_;
  own.reserve(4 * n);

  // Candidates for skip links, nearest first; the top walk never coalesces.
  std::vector<std::size_t> stack{n};

  for (std::size_t idx = n; idx-- > 0;) {
    const std::int64_t label = family.label_of(idx);
    const double y = config.position(label);
    auto& w = walks[idx];
    w.start = y;
    w.own_begin = own.size();

    double x = y + clocks.at(label, label);
    if (x <= cutoff) {
      own.push_back(x);
      // Cursor over T(label + 1, j) for increasing j; it only moves up.
      std::size_t cursor = idx + 1;
      for (std::int64_t j = label + 1;; ++j) {
        double above = WalkFamily::kInfinity;
        while (cursor != n) {
          const auto& cw = walks[cursor];
          const auto k = static_cast<std::size_t>(j - family.label_of(cursor));
          if (k < cw.own_count) {
            above = own[cw.own_begin + k];
            break;
          }
          if (cw.coalesce_at == WalkFamily::kInfinity) break;
          cursor = cw.next;
        }
        if (above >= x) {
          // B^{label+1} still sits on the level just reached: merge. An exact
          // tie is the pass-through case of the schedule recursion.
          if (above == x) ++family.ties_;
          w.coalesce_at = x;
          break;
        }
        const double next_jump = y + clocks.at(label, j);
        if (next_jump > cutoff) break;
        own.push_back(next_jump);
        x = next_jump;
      }
    }
    w.own_count = static_cast<std::uint32_t>(own.size() - w.own_begin);

    while (stack.back() != n && walks[stack.back()].coalesce_at < w.coalesce_at) {
      stack.pop_back();
    }
    w.next = static_cast<std::uint32_t>(stack.back());
    stack.push_back(idx);
  }
  return family;
}

void WalkFamily::check_x(double x) const {
  if (x > cutoff_) throw OutOfDomain("walk query beyond the cutoff");
}

std::int64_t WalkFamily::value_impl(std::size_t idx, double x, bool left_limit) const {
  const std::size_t top = walks_.size() - 1;
  while (idx != top) {
    const auto& w = walks_[idx];
    const bool past = left_limit ? x > w.coalesce_at : x >= w.coalesce_at;
    if (past) {
      idx = w.next;
      continue;
    }
    const auto begin = own_.begin() + static_cast<std::ptrdiff_t>(w.own_begin);
    const auto end = begin + w.own_count;
    const auto it = left_limit ? std::lower_bound(begin, end, x) : std::upper_bound(begin, end, x);
    return label_of(idx) + (it - begin);
  }
  return label_of(top);
}

std::int64_t WalkFamily::value(std::int64_t i, double x) const {
  check_x(x);
  walk(i);
  return value_impl(index(i), x, false);
}

std::int64_t WalkFamily::value_before(std::int64_t i, double x) const {
  check_x(x);
  walk(i);
  return value_impl(index(i), x, true);
}

double WalkFamily::leave_time_or_inf(std::int64_t i, std::int64_t j) const {
  if (j < i - 1) throw std::out_of_range("leave time needs j >= i - 1");
  std::size_t idx = index(i);
  walk(i);
  const std::size_t top = walks_.size() - 1;
  if (j == i - 1) return walks_[idx].start;
  while (idx != top) {
    const auto& w = walks_[idx];
    const auto k = static_cast<std::size_t>(j - label_of(idx));
    if (k < w.own_count) return own_[w.own_begin + k];
    if (w.coalesce_at == kInfinity) return kInfinity;
    idx = w.next;
  }
  return kInfinity;
}

double WalkFamily::leave_time(std::int64_t i, std::int64_t j) const {
  const double x = leave_time_or_inf(i, j);
  if (x == kInfinity) {
    throw OutOfDomain(j >= top_label() ? "leave time for a car above the configuration"
                                       : "leave time beyond the cutoff");
  }
  return x;
}

void WalkFamily::jumps_between(std::int64_t i, double lo, double hi,
                               std::vector<double>& out) const {
  check_x(hi);
  walk(i);
  std::size_t idx = index(i);
  const std::size_t top = walks_.size() - 1;
  while (idx != top && lo < hi) {
    const auto& w = walks_[idx];
    const double c = w.coalesce_at;
    if (c <= lo) {
      idx = w.next;
      continue;
    }
    const auto begin = own_.begin() + static_cast<std::ptrdiff_t>(w.own_begin);
    const auto end = begin + w.own_count;
    for (auto it = std::upper_bound(begin, end, lo); it != end && *it < c && *it <= hi; ++it) {
      out.push_back(*it);
    }
    if (c > hi) return;
    // The coalescing jump may carry B^i over more than one level when B^{i+1}
    // jumps at the same point.
    const std::int64_t before = label_of(idx) + static_cast<std::int64_t>(w.own_count) - 1;
    const std::int64_t after = value_impl(w.next, c, false);
    for (std::int64_t k = before; k < after; ++k) out.push_back(c);
    lo = c;
    idx = w.next;
  }
}

std::size_t LeaveTimes::offset(std::int64_t i, std::int64_t j) const {
  // Row i holds j = i-1 .. i_max, i.e. i_max - i + 2 entries.
  const auto r = static_cast<std::size_t>(i - i_min_);
  const auto width = static_cast<std::size_t>(i_max_ - i_min_ + 2);
  const std::size_t row_start = r * width - r * (r - 1) / 2;
  return row_start + static_cast<std::size_t>(j - (i - 1));
}

double LeaveTimes::at(std::int64_t i, std::int64_t j) const {
  if (i < i_min_ || i > i_max_ + 1 || j < i - 1 || j > i_max_) {
    throw std::out_of_range("leave time outside the materialized table");
  }
  return values_[offset(i, j)];
}

LeaveTimes leave_times(const WalkFamily& walks, std::int64_t i_min, std::int64_t i_max) {
  LeaveTimes table;
  table.i_min_ = i_min;
  table.i_max_ = i_max;
  if (i_max < i_min) return table;
  const auto rows = static_cast<std::size_t>(i_max - i_min + 2);
  table.values_.resize(rows * (rows + 1) / 2);
  for (std::int64_t i = i_min; i <= i_max + 1; ++i) {
    for (std::int64_t j = i - 1; j <= i_max; ++j) {
      table.values_[table.offset(i, j)] = walks.leave_time_or_inf(i, j);
    }
  }
  return table;
}

LeaveTimes leave_times(const WalkFamily& walks) {
  return leave_times(walks, walks.first_label(), walks.top_label() - 1);
}

MarkedPointSet jams_from_walks(const WalkFamily& walks, double t, Interval window) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be non-negative");
  const double time = grid::snap(t);
  const auto& config = walks.config();
  if (walks.cutoff() < window.hi + time) {
    throw OutOfDomain("walk cutoff below x_hi + t");
  }
  if (!config.covers(config.first_label(), config.end_label() - 1, window.lo, window.hi + time)) {
    throw WindowViolation("jam read-off needs every car in [x_lo, x_hi + t]");
  }
  MarkedPointSet out;
  out.t = time;
  out.frame = Frame::Lattice;
  for (std::int64_t i = config.first_label_at_or_above(window.lo);
       i < config.end_label() && config.position(i) <= window.hi; ++i) {
    const double x = config.position(i) + time;
    const std::int64_t mass = walks.value(i + 1, x) - walks.value(i, x);
    if (mass > 0) out.points.push_back({config.position(i), static_cast<double>(mass)});
  }
  return out;
}

std::vector<double> moving_cars(const WalkFamily& walks, double t, Interval window) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be non-negative");
  const double time = grid::snap(t);
  const auto& config = walks.config();
  if (walks.cutoff() < window.hi + time) throw OutOfDomain("walk cutoff below x_hi + t");
  if (!config.covers(config.first_label(), config.end_label() - 1, window.lo, window.hi + time)) {
    throw WindowViolation("moving-car read-off needs every car in [x_lo, x_hi + t]");
  }
  // A car moving at time t in (y_{i-1}, y_i] left y_i at some T(i,j) with
  // y_{i-1} + t < T(i,j) <= y_i + t, i.e. it is a jump of B^i there.
  std::vector<double> positions;
  std::vector<double> jumps;
  for (std::int64_t i = config.first_label_at_or_above(window.lo); i < config.end_label(); ++i) {
    const double below = i > config.first_label() ? config.position(i - 1) : -WalkFamily::kInfinity;
    if (below >= window.hi) break;
    const double lo = std::max(below, std::nextafter(window.lo, -WalkFamily::kInfinity)) + time;
    const double hi = std::min(config.position(i), window.hi) + time;
    jumps.clear();
    walks.jumps_between(i, lo, hi, jumps);
    for (double x : jumps) {
      const double p = x - time;
      if (p >= window.lo && p <= window.hi) positions.push_back(p);
    }
  }
  return positions;
}

CarState car_state(const WalkFamily& walks, std::int64_t car, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be non-negative");
  const auto& config = walks.config();
  if (!config.has_label(car)) throw std::out_of_range("car outside the configuration");
  for (std::int64_t i = car; i >= config.first_label(); --i) {
    const double y = config.position(i);
    const double leave_point = walks.leave_time_or_inf(i, car);
    if (leave_point == WalkFamily::kInfinity) {
      // Unknown beyond the cutoff; exact as long as y + t stays below it.
      if (walks.cutoff() < y + t) throw OutOfDomain("car state needs cutoff >= y_i + t");
      return {y, 0};
    }
    if (t < leave_point - y) return {y, 0};
    if (i > config.first_label()) {
      if (t < leave_point - config.position(i - 1)) return {leave_point - t, 1};
    } else if (config.extent().lo <= leave_point - t) {
      return {leave_point - t, 1};
    }
  }
  throw WindowViolation("car left the simulated extent");
}

EquivalenceReport check_equivalence(const ScheduleTable& schedule, const LeaveTimes& leave,
                                    const InitialConfig& config) {
  EquivalenceReport report;
  auto record = [&report](double got, double want, std::size_t& counter) {
    if (got != want) {
      ++counter;
      report.max_discrepancy = std::max(report.max_discrepancy, std::fabs(got - want));
    }
  };
  for (std::int64_t j = schedule.i_min(); j <= schedule.i_max(); ++j) {
    for (std::int64_t i = schedule.i_min(); i <= j; ++i) {
      const double y = config.position(i);
      const double arrival = j == i ? 0.0 : leave.at(i + 1, j) - y;
      record(schedule.arrival(i, j), arrival, report.arrival_violations);
      record(schedule.departure(i, j), leave.at(i, j) - y, report.departure_violations);
      ++report.entries_checked;
    }
  }
  return report;
}

}  // namespace slowstart
