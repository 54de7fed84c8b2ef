#include "slowstart/model.hpp"

#include <algorithm>
#include <cmath>

#include "slowstart/grid.hpp"

namespace slowstart {

void ModelParams::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be positive");
  }
  if (!(window.lo < window.hi)) {
    throw std::invalid_argument("window_lo must be smaller than window_hi");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("horizon must be positive");
  }
}

InitialConfig::InitialConfig(Interval extent, bool palm, std::int64_t first_label,
                             std::vector<double> positions)
    : extent_(extent), palm_(palm), first_label_(first_label), positions_(std::move(positions)) {
  for (std::size_t k = 1; k < positions_.size(); ++k) {
    if (!(positions_[k - 1] < positions_[k])) {
      throw std::invalid_argument("car positions must be strictly increasing");
    }
  }
}

std::int64_t InitialConfig::first_label_at_or_above(double x) const {
  const auto it = std::lower_bound(positions_.begin(), positions_.end(), x);
  return first_label_ + static_cast<std::int64_t>(it - positions_.begin());
}

bool InitialConfig::covers(std::int64_t i_min, std::int64_t i_max, double lo,
                           double hi) const {
  if (i_max < i_min) {
    // An empty label range only covers an interval with no cars in it.
    return extent_.lo <= lo && hi <= extent_.hi &&
           first_label_at_or_above(lo) == first_label_at_or_above(std::nextafter(hi, INFINITY));
  }
  const bool lower_ok = i_min > first_label_ ? position(i_min - 1) < lo : extent_.lo <= lo;
  const bool upper_ok = i_max + 1 < end_label() ? position(i_max + 1) > hi : extent_.hi >= hi;
  return lower_ok && upper_ok;
}

InitialConfig generate_initial(const ModelParams& params, Interval extent) {
  params.validate();
  if (!(extent.lo < extent.hi)) throw std::invalid_argument("extent requires lo < hi");
  grid::check_range(extent.lo);
  grid::check_range(extent.hi);

  // Two one-sided spacing streams from the origin keep labels anchored at 0:
  // the k-th point left of 0 has label 1 - k (-k under palm, where car 0 sits
  // at the origin) and the k-th point right of 0 has label k.
  std::vector<double> positions;
  std::int64_t first_label = 1;
  bool have_first = false;
  auto keep = [&](double y, std::int64_t label) {
    if (!extent.contains(y)) return;
    if (!have_first) {
      first_label = label;
      have_first = true;
    }
    positions.push_back(y);
  };

  if (extent.lo < 0.0) {
    auto stream = derive_stream(params.seed, StreamTag::initial_left());
    const auto left = sample_poisson_points(stream, 0.0, -extent.lo, params.lambda);
    const std::int64_t top_left_label = params.palm ? -1 : 0;
    for (std::size_t k = left.size(); k-- > 0;) {
      keep(-left[k], top_left_label - static_cast<std::int64_t>(k));
    }
  }
  if (params.palm) keep(0.0, 0);
  if (extent.hi > 0.0) {
    auto stream = derive_stream(params.seed, StreamTag::initial_right());
    const auto right = sample_poisson_points(stream, 0.0, extent.hi, params.lambda);
    for (std::size_t k = 0; k < right.size(); ++k) {
      keep(right[k], static_cast<std::int64_t>(k) + 1);
    }
  }
  return InitialConfig(extent, params.palm, first_label, std::move(positions));
}

DepartureClocks::Site& DepartureClocks::site(std::int64_t label) {
  if (cached_ != nullptr && cached_label_ == label) return *cached_;
  auto it = sites_.find(label);
  if (it == sites_.end()) {
    it = sites_.emplace(label, Site{derive_stream(seed_, StreamTag::clocks(label)), {}, false})
             .first;
  }
  cached_label_ = label;
  cached_ = &it->second;
  return it->second;
}

double DepartureClocks::at(std::int64_t site_label, std::int64_t j) {
  if (j < site_label) throw std::out_of_range("clock index j must be >= site");
  Site& s = site(site_label);
  const auto k = static_cast<std::size_t>(j - site_label);
  if (k >= s.values.size() && s.fixed) {
    throw std::out_of_range("clock index beyond hand-set values");
  }
  while (s.values.size() <= k) {
    const double previous = s.values.empty() ? 0.0 : s.values.back();
    s.values.push_back(next_poisson_point(s.stream, previous, 1.0));
  }
  return s.values[k];
}

void DepartureClocks::set(std::int64_t site_label, std::vector<double> values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] > 0.0) || (k > 0 && !(values[k] > values[k - 1]))) {
      throw std::invalid_argument("clock values must be positive and increasing");
    }
  }
  Site& s = site(site_label);
  s.values = std::move(values);
  s.fixed = true;
}

ScheduleTable build_schedule(const InitialConfig& config, DepartureClocks& clocks,
                             std::int64_t i_min, std::int64_t i_max) {
  ScheduleTable table;
  table.i_min_ = i_min;
  table.i_max_ = i_max;
  if (i_max < i_min) return table;
  if (!config.has_label(i_min) || !config.has_label(i_max)) {
    throw std::out_of_range("schedule car range outside the configuration");
  }
  const auto n = static_cast<std::size_t>(i_max - i_min + 1);
  table.a_.resize(n * (n + 1) / 2);
  table.d_.resize(n * (n + 1) / 2);

  // Column j depends on column j-1 (through D(i,j-1)) and on the entry just
  // above it in the same column (through D(i+1,j)).
  for (std::int64_t j = i_min; j <= i_max; ++j) {
    const std::size_t base = table.offset(i_min, j);
    const std::size_t prev_base = j > i_min ? table.offset(i_min, j - 1) : 0;
    const auto jj = static_cast<std::size_t>(j - i_min);
    table.a_[base + jj] = 0.0;
    table.d_[base + jj] = clocks.at(j, j);
    for (std::int64_t i = j - 1; i >= i_min; --i) {
      const auto ii = static_cast<std::size_t>(i - i_min);
      const double arrive =
          table.d_[base + ii + 1] + config.position(i + 1) - config.position(i);
      const double previous_leaves = table.d_[prev_base + ii];
      table.a_[base + ii] = arrive;
      if (arrive > previous_leaves) {
        table.d_[base + ii] = arrive;
      } else if (arrive < previous_leaves) {
        table.d_[base + ii] = clocks.at(i, j);
      } else {
        table.d_[base + ii] = arrive;
        ++table.ties_;
      }
    }
  }
  return table;
}

ScheduleTable build_schedule(const InitialConfig& config, DepartureClocks& clocks) {
  return build_schedule(config, clocks, config.first_label(), config.end_label() - 1);
}

CarState TrajectorySample::at(double t) const {
  for (const auto& seg : segments_) {
    if (t >= seg.t_start && t < seg.t_end) {
      return {seg.position_start - seg.speed * (t - seg.t_start), seg.speed};
    }
  }
  if (!segments_.empty() && t == segments_.back().t_end) {
    const auto& seg = segments_.back();
    return {seg.position_start - seg.speed * (t - seg.t_start), seg.speed};
  }
  throw std::out_of_range("time outside the sampled trajectory");
}

TrajectorySample trajectory(const ScheduleTable& schedule, const InitialConfig& config,
                            std::int64_t car, double horizon) {
  if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be non-negative");
  if (car < schedule.i_min() || car > schedule.i_max()) {
    throw std::out_of_range("car outside the schedule range");
  }
  const double y_car = config.position(car);
  if (!config.covers(schedule.i_min(), car, y_car - horizon, y_car)) {
    throw WindowViolation("trajectory needs every car in [y_j - T, y_j]");
  }
  std::vector<Segment> segments;
  for (std::int64_t i = car; i >= schedule.i_min(); --i) {
    const double arrive = schedule.arrival(i, car);
    const double leave = schedule.departure(i, car);
    if (arrive >= horizon) break;
    const double y = config.position(i);
    if (leave > arrive) segments.push_back({arrive, std::min(leave, horizon), y, 0});
    if (leave >= horizon) break;
    const double next_arrive = i > schedule.i_min()
                                   ? schedule.arrival(i - 1, car)
                                   : std::numeric_limits<double>::infinity();
    segments.push_back({leave, std::min(next_arrive, horizon), y, 1});
  }
  return TrajectorySample(car, std::move(segments));
}

std::string frame_name(Frame frame) {
  switch (frame) {
    case Frame::Lattice: return "lattice";
    case Frame::RescaledSupercritical: return "rescaled-supercritical";
    case Frame::RescaledCritical: return "rescaled-critical";
    case Frame::Continuum: return "continuum";
  }
  return "unknown";
}

double MarkedPointSet::total_mass() const {
  double total = 0.0;
  for (const auto& p : points) total += p.mass;
  return total;
}

MarkedPointSet jam_configuration(const ScheduleTable& schedule, const InitialConfig& config,
                                 double t, Interval window) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be non-negative");
  const double time = grid::snap(t);
  if (!config.covers(schedule.i_min(), schedule.i_max(), window.lo, window.hi + time)) {
    throw WindowViolation("jam read-off needs every car in [x_lo, x_hi + t]");
  }
  MarkedPointSet out;
  out.t = time;
  out.frame = Frame::Lattice;
  for (std::int64_t i = config.first_label_at_or_above(window.lo);
       i <= schedule.i_max() && config.position(i) <= window.hi; ++i) {
    if (i < schedule.i_min()) continue;
    std::int64_t mass = 0;
    for (std::int64_t j = i; j <= schedule.i_max(); ++j) {
      const double arrive = schedule.arrival(i, j);
      if (arrive > time) break;  // arrivals increase in j
      if (time < schedule.departure(i, j)) ++mass;
    }
    if (mass > 0) out.points.push_back({config.position(i), static_cast<double>(mass)});
  }
  return out;
}

}  // namespace slowstart
