#include "slowstart/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "slowstart/farm.hpp"

namespace slowstart {

namespace {

std::uint64_t sub_seed(std::uint64_t replica, std::int64_t purpose) {
  return derive_stream(replica, StreamTag::reference(purpose)).next_u64();
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double exponential_cdf(double rate, double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); }

}  // namespace

EstimateWithCI mean_estimate(std::string tag, const std::vector<double>& xs) {
  EstimateWithCI e;
  e.tag = std::move(tag);
  e.replicas = xs.size();
  if (xs.empty()) return e;
  e.estimate = mean_of(xs);
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.estimate) * (x - e.estimate);
    const double n = static_cast<double>(xs.size());
    e.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return e;
}

EstimateWithCI ratio_estimate(std::string tag, const std::vector<double>& num,
                              const std::vector<double>& den) {
  if (num.size() != den.size()) throw std::invalid_argument("ratio needs paired samples");
  EstimateWithCI e;
  e.tag = std::move(tag);
  e.replicas = num.size();
  const double sn = std::accumulate(num.begin(), num.end(), 0.0);
  const double sd = std::accumulate(den.begin(), den.end(), 0.0);
  if (num.empty() || sd == 0.0) return e;
  e.estimate = sn / sd;
  if (num.size() > 1) {
    const double n = static_cast<double>(num.size());
    const double mean_den = sd / n;
    double ss = 0.0;
    for (std::size_t k = 0; k < num.size(); ++k) {
      const double r = num[k] - e.estimate * den[k];
      ss += r * r;
    }
    e.se = std::sqrt(ss / (n - 1.0) / n) / mean_den;
  }
  return e;
}

SlopeFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit needs paired points");
  if (x.size() < 3) throw std::invalid_argument("slope fit needs at least 3 points");
  SlopeFit f;
  f.x = x;
  f.y = y;
  const double n = static_cast<double>(x.size());
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("slope fit needs distinct abscissae");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - f.intercept - f.slope * x[k];
    rss += r * r;
  }
  f.residual_rms = std::sqrt(rss / n);
  return f;
}

SlopeFit fit_power_law(const std::vector<double>& t, const std::vector<double>& value) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!(t[k] > 0.0) || !(value[k] > 0.0)) {
      throw std::invalid_argument("power-law fit needs positive data");
    }
    lx.push_back(std::log(t[k]));
    ly.push_back(std::log(value[k]));
  }
  return fit_line(lx, ly);
}

std::string regime_name(Regime regime) {
  return regime == Regime::Supercritical ? "supercritical" : "critical";
}

Regime parse_regime(const std::string& name) {
  if (name == "supercritical") return Regime::Supercritical;
  if (name == "critical") return Regime::Critical;
  throw std::invalid_argument("unknown regime '" + name + "' (valid: supercritical, critical)");
}

void RescaleSpec::validate() const {
  if (!(L > 0.0)) throw std::invalid_argument("scales_L must be positive");
  if (regime == Regime::Supercritical && !(lambda > 1.0)) {
    throw std::invalid_argument("supercritical regime needs lambda > 1");
  }
  if (regime == Regime::Critical && lambda != 1.0) {
    throw std::invalid_argument("critical regime needs lambda = 1");
  }
}

double RescaleSpec::position_scale() const {
  return regime == Regime::Supercritical ? std::sqrt(L) / (lambda - 1.0) : L;
}

Interval RescaleSpec::lattice_window(Interval rescaled) const {
  const double s = position_scale();
  return {rescaled.lo * s, rescaled.hi * s};
}

MarkedPointSet rescale(const MarkedPointSet& mps, const RescaleSpec& rescaling) {
  rescaling.validate();
  if (mps.frame != Frame::Lattice) throw std::invalid_argument("rescale needs a lattice frame");
  MarkedPointSet out;
  out.t = mps.t / rescaling.L;
  out.frame = rescaling.regime == Regime::Supercritical ? Frame::RescaledSupercritical
                                                   : Frame::RescaledCritical;
  const double s = rescaling.position_scale();
  const double root = std::sqrt(rescaling.L);
  for (const auto& p : mps.points) out.points.push_back({p.position / s, p.mass / root});
  return out;
}

VelocityReport estimate_velocity(double lambda, double t, const RunOptions& opts) {
  if (!(t > 0.0)) throw std::invalid_argument("horizon must be positive");
  VelocityReport report;
  report.target = std::min(1.0 / lambda, 1.0);
  report.samples = run_replicas<double>(opts.replicas, opts.threads, [&](std::size_t r) {
    ModelParams p;
    p.lambda = lambda;
    p.palm = true;
    p.seed = replica_seed(opts.seed, static_cast<std::int64_t>(r));
    const auto config = generate_initial(p, {-t, 0.0});
    DepartureClocks clocks(p.seed);
    const auto walks = build_walks(config, clocks, t);
    return -car_state(walks, 0, t).position / t;
  });
  report.velocity = mean_estimate("velocity", report.samples);
  return report;
}

WalkVelocity velocity_via_walks(const WalkFamily& walks, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  const auto& config = walks.config();
  if (!config.has_label(-n) || !config.has_label(0)) {
    throw WindowViolation("walk velocity needs cars -n..0");
  }
  const double y = config.position(-n);
  const double elapsed = walks.leave_time(-n, 0) - y;
  return {-y / elapsed, static_cast<double>(n) / elapsed};
}

WalkVelocityReport estimate_velocity_via_walks(double lambda, std::int64_t n,
                                               const RunOptions& opts) {
  struct Pair {
    double velocity = 0.0;
    double ratio = 0.0;
  };
  const auto results = run_replicas<Pair>(opts.replicas, opts.threads, [&](std::size_t r) {
    ModelParams p;
    p.lambda = lambda;
    p.palm = true;
    p.seed = replica_seed(opts.seed, static_cast<std::int64_t>(r));
    double reach = (static_cast<double>(n) + 10.0 * std::sqrt(static_cast<double>(n)) + 10.0) /
                   lambda;
    InitialConfig config = generate_initial(p, {-reach, 0.0});
    while (!config.has_label(-n)) {
      reach *= 2.0;
      config = generate_initial(p, {-reach, 0.0});
    }
    DepartureClocks clocks(p.seed);
    const auto walks = build_walks(config, clocks);
    const auto v = velocity_via_walks(walks, n);
    return Pair{v.velocity, v.jump_ratio};
  });
  std::vector<double> v;
  std::vector<double> q;
  for (const auto& x : results) {
    v.push_back(x.velocity);
    q.push_back(x.ratio);
  }
  return {mean_estimate("velocity-via-walks", v), mean_estimate("jump-ratio", q)};
}

PoissonReport moving_car_test(double lambda, double t, Interval window, const RunOptions& opts) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be non-negative");
  // Forward spacings look past the window edge so the spacing of the last
  // car inside is not truncated.
  const double margin = 20.0 / std::min(1.0, lambda);
  const Interval view{window.lo, window.hi + margin};
  struct Sample {
    double intensity = 0.0;
    std::vector<double> spacings;
  };
  const auto results = run_replicas<Sample>(opts.replicas, opts.threads, [&](std::size_t r) {
    ModelParams p;
    p.lambda = lambda;
    p.seed = replica_seed(opts.seed, static_cast<std::int64_t>(r));
    const Interval extent{view.lo, view.hi + t};
    const auto config = generate_initial(p, extent);
    DepartureClocks clocks(p.seed);
    const auto walks = build_walks(config, clocks, extent.hi);
    const auto moving = moving_cars(walks, t, view);
    Sample s;
    std::size_t inside = 0;
    for (std::size_t k = 0; k < moving.size() && moving[k] <= window.hi; ++k) {
      ++inside;
      if (k + 1 < moving.size()) s.spacings.push_back(moving[k + 1] - moving[k]);
    }
    s.intensity = static_cast<double>(inside) / window.length();
    return s;
  });
  PoissonReport report;
  report.target = std::min(1.0, lambda);
  std::vector<double> intensity;
  for (const auto& s : results) {
    intensity.push_back(s.intensity);
    report.spacing_sample.insert(report.spacing_sample.end(), s.spacings.begin(),
                                 s.spacings.end());
  }
  report.intensity = mean_estimate("moving-intensity", intensity);
  report.spacings = report.spacing_sample.size();
  report.empty_sample = report.spacing_sample.empty();
  const double rate = report.target;
  report.spacing_ks = ks_one_sample(report.spacing_sample,
                                    [rate](double x) { return exponential_cdf(rate, x); });
  return report;
}

JamSweep jam_sweep(double lambda, const std::vector<double>& times, Interval window,
                   const RunOptions& opts) {
  if (times.empty()) throw std::invalid_argument("times must not be empty");
  if (!(window.lo < window.hi)) throw std::invalid_argument("window_lo must be below window_hi");
  const double t_max = *std::max_element(times.begin(), times.end());
  struct Sample {
    std::vector<double> count;
    std::vector<double> mass;
  };
  const auto results = run_replicas<Sample>(opts.replicas, opts.threads, [&](std::size_t r) {
    ModelParams p;
    p.lambda = lambda;
    p.seed = replica_seed(opts.seed, static_cast<std::int64_t>(r));
    const Interval extent{window.lo, window.hi + t_max};
    const auto config = generate_initial(p, extent);
    DepartureClocks clocks(p.seed);
    const auto walks = build_walks(config, clocks, extent.hi);
    Sample s;
    for (double t : times) {
      const auto jams = jams_from_walks(walks, t, window);
      s.count.push_back(static_cast<double>(jams.points.size()));
      s.mass.push_back(jams.total_mass());
    }
    return s;
  });
  JamSweep sweep;
  sweep.lambda = lambda;
  sweep.window = window;
  const double len = window.length();
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<double> count;
    std::vector<double> mass;
    std::vector<double> density;
    std::vector<double> stopped;
    for (const auto& s : results) {
      count.push_back(s.count[k]);
      mass.push_back(s.mass[k]);
      density.push_back(s.count[k] / len);
      stopped.push_back(s.mass[k] / (lambda * len));
    }
    JamSweepPoint pt;
    pt.t = times[k];
    pt.intensity = mean_estimate("jam-intensity", density);
    pt.mean_mass = ratio_estimate("jam-mass", mass, count);
    const auto mean_count = mean_estimate("jam-count", count);
    pt.spacing.tag = "jam-spacing";
    pt.spacing.replicas = mean_count.replicas;
    if (mean_count.estimate > 0.0) {
      pt.spacing.estimate = len / mean_count.estimate;
      pt.spacing.se = len * mean_count.se / (mean_count.estimate * mean_count.estimate);
    }
    pt.stopped_fraction = mean_estimate("stopped-fraction", stopped);
    sweep.points.push_back(pt);
  }
  return sweep;
}

DecayReport jam_decay_fit(double lambda, const std::vector<double>& times, Interval window,
                          const RunOptions& opts) {
  if (!(lambda > 1.0)) throw std::invalid_argument("jam decay needs lambda > 1");
  if (times.size() < 3) throw std::invalid_argument("times needs at least 3 points");
  DecayReport report;
  report.sweep = jam_sweep(lambda, times, window, opts);
  std::vector<double> ts;
  std::vector<double> intensity;
  std::vector<double> mass;
  for (const auto& pt : report.sweep.points) {
    if (pt.intensity.estimate > 0.0) {
      ts.push_back(pt.t);
      intensity.push_back(pt.intensity.estimate);
      mass.push_back(pt.mean_mass.estimate);
    } else {
      report.dropped_times.push_back(pt.t);
    }
  }
  report.intensity_fit = fit_power_law(ts, intensity);
  report.mass_fit = fit_power_law(ts, mass);
  return report;
}

CriticalReport critical_growth_fit(const std::vector<double>& times, Interval window,
                                   const RunOptions& opts) {
  if (times.size() < 3) throw std::invalid_argument("times needs at least 3 points");
  CriticalReport report;
  report.sweep = jam_sweep(1.0, times, window, opts);
  std::vector<double> ts;
  std::vector<double> mass;
  std::vector<double> spacing;
  for (const auto& pt : report.sweep.points) {
    if (pt.intensity.estimate > 0.0) {
      ts.push_back(pt.t);
      mass.push_back(pt.mean_mass.estimate);
      spacing.push_back(pt.spacing.estimate);
    } else {
      report.dropped_times.push_back(pt.t);
    }
  }
  report.mass_fit = fit_power_law(ts, mass);
  report.spacing_fit = fit_power_law(ts, spacing);
  report.stopped_decreasing = true;
  for (std::size_t k = 1; k < report.sweep.points.size(); ++k) {
    if (!(report.sweep.points[k].stopped_fraction.estimate <
          report.sweep.points[k - 1].stopped_fraction.estimate)) {
      report.stopped_decreasing = false;
    }
  }
  return report;
}

CondensationReport condensation_probe(double lambda, std::int64_t first, std::int64_t second,
                                      double t, const RunOptions& opts) {
  if (first < 0 || !(first < second)) throw std::invalid_argument("need 0 <= first < second");
  if (!(t >= 0.0)) throw std::invalid_argument("time must be non-negative");
  struct Outcome {
    double both_moving = 0.0;
    double same = 0.0;
    double stopped = 0.0;
    double any_stopped = 0.0;
  };
  const auto results = run_replicas<Outcome>(opts.replicas, opts.threads, [&](std::size_t r) {
    ModelParams p;
    p.lambda = lambda;
    p.palm = true;
    p.seed = replica_seed(opts.seed, static_cast<std::int64_t>(r));
    // Car k depends on the cars in [y_k - t, y_k]; y_first >= 0.
    double reach = (static_cast<double>(second) + 20.0) / lambda;
    InitialConfig config = generate_initial(p, {-t - 1.0, reach});
    while (!config.has_label(second)) {
      reach *= 2.0;
      config = generate_initial(p, {-t - 1.0, reach});
    }
    DepartureClocks clocks(p.seed);
    const auto walks = build_walks(config, clocks, config.position(second) + t);
    const auto a = car_state(walks, first, t);
    const auto b = car_state(walks, second, t);
    Outcome o;
    o.both_moving = a.speed == 1 && b.speed == 1;
    o.same = a.speed == 0 && b.speed == 0 && a.position == b.position;
    o.stopped = a.speed == 0;
    o.any_stopped = a.speed == 0 || b.speed == 0;
    return o;
  });
  CondensationReport report;
  report.first_car = first;
  report.second_car = second;
  report.t = t;
  std::vector<double> both, same, other, either, stopped, any;
  for (const auto& o : results) {
    both.push_back(o.both_moving);
    same.push_back(o.same);
    other.push_back(1.0 - o.both_moving - o.same);
    either.push_back(o.both_moving + o.same);
    stopped.push_back(o.stopped);
    any.push_back(o.any_stopped);
  }
  report.both_moving = mean_estimate("both-moving", both);
  report.same_jam = mean_estimate("same-jam", same);
  report.otherwise = mean_estimate("otherwise", other);
  report.moving_or_same = mean_estimate("moving-or-same-jam", either);
  report.stopped = mean_estimate("stopped", stopped);
  report.same_given_stopped = ratio_estimate("same-jam-given-stopped", same, any);
  return report;
}

std::vector<double> mm1_departures(double lambda, double horizon, RngStream& stream) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  std::vector<double> departures;
  double arrival = 0.0;
  double last = 0.0;
  while (true) {
    arrival += sample_exponential(stream, lambda);
    if (arrival > horizon) break;
    last = std::max(arrival, last) + sample_exponential(stream, 1.0);
    if (last > horizon) break;
    departures.push_back(last);
  }
  return departures;
}

std::vector<double> origin_crossing_times(const WalkFamily& walks, double horizon) {
  std::vector<double> out;
  if (walks.first_label() > 1 || walks.top_label() < 1) {
    throw WindowViolation("origin crossings need the cars in (0, horizon]");
  }
  walks.jumps_between(1, 0.0, horizon, out);
  return out;
}

CrossingReport origin_crossings(double lambda, double horizon, const RunOptions& opts) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  struct Sample {
    std::vector<double> crossings;
    std::vector<double> departures;
  };
  const auto results = run_replicas<Sample>(opts.replicas, opts.threads, [&](std::size_t r) {
    ModelParams p;
    p.lambda = lambda;
    p.seed = replica_seed(opts.seed, static_cast<std::int64_t>(r));
    const auto config = generate_initial(p, {0.0, horizon});
    DepartureClocks clocks(p.seed);
    const auto walks = build_walks(config, clocks, horizon);
    Sample s;
    s.crossings = origin_crossing_times(walks, horizon);
    auto queue = derive_stream(p.seed, StreamTag::queue());
    s.departures = mm1_departures(lambda, horizon, queue);
    return s;
  });
  CrossingReport report;
  report.target = std::min(1.0, lambda);
  std::vector<double> late_rate;
  std::vector<double> late_spacings;
  const double half = 0.5 * horizon;
  for (const auto& s : results) {
    report.crossings += s.crossings.size();
    report.departures += s.departures.size();
    std::size_t late = 0;
    for (std::size_t k = 0; k < s.crossings.size(); ++k) {
      if (s.crossings[k] > half) ++late;
      if (k == 0) continue;
      report.crossing_spacings.push_back(s.crossings[k] - s.crossings[k - 1]);
      if (s.crossings[k - 1] > half) late_spacings.push_back(s.crossings[k] - s.crossings[k - 1]);
    }
    late_rate.push_back(static_cast<double>(late) / (horizon - half));
    for (std::size_t k = 1; k < s.departures.size(); ++k) {
      report.departure_spacings.push_back(s.departures[k] - s.departures[k - 1]);
    }
  }
  report.late_rate = mean_estimate("crossing-rate", late_rate);
  report.spacing_vs_queue = ks_two_sample(report.crossing_spacings, report.departure_spacings);
  const double rate = report.target;
  report.late_vs_exponential =
      ks_one_sample(late_spacings, [rate](double x) { return exponential_cdf(rate, x); });
  return report;
}

bool non_increasing(const std::vector<double>& values) {
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[k - 1]) return false;
  }
  return true;
}

namespace {

ContinuumRun run_oracle(Regime regime, const GridParams& grid, const std::vector<double>& times,
                        std::uint64_t seed, Coupling coupling) {
  return regime == Regime::Supercritical ? simulate_coalescing_bm(grid, times, seed, coupling)
                                         : simulate_reflected_web(grid, times, seed, coupling);
}

std::vector<double> column(const std::vector<Functionals>& fs, double Functionals::*field) {
  std::vector<double> out;
  for (const auto& f : fs) out.push_back(f.*field);
  return out;
}

std::vector<double> counts(const std::vector<Functionals>& fs) {
  std::vector<double> out;
  for (const auto& f : fs) out.push_back(static_cast<double>(f.count));
  return out;
}

}  // namespace

ScalingReport scaling_comparison(const ScalingSettings& s, const RunOptions& opts) {
  if (s.scales.empty() || s.times.empty()) {
    throw std::invalid_argument("scaling needs scales_L and times");
  }
  if (s.translations < 1) throw std::invalid_argument("translations must be positive");
  for (double L : s.scales) RescaleSpec{L, s.lambda, s.regime}.validate();
  const double t_max = *std::max_element(s.times.begin(), s.times.end());
  const std::size_t nt = s.times.size();
  const std::size_t nw = s.translations;
  // Disjoint translates of the window; stationarity in space makes them
  // identically distributed.
  std::vector<Interval> windows;
  for (std::size_t k = 0; k < nw; ++k) {
    const double shift = static_cast<double>(k) * s.window.length();
    windows.push_back({s.window.lo - shift, s.window.hi - shift});
  }
  const Interval hull{windows.back().lo, s.window.hi};
  auto summarize = [&](const MarkedPointSet& mps, std::vector<Functionals>& out) {
    for (const auto& w : windows) out.push_back(extract_functionals(mps, w, s.mass_floor));
  };

  ScalingReport report;
  report.settings = s;

  GridParams grid;
  grid.extent = {hull.lo - s.margin, hull.hi + s.margin};
  grid.h = s.grid_step;
  grid.dt = s.dt;
  grid.t = t_max;
  grid.validate();
  const auto continuum =
      run_replicas<std::vector<Functionals>>(s.continuum_replicas, opts.threads, [&](std::size_t r) {
        const auto seed = sub_seed(replica_seed(opts.seed, static_cast<std::int64_t>(r)), 1);
        const auto run = run_oracle(s.regime, grid, s.times, seed, {});
        std::vector<Functionals> out;
        for (const auto& snap : run.snapshots) summarize(snap, out);
        return out;
      });
  for (const auto& row : continuum) {
    report.continuum_sample.insert(report.continuum_sample.end(), row.begin(), row.end());
  }

  for (std::size_t li = 0; li < s.scales.size(); ++li) {
    const double L = s.scales[li];
    const RescaleSpec rescaling{L, s.lambda, s.regime};
    const Interval lattice_hull = rescaling.lattice_window(hull);
    const auto lattice = run_replicas<std::vector<Functionals>>(
        s.lattice_replicas, opts.threads, [&](std::size_t r) {
          ModelParams p;
          p.lambda = s.lambda;
          p.seed = sub_seed(replica_seed(opts.seed, static_cast<std::int64_t>(r)),
                            2 + static_cast<std::int64_t>(li));
          const Interval extent{lattice_hull.lo, lattice_hull.hi + rescaling.lattice_time(t_max)};
          const auto config = generate_initial(p, extent);
          DepartureClocks clocks(p.seed);
          const auto walks = build_walks(config, clocks, extent.hi);
          std::vector<Functionals> out;
          for (double t : s.times) {
            summarize(rescale(jams_from_walks(walks, rescaling.lattice_time(t), lattice_hull), rescaling),
                      out);
          }
          return out;
        });

    double target_sum = 0.0;
    double all_sum = 0.0;
    for (std::size_t ti = 0; ti < nt; ++ti) {
      std::vector<Functionals> lat;
      std::vector<Functionals> con;
      for (const auto& row : lattice) lat.insert(lat.end(), row.begin() + ti * nw, row.begin() + (ti + 1) * nw);
      for (const auto& row : continuum) con.insert(con.end(), row.begin() + ti * nw, row.begin() + (ti + 1) * nw);
      ScalingCell cell;
      cell.L = L;
      cell.t = s.times[ti];
      cell.count = ks_two_sample(counts(lat), counts(con));
      cell.total_mass = ks_two_sample(column(lat, &Functionals::total_mass),
                                      column(con, &Functionals::total_mass));
      cell.max_mass = ks_two_sample(column(lat, &Functionals::max_mass),
                                    column(con, &Functionals::max_mass));
      cell.lattice_mean_count = mean_of(counts(lat));
      cell.continuum_mean_count = mean_of(counts(con));
      cell.lattice_mean_mass = mean_of(column(lat, &Functionals::total_mass));
      cell.continuum_mean_mass = mean_of(column(con, &Functionals::total_mass));
      const double target =
          s.regime == Regime::Critical ? cell.count.statistic : cell.total_mass.statistic;
      target_sum += target;
      all_sum += cell.count.statistic + cell.total_mass.statistic + cell.max_mass.statistic;
      if (li + 1 == s.scales.size()) {
        report.final_target_distance = std::max(report.final_target_distance, target);
      }
      report.cells.push_back(cell);
    }
    report.mean_target_distance.push_back(target_sum / static_cast<double>(nt));
    report.mean_distance.push_back(all_sum / static_cast<double>(3 * nt));
  }
  report.monotone = non_increasing(report.mean_distance);

  const std::size_t split = std::min(s.lattice_replicas, continuum.size() / 2);
  double floor_sum = 0.0;
  for (std::size_t ti = 0; ti < nt; ++ti) {
    std::vector<Functionals> head;
    std::vector<Functionals> tail;
    for (std::size_t r = 0; r < continuum.size(); ++r) {
      auto& dst = r < split ? head : tail;
      dst.insert(dst.end(), continuum[r].begin() + ti * nw, continuum[r].begin() + (ti + 1) * nw);
    }
    floor_sum += ks_two_sample(counts(head), counts(tail)).statistic +
                 ks_two_sample(column(head, &Functionals::total_mass),
                               column(tail, &Functionals::total_mass)).statistic +
                 ks_two_sample(column(head, &Functionals::max_mass),
                               column(tail, &Functionals::max_mass)).statistic;
  }
  report.noise_floor = floor_sum / static_cast<double>(3 * nt);
  return report;
}

SelfConvergenceReport continuum_self_convergence(Regime regime, const GridParams& coarse,
                                                 Interval window, double mass_floor,
                                                 const RunOptions& opts) {
  coarse.validate();
  GridParams fine = coarse;
  fine.h = coarse.h / 2.0;
  fine.dt = coarse.dt / 2.0;
  fine.validate();
  struct Pair {
    Functionals coarse;
    Functionals fine;
    std::uint64_t reflection = 0;
    std::uint64_t order = 0;
  };
  const auto results = run_replicas<Pair>(opts.replicas, opts.threads, [&](std::size_t r) {
    const auto seed = sub_seed(replica_seed(opts.seed, static_cast<std::int64_t>(r)), 1);
    const Coupling fine_coupling{};
    const auto a = run_oracle(regime, coarse, {coarse.t}, seed, Coupling::coarser(fine_coupling));
    const auto b = run_oracle(regime, fine, {fine.t}, seed, fine_coupling);
    Pair p;
    p.coarse = extract_functionals(a.snapshots.front(), window, mass_floor);
    p.fine = extract_functionals(b.snapshots.front(), window, mass_floor);
    p.reflection = a.diagnostics.reflection_violations + b.diagnostics.reflection_violations;
    p.order = a.diagnostics.order_violations + b.diagnostics.order_violations;
    return p;
  });
  std::vector<Functionals> c;
  std::vector<Functionals> f;
  SelfConvergenceReport report;
  std::size_t within = 0;
  for (const auto& p : results) {
    c.push_back(p.coarse);
    f.push_back(p.fine);
    report.reflection_violations += p.reflection;
    report.order_violations += p.order;
    const auto diff = static_cast<long long>(p.coarse.count) - static_cast<long long>(p.fine.count);
    if (std::llabs(diff) <= 1) ++within;
  }
  report.count = ks_two_sample(counts(c), counts(f));
  report.total_mass =
      ks_two_sample(column(c, &Functionals::total_mass), column(f, &Functionals::total_mass));
  report.max_mass =
      ks_two_sample(column(c, &Functionals::max_mass), column(f, &Functionals::max_mass));
  report.count_within_one =
      results.empty() ? 0.0 : static_cast<double>(within) / static_cast<double>(results.size());
  return report;
}

MeetingReport two_path_meeting(double c, double t, double dt, const RunOptions& opts) {
  if (!(c > 0.0)) throw std::invalid_argument("distance must be positive");
  GridParams grid;
  grid.extent = {0.0, c};
  grid.h = c;
  grid.dt = dt;
  grid.t = t;
  grid.validate();
  const auto apart = run_replicas<double>(opts.replicas, opts.threads, [&](std::size_t r) {
    const auto seed = sub_seed(replica_seed(opts.seed, static_cast<std::int64_t>(r)), 1);
    const auto mps = simulate_coalescing_bm(grid, seed);
    return mps.points.empty() ? 0.0 : 1.0;
  });
  MeetingReport report;
  report.distinct = mean_estimate("two-path-distinct", apart);
  report.target = std::erf(c / (2.0 * std::sqrt(t)));
  return report;
}

}  // namespace slowstart
