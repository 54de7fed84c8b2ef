#include "slowstart/app.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "slowstart/continuum.hpp"
#include "slowstart/farm.hpp"
#include "slowstart/model.hpp"
#include "slowstart/stats.hpp"
#include "slowstart/walks.hpp"

#ifndef SLOWSTART_CALIBRATION_FILE
#define SLOWSTART_CALIBRATION_FILE "calibration/calibration.cfg"
#endif

namespace slowstart::app {

namespace {

using json = nlohmann::ordered_json;
using io::ConfigError;
using io::format_double;

constexpr std::size_t kMaxScheduleCars = 4000;

json estimate_json(const EstimateWithCI& e) {
  return {{"tag", e.tag},
          {"estimate", e.estimate},
          {"se", e.se},
          {"replicas", e.replicas},
          {"half_width", e.half_width()}};
}

json ks_json(const KsResult& k) {
  return {{"statistic", k.statistic}, {"p_value", k.p_value}, {"effective_n", k.effective_n}};
}

json fit_json(const SlopeFit& f) {
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"residual_rms", f.residual_rms},
          {"log_t", f.x},
          {"log_value", f.y}};
}

class Bars {
 public:
  void at_most(const std::string& name, double value, double bar) {
    add(name, value, "<=", {bar}, value <= bar);
  }
  void below(const std::string& name, double value, double bar) {
    add(name, value, "<", {bar}, value < bar);
  }
  void above(const std::string& name, double value, double bar) {
    add(name, value, ">", {bar}, value > bar);
  }
  void at_least(const std::string& name, double value, double bar) {
    add(name, value, ">=", {bar}, value >= bar);
  }
  void within(const std::string& name, double value, double lo, double hi) {
    add(name, value, "in", {lo, hi}, lo <= value && value <= hi);
  }
  void holds(const std::string& name, bool ok) {
    json b{{"name", name}, {"value", ok}, {"passed", ok}};
    list_.push_back(b);
    passed_ = passed_ && ok;
  }
  bool passed() const { return passed_; }
  const json& list() const { return list_; }

 private:
  void add(const std::string& name, double value, const std::string& op, std::vector<double> bar,
           bool ok) {
    json b{{"name", name}, {"value", value}, {"op", op}};
    b["bar"] = bar.size() == 1 ? json(bar[0]) : json(bar);
    b["passed"] = ok;
    list_.push_back(b);
    passed_ = passed_ && ok;
  }
  json list_ = json::array();
  bool passed_ = true;
};

struct Run {
  std::string command;
  std::string out_dir;
  std::vector<std::pair<std::string, std::string>> files;
  json body = json::object();
  Bars bars;
  bool write_report = true;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

Run begin(Context& ctx, std::string command) {
  Run run;
  run.command = std::move(command);
  run.out_dir = ctx.config.get_string("out_dir", default_out_dir());
  if (run.out_dir.empty()) throw ConfigError("out_dir", "out_dir must not be empty");
  return run;
}

Outcome finish(Context& ctx, Run& run) {
  Outcome o;
  o.command = run.command;
  o.out_dir = run.out_dir;
  o.passed = run.bars.passed();
  io::OutputSet out(run.out_dir);
  for (const auto& [name, content] : run.files) out.write(name, content);
  if (run.write_report) {
    json report;
    report["command"] = run.command;
    report["calibration_sha256"] = ctx.calibration.sha256;
    json params = json::object();
    for (const auto& [k, v] : ctx.config.resolved()) {
      if (k != "out_dir") params[k] = v;
    }
    report["params"] = params;
    for (auto it = run.body.begin(); it != run.body.end(); ++it) report[it.key()] = it.value();
    report["bars"] = run.bars.list();
    report["passed"] = o.passed;
    out.write("report.json", report.dump(2) + "\n");
    o.report = report;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - run.start).count();
  out.write_manifest(run.command, ctx.config.resolved(), seconds);
  return o;
}

std::size_t read_replicas(io::Config& c, std::uint64_t fallback) {
  const auto n = c.get_u64("replicas", fallback);
  if (n == 0) throw ConfigError("replicas", "replicas must be at least 1");
  return static_cast<std::size_t>(n);
}

double read_positive(io::Config& c, const std::string& key, double fallback) {
  const double v = c.get_double(key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key, key + " must be positive");
  return v;
}

Interval read_window(io::Config& c, double lo, double hi) {
  const Interval w{c.get_double("window_lo", lo), c.get_double("window_hi", hi)};
  if (!(w.lo < w.hi)) throw ConfigError("window_lo", "window_lo must be smaller than window_hi");
  return w;
}

RunOptions options(Context& ctx, std::size_t replicas) {
  RunOptions o;
  o.seed = ctx.config.get_u64("seed", 1);
  o.replicas = replicas;
  o.threads = ctx.threads;
  return o;
}

void expect_lambda(double lambda, bool ok, const std::string& what) {
  if (!ok) throw ConfigError("lambda", "lambda = " + format_double(lambda) + " but " + what);
}

// simulate

Outcome run_simulate(Context& ctx) {
  Run run = begin(ctx, "simulate");
  auto& c = ctx.config;
  ModelParams p;
  p.lambda = c.get_double("lambda", 1.0);
  p.window = {c.get_double("window_lo", -10.0), c.get_double("window_hi", 10.0)};
  p.horizon = c.get_double("horizon", 10.0);
  p.palm = c.get_bool("palm", false);
  p.seed = c.get_u64("seed", 1);
  p.validate();
  const std::size_t replicas = read_replicas(c, 1);
  const auto times = c.get_list("times", {p.horizon});
  for (double t : times) {
    if (!(t >= 0.0) || t > p.horizon) throw ConfigError("times", "times must lie in [0, horizon]");
  }
  // Cars reach the window's left edge from the right and leave through it,
  // so full trajectories of the window's cars need [lo - T, hi + T].
  const Interval needed{p.window.lo - p.horizon, p.window.hi + p.horizon};
  const Interval extent{c.get_double("extent_lo", needed.lo), c.get_double("extent_hi", needed.hi)};
  if (extent.lo > needed.lo) {
    throw ConfigError("extent_lo", "extent_lo must be <= window_lo - horizon");
  }
  if (extent.hi < needed.hi) {
    throw ConfigError("extent_hi", "extent_hi must be >= window_hi + horizon");
  }
  if (p.lambda * extent.length() > static_cast<double>(kMaxScheduleCars) * 0.75) {
    throw ConfigError("extent_hi", "about " + format_double(p.lambda * extent.length()) +
                                       " cars in the extent; the schedule table is limited to " +
                                       std::to_string(kMaxScheduleCars) +
                                       " (reduce lambda, window or horizon)");
  }

  struct Replica {
    std::vector<MarkedPointSet> jams;
    std::size_t cars = 0;
    std::size_t ties = 0;
  };
  const auto results = run_replicas<Replica>(replicas, ctx.threads, [&](std::size_t r) {
    ModelParams q = p;
    q.seed = replica_seed(p.seed, static_cast<std::int64_t>(r));
    const auto config = generate_initial(q, extent);
    if (config.size() > kMaxScheduleCars) {
      throw ConfigError("extent_hi", "too many cars for the schedule table");
    }
    DepartureClocks clocks(q.seed);
    const auto schedule = build_schedule(config, clocks);
    Replica out;
    out.cars = config.size();
    out.ties = schedule.ties();
    for (double t : times) out.jams.push_back(jam_configuration(schedule, config, t, p.window));
    return out;
  });

  io::CsvTable jams({"run_id", "t", "position", "mass"});
  std::size_t total_jams = 0;
  for (std::size_t r = 0; r < results.size(); ++r) {
    for (const auto& mps : results[r].jams) {
      for (const auto& pt : mps.points) {
        jams.row({std::to_string(r), format_double(mps.t), format_double(pt.position),
                  format_double(pt.mass)});
        ++total_jams;
      }
    }
  }

  // Trajectories and walks of the first replica.
  ModelParams q = p;
  q.seed = replica_seed(p.seed, 0);
  const auto config = generate_initial(q, extent);
  DepartureClocks clocks(q.seed);
  const auto schedule = build_schedule(config, clocks);
  io::CsvTable traj({"car", "t_start", "t_end", "position_start", "speed"});
  for (std::int64_t j = config.first_label(); j < config.end_label(); ++j) {
    if (!p.window.contains(config.position(j))) continue;
    const auto sample = trajectory(schedule, config, j, p.horizon);
    for (const auto& s : sample.segments()) {
      traj.row({std::to_string(j), format_double(s.t_start), format_double(s.t_end),
                format_double(s.position_start), std::to_string(s.speed)});
    }
  }
  DepartureClocks walk_clocks(q.seed);
  const auto walks = build_walks(config, walk_clocks, extent.hi);
  io::CsvTable walk_csv({"walk_label", "jump_location", "coalesces_with", "coalescence_location"});
  for (std::int64_t i = walks.first_label(); i < walks.top_label(); ++i) {
    const bool merged = walks.coalesced(i);
    const std::string with = merged ? std::to_string(walks.skip_link(i)) : "";
    const std::string at = merged ? format_double(walks.coalescence_point(i)) : "";
    for (std::size_t k = 0; k < walks.own_jump_count(i); ++k) {
      walk_csv.row({std::to_string(i), format_double(walks.own_jump(i, k)), with, at});
    }
  }

  run.files = {{"jams.csv", jams.text()}, {"trajectory.csv", traj.text()}, {"walks.csv", walk_csv.text()}};
  run.write_report = false;
  (void)total_jams;
  return finish(ctx, run);
}

// stats

Outcome stats_velocity(Context& ctx, Run& run) {
  auto& c = ctx.config;
  const double lambda = read_positive(c, "lambda", 2.0);
  const double t = read_positive(c, "horizon", 2000.0);
  const auto opts = options(ctx, read_replicas(c, 1000));
  const auto r = estimate_velocity(lambda, t, opts);
  run.body["target"] = r.target;
  run.body["velocity"] = estimate_json(r.velocity);
  io::CsvTable csv({"run_id", "velocity"});
  for (std::size_t k = 0; k < r.samples.size(); ++k) {
    csv.row({std::to_string(k), format_double(r.samples[k])});
  }
  run.files = {{"samples.csv", csv.text()}};
  run.bars.at_most("velocity-error", std::fabs(r.velocity.estimate - r.target),
                   ctx.calibration.bar("velocity_tolerance"));
  return finish(ctx, run);
}

Outcome stats_poisson(Context& ctx, Run& run) {
  auto& c = ctx.config;
  const double lambda = read_positive(c, "lambda", 2.0);
  const double t = c.get_double("horizon", 5000.0);
  if (!(t >= 0.0)) throw ConfigError("horizon", "horizon must be non-negative");
  const Interval window = read_window(c, 0.0, 50.0);
  const auto opts = options(ctx, read_replicas(c, 200));
  const auto r = moving_car_test(lambda, t, window, opts);
  run.body["target"] = r.target;
  run.body["intensity"] = estimate_json(r.intensity);
  run.body["spacing_ks"] = ks_json(r.spacing_ks);
  run.body["spacings"] = r.spacings;
  run.body["empty_sample"] = r.empty_sample;
  io::CsvTable csv({"spacing"});
  for (double s : r.spacing_sample) csv.row({format_double(s)});
  run.files = {{"samples.csv", csv.text()}};
  run.bars.holds("nonempty-sample", !r.empty_sample);
  run.bars.at_most("intensity-error-in-se", std::fabs(r.intensity.estimate - r.target) /
                                                (r.intensity.se > 0.0 ? r.intensity.se : 1.0),
                   3.0);
  run.bars.above("spacing-ks-p", r.spacing_ks.p_value, ctx.calibration.bar("ks_p_min"));
  return finish(ctx, run);
}

json sweep_json(const JamSweep& s) {
  json points = json::array();
  for (const auto& pt : s.points) {
    points.push_back({{"t", pt.t},
                      {"intensity", estimate_json(pt.intensity)},
                      {"mean_mass", estimate_json(pt.mean_mass)},
                      {"spacing", estimate_json(pt.spacing)},
                      {"stopped_fraction", estimate_json(pt.stopped_fraction)}});
  }
  return points;
}

std::string sweep_csv(const JamSweep& s) {
  io::CsvTable csv({"t", "intensity", "intensity_se", "mean_mass", "mean_mass_se", "spacing",
                    "spacing_se", "stopped_fraction", "stopped_fraction_se"});
  for (const auto& pt : s.points) {
    csv.row({format_double(pt.t), format_double(pt.intensity.estimate),
             format_double(pt.intensity.se), format_double(pt.mean_mass.estimate),
             format_double(pt.mean_mass.se), format_double(pt.spacing.estimate),
             format_double(pt.spacing.se), format_double(pt.stopped_fraction.estimate),
             format_double(pt.stopped_fraction.se)});
  }
  return csv.text();
}

const std::vector<double>& sweep_times() {
  static const std::vector<double> t{100.0, std::pow(10.0, 2.5), 1000.0, std::pow(10.0, 3.5),
                                     10000.0};
  return t;
}

std::vector<double> read_times(io::Config& c, const std::vector<double>& fallback,
                               std::size_t at_least) {
  const auto times = c.get_list("times", fallback);
  if (times.size() < at_least) {
    throw ConfigError("times", "times needs at least " + std::to_string(at_least) + " points");
  }
  for (double t : times) {
    if (!(t > 0.0)) throw ConfigError("times", "times must be positive");
  }
  return times;
}

Outcome stats_decay(Context& ctx, Run& run) {
  auto& c = ctx.config;
  const double lambda = read_positive(c, "lambda", 2.0);
  expect_lambda(lambda, lambda > 1.0, "the decay fit needs lambda > 1");
  const auto times = read_times(c, sweep_times(), 3);
  const Interval window = read_window(c, 0.0, 5000.0);
  const auto opts = options(ctx, read_replicas(c, 200));
  const auto r = jam_decay_fit(lambda, times, window, opts);
  run.body["sweep"] = sweep_json(r.sweep);
  run.body["intensity_fit"] = fit_json(r.intensity_fit);
  run.body["mass_fit"] = fit_json(r.mass_fit);
  run.body["dropped_times"] = r.dropped_times;
  run.files = {{"sweep.csv", sweep_csv(r.sweep)}};
  const auto& cal = ctx.calibration;
  run.bars.within("intensity-slope", r.intensity_fit.slope, cal.bar("decay_intensity_slope_lo"),
                  cal.bar("decay_intensity_slope_hi"));
  run.bars.within("mass-slope", r.mass_fit.slope, cal.bar("decay_mass_slope_lo"),
                  cal.bar("decay_mass_slope_hi"));
  return finish(ctx, run);
}

Outcome stats_critical(Context& ctx, Run& run) {
  auto& c = ctx.config;
  const double lambda = c.get_double("lambda", 1.0);
  expect_lambda(lambda, lambda == 1.0, "the critical sweep needs lambda = 1");
  const auto times = read_times(c, sweep_times(), 3);
  const Interval window = read_window(c, 0.0, 50000.0);
  const auto opts = options(ctx, read_replicas(c, 200));
  const auto r = critical_growth_fit(times, window, opts);
  run.body["sweep"] = sweep_json(r.sweep);
  run.body["mass_fit"] = fit_json(r.mass_fit);
  run.body["spacing_fit"] = fit_json(r.spacing_fit);
  run.body["dropped_times"] = r.dropped_times;
  run.files = {{"sweep.csv", sweep_csv(r.sweep)}};
  const auto& cal = ctx.calibration;
  run.bars.within("mass-slope", r.mass_fit.slope, cal.bar("critical_mass_slope_lo"),
                  cal.bar("critical_mass_slope_hi"));
  run.bars.within("spacing-slope", r.spacing_fit.slope, cal.bar("critical_spacing_slope_lo"),
                  cal.bar("critical_spacing_slope_hi"));
  run.bars.holds("stopped-decreasing", r.stopped_decreasing);
  run.bars.below("stopped-at-last-time", r.sweep.points.back().stopped_fraction.estimate,
                 cal.bar("critical_stopped_max"));
  return finish(ctx, run);
}

Outcome stats_condensation(Context& ctx, Run& run) {
  auto& c = ctx.config;
  const double lambda = read_positive(c, "lambda", 2.0);
  const double t = c.get_double("horizon", 10000.0);
  if (!(t >= 0.0)) throw ConfigError("horizon", "horizon must be non-negative");
  const auto opts = options(ctx, read_replicas(c, 1000));
  constexpr std::int64_t first = 0;
  constexpr std::int64_t second = 3;
  ctx.config.note("cars", "0,3");
  const auto r = condensation_probe(lambda, first, second, t, opts);
  run.body["both_moving"] = estimate_json(r.both_moving);
  run.body["same_jam"] = estimate_json(r.same_jam);
  run.body["otherwise"] = estimate_json(r.otherwise);
  run.body["moving_or_same"] = estimate_json(r.moving_or_same);
  run.body["stopped"] = estimate_json(r.stopped);
  run.body["same_given_stopped"] = estimate_json(r.same_given_stopped);
  const auto& cal = ctx.calibration;
  if (lambda > 1.0) {
    run.bars.above("moving-or-same-jam", r.moving_or_same.estimate,
                   cal.bar("condensation_supercritical_min"));
  } else if (lambda == 1.0) {
    run.bars.below("stopped", r.stopped.estimate, cal.bar("condensation_stopped_max"));
    run.bars.above("same-jam-given-stopped", r.same_given_stopped.estimate,
                   cal.bar("condensation_same_given_stopped_min"));
  }
  return finish(ctx, run);
}

Outcome stats_crossings(Context& ctx, Run& run) {
  auto& c = ctx.config;
  const double lambda = read_positive(c, "lambda", 2.0);
  const double horizon = read_positive(c, "horizon", 2000.0);
  const auto opts = options(ctx, read_replicas(c, 100));
  const auto r = origin_crossings(lambda, horizon, opts);
  run.body["target"] = r.target;
  run.body["late_rate"] = estimate_json(r.late_rate);
  run.body["crossings"] = r.crossings;
  run.body["departures"] = r.departures;
  run.body["spacing_vs_queue"] = ks_json(r.spacing_vs_queue);
  run.body["late_vs_exponential"] = ks_json(r.late_vs_exponential);
  io::CsvTable csv({"source", "spacing"});
  for (double s : r.crossing_spacings) csv.row({"crossing", format_double(s)});
  for (double s : r.departure_spacings) csv.row({"queue", format_double(s)});
  run.files = {{"samples.csv", csv.text()}};
  const auto& cal = ctx.calibration;
  run.bars.at_most("crossing-rate-error", std::fabs(r.late_rate.estimate - r.target),
                   cal.bar("crossing_rate_tolerance"));
  if (lambda < 1.0) {
    run.bars.above("spacing-vs-queue-ks-p", r.spacing_vs_queue.p_value, cal.bar("ks_p_min"));
    run.bars.above("late-spacing-exponential-ks-p", r.late_vs_exponential.p_value,
                   cal.bar("ks_p_min"));
  }
  return finish(ctx, run);
}

// scaling

Outcome run_scaling(Context& ctx, const std::string& regime_text) {
  const Regime regime = parse_regime(regime_text);
  Run run = begin(ctx, "scaling " + regime_text);
  auto& c = ctx.config;
  ScalingSettings s;
  s.regime = regime;
  s.lambda = c.get_double("lambda", regime == Regime::Critical ? 1.0 : 2.0);
  if (regime == Regime::Critical) {
    expect_lambda(s.lambda, s.lambda == 1.0, "the critical regime needs lambda = 1");
  } else {
    expect_lambda(s.lambda, s.lambda > 1.0, "the supercritical regime needs lambda > 1");
  }
  s.scales = c.get_list("scales_L", {100.0, 1000.0, 10000.0});
  for (double L : s.scales) {
    if (!(L > 0.0)) throw ConfigError("scales_L", "scales_L must be positive");
  }
  s.times = read_times(c, {0.5, 1.0}, 1);
  s.window = read_window(c, -1.0, 0.0);
  s.lattice_replicas = read_replicas(c, 300);
  s.continuum_replicas = 10 * s.lattice_replicas;
  s.grid_step = read_positive(c, "grid_step", 0.02);
  s.dt = read_positive(c, "dt", 2e-4);
  if (s.dt > s.grid_step * s.grid_step) {
    throw ConfigError("dt", "dt must not exceed grid_step^2");
  }
  c.note("continuum_replicas", std::to_string(s.continuum_replicas));
  c.note("translations", std::to_string(s.translations));
  const auto r = scaling_comparison(s, options(ctx, s.lattice_replicas));

  io::CsvTable csv({"L", "t", "functional", "ks_statistic", "p_value", "lattice_mean",
                    "continuum_mean"});
  json cells = json::array();
  for (const auto& cell : r.cells) {
    const std::string L = format_double(cell.L);
    const std::string t = format_double(cell.t);
    csv.row({L, t, "count", format_double(cell.count.statistic), format_double(cell.count.p_value),
             format_double(cell.lattice_mean_count), format_double(cell.continuum_mean_count)});
    csv.row({L, t, "total_mass", format_double(cell.total_mass.statistic),
             format_double(cell.total_mass.p_value), format_double(cell.lattice_mean_mass),
             format_double(cell.continuum_mean_mass)});
    csv.row({L, t, "max_mass", format_double(cell.max_mass.statistic),
             format_double(cell.max_mass.p_value), "", ""});
    cells.push_back({{"L", cell.L},
                     {"t", cell.t},
                     {"count", ks_json(cell.count)},
                     {"total_mass", ks_json(cell.total_mass)},
                     {"max_mass", ks_json(cell.max_mass)},
                     {"lattice_mean_count", cell.lattice_mean_count},
                     {"continuum_mean_count", cell.continuum_mean_count},
                     {"lattice_mean_mass", cell.lattice_mean_mass},
                     {"continuum_mean_mass", cell.continuum_mean_mass}});
  }
  io::CsvTable cont({"replica", "t", "window", "count", "total_mass", "max_mass"});
  const std::size_t per_replica = s.times.size() * s.translations;
  for (std::size_t k = 0; k < r.continuum_sample.size(); ++k) {
    const auto& f = r.continuum_sample[k];
    const std::size_t rep = k / per_replica;
    const std::size_t ti = (k % per_replica) / s.translations;
    const std::size_t w = k % s.translations;
    cont.row({std::to_string(rep), format_double(s.times[ti]), std::to_string(w),
              std::to_string(f.count), format_double(f.total_mass), format_double(f.max_mass)});
  }
  run.body["functional"] = regime == Regime::Critical ? "count" : "total_mass";
  run.body["cells"] = cells;
  run.body["mean_distance"] = r.mean_distance;
  run.body["mean_target_distance"] = r.mean_target_distance;
  run.body["final_target_distance"] = r.final_target_distance;
  run.body["noise_floor"] = r.noise_floor;
  run.files = {{"comparison.csv", csv.text()}, {"continuum_functionals.csv", cont.text()}};
  run.bars.holds("distances-non-increasing-in-L", r.monotone);
  run.bars.at_most("final-target-distance", r.final_target_distance,
                   ctx.calibration.bar("scaling_final_distance_max"));
  return finish(ctx, run);
}

// equivalence

Outcome run_equivalence(Context& ctx) {
  Run run = begin(ctx, "equivalence");
  auto& c = ctx.config;
  const std::uint64_t seed = c.get_u64("seed", 1);
  const std::size_t batch = read_replicas(c, 1000);
  static const double lambdas[] = {0.5, 1.0, 2.0};
  c.note("lambdas", "0.5,1,2");
  c.note("cars", "100..1000");

  struct Instance {
    double lambda = 0.0;
    std::size_t cars = 0;
    EquivalenceReport report;
    std::size_t schedule_ties = 0;
    std::size_t walk_ties = 0;
  };
  const auto results = run_replicas<Instance>(batch, ctx.threads, [&](std::size_t k) {
    Instance inst;
    inst.lambda = lambdas[k % 3];
    const auto rs = replica_seed(seed, static_cast<std::int64_t>(k));
    const std::size_t cars = 100 + derive_stream(rs, StreamTag::reference()).next_u64() % 901;
    ModelParams p;
    p.lambda = inst.lambda;
    p.seed = rs;
    double reach = 1.5 * static_cast<double>(cars) / inst.lambda;
    InitialConfig full = generate_initial(p, {0.0, reach});
    while (full.size() < cars) {
      reach *= 2.0;
      full = generate_initial(p, {0.0, reach});
    }
    // The first `cars` cars right of the origin.
    std::vector<double> ys(full.positions().begin(),
                           full.positions().begin() + static_cast<std::ptrdiff_t>(cars));
    const InitialConfig config({0.0, ys.back()}, false, full.first_label(), ys);
    DepartureClocks clocks(rs);
    const auto schedule = build_schedule(config, clocks);
    const auto walks = build_walks(config, clocks);
    inst.cars = config.size();
    inst.report = check_equivalence(schedule, leave_times(walks), config);
    inst.schedule_ties = schedule.ties();
    inst.walk_ties = walks.ties();
    return inst;
  });

  io::CsvTable csv({"instance", "lambda", "cars", "entries", "arrival_violations",
                    "departure_violations", "max_discrepancy"});
  json per_lambda = json::array();
  std::size_t total_violations = 0;
  for (double lambda : lambdas) {
    std::size_t instances = 0, entries = 0, violations = 0, min_cars = SIZE_MAX, max_cars = 0;
    std::size_t s_ties = 0, w_ties = 0;
    double max_disc = 0.0;
    for (const auto& inst : results) {
      if (inst.lambda != lambda) continue;
      ++instances;
      entries += inst.report.entries_checked;
      violations += inst.report.violations();
      max_disc = std::max(max_disc, inst.report.max_discrepancy);
      min_cars = std::min(min_cars, inst.cars);
      max_cars = std::max(max_cars, inst.cars);
      s_ties += inst.schedule_ties;
      w_ties += inst.walk_ties;
    }
    total_violations += violations;
    per_lambda.push_back({{"lambda", lambda},
                          {"instances", instances},
                          {"entries_checked", entries},
                          {"violations", violations},
                          {"max_discrepancy", max_disc},
                          {"min_cars", instances ? min_cars : 0},
                          {"max_cars", max_cars},
                          {"schedule_ties", s_ties},
                          {"walk_ties", w_ties}});
  }
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& inst = results[k];
    csv.row({std::to_string(k), format_double(inst.lambda), std::to_string(inst.cars),
             std::to_string(inst.report.entries_checked),
             std::to_string(inst.report.arrival_violations),
             std::to_string(inst.report.departure_violations),
             format_double(inst.report.max_discrepancy)});
  }
  run.body["instances"] = batch;
  run.body["per_lambda"] = per_lambda;
  run.body["violations"] = total_violations;
  run.files = {{"equivalence.csv", csv.text()}};
  run.bars.holds("zero-discrepancies", total_violations == 0);
  return finish(ctx, run);
}

// oracle

GridParams read_grid(io::Config& c, double lo, double hi, double t) {
  GridParams g;
  g.extent = {c.get_double("extent_lo", lo), c.get_double("extent_hi", hi)};
  if (!(g.extent.lo <= g.extent.hi)) {
    throw ConfigError("extent_lo", "extent_lo must not exceed extent_hi");
  }
  g.h = read_positive(c, "grid_step", 0.02);
  g.dt = read_positive(c, "dt", 2e-4);
  g.t = t;
  if (g.dt > g.h * g.h) throw ConfigError("dt", "dt must not exceed grid_step^2");
  return g;
}

Outcome oracle_paths(Context& ctx, Run& run, Regime regime) {
  auto& c = ctx.config;
  const auto times = read_times(c, {1.0}, 1);
  GridParams g = read_grid(c, -1.0, 1.0, *std::max_element(times.begin(), times.end()));
  const auto opts = options(ctx, read_replicas(c, 10));
  const auto runs = run_replicas<ContinuumRun>(opts.replicas, ctx.threads, [&](std::size_t r) {
    const auto seed = replica_seed(opts.seed, static_cast<std::int64_t>(r));
    return regime == Regime::Supercritical ? simulate_coalescing_bm(g, times, seed)
                                           : simulate_reflected_web(g, times, seed);
  });
  io::CsvTable csv({"replica", "t", "position", "mass", "frame"});
  ContinuumDiagnostics total;
  std::vector<std::vector<double>> counts(times.size()), masses(times.size());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& d = runs[r].diagnostics;
    total.steps += d.steps;
    total.merges += d.merges;
    total.reflection_violations += d.reflection_violations;
    total.order_violations += d.order_violations;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      const auto& snap = runs[r].snapshots[ti];
      counts[ti].push_back(static_cast<double>(snap.points.size()));
      masses[ti].push_back(snap.total_mass());
      for (const auto& p : snap.points) {
        csv.row({std::to_string(r), format_double(snap.t), format_double(p.position),
                 format_double(p.mass), frame_name(snap.frame)});
      }
    }
  }
  json per_time = json::array();
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    per_time.push_back({{"t", times[ti]},
                        {"count", estimate_json(mean_estimate("count", counts[ti]))},
                        {"total_mass", estimate_json(mean_estimate("total-mass", masses[ti]))}});
  }
  run.body["per_time"] = per_time;
  run.body["diagnostics"] = {{"steps", total.steps},
                             {"merges", total.merges},
                             {"reflection_violations", total.reflection_violations},
                             {"order_violations", total.order_violations}};
  run.files = {{"continuum.csv", csv.text()}};
  run.bars.holds("no-order-violations", total.order_violations == 0);
  run.bars.holds("no-reflection-violations", total.reflection_violations == 0);
  return finish(ctx, run);
}

Outcome oracle_meeting(Context& ctx, Run& run) {
  auto& c = ctx.config;
  const Interval extent{c.get_double("extent_lo", 0.0), c.get_double("extent_hi", 1.0)};
  if (!(extent.lo < extent.hi)) throw ConfigError("extent_lo", "extent_lo must be below extent_hi");
  const double t = read_positive(c, "horizon", 1.0);
  const double dt = read_positive(c, "dt", 1e-4);
  const auto opts = options(ctx, read_replicas(c, 10000));
  const double distance = extent.length();
  if (dt > distance * distance) throw ConfigError("dt", "dt must not exceed the starter distance^2");
  const auto r = two_path_meeting(distance, t, dt, opts);
  run.body["distance"] = distance;
  run.body["t"] = t;
  run.body["target"] = r.target;
  run.body["distinct"] = estimate_json(r.distinct);
  run.bars.at_most("meeting-probability-error", std::fabs(r.distinct.estimate - r.target),
                   ctx.calibration.bar("meeting_tolerance"));
  return finish(ctx, run);
}

Outcome oracle_convergence(Context& ctx, Run& run) {
  auto& c = ctx.config;
  const auto times = read_times(c, {1.0}, 1);
  if (times.size() != 1) throw ConfigError("times", "convergence takes a single time");
  GridParams g = read_grid(c, -1.5, 0.5, times.front());
  if (g.dt > g.h * g.h / 2.0) {
    throw ConfigError("dt", "halving needs dt <= grid_step^2 / 2");
  }
  const Interval window = read_window(c, -1.0, 0.0);
  const auto opts = options(ctx, read_replicas(c, 1000));
  const auto& cal = ctx.calibration;
  json regimes = json::object();
  for (auto regime : {Regime::Supercritical, Regime::Critical}) {
    const auto r = continuum_self_convergence(regime, g, window, 0.0, opts);
    const std::string name = regime_name(regime);
    regimes[name] = {{"count", ks_json(r.count)},
                     {"total_mass", ks_json(r.total_mass)},
                     {"max_mass", ks_json(r.max_mass)},
                     {"count_within_one", r.count_within_one},
                     {"reflection_violations", r.reflection_violations},
                     {"order_violations", r.order_violations}};
    const double ks_max = cal.bar("self_convergence_ks_max");
    run.bars.at_most(name + "-count-ks", r.count.statistic, ks_max);
    run.bars.at_most(name + "-total-mass-ks", r.total_mass.statistic, ks_max);
    run.bars.at_most(name + "-max-mass-ks", r.max_mass.statistic, ks_max);
    run.bars.at_least(name + "-count-within-one", r.count_within_one,
                      cal.bar("self_convergence_within_one_min"));
    run.bars.holds(name + "-no-violations", r.reflection_violations == 0 && r.order_violations == 0);
  }
  run.body["regimes"] = regimes;
  return finish(ctx, run);
}

}  // namespace

double Calibration::bar(const std::string& name) const {
  const auto it = bars.find(name);
  if (it == bars.end()) throw std::runtime_error("calibration file lacks '" + name + "'");
  return it->second;
}

Calibration load_calibration(const std::filesystem::path& path) {
  Calibration cal;
  const std::string text = io::read_file(path);
  cal.sha256 = io::sha256_hex(text);
  auto config = io::Config::parse(text);
  for (const auto& [key, value] : config.values()) cal.bars[key] = config.get_double(key, 0.0);
  return cal;
}

std::filesystem::path default_calibration_path() {
  if (const char* env = std::getenv("SLOWSTART_CALIBRATION"); env && *env) return env;
  return SLOWSTART_CALIBRATION_FILE;
}

std::string default_out_dir() {
  if (const char* env = std::getenv("SLOWSTART_OUT_DIR"); env && *env) return env;
  return "out";
}

Outcome simulate(Context& ctx) { return run_simulate(ctx); }

Outcome stats(Context& ctx, const std::string& which) {
  using Fn = Outcome (*)(Context&, Run&);
  static const std::vector<std::pair<std::string, Fn>> table{
      {"velocity", stats_velocity}, {"poisson", stats_poisson},
      {"decay", stats_decay},       {"critical", stats_critical},
      {"condensation", stats_condensation}, {"crossings", stats_crossings}};
  for (const auto& [name, fn] : table) {
    if (name == which) {
      Run run = begin(ctx, "stats " + which);
      return fn(ctx, run);
    }
  }
  throw std::invalid_argument(
      "unknown statistic '" + which +
      "' (valid: velocity, poisson, decay, critical, condensation, crossings)");
}

Outcome scaling(Context& ctx, const std::string& regime) { return run_scaling(ctx, regime); }

Outcome equivalence(Context& ctx) { return run_equivalence(ctx); }

Outcome oracle(Context& ctx, const std::string& kind) {
  if (kind == "coalescing" || kind == "reflected" || kind == "meeting" || kind == "convergence") {
    Run run = begin(ctx, "oracle " + kind);
    if (kind == "coalescing") return oracle_paths(ctx, run, Regime::Supercritical);
    if (kind == "reflected") return oracle_paths(ctx, run, Regime::Critical);
    if (kind == "meeting") return oracle_meeting(ctx, run);
    return oracle_convergence(ctx, run);
  }
  throw std::invalid_argument("unknown oracle '" + kind +
                              "' (valid: coalescing, reflected, meeting, convergence)");
}

Outcome dispatch(Context& ctx, const std::string& command) {
  std::istringstream in(command);
  std::string verb, arg;
  in >> verb >> arg;
  if (verb == "simulate") return simulate(ctx);
  if (verb == "stats") return stats(ctx, arg);
  if (verb == "scaling") return scaling(ctx, arg);
  if (verb == "equivalence") return equivalence(ctx);
  if (verb == "oracle") return oracle(ctx, arg);
  throw std::invalid_argument("unknown command '" + command + "'");
}

Outcome replay(const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
               int threads, const Calibration& calibration) {
  const auto m = nlohmann::json::parse(io::read_file(manifest));
  Context ctx;
  ctx.threads = threads;
  ctx.calibration = calibration;
  const auto& keys = io::config_keys();
  for (const auto& [key, value] : m.at("config").items()) {
    if (keys.count(key)) ctx.config.set(key, value.get<std::string>());
  }
  ctx.config.set("out_dir", out_dir.string());
  Outcome o = dispatch(ctx, m.at("command").get<std::string>());
  bool same = true;
  for (const auto& f : m.at("files")) {
    const auto path = out_dir / f.at("name").get<std::string>();
    if (!std::filesystem::exists(path) ||
        io::sha256_hex(io::read_file(path)) != f.at("sha256").get<std::string>()) {
      same = false;
    }
  }
  o.passed = same;
  return o;
}

}  // namespace slowstart::app
