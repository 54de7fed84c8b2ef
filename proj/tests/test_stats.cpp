#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "slowstart/stats.hpp"

using namespace slowstart;

namespace {

RunOptions options(std::uint64_t seed, std::size_t replicas) {
  RunOptions o;
  o.seed = seed;
  o.replicas = replicas;
  return o;
}

}  // namespace

TEST_CASE("rescale examples") {
  MarkedPointSet lattice;
  lattice.t = 100.0;
  lattice.points = {{50.0, 30.0}};
  const auto a = rescale(lattice, {100.0, 2.0, Regime::Supercritical});
  CHECK(a.frame == Frame::RescaledSupercritical);
  CHECK(a.t == 1.0);
  CHECK(a.points[0].position == doctest::Approx(5.0));
  CHECK(a.points[0].mass == doctest::Approx(3.0));

  lattice.points = {{200.0, 30.0}};
  const auto b = rescale(lattice, {100.0, 1.0, Regime::Critical});
  CHECK(b.frame == Frame::RescaledCritical);
  CHECK(b.points[0].position == doctest::Approx(2.0));
  CHECK(b.points[0].mass == doctest::Approx(3.0));

  lattice.points = {{-7.25, 4.0}, {3.5, 2.0}};
  const auto c = rescale(lattice, {1.0, 2.0, Regime::Supercritical});
  CHECK(c.points == lattice.points);
}

TEST_CASE("rescale preserves total mass up to the sqrt(L) factor") {
  MarkedPointSet lattice;
  lattice.points = {{1.0, 3.0}, {4.0, 17.0}, {9.0, 1.0}, {12.0, 250.0}};
  for (double L : {4.0, 100.0, 1e4}) {
    const auto r = rescale(lattice, {L, 1.0, Regime::Critical});
    CHECK(r.total_mass() * std::sqrt(L) == doctest::Approx(lattice.total_mass()).epsilon(1e-14));
  }
}

TEST_CASE("rescale rejects a regime mismatch") {
  MarkedPointSet lattice;
  CHECK_THROWS_AS(rescale(lattice, {100.0, 2.0, Regime::Critical}), std::invalid_argument);
  CHECK_THROWS_AS(rescale(lattice, {100.0, 1.0, Regime::Supercritical}), std::invalid_argument);
  CHECK_THROWS_AS(rescale(lattice, {0.0, 1.0, Regime::Critical}), std::invalid_argument);
  CHECK_THROWS_AS(parse_regime("subcritical"), std::invalid_argument);
  CHECK(parse_regime("critical") == Regime::Critical);
}

TEST_CASE("power-law fit recovers a known exponent") {
  const std::vector<double> t{100.0, 316.0, 1000.0, 3162.0, 10000.0};
  const std::vector<double> wobble{1.01, 0.99, 1.005, 0.995, 1.0};
  for (double exponent : {-0.5, 0.5, 1.0}) {
    std::vector<double> y;
    for (std::size_t k = 0; k < t.size(); ++k) y.push_back(3.0 * std::pow(t[k], exponent) * wobble[k]);
    const auto fit = fit_power_law(t, y);
    CHECK(std::fabs(fit.slope - exponent) <= 0.02);
    CHECK(fit.residual_rms < 0.02);
  }
  const auto flat = fit_power_law(t, std::vector<double>(t.size(), 0.7));
  CHECK(flat.slope == doctest::Approx(0.0));
}

TEST_CASE("fits need three points and positive data") {
  CHECK_THROWS_AS(fit_line({1.0, 2.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_power_law({1.0, 2.0, 3.0}, {1.0, 0.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_line({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(jam_decay_fit(2.0, {100.0}, {0.0, 10.0}, options(1, 2)),
                  std::invalid_argument);
}

TEST_CASE("mean and ratio estimates") {
  const auto m = mean_estimate("m", {1.0, 2.0, 3.0, 4.0});
  CHECK(m.estimate == 2.5);
  CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(m.half_width() == doctest::Approx(3.0 * m.se));
  CHECK(m.covers(2.5 + m.half_width()));
  const auto r = ratio_estimate("r", {2.0, 4.0, 6.0}, {1.0, 2.0, 3.0});
  CHECK(r.estimate == 2.0);
  CHECK(r.se == doctest::Approx(0.0));
  CHECK(non_increasing({3.0, 2.0, 2.0, 1.0}));
  CHECK_FALSE(non_increasing({3.0, 2.0, 2.5}));
}

TEST_CASE("KS sanity") {
  CHECK(kolmogorov_survival(1.0) == doctest::Approx(0.2700).epsilon(1e-3));
  CHECK(kolmogorov_survival(1.358) == doctest::Approx(0.05).epsilon(1e-2));
  const std::vector<double> a{0.1, 0.4, 0.3, 0.9};
  const auto same = ks_two_sample(a, a);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == doctest::Approx(1.0));
  const auto apart = ks_two_sample({1.0, 2.0, 3.0}, {10.0, 11.0});
  CHECK(apart.statistic == 1.0);
  const auto uniform = ks_one_sample({0.125, 0.375, 0.625, 0.875}, [](double x) { return x; });
  CHECK(uniform.statistic == doctest::Approx(0.125));
}

TEST_CASE("walk velocity by hand") {
  // y_{-1} = -2, y_0 = 0; d(-1,.) = (1, 3), d(0,0) = 0.5. Walk -1 reaches
  // level 0 at -1 and merges with walk 0, which leaves level 0 at 0.5.
  const InitialConfig config({-10.0, 10.0}, true, -1, {-2.0, 0.0});
  DepartureClocks clocks(0);
  clocks.set(-1, {1.0, 3.0});
  clocks.set(0, {0.5});
  const auto walks = build_walks(config, clocks, 10.0);
  CHECK(walks.leave_time(-1, 0) == 0.5);
  const auto v = velocity_via_walks(walks, 1);
  CHECK(v.velocity == doctest::Approx(0.8));
  CHECK(v.jump_ratio == doctest::Approx(0.4));
  CHECK_THROWS_AS(velocity_via_walks(walks, 2), WindowViolation);
}

TEST_CASE("velocity estimators agree and SE scales with replicas") {
  const auto small = estimate_velocity(2.0, 200.0, options(3, 200));
  const auto large = estimate_velocity(2.0, 200.0, options(3, 800));
  CHECK(small.target == 0.5);
  CHECK(large.velocity.se / small.velocity.se == doctest::Approx(0.5).epsilon(0.2));
  CHECK(std::fabs(large.velocity.estimate - 0.5) < 0.03);
  const auto walks = estimate_velocity_via_walks(2.0, 400, options(4, 400));
  const double combined = 3.0 * std::hypot(walks.velocity.se, large.velocity.se);
  CHECK(std::fabs(walks.velocity.estimate - large.velocity.estimate) <= combined + 0.01);
  CHECK(walks.jump_ratio.estimate == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("no moving cars at time zero") {
  const auto r = moving_car_test(2.0, 0.0, {0.0, 50.0}, options(1, 5));
  CHECK(r.empty_sample);
  CHECK(r.intensity.estimate == 0.0);
}

TEST_CASE("moving cars at a moderate time") {
  const auto r = moving_car_test(0.5, 500.0, {0.0, 50.0}, options(2, 100));
  CHECK(r.intensity.covers(0.5));
  CHECK(r.spacing_ks.p_value > 0.01);
}

TEST_CASE("condensation probe at time zero") {
  const auto r = condensation_probe(2.0, 0, 3, 0.0, options(1, 20));
  CHECK(r.otherwise.estimate == 1.0);
  CHECK(r.both_moving.estimate == 0.0);
  CHECK(r.stopped.estimate == 1.0);
}

TEST_CASE("probabilities lie in [0, 1]") {
  const auto r = condensation_probe(1.0, 0, 3, 100.0, options(5, 100));
  for (const auto& e : {r.both_moving, r.same_jam, r.otherwise, r.moving_or_same, r.stopped,
                        r.same_given_stopped}) {
    CHECK(e.estimate >= 0.0);
    CHECK(e.estimate <= 1.0);
  }
  CHECK(r.both_moving.estimate + r.same_jam.estimate + r.otherwise.estimate ==
        doctest::Approx(1.0));
}

TEST_CASE("M/M/1 oracle") {
  auto stream = derive_stream(8, StreamTag::queue());
  const auto dep = mm1_departures(0.5, 20000.0, stream);
  for (std::size_t k = 1; k < dep.size(); ++k) CHECK(dep[k - 1] < dep[k]);
  CHECK(static_cast<double>(dep.size()) / 20000.0 == doctest::Approx(0.5).epsilon(0.05));
  auto busy = derive_stream(8, StreamTag::queue(1));
  const auto sat = mm1_departures(4.0, 20000.0, busy);
  CHECK(static_cast<double>(sat.size()) / 20000.0 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("no crossings without cars") {
  const InitialConfig empty({0.0, 100.0}, false, 1, {});
  DepartureClocks clocks(0);
  const auto walks = build_walks(empty, clocks, 100.0);
  CHECK(origin_crossing_times(walks, 100.0).empty());
}

TEST_CASE("crossing rate in the saturated regime") {
  const auto r = origin_crossings(2.0, 1000.0, options(6, 40));
  CHECK(r.target == 1.0);
  CHECK(std::fabs(r.late_rate.estimate - 1.0) < 0.05);
}

TEST_CASE("jam sweep on a small budget") {
  const auto r = jam_decay_fit(2.0, {10.0, 100.0, 1000.0}, {0.0, 2000.0}, options(7, 20));
  CHECK(r.intensity_fit.slope < 0.0);
  CHECK(r.mass_fit.slope > 0.0);
  for (const auto& pt : r.sweep.points) CHECK(pt.stopped_fraction.estimate <= 1.0);
}

TEST_CASE("scaling comparison on a tiny budget") {
  ScalingSettings s;
  s.regime = Regime::Supercritical;
  s.lambda = 2.0;
  s.scales = {100.0, 400.0};
  s.times = {0.5};
  s.translations = 2;
  s.lattice_replicas = 20;
  s.continuum_replicas = 20;
  s.grid_step = 0.05;
  s.dt = 1e-3;
  const auto r = scaling_comparison(s, options(1, 0));
  CHECK(r.cells.size() == 2);
  CHECK(r.mean_distance.size() == 2);
  CHECK(r.continuum_sample.size() == 20 * 1 * 2);
  s.lambda = 1.0;
  CHECK_THROWS_AS(scaling_comparison(s, options(1, 0)), std::invalid_argument);
}
