#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "slowstart/model.hpp"
#include "slowstart/walks.hpp"

using namespace slowstart;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Example {
  InitialConfig config{{-10.0, 10.0}, false, 0, {0.0, 1.0}};
  DepartureClocks clocks{0};
  Example() {
    clocks.set(0, {5.0, 6.2});
    clocks.set(1, {1.0});
  }
};

InitialConfig random_config(std::uint64_t seed, double lambda, Interval extent) {
  ModelParams p;
  p.lambda = lambda;
  p.seed = seed;
  return generate_initial(p, extent);
}

// Y_x: value i + 1 on [y_i, y_{i+1}).
std::int64_t counting(const InitialConfig& config, double x) {
  return config.first_label_at_or_above(std::nextafter(x, kInf));
}

}  // namespace

TEST_CASE("worked example: walks, leave times, jams") {
  Example ex;
  const auto walks = build_walks(ex.config, ex.clocks, 7.0);
  REQUIRE(walks.own_jump_count(0) == 2);
  CHECK(walks.own_jump(0, 0) == 5.0);
  CHECK(walks.own_jump(0, 1) == 6.2);
  REQUIRE(walks.own_jump_count(1) == 1);
  CHECK(walks.own_jump(1, 0) == 2.0);
  CHECK(walks.coalescence_point(1) == 2.0);
  CHECK(walks.skip_link(1) == 2);
  CHECK(walks.top_label() == 2);

  CHECK(walks.value(0, -0.5) == 0);
  CHECK(walks.value(0, 4.9) == 0);
  CHECK(walks.value(0, 5.0) == 1);
  CHECK(walks.value(0, 6.2) == 2);
  CHECK(walks.value_before(0, 6.2) == 1);
  CHECK(walks.value(1, 1.5) == 1);
  CHECK(walks.value(1, 2.0) == 2);
  CHECK(walks.value(1, 3.0) == 2);
  CHECK(walks.value(2, 6.9) == 2);

  CHECK(walks.leave_time(1, 1) == 2.0);
  CHECK(walks.leave_time(0, 0) == 5.0);
  CHECK(walks.leave_time(0, 1) == 6.2);
  CHECK(walks.leave_time(0, -1) == 0.0);
  CHECK(walks.leave_time(1, 0) == 1.0);
  CHECK_THROWS_AS(walks.leave_time(0, 2), OutOfDomain);
  CHECK_THROWS_AS(walks.value(0, 7.5), OutOfDomain);

  CHECK(jams_from_walks(walks, 3.0, {-1.0, 2.0}).points == std::vector<MarkedPoint>{{0.0, 2.0}});
  CHECK(jams_from_walks(walks, 6.5, {-1.0, 0.5}).points.empty());
  CHECK_THROWS_AS(jams_from_walks(walks, 6.5, {-1.0, 2.0}), OutOfDomain);

  const auto schedule = build_schedule(ex.config, ex.clocks);
  const auto report = check_equivalence(schedule, leave_times(walks), ex.config);
  CHECK(report.entries_checked == 3);
  CHECK(report.violations() == 0);
  CHECK(schedule.arrival(0, 1) == walks.leave_time(1, 1) - 0.0);
  CHECK(schedule.departure(0, 1) == walks.leave_time(0, 1) - 0.0);
}

TEST_CASE("single car: A(0,0) = 0 through the convention T(i,i-1) = y_i") {
  InitialConfig config({-1.0, 1.0}, false, 0, {0.0});
  DepartureClocks clocks(0);
  clocks.set(0, {1.3});
  const auto walks = build_walks(config, clocks);
  CHECK(walks.leave_time(0, -1) == 0.0);
  CHECK(walks.leave_time(0, 0) == 1.3);
  const auto report = check_equivalence(build_schedule(config, clocks), leave_times(walks), config);
  CHECK(report.violations() == 0);
}

TEST_CASE("walks above the cutoff are constant") {
  Example ex;
  const auto walks = build_walks(ex.config, ex.clocks, 0.5);
  CHECK(walks.own_jump_count(1) == 0);
  CHECK(walks.value(1, 0.5) == 1);
  CHECK(walks.value(0, 0.5) == 0);
  CHECK_FALSE(walks.coalesced(1));
}

TEST_CASE("empty configuration") {
  InitialConfig config({-1.0, 1.0}, false, 1, {});
  DepartureClocks clocks(0);
  const auto walks = build_walks(config, clocks);
  CHECK(walks.top_label() == 1);
  CHECK(walks.value(1, 0.0) == 1);
  CHECK(jams_from_walks(walks, 0.5, {-1.0, 0.5}).points.empty());
}

TEST_CASE("walk family invariants on random instances") {
  const double lambdas[] = {0.5, 1.0, 2.0};
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const double lambda = lambdas[seed % 3];
    const auto config = random_config(seed, lambda, {-500.0 / lambda, 500.0 / lambda});
    DepartureClocks clocks(seed);
    const auto walks = build_walks(config, clocks);
    const auto lo = config.extent().lo;
    const auto hi = config.extent().hi;
    std::vector<double> xs;
    for (int k = 0; k < 1000; ++k) xs.push_back(lo + (hi - lo + 50.0) * k / 999.0);

    for (auto i = config.first_label(); i < config.end_label(); ++i) {
      const double y = config.position(i);
      bool merged = false;
      for (double x : xs) {
        const auto b = walks.value(i, x);
        const auto above = walks.value(i + 1, x);
        if (x < y && b != i) ++failures;
        if (b > above) ++failures;
        if (x >= y && b > counting(config, x)) ++failures;
        if (merged && b != above) ++failures;
        merged = merged || b == above;
      }
      // Own jumps are consecutive clock points shifted by y_i.
      for (std::size_t k = 0; k < walks.own_jump_count(i); ++k) {
        if (walks.own_jump(i, k) != y + clocks.at(i, i + static_cast<std::int64_t>(k))) {
          ++failures;
        }
      }
      // Skip links point strictly upward and end at the top walk.
      std::int64_t cur = i;
      int steps = 0;
      while (cur != walks.top_label() && steps <= static_cast<int>(config.size())) {
        const auto next = walks.skip_link(cur);
        if (next <= cur) ++failures;
        if (walks.coalescence_point(next) < walks.coalescence_point(cur)) ++failures;
        cur = next;
        ++steps;
      }
      if (cur != walks.top_label()) ++failures;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("leave times: recursion and monotonicity") {
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto config = random_config(seed, 0.5 + (seed % 4) * 0.5, {-40.0, 40.0});
    DepartureClocks clocks(seed);
    const auto walks = build_walks(config, clocks);
    const auto top = walks.top_label();
    for (auto i = config.first_label(); i < config.end_label(); ++i) {
      const double y = config.position(i);
      if (walks.leave_time(i, i - 1) != y) ++failures;
      for (auto j = i; j < top; ++j) {
        const double t = walks.leave_time(i, j);
        if (!(walks.leave_time(i, j - 1) < t)) ++failures;
        if (j > i && walks.leave_time(i + 1, j) > t) ++failures;
        if (j > i) {
          const double above = walks.leave_time_or_inf(i + 1, j);
          const double expected =
              walks.leave_time(i, j - 1) <= above ? above : y + clocks.at(i, j);
          if (t != expected) ++failures;
        }
        // The walk sits at level j + 1 right at its leave point.
        if (walks.value(i, t) < j + 1 || walks.value_before(i, t) > j) ++failures;
      }
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("schedule and walks agree exactly") {
  const double lambdas[] = {0.5, 1.0, 2.0};
  std::size_t violations = 0;
  std::size_t entries = 0;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const double lambda = lambdas[seed % 3];
    const double half = (100.0 + static_cast<double>(seed % 5) * 50.0) / (2.0 * lambda);
    const auto config = random_config(seed, lambda, {-half, half});
    DepartureClocks clocks(seed);
    const auto schedule = build_schedule(config, clocks);
    const auto walks = build_walks(config, clocks);
    const auto report = check_equivalence(schedule, leave_times(walks), config);
    violations += report.violations();
    entries += report.entries_checked;
    CHECK(schedule.ties() == walks.ties());
  }
  CHECK(entries > 0);
  CHECK(violations == 0);
}

TEST_CASE("jam read-offs agree between constructions") {
  int failures = 0;
  const Interval window{-5.0, 5.0};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const double lambda = 0.5 + (seed % 3) * 0.75;
    const auto config = random_config(seed, lambda, {-5.0, 20.0});
    DepartureClocks clocks(seed);
    const auto schedule = build_schedule(config, clocks);
    const auto walks = build_walks(config, clocks, 20.0);
    for (double t : {0.0, 0.5, 2.25, 7.0, 15.0}) {
      if (jams_from_walks(walks, t, window) != jam_configuration(schedule, config, t, window)) {
        ++failures;
      }
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("moving cars and car states agree with trajectories") {
  int failures = 0;
  const Interval window{-5.0, 5.0};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const double lambda = 0.5 + (seed % 3) * 0.75;
    const auto config = random_config(seed, lambda, {-20.0, 20.0});
    DepartureClocks clocks(seed);
    const auto schedule = build_schedule(config, clocks);
    const auto walks = build_walks(config, clocks);
    for (double t : {0.0, 1.5, 6.0, 13.25}) {
      std::vector<double> expected;
      for (auto j = config.first_label_at_or_above(window.lo); j < config.end_label(); ++j) {
        if (config.position(j) > window.hi + t) break;
        const auto s = trajectory(schedule, config, j, 15.0).at(t);
        const auto w = car_state(walks, j, t);
        if (w.position != s.position || w.speed != s.speed) ++failures;
        if (s.speed == 1 && window.contains(s.position)) expected.push_back(s.position);
      }
      std::sort(expected.begin(), expected.end());
      if (moving_cars(walks, t, window) != expected) ++failures;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("a finite cutoff does not change the walks below it") {
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto config = random_config(seed, 1.5, {-30.0, 30.0});
    DepartureClocks clocks(seed);
    const auto full = build_walks(config, clocks);
    const auto cut = build_walks(config, clocks, 10.0);
    for (auto i = config.first_label(); i <= full.top_label(); ++i) {
      for (double x = -30.0; x <= 10.0; x += 0.37) {
        if (full.value(i, x) != cut.value(i, x)) ++failures;
      }
    }
    CHECK_THROWS_AS(cut.value(config.first_label(), 10.5), OutOfDomain);
  }
  CHECK(failures == 0);
}
