#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "slowstart/continuum.hpp"
#include "slowstart/stats.hpp"

using namespace slowstart;

namespace {

GridParams small_grid(double lo, double hi, double t) {
  GridParams g;
  g.extent = {lo, hi};
  g.h = 0.05;
  g.dt = 1e-3;
  g.t = t;
  return g;
}

bool positions_subset(const MarkedPointSet& later, const MarkedPointSet& earlier) {
  return std::all_of(later.points.begin(), later.points.end(), [&](const MarkedPoint& p) {
    return std::any_of(earlier.points.begin(), earlier.points.end(),
                       [&](const MarkedPoint& q) { return q.position == p.position; });
  });
}

void check_well_formed(const MarkedPointSet& mps) {
  CHECK(mps.frame == Frame::Continuum);
  for (std::size_t k = 0; k < mps.points.size(); ++k) {
    CHECK(mps.points[k].mass > 0.0);
    if (k > 0) CHECK(mps.points[k - 1].position < mps.points[k].position);
  }
}

}  // namespace

TEST_CASE("extract_functionals examples") {
  MarkedPointSet empty;
  const auto f0 = extract_functionals(empty, {0.0, 4.0});
  CHECK(f0.count == 0);
  CHECK(f0.total_mass == 0.0);
  CHECK(f0.max_mass == 0.0);
  CHECK(f0.spacings.empty());

  MarkedPointSet two;
  two.points = {{1.0, 2.0}, {3.0, 0.5}};
  const auto f = extract_functionals(two, {0.0, 4.0});
  CHECK(f.count == 2);
  CHECK(f.total_mass == 2.5);
  CHECK(f.max_mass == 2.0);
  REQUIRE(f.spacings.size() == 1);
  CHECK(f.spacings[0] == 2.0);

  MarkedPointSet padded;
  padded.points = {{-3.0, 7.0}, {1.0, 2.0}, {3.0, 0.5}, {4.5, 1.0}, {9.0, 3.0}};
  CHECK(extract_functionals(padded, {0.0, 4.0}) == f);
}

TEST_CASE("mass floor drops light points") {
  MarkedPointSet mps;
  mps.points = {{0.1, 0.01}, {0.2, 0.5}, {0.3, 0.02}, {0.6, 1.0}};
  const auto f = extract_functionals(mps, {0.0, 1.0}, 0.05);
  CHECK(f.count == 2);
  CHECK(f.total_mass == 1.5);
  REQUIRE(f.spacings.size() == 1);
  CHECK(f.spacings[0] == doctest::Approx(0.4));
}

TEST_CASE("grid validation") {
  GridParams g = small_grid(0.0, 1.0, 1.0);
  CHECK_NOTHROW(g.validate());
  g.dt = g.h * g.h * 1.5;
  CHECK_THROWS_AS(g.validate(), ResolutionError);
  g = small_grid(1.0, 0.0, 1.0);
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = small_grid(0.0, 1.0, 1.0);
  g.h = 0.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = small_grid(0.0, 1.0, 1.0);
  CHECK(g.steps_per_spacing() % 2 == 0);
  CHECK(g.step() <= g.dt);
  CHECK(g.starters() == 21);
}

TEST_CASE("oracles refuse an unresolved grid") {
  GridParams g = small_grid(0.0, 1.0, 1.0);
  g.dt = 0.01;
  CHECK_THROWS_AS(simulate_coalescing_bm(g, 1), ResolutionError);
  CHECK_THROWS_AS(simulate_reflected_web(g, 1), ResolutionError);
}

TEST_CASE("a single starter has no boundaries") {
  const GridParams g = small_grid(0.0, 0.0, 1.0);
  CHECK(g.starters() == 1);
  CHECK(simulate_coalescing_bm(g, 3).points.empty());
  CHECK(simulate_reflected_web(g, 3).points.empty());
}

TEST_CASE("coalescing BM: masses telescope and boundaries are well formed") {
  const GridParams g = small_grid(-1.0, 1.0, 0.5);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto run = simulate_coalescing_bm(g, {0.1, 0.5}, seed);
    REQUIRE(run.snapshots.size() == 2);
    REQUIRE(run.spreads.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
      check_well_formed(run.snapshots[k]);
      CHECK(run.snapshots[k].total_mass() == doctest::Approx(run.spreads[k]).epsilon(1e-12));
      for (const auto& p : run.snapshots[k].points) CHECK(g.extent.contains(p.position));
    }
    CHECK(run.diagnostics.order_violations == 0);
  }
}

TEST_CASE("boundaries only disappear as time grows") {
  const GridParams g = small_grid(-1.0, 1.0, 2.0);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto bm = simulate_coalescing_bm(g, {0.05, 0.5, 2.0}, seed);
    CHECK(positions_subset(bm.snapshots[1], bm.snapshots[0]));
    CHECK(positions_subset(bm.snapshots[2], bm.snapshots[1]));
    const auto web = simulate_reflected_web(g, {0.05, 0.5, 2.0}, seed);
    CHECK(positions_subset(web.snapshots[1], web.snapshots[0]));
    CHECK(positions_subset(web.snapshots[2], web.snapshots[1]));
    CHECK(web.snapshots[2].points.size() <= web.snapshots[0].points.size());
  }
}

TEST_CASE("reflected web: paths stay below the driving path and remain ordered") {
  const GridParams g = small_grid(-1.0, 0.0, 1.0);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto run = simulate_reflected_web(g, {0.5, 1.0}, seed);
    CHECK(run.diagnostics.reflection_violations == 0);
    CHECK(run.diagnostics.order_violations == 0);
    for (const auto& snap : run.snapshots) check_well_formed(snap);
  }
}

TEST_CASE("oracles replay from the seed") {
  const GridParams g = small_grid(-1.0, 1.0, 0.5);
  CHECK(simulate_coalescing_bm(g, 11) == simulate_coalescing_bm(g, 11));
  CHECK(simulate_reflected_web(g, 11) == simulate_reflected_web(g, 11));
  CHECK_FALSE(simulate_coalescing_bm(g, 11) == simulate_coalescing_bm(g, 12));
}

TEST_CASE("two-path meeting probability matches erf(c / (2 sqrt t))") {
  RunOptions opts;
  opts.seed = 5;
  opts.replicas = 10000;
  const auto r = two_path_meeting(1.0, 1.0, 1e-4, opts);
  CHECK(r.target == doctest::Approx(std::erf(0.5)));
  CHECK(std::fabs(r.distinct.estimate - r.target) <= 0.02);
}

TEST_CASE("halving the grid barely moves the functionals") {
  RunOptions opts;
  opts.seed = 9;
  opts.replicas = 200;
  GridParams g;
  g.extent = {-1.5, 0.5};
  g.h = 0.04;
  g.dt = 5e-4;
  g.t = 0.5;
  for (auto regime : {Regime::Supercritical, Regime::Critical}) {
    const auto r = continuum_self_convergence(regime, g, {-1.0, 0.0}, 0.0, opts);
    CHECK(r.count.statistic <= 0.15);
    CHECK(r.total_mass.statistic <= 0.15);
    CHECK(r.count_within_one >= 0.9);
    CHECK(r.reflection_violations == 0);
    CHECK(r.order_violations == 0);
  }
}
