#include "doctest.h"

#include <stdexcept>
#include <vector>

#include "slowstart/farm.hpp"
#include "slowstart/stats.hpp"

using namespace slowstart;

TEST_CASE("parallel farm matches the serial reference") {
  auto job = [](std::size_t r) {
    auto s = derive_stream(replica_seed(17, static_cast<std::int64_t>(r)), StreamTag::reference());
    double acc = 0.0;
    for (int k = 0; k < 100; ++k) acc += s.uniform();
    return acc;
  };
  const auto serial = run_replicas_serial<double>(64, job);
  CHECK(run_replicas<double>(64, 1, job) == serial);
  CHECK(run_replicas<double>(64, 8, job) == serial);
  CHECK(run_replicas<double>(64, 0, job) == serial);
}

TEST_CASE("estimators do not depend on the thread count") {
  RunOptions one;
  one.seed = 21;
  one.replicas = 40;
  one.threads = 1;
  RunOptions eight = one;
  eight.threads = 8;
  CHECK(estimate_velocity(2.0, 100.0, one).samples == estimate_velocity(2.0, 100.0, eight).samples);
  const auto a = moving_car_test(2.0, 100.0, {0.0, 20.0}, one);
  const auto b = moving_car_test(2.0, 100.0, {0.0, 20.0}, eight);
  CHECK(a.spacing_sample == b.spacing_sample);
  CHECK(a.intensity.estimate == b.intensity.estimate);
}

TEST_CASE("replica exceptions propagate") {
  auto job = [](std::size_t r) -> int {
    if (r == 5) throw std::runtime_error("replica 5");
    return static_cast<int>(r);
  };
  CHECK_THROWS_AS(run_replicas<int>(10, 4, job), std::runtime_error);
  CHECK(run_replicas<int>(0, 4, job).empty());
}
