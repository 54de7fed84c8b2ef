#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "slowstart/grid.hpp"
#include "slowstart/rng.hpp"

using namespace slowstart;

TEST_CASE("equal seed and tag replay the same sequence") {
  auto a = derive_stream(42, StreamTag::clocks(0));
  auto b = derive_stream(42, StreamTag::clocks(0));
  bool same = true;
  for (int k = 0; k < 1'000'000; ++k) same = same && (a.next_u64() == b.next_u64());
  CHECK(same);
}

TEST_CASE("distinct tags and seeds give distinct sequences") {
  auto base = derive_stream(42, StreamTag::clocks(0));
  auto other_tag = derive_stream(42, StreamTag::clocks(1));
  auto other_seed = derive_stream(43, StreamTag::clocks(0));
  int equal_tag = 0;
  int equal_seed = 0;
  for (int k = 0; k < 100; ++k) {
    const auto x = base.next_u64();
    equal_tag += x == other_tag.next_u64();
    equal_seed += x == other_seed.next_u64();
  }
  CHECK(equal_tag == 0);
  CHECK(equal_seed == 0);
  // Kinds with the same index must not collide either.
  CHECK(derive_stream(42, StreamTag::oracle(3)).next_u64() !=
        derive_stream(42, StreamTag::clocks(3)).next_u64());
}

TEST_CASE("a stream does not depend on other streams being consumed") {
  auto fresh = derive_stream(9, StreamTag::clocks(5));
  auto noise = derive_stream(9, StreamTag::clocks(4));
  for (int k = 0; k < 1000; ++k) noise.next_u64();
  auto late = derive_stream(9, StreamTag::clocks(5));
  CHECK(fresh.next_u64() == late.next_u64());
}

TEST_CASE("exponential sample means") {
  for (auto [rate, lo, hi] : {std::tuple{1.0, 0.997, 1.003}, std::tuple{2.0, 0.4985, 0.5015}}) {
    auto s = derive_stream(2024, StreamTag::reference(static_cast<int>(rate)));
    double sum = 0.0;
    bool positive = true;
    const int n = 1'000'000;
    for (int k = 0; k < n; ++k) {
      const double x = sample_exponential(s, rate);
      positive = positive && x > 0.0;
      sum += x;
    }
    CHECK(positive);
    CHECK(sum / n >= lo);
    CHECK(sum / n <= hi);
  }
  auto s = derive_stream(1, StreamTag::reference());
  CHECK_THROWS_AS(sample_exponential(s, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(sample_exponential(s, -1.0), std::invalid_argument);
}

TEST_CASE("poisson points: counts, ordering, prefix property") {
  double total = 0.0;
  const int replicas = 1000;
  for (int r = 0; r < replicas; ++r) {
    auto s = derive_stream(77, StreamTag::replica(r));
    const auto pts = sample_poisson_points(s, 0.0, 1000.0, 2.0);
    total += static_cast<double>(pts.size());
  }
  CHECK(std::fabs(total / replicas - 2000.0) <= 3.0 * std::sqrt(2000.0 / replicas));

  for (double rate : {0.3, 1.0, 5.0}) {
    auto s1 = derive_stream(5, StreamTag::initial_right());
    auto s2 = derive_stream(5, StreamTag::initial_right());
    const auto short_run = sample_poisson_points(s1, 0.0, 10.0, rate);
    const auto long_run = sample_poisson_points(s2, 0.0, 20.0, rate);
    REQUIRE(short_run.size() <= long_run.size());
    bool prefix = true;
    for (std::size_t k = 0; k < short_run.size(); ++k) prefix = prefix && short_run[k] == long_run[k];
    CHECK(prefix);
    bool ordered = true;
    for (std::size_t k = 0; k < long_run.size(); ++k) {
      ordered = ordered && long_run[k] > (k ? long_run[k - 1] : 0.0) && long_run[k] <= 20.0 &&
                grid::on_grid(long_run[k]);
    }
    CHECK(ordered);
  }

  auto s = derive_stream(1, StreamTag::reference());
  CHECK(sample_poisson_points(s, 0.0, 1e-12, 1.0).empty());
  CHECK_THROWS_AS(sample_poisson_points(s, 1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(sample_poisson_points(s, 2.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("paired draws of distinct tags are uncorrelated") {
  auto a = derive_stream(11, StreamTag::clocks(0));
  auto b = derive_stream(11, StreamTag::clocks(1));
  const int n = 100'000;
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (int k = 0; k < n; ++k) {
    const double x = a.uniform();
    const double y = b.uniform();
    sa += x;
    sb += y;
    saa += x * x;
    sbb += y * y;
    sab += x * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
  CHECK(std::fabs(corr) <= 0.01);
}

TEST_CASE("standard normal moments") {
  auto s = derive_stream(3, StreamTag::oracle(0));
  const int n = 400'000;
  double sum = 0, sq = 0;
  for (int k = 0; k < n; ++k) {
    const double z = s.standard_normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::fabs(sum / n) < 3.0 / std::sqrt(n));
  CHECK(std::fabs(sq / n - 1.0) < 3.0 * std::sqrt(2.0 / n));
}
