#include "slowstart/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "slowstart/grid.hpp"

namespace slowstart {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t mix(std::uint64_t x) {
  std::uint64_t s = x;
  return splitmix64(s);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed, StreamTag tag) : seed_(seed), tag_(tag) {
  // Keyed mixing: the tag is hashed into a key, the key into the seed.
  std::uint64_t key = mix(static_cast<std::uint64_t>(tag.kind) * 0xd1342543de82ef95ULL ^
                          mix(static_cast<std::uint64_t>(tag.index)));
  std::uint64_t state = mix(seed) ^ key;
  for (auto& word : s_) word = splitmix64(state);
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::standard_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

RngStream derive_stream(std::uint64_t seed, StreamTag tag) { return RngStream(seed, tag); }

std::uint64_t replica_seed(std::uint64_t master_seed, std::int64_t replica) {
  return derive_stream(master_seed, StreamTag::replica(replica)).next_u64();
}

double sample_exponential(RngStream& stream, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw std::invalid_argument("exponential rate must be positive");
  }
  return -std::log(stream.uniform()) / rate;
}

double next_poisson_point(RngStream& stream, double previous, double rate) {
  double next = grid::snap_up(previous + sample_exponential(stream, rate));
  if (next <= previous) next = previous + grid::kStep;
  return next;
}

std::vector<double> sample_poisson_points(RngStream& stream, double a, double b,
                                          double rate) {
  if (!(a < b)) throw std::invalid_argument("poisson interval requires a < b");
  if (!(rate > 0.0)) throw std::invalid_argument("poisson rate must be positive");
  std::vector<double> points;
  double x = grid::snap(a);
  while (true) {
    const double next = next_poisson_point(stream, x, rate);
    if (next > b) break;
    points.push_back(next);
    x = next;
  }
  return points;
}

}  // namespace slowstart
