#pragma once

// Deterministic, splittable random streams.
//
// Every stochastic object is a pure function of (master seed, stream tag):
// a tag is mixed with the seed into the initial state of an independent
// xoshiro256** generator. A stream for a tag can therefore be rebuilt at any
// time without touching any other stream.

#include <array>
#include <cstdint>
#include <vector>

namespace slowstart {

enum class StreamKind : std::uint8_t {
  InitialLeft = 1,    // spacings of the initial configuration left of 0
  InitialRight = 2,   // spacings right of 0
  Clocks = 3,         // per-site departure clocks, index = site label
  OracleIncrements = 4,  // continuum oracle paths, index = path index
  DrivingPath = 5,    // continuum driving path W
  Replica = 6,        // replica namespace, index = replica id
  Naive = 7,          // event-driven reference simulator
  Queue = 8,          // M/M/1 oracle
  Reference = 9,      // reference samples drawn inside tests / estimators
};

struct StreamTag {
  StreamKind kind;
  std::int64_t index = 0;

  static StreamTag initial_left() { return {StreamKind::InitialLeft, 0}; }
  static StreamTag initial_right() { return {StreamKind::InitialRight, 0}; }
  static StreamTag clocks(std::int64_t site) { return {StreamKind::Clocks, site}; }
  static StreamTag oracle(std::int64_t path) { return {StreamKind::OracleIncrements, path}; }
  static StreamTag driving_path() { return {StreamKind::DrivingPath, 0}; }
  static StreamTag replica(std::int64_t id) { return {StreamKind::Replica, id}; }
  static StreamTag naive(std::int64_t index = 0) { return {StreamKind::Naive, index}; }
  static StreamTag queue(std::int64_t index = 0) { return {StreamKind::Queue, index}; }
  static StreamTag reference(std::int64_t index = 0) { return {StreamKind::Reference, index}; }
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Single-consumer random stream. Copying a stream forks its state.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamTag tag);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double standard_normal();

  std::uint64_t seed() const { return seed_; }
  StreamTag tag() const { return tag_; }

 private:
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t seed_;
  StreamTag tag_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

RngStream derive_stream(std::uint64_t seed, StreamTag tag);

/// Seed that namespaces all streams of one replica.
std::uint64_t replica_seed(std::uint64_t master_seed, std::int64_t replica);

double sample_exponential(RngStream& stream, double rate);

/// Next point of a rate-`rate` Poisson process after `previous`, snapped up
/// to the dyadic grid and strictly greater than `previous`.
double next_poisson_point(RngStream& stream, double previous, double rate);

/// Poisson points on [a, b] by cumulative spacings from a. Growing b only
/// appends points. Points are snapped upward to the dyadic grid (see
/// grid.hpp), so equal (seed, tag) always yield the same exact values.
std::vector<double> sample_poisson_points(RngStream& stream, double a, double b,
                                          double rate);

}  // namespace slowstart
