#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace nnlogit {

/// Counter-based random stream keyed by (master seed, path).
///
/// Every draw is a pure function of (seed, path, counter), so a stream can be
/// re-derived anywhere (another thread, another run) and sibling streams never
/// interact. Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed, std::vector<std::uint64_t> path = {});

  /// Sub-stream at path + {id}. Does not advance this stream.
  RandomStream child(std::uint64_t id) const;

  std::uint64_t seed() const { return seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Unbiased integer in [0, bound).
  std::uint64_t bounded(std::uint64_t bound);
  /// Standard normal via Box-Muller.
  double gaussian();

  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  std::uint64_t seed_;
  std::vector<std::uint64_t> path_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::vector<double> gaussian(RandomStream& stream, std::size_t count);

/// m distinct indices drawn uniformly from {0, ..., n-1}, in draw order.
std::vector<std::size_t> uniform_choice(RandomStream& stream, std::size_t n, std::size_t m);

/// Uniformly random permutation of {0, ..., n-1}.
std::vector<std::size_t> shuffle(RandomStream& stream, std::size_t n);

/// Fixed sub-stream identifiers so each consumer of a master seed draws from
/// its own stream.
namespace stream_tag {
inline constexpr std::uint64_t query_draw = 1;
inline constexpr std::uint64_t folds = 2;
inline constexpr std::uint64_t covariates = 3;
inline constexpr std::uint64_t noise = 4;
inline constexpr std::uint64_t split = 5;
inline constexpr std::uint64_t vote_ties = 6;
inline constexpr std::uint64_t replication = 7;
inline constexpr std::uint64_t test_set = 8;
}  // namespace stream_tag

}  // namespace nnlogit
