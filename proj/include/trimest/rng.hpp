#pragma once

#include <cstdint>

namespace trimest {

/// Counter-based deterministic random stream (Philox 4x32-10).
///
/// A generator is identified by (seed, stream); draws depend only on the
/// draw counter, never on thread schedule. Substreams derived through
/// substream() are statistically independent, so parallel replications can
/// each own a stream keyed by their replication index.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64();

  /// Uniform draw in the open interval (0, 1).
  double uniform();

  /// Standard normal draw via the inverse CDF.
  double normal();

  /// Independent stream with the same seed, keyed by `k`.
  Rng substream(std::uint64_t k) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::uint64_t block_[2] = {0, 0};
  int avail_ = 0;
};

/// splitmix64 finalizer, used for stream key derivation.
std::uint64_t mix64(std::uint64_t x);

}  // namespace trimest
