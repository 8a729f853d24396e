#pragma once

#include <cstdint>

namespace manistats {

// Deterministic, splittable random stream. A stream is keyed by a 64-bit seed
// plus an arbitrary list of stream indices (replicate id, sample-size id, ...)
// hashed through SplitMix64, then advanced with xoshiro256**. Identical keys
// give bit-identical streams on every platform; distinct replicate indices
// give independent streams, so parallel replicates need no synchronization.
class RngStream {
public:
  static constexpr const char* kGeneratorId = "splitmix64/xoshiro256ss-v1";

  explicit RngStream(std::uint64_t seed) { init(seed); }
  RngStream(std::uint64_t seed, std::uint64_t stream) {
    init(mix(seed, stream));
  }
  RngStream(std::uint64_t seed, std::uint64_t s1, std::uint64_t s2) {
    init(mix(mix(seed, s1), s2));
  }

  std::uint64_t next_u64();

  // Uniform on [0, 1) from the top 53 bits.
  double uniform01();
  // Uniform on [a, b).
  double uniform(double a, double b);
  // Standard normal (polar Box-Muller; consumes a variable number of draws).
  double normal();
  // Marsaglia-Tsang gamma for alpha >= 1.
  double gamma(double alpha);
  double beta(double a, double b);

private:
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b);
  void init(std::uint64_t seed);

  std::uint64_t s_[4] = {};
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace manistats
