#pragma once

#include <cstdint>
#include <random>

namespace uniconc {

// Deterministic generator used by every sampler.
//
// Algorithm: std::mt19937_64 (bit-exact by the C++ standard) seeded through
// std::seed_seq with the four 32-bit words {seed_lo, seed_hi, stream_lo,
// stream_hi}. Replication r of a run with seed s uses stream r, so a
// replication's draws never depend on how replications are scheduled.
// Real-valued variates are produced by the transforms below rather than the
// implementation-defined <random> distributions.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return engine_(); }

  // 53-bit uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // 53-bit uniform on (0, 1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Fair coin, consuming one bit of a cached 64-bit word.
  bool coin() {
    if (bits_left_ == 0) {
      bits_ = engine_();
      bits_left_ = 64;
    }
    const bool b = (bits_ & 1u) != 0;
    bits_ >>= 1;
    --bits_left_;
    return b;
  }

  // Standard normal by Marsaglia's polar method; the second variate of each
  // accepted pair is cached.
  double normal();

 private:
  std::mt19937_64 engine_;
  std::uint64_t bits_ = 0;
  int bits_left_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace uniconc
