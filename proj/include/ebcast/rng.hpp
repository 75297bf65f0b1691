#pragma once

#include <cstdint>

namespace ebcast {

// Counter-based 64-bit generator (SplitMix64 finalizer applied to
// seed + i * golden gamma).  value(i) depends only on (seed, i), so any
// draw can be reproduced without replaying the sequence.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t value(std::uint64_t counter) const {
    std::uint64_t z = seed_ + (counter + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0,1) from the top 53 bits.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(value(counter) >> 11) * 0x1.0p-53;
  }

  // Sequential convenience interface.
  std::uint64_t next() { return value(cursor_++); }
  double next_uniform() { return uniform(cursor_++); }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t cursor_ = 0;
};

}  // namespace ebcast
