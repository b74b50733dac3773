#pragma once

#include <array>
#include <cstdint>

namespace avghb {

// Deterministic, platform-independent pseudo random stream.
//
// Engine: xoshiro256** (Blackman & Vigna), state seeded by four successive
// outputs of splitmix64 started at `seed`.
// Uniform: u = (next() >> 11) * 2^-53, a double in [0, 1).
// Normal: Box-Muller on (u1, u2) with u1 replaced by 1 - u1 so the log
// argument lies in (0, 1]; both variates of a pair are used, the cosine
// branch first.
//
// Any reimplementation following the recipe above reproduces the integer
// stream bit for bit; normal variates additionally depend on the libm
// implementation of log/sqrt/cos/sin.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();
  double normal();

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// splitmix64 finalizer applied to `x`.
std::uint64_t splitmix64(std::uint64_t x);

// Child seed for stream `index` of a parent seed; adding streams does not
// perturb existing ones.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace avghb
