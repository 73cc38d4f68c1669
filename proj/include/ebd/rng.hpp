#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace ebd {

// Seeded random source. All randomness in the library flows through one of
// these, so results are a pure function of the seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; log() of the result is always finite.
  double uniform_positive() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform over {0, ..., n - 1}; n must be positive.
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

// Mixes a run seed with a stream id (e.g. a prompt index) so independent
// streams never depend on scheduling.
std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t stream);

}  // namespace ebd
