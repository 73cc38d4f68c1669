#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ebd {

// Decoding configuration shared by the prior, the proposal and the chain.
// Defaults are the reference hyperparameters.
struct DecodeConfig {
  double beta = 3.5;              // inverse temperature of the reward tilt
  std::size_t steps = 12;         // refinement steps K
  std::size_t block_count = 12;   // blocks M per response
  std::size_t pool_size = 4;      // warm-start pool n_init
  double temperature = 1.0;       // sampling temperature tau
  std::size_t max_len = 3072;     // length cap L_max in tokens
  std::uint64_t seed = 42;
  std::vector<std::string> stop;  // stop strings (remote backends)

  // Throws InputDomainError when an invariant does not hold.
  void validate() const;
};

}  // namespace ebd
