#pragma once

#include "ebd/decode_config.hpp"
#include "ebd/rng.hpp"
#include "ebd/sequence.hpp"

namespace ebd {

// A frozen autoregressive prior p(y | x) under a fixed decoding
// configuration. Implementations must be safe to call concurrently.
template <class Domain>
class Generator {
 public:
  using Prompt = typename Domain::Prompt;
  using Response = typename Domain::Response;

  virtual ~Generator() = default;

  // Draws a complete response from the prior.
  virtual Response sample_full(const Prompt& prompt, const DecodeConfig& config,
                               Rng& rng) const = 0;

  // Returns prefix ++ suffix where the suffix is drawn from the prior
  // conditioned on (prompt, prefix), under the same decoding rules as
  // sample_full.
  virtual Response sample_suffix(const Prompt& prompt, const Response& prefix,
                                 const DecodeConfig& config,
                                 Rng& rng) const = 0;
};

}  // namespace ebd
