#include "ebd/decode_config.hpp"

#include <cmath>

#include "ebd/error.hpp"

namespace ebd {

void DecodeConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw InputDomainError("beta must be finite and >= 0");
  }
  if (block_count < 1) throw InputDomainError("block_count must be >= 1");
  if (pool_size < 1) throw InputDomainError("pool_size must be >= 1");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InputDomainError("temperature must be finite and > 0");
  }
  if (max_len < 1) throw InputDomainError("max_len must be >= 1");
}

}  // namespace ebd
