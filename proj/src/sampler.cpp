#include "ebd/sampler.hpp"

#include <algorithm>

namespace ebd {

std::vector<std::size_t> admissible_cuts(std::size_t length, std::size_t block_count) {
  if (block_count < 1) throw InputDomainError("block_count must be >= 1");
  const std::size_t blocks = std::min(block_count, std::max<std::size_t>(length, 1));
  const std::size_t base = length / blocks;
  const std::size_t longer = length % blocks;
  std::vector<std::size_t> cuts;
  cuts.reserve(blocks);
  std::size_t start = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    cuts.push_back(start);
    start += base + (b < longer ? 1 : 0);
  }
  return cuts;
}

double log_acceptance(double adv_new, double adv_old, double beta) {
  const double delta = adv_new - adv_old;
  if (beta == 0.0 || delta >= 0.0) return 0.0;
  return beta * delta;
}

double acceptance_probability(double adv_new, double adv_old, double beta) {
  return std::exp(log_acceptance(adv_new, adv_old, beta));
}

}  // namespace ebd
