#include "ebd/rng.hpp"

#include <limits>

#include "ebd/error.hpp"

namespace ebd {

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw InputDomainError("Rng::index: empty range");
  const std::uint64_t range = n;
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return static_cast<std::size_t>(x % range);
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t stream) {
  return splitmix64(splitmix64(run_seed) ^ splitmix64(~stream));
}

}  // namespace ebd
