#include "gcid/rng.hpp"

namespace gcid {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t index) {
  // Mix the index through its own SplitMix step before combining so that
  // neighbouring (seed, index) pairs land on unrelated states.
  std::uint64_t state = index;
  const std::uint64_t mixed = splitmix64(state);
  std::uint64_t s = seed;
  return Rng(splitmix64(s) ^ mixed);
}

Rng Rng::split(std::uint64_t index) const {
  return stream(s_[0] ^ rotl(s_[2], 17), index);
}

}  // namespace gcid
