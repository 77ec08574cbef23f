#include "noisescope/random.hpp"

namespace noisescope {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t key_lo, std::uint64_t key_hi) {
  auto lo32 = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xFFFFFFFFULL); };
  auto hi32 = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo32(seed), hi32(seed), lo32(key_lo), hi32(key_lo), lo32(key_hi), hi32(key_hi)};
  return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : RandomStream(seed, 0, 0) {}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t key_lo, std::uint64_t key_hi)
    : seed_(seed), key_lo_(key_lo), key_hi_(key_hi), engine_(make_engine(seed, key_lo, key_hi)) {}

RandomStream::RandomStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
    : RandomStream(seed) {
  for (std::uint64_t index : path) {
    *this = substream(index);
  }
}

RandomStream RandomStream::substream(std::uint64_t index) const {
  const std::uint64_t lo = splitmix64(key_lo_ ^ splitmix64(index));
  const std::uint64_t hi = splitmix64(key_hi_ + lo);
  return RandomStream(seed_, lo, hi);
}

double RandomStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

}  // namespace noisescope
