#pragma once

#include <cstdint>
#include <vector>

namespace rhem {

// Counter-based pseudo random stream (splitmix64). Every consumer derives an
// independent substream from (seed, index), so per-event draws do not depend
// on how many variates earlier events consumed. That is what makes sampled
// tables replayable and insensitive to edits of later events.
class Rng {
 public:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static Rng substream(std::uint64_t seed, std::uint64_t index) {
    Rng r;
    r.state_ = mix(mix(seed) ^ mix(index ^ 0xa0761d6478bd642full));
    return r;
  }

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1) with 53 random bits.
  double next_double() { return (next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0,n), unbiased (Lemire's multiply-with-rejection).
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t x = next();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        x = next();
        m = static_cast<unsigned __int128>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t state_ = 0;
};

// Draws k distinct positions from [0,n) uniformly over k-subsets, by partial
// Fisher-Yates on a virtual array (only touched slots are stored). Output is
// in draw order; sort it if a canonical set is needed.
inline std::vector<std::uint32_t> draw_distinct(std::uint32_t n, std::uint32_t k,
                                                Rng& rng) {
  std::vector<std::uint32_t> out;
  out.reserve(k);
  // Sparse view of the identity array: absent slots hold their own index.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> touched;
  auto read_slot = [&](std::uint32_t idx) {
    for (const auto& kv : touched)
      if (kv.first == idx) return kv.second;
    return idx;
  };
  auto write_slot = [&](std::uint32_t idx, std::uint32_t val) {
    for (auto& kv : touched)
      if (kv.first == idx) {
        kv.second = val;
        return;
      }
    touched.emplace_back(idx, val);
  };
  for (std::uint32_t r = 0; r < k; ++r) {
    auto j = r + static_cast<std::uint32_t>(rng.below(n - r));
    auto vj = read_slot(j);
    write_slot(j, read_slot(r));
    out.push_back(vj);
  }
  return out;
}

}  // namespace rhem
