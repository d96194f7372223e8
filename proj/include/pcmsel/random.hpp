#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace pcmsel {

using Rng = std::mt19937_64;

// Derives an independent generator from a tuple of integer keys, e.g.
// (global_seed, repeat_index). Equal keys give identical streams.
inline Rng make_rng(std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * keys.size());
  for (const std::uint64_t key : keys) {
    words.push_back(static_cast<std::uint32_t>(key & 0xffffffffULL));
    words.push_back(static_cast<std::uint32_t>(key >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace pcmsel
