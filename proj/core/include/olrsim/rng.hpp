#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace olrsim {

using Rng = std::mt19937_64;

// Seed splitting rule: every random stream in a run is derived from the master
// seed, a component tag and an index (prompt id, epoch, trial, ...). Streams for
// different tags are independent, so adding a new consumer never shifts the
// draws seen by existing ones.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t index = 0);

inline Rng make_stream(std::uint64_t master, std::string_view tag,
                       std::uint64_t index = 0) {
  return Rng(derive_seed(master, tag, index));
}

}  // namespace olrsim
