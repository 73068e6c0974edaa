#pragma once

#include <cstdint>
#include <random>

namespace gf {

using Rng = std::mt19937_64;

// splitmix64 step; used to derive well-separated per-chain seeds from a master
// seed. Chain k gets splitmix64(master + k), so independently configured runs
// with the same master seed reproduce chain-for-chain.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline Rng make_chain_rng(std::uint64_t master_seed, std::uint64_t chain_index) {
    return Rng(splitmix64(master_seed + chain_index));
}

}  // namespace gf
