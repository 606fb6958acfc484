#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "dlcov/types.hpp"

namespace dlcov {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives a child seed from a base seed and a list of indices. Order matters;
/// the result does not depend on how many other seeds were derived before.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = mix64(base);
    for (auto p : parts) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
    return h;
}

/// Circularly-symmetric complex standard normal vector (unit variance per entry).
CVec complex_normal(Eigen::Index n, Rng& rng);

}  // namespace dlcov
