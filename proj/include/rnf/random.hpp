#pragma once

#include <cstdint>
#include <random>

namespace rnf {

// Uniform double in [0, 1) from the top 53 bits; identical across standard libraries.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

// Standard normal by Box-Muller on uniform01.
double normal01(std::mt19937_64& rng);

}  // namespace rnf
