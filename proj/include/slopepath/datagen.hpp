#pragma once

#include <slopepath/types.hpp>

#include <cstdint>

namespace slopepath {

/// The two synthetic designs of the simulation study.
///
/// Scenario 1: β = (θ, −θ) with θ ~ N(0, I), rows of X ~ N(0, Σ) where
/// Σ = n^{-1/2}·[[I, 0.8I], [0.8I, I]]. Scenario 2: β uniform on {−2,…,2},
/// X entries uniform on {−1, 0, 1}. Both use y = Xβ + e with e ~ N(0, I).
struct ScenarioSpec {
    int scenario = 1;
    int p = 20;
    int n = 200;
    std::uint64_t seed = 1;
    std::uint32_t replicate = 0;  // selects an independent substream under the same seed
};

struct GeneratedData {
    ProblemInstance instance;
    Vector trueBeta;
};

/// Substream ids; each variable reads its own Philox counter range.
enum class Substream : std::uint32_t { Theta = 1, Design = 2, Noise = 3, Beta = 4 };

/// Deterministic in spec. Throws OddP (scenario 1 with odd p),
/// InvalidDimension and OutOfRange (unknown scenario).
GeneratedData generate(const ScenarioSpec& spec);

} // namespace slopepath
