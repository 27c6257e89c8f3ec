#pragma once

#include <slopepath/optimality.hpp>
#include <slopepath/types.hpp>

#include <cstdint>
#include <vector>

namespace slopepath {

/// argmin_b ½‖b − v‖² + Σ λᵢ|b|₍ᵢ₎ for ascending nonnegative λ.
///
/// The largest |vᵢ| is paired with the largest weight; the pairing reversal
/// happens internally so callers only ever see ascending weights.
Vector sorted_l1_prox(const Vector& v, const Vector& weights);

enum class StepRule { Fixed, Backtracking };

struct SolverOptions {
    long maxIterations = 100000;
    StepRule stepRule = StepRule::Fixed;  // fixed 1/L, backtracking kicks in if L was too small
    double stopTolerance = 1e-9;
    bool adaptiveRestart = true;
    bool polish = true;  // re-solve on the identified group structure
    int powerIterations = 20;
    std::uint64_t powerSeed = 0x5eed;
    int checkEvery = 10;
};

struct SolveResult {
    Vector beta;
    OptimalityReport report;
    long iterations = 0;
    bool converged = false;
    bool polished = false;
    double objective = 0.0;
    std::vector<double> restartObjectives;  // objective at every restart boundary
};

/// Accelerated proximal gradient for the quadratic-loss sorted-L1 problem.
/// Stops once the optimality report's worst violation is at most
/// stopTolerance·(1 + ‖λ‖∞). A run that hits maxIterations returns its best
/// iterate with converged = false.
SolveResult solve_slope(const ProblemInstance& instance, const Vector& weights,
                        const SolverOptions& options = {});

/// Largest eigenvalue estimate of XᵀX + ridge·I by seeded power iteration.
double gram_spectral_estimate(const ProblemInstance& instance, int iterations, std::uint64_t seed);

} // namespace slopepath
