#pragma once

#include <slopepath/datagen.hpp>
#include <slopepath/path_engine.hpp>
#include <slopepath/weights.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace slopepath {

/// Summary of one path over its breakpoints: the states right after each
/// fuse or split event, plus the end state when etaMax is finite, and the
/// state at η = 0 when `includeStart` is set. With no breakpoint the last
/// event's state is used.
struct PathMetrics {
    double meanNonzero = 0.0;
    double meanNonzeroGroups = 0.0;
    long fuseSplitEvents = 0;  // switches are not counted
    long breakpoints = 0;
};

/// Throws EmptyPath when the path has no events at all.
PathMetrics path_metrics(const SolutionPath& path, bool includeStart = false);

struct ExperimentConfig {
    int scenario = 1;
    std::vector<std::pair<int, int>> sizes{{20, 200}};  // (p, n)
    std::vector<WeightDesign> designs;  // Gaussian designs take n from the size
    int replicates = 100;
    std::uint64_t seedBase = 1;
    int threads = 1;
    bool includeStart = false;  // count the η = 0 state in the averages
    EngineOptions engine;
};

/// Default harness designs: BH(0.1), Gaussian(0.1), OSCAR(q = 1), QS.
std::vector<WeightDesign> default_designs();

struct ExperimentCell {
    WeightDesign design;
    int p = 0;
    int n = 0;
    int replicates = 0;  // successful replicates
    double meanNonzero = 0.0;
    double meanNonzeroGroups = 0.0;
    double meanFuseSplitEvents = 0.0;
    // 95% normal-approximation half-widths over replicates
    double ciNonzero = 0.0;
    double ciNonzeroGroups = 0.0;
    double ciFuseSplitEvents = 0.0;
    double meanSeconds = 0.0;
    std::vector<std::string> failures;  // "replicate r: message"
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ExperimentCell> cells;  // size-major, then design in config order
};

/// Replicate r of every size uses ScenarioSpec{scenario, p, n, seedBase, r};
/// all designs see the same instance. Replicates run in parallel and are
/// reduced in index order, so the report does not depend on `threads`.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Machine-readable report. Wall times are left out unless requested, which
/// keeps the output byte-identical across reruns.
std::string report_json(const ExperimentReport& report, bool includeTimings = false);
std::string report_table(const ExperimentReport& report);

/// Level set Σ λᵢ|β|₍ᵢ₎ = 1 in the (β₁, β₂) plane with other coordinates zero,
/// sampled at `angles` equispaced directions (one row per direction).
Matrix emit_contour(const Vector& weights, int angles);

/// Rows (p, ρ_p) for p = 1..pMax; above p = 1000 only every ~2% step in p is
/// kept, plus pMax itself.
std::vector<std::pair<long, double>> emit_sphericity_curve(long pMax);

} // namespace slopepath
