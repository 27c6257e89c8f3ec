#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace slopepath {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Response, design and optional ridge weight of a sorted-L1 regression
/// problem  min ½‖y − Xβ‖² + ½·ridge·‖β‖² + Σ λᵢ|β|₍ᵢ₎.
struct ProblemInstance {
    Vector y;
    Matrix X;
    double ridge = 0.0;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }
};

/// λ(η) = lambda0 + η·lambdaBar, valid on [0, etaMax).
struct WeightRay {
    Vector lambda0;
    Vector lambdaBar;
    double etaMax = kInfinity;

    Vector at(double eta) const { return lambda0 + eta * lambdaBar; }
    Eigen::Index p() const { return lambda0.size(); }
};

enum class EventKind { Fuse, Split, SwitchOrder, SwitchSign, Terminate };

const char* to_string(EventKind kind) noexcept;
EventKind event_kind_from_string(const std::string& name);

/// A breakpoint of the path. Indices follow the grouped notation: `group` is
/// the group index g (0 is the zero group), `k` is 1-based within the group
/// for splits and the 1-based position for order switches.
struct PathEvent {
    EventKind kind = EventKind::Terminate;
    double eta = 0.0;
    int group = 0;
    int k = 0;
    // state right after the event
    int nonzeroCoefficients = 0;
    int nonzeroGroups = 0;

    bool operator==(const PathEvent&) const = default;
};

/// One affine piece β(η) = betaStart + (η − etaStart)·slope on [etaStart, etaEnd).
struct PathSegment {
    double etaStart = 0.0;
    double etaEnd = kInfinity;
    Vector betaStart;
    Vector slope;
    PathEvent endingEvent;

    Vector at(double eta) const { return betaStart + (eta - etaStart) * slope; }
};

struct PathProvenance {
    std::string instanceHash;
    WeightRay ray;
    std::string options;  // serialized engine options
};

struct PathDiagnostics {
    std::int64_t fuseEvents = 0;
    std::int64_t splitEvents = 0;
    std::int64_t orderSwitchEvents = 0;
    std::int64_t signSwitchEvents = 0;
    std::int64_t inverseChecks = 0;
    std::int64_t fallbackRefactorizations = 0;
    double maxInverseError = 0.0;
    // state at the start of the run
    int initialNonzero = 0;
    int initialGroups = 0;
    // wall time spent applying events of each class, seconds
    double switchSeconds = 0.0;
    double fuseSplitSeconds = 0.0;
};

struct SolutionPath {
    std::vector<PathSegment> segments;
    std::vector<PathEvent> events;
    PathProvenance provenance;
    PathDiagnostics diagnostics;

    /// Horizon of the path: end of the last segment.
    double horizon() const { return segments.empty() ? 0.0 : segments.back().etaEnd; }
};

/// Validation outcome for an instance.
struct InstanceReport {
    Eigen::Index effectiveRank = 0;
    double smallestPivot = 0.0;
};

/// Checks finiteness, shape and nonsingularity of XᵀX + ridge·I (pivot
/// threshold 1e−10·max diagonal). Throws NonFinite, DimensionMismatch,
/// InvalidDimension or SingularGram.
InstanceReport validate_instance(const ProblemInstance& instance);

/// Returns the ray with etaMax set to the largest value for which
/// 0 ≤ λ₁(η) ≤ … ≤ λₚ(η) holds on [0, etaMax).
WeightRay validate_ray(const Vector& lambda0, const Vector& lambdaBar);

/// Stable content hash (FNV-1a over the raw bytes) used in path provenance.
std::string instance_hash(const ProblemInstance& instance);

} // namespace slopepath
