#pragma once

#include <slopepath/prox.hpp>
#include <slopepath/types.hpp>

#include <cstdint>
#include <functional>
#include <vector>

namespace slopepath {

/// Snapshot of the fused-group structure at one η.
///
/// Groups are listed in ascending level; groups[0] is the zero group. `order`
/// is o(·) as 0-based feature indices, and `groupStart[g]` is q_g (with p
/// appended). `gramInverse` is indexed by nonzero group (row g−1 for G_g).
struct GroupStructure {
    std::vector<std::vector<int>> groups;
    Vector groupValues;  // β^G_1..β^G_ḡ
    std::vector<int> signs;
    std::vector<int> order;
    std::vector<int> groupStart;
    Matrix gramInverse;

    int nonzeroGroups() const { return static_cast<int>(groups.size()) - 1; }
};

struct EngineOptions {
    long iterationCap = -1;           // negative: 50·p²
    bool recordSegments = true;       // false keeps only events and diagnostics
    int validateEvery = 50;           // structural events between Gram-inverse checks; 0 disables
    double inverseTolerance = 1e-8;   // relative Frobenius error that forces a refactorization
    double pivotTolerance = 1e-10;    // relative Schur pivot below which an update refactorizes
    double groupingTolerance = -1.0;  // negative: 1e−7·(1 + ‖β⁰‖∞) for solver-based starts
    double timingTolerance = 1e-10;   // candidate timings at or below this fire immediately
    double tieTolerance = 1e-12;      // relative gap under which candidates count as simultaneous
    bool profile = false;             // accumulate per-event-class wall time
    int kernelThreads = 1;
    SolverOptions initialSolver;
};

struct SegmentSolution {
    Vector levels;  // β^G_{−0}(η)
    Vector slope;   // dβ^G_{−0}/dη
};

struct SplitTiming {
    int group = 0;
    int k = 0;  // 1-based within the group
    double delta = kInfinity;
};

struct SwitchTiming {
    int k = 0;  // 1-based position of the lower member of the pair
    double delta = kInfinity;
};

/// Exact homotopy of the sorted-L1 solution along λ(η) = λ₀ + η·λ̄ for the
/// quadratic loss.
///
/// The engine keeps the current group structure, the inverse of the grouped
/// Gram matrix (updated by bordering on fuse/split events) and every candidate
/// event time in per-class min-trees, so order and sign switches cost
/// O(log p) while fuse and split events cost O(np).
class PathEngine {
public:
    PathEngine(const ProblemInstance& instance, const WeightRay& ray, EngineOptions options = {});

    double eta() const { return eta_; }
    int nonzeroGroups() const { return static_cast<int>(groupStart_.size()) - 1; }
    int zeroGroupSize() const { return group_end(0); }

    GroupStructure structure() const;

    /// Grouped columns x^G_g = Σ_{j∈G_g} sign(β_j)·x_j, g = 1..ḡ.
    Matrix grouped_design() const;

    /// Closed-form levels at the current η and their constant slope.
    SegmentSolution segment_solution() const;

    /// Δ^fuse_g for g = 0..ḡ−1 (g = 0 is the first group reaching zero).
    std::vector<double> next_fuse_times() const;
    /// Δ^split for every admissible (g, k).
    std::vector<SplitTiming> next_split_times() const;
    /// Order switches for adjacent members of one group.
    std::vector<SwitchTiming> next_switch_times() const;
    /// Sign switch of o(1) when it lies in the zero group.
    double next_sign_switch_time() const;

    /// The next event by the tie rule Fuse > SwitchSign > SwitchOrder > Split;
    /// Terminate with eta = ∞ when nothing can happen.
    PathEvent next_event() const;

    /// Moves to `event.eta` and applies the event.
    void apply_event(const PathEvent& event);

    Vector beta() const;   // β at the current η
    Vector slope() const;  // dβ/dη on the current segment
    Vector gradient() const;

    /// Inverse of the grouped Gram matrix as maintained incrementally, and
    /// recomputed from scratch, both in group order.
    Matrix gram_inverse() const;
    Matrix scratch_gram_inverse() const;

    const PathDiagnostics& diagnostics() const { return diagnostics_; }

    /// Runs to etaMax (or until no event remains) and returns the path.
    SolutionPath run();

private:
    struct MinTree {
        void reset(int size);
        void set(int index, double value);
        double value(int index) const { return leaves_[index]; }
        double min() const { return nodes_.empty() ? kInfinity : nodes_[1].first; }
        int argmin() const { return nodes_.empty() ? -1 : nodes_[1].second; }

    private:
        int base_ = 0;
        std::vector<double> leaves_;
        std::vector<std::pair<double, int>> nodes_;
    };

    // structure helpers
    int group_begin(int g) const { return groupStart_[g]; }
    int group_end(int g) const { return g + 1 < static_cast<int>(groupStart_.size()) ? groupStart_[g + 1] : p_; }
    Vector group_column(int begin, int end) const;
    void remove_slot(int g);
    void append_slot(int g, const Vector& column, double size);
    void refactorize();
    void check_inverse();

    // segment state
    void recompute(const std::vector<int>& dirtyGroups);
    void rebuild_candidates();
    void refresh_split(int pos);
    void refresh_order(int pos);
    void refresh_sign();
    double crossing(double value, double rate, double rateTol) const;
    double d_at(int pos) const { return dValue_[pos] + (eta_ - etaSeg_) * dRate_[pos]; }
    double level_at(int g) const;
    double level_rate(int g) const;
    void recompute_suffix(int begin, int end);

    void apply_fuse(int g);
    void apply_split(int g, int k);
    void apply_switch_order(int pos);
    void apply_switch_sign();
    void relabel_groups();

    const ProblemInstance& instance_;
    WeightRay ray_;
    EngineOptions options_;
    int n_ = 0;
    int p_ = 0;

    Vector xty_;
    std::vector<double> cumLambda0_;
    std::vector<double> cumLambdaBar_;

    double eta_ = 0.0;
    double etaSeg_ = 0.0;

    std::vector<int> order_;
    std::vector<int> posOf_;
    std::vector<int> sign_;
    std::vector<int> groupStart_;  // groupStart_[g] = q_g; G_g spans [q_g, q_{g+1})
    std::vector<int> groupOfPos_;
    std::vector<char> needsSign_;  // zero-group members whose s is taken from the gradient

    // slot bookkeeping for the grouped Gram inverse
    std::vector<int> slotOf_;  // slotOf_[g − 1]
    Matrix groupedColumns_;    // n × p, slot order
    Vector slotSize_;
    Matrix inverse_;           // p × p, leading ḡ × ḡ block active
    int slots_ = 0;
    long structuralEvents_ = 0;

    // affine data on the current segment, anchored at etaSeg_
    Vector levels_;      // by group g − 1
    Vector levelSlope_;
    Vector grad0_;
    Vector gradRate_;
    std::vector<double> dValue_, dRate_;  // by position
    std::vector<double> sValue_, sRate_;  // within-group suffix sums by position
    double rateTol_ = 0.0;      // rates of margins and gradient gaps
    double fuseRateTol_ = 0.0;  // rates of level gaps
    double valueScale_ = 1.0;

    MinTree fuseTree_;
    MinTree splitTree_;
    MinTree orderTree_;
    double signEta_ = kInfinity;

    PathDiagnostics diagnostics_;
};

SolutionPath run_path(const ProblemInstance& instance, const WeightRay& ray, const EngineOptions& options = {});

/// β(η) by binary search over the segments. Throws OutOfRange outside
/// [0, horizon).
Vector eval_path(const SolutionPath& path, double eta);

} // namespace slopepath
