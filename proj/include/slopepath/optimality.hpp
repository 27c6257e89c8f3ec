#pragma once

#include <slopepath/types.hpp>

#include <vector>

namespace slopepath {

/// Coordinates grouped by equal absolute value. groups[0] is the zero group
/// (possibly empty); groups[1..] have strictly increasing levels.
struct Partition {
    std::vector<std::vector<int>> groups;
    std::vector<double> levels;

    int nonzeroGroups() const { return static_cast<int>(groups.size()) - 1; }
};

/// Groups |β| by value; entries within `tol` of each other (chained) share a
/// group, entries with |βᵢ| <= tol form the zero group.
Partition partition_by_magnitude(const Vector& beta, double tol);

struct SignsAndOrder {
    std::vector<int> signs;       // s, in {−1, +1}
    std::vector<int> order;       // o(1..p) as 0-based feature indices
    std::vector<int> groupStart;  // q_g, one entry per group plus p at the end
};

/// sᵢ = −sign(βᵢ) for nonzero coordinates and sign(∇fᵢ) in the zero group;
/// o lists the groups in ascending level with members sorted by ascending
/// sᵢ∇fᵢ, ties by index. Throws InconsistentGroups when some |βᵢ| is farther
/// than `tol` from its group level.
SignsAndOrder signs_and_order(const Vector& beta, const Vector& gradient,
                              const Partition& partition, double tol);

struct SlackMargin {
    int group = 0;
    int k = 0;  // 1-based within the group
    double margin = 0.0;
};

struct Violation {
    int condition = 0;  // 0 none, 1 equality, 2 zero-group suffix, 3 nonzero-group suffix
    int group = 0;
    int k = 0;
    double magnitude = 0.0;
};

struct OptimalityReport {
    bool optimal = false;
    std::vector<double> cond1Residuals;  // λ^G_{g,1} − ∇f^G_{g,1}, g = 1..ḡ
    std::vector<SlackMargin> slackMargins;
    Violation worstViolation;
    double tolEq = 0.0;
    double tolIneq = 0.0;
};

struct CheckOptions {
    double tolEq = -1.0;     // negative: 1e−8·(1 + ‖λ‖∞)
    double tolIneq = -1.0;   // negative: 1e−8·(1 + ‖λ‖∞)
    double groupTol = -1.0;  // negative: 1e−9·(1 + ‖β‖∞)
};

/// Exact sorted-L1 optimality test for β given ∇f(β): the grouped equality
/// λ^G_{g,1} = ∇f^G_{g,1} for every nonzero group and the suffix inequalities
/// λ^G_{g,k} >= ∇f^G_{g,k} (zero group: all k; nonzero groups: k >= 2).
OptimalityReport check_optimality(const Vector& beta, const Vector& gradient,
                                  const Vector& weights, const CheckOptions& options = {});

/// ∇f for the quadratic loss: Xᵀ(Xβ − y) + ridge·β.
Vector quadratic_gradient(const ProblemInstance& instance, const Vector& beta);

/// ½‖y − Xβ‖² + ½·ridge·‖β‖² + Σ λᵢ|β|₍ᵢ₎.
double slope_objective(const ProblemInstance& instance, const Vector& beta, const Vector& weights);

} // namespace slopepath
