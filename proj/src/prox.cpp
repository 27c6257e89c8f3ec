#include <slopepath/error.hpp>
#include <slopepath/prox.hpp>
#include <slopepath/weights.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace slopepath {

Vector sorted_l1_prox(const Vector& v, const Vector& weights)
{
    const auto p = v.size();
    if (weights.size() != p) {
        throw Error(ErrorCode::DimensionMismatch, "prox input and weights differ in length");
    }
    std::vector<Eigen::Index> idx(p);
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(v[a]) > std::abs(v[b]);
    });

    // Pool adjacent violators on |v|₍desc₎ − λ₍desc₎ for a nonincreasing fit.
    struct Block {
        Eigen::Index start;
        double sum;
        double count;
        double mean() const { return sum / count; }
    };
    std::vector<Block> stack;
    stack.reserve(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double value = std::abs(v[idx[i]]) - weights[p - 1 - i];
        stack.push_back(Block{i, value, 1.0});
        while (stack.size() > 1 && stack[stack.size() - 2].mean() <= stack.back().mean()) {
            const Block top = stack.back();
            stack.pop_back();
            stack.back().sum += top.sum;
            stack.back().count += top.count;
        }
    }

    Vector out = Vector::Zero(p);
    for (std::size_t b = 0; b < stack.size(); ++b) {
        const Eigen::Index end = b + 1 < stack.size() ? stack[b + 1].start : p;
        const double value = std::max(stack[b].mean(), 0.0);
        if (value == 0.0) break;  // blocks are nonincreasing, the rest clamp to zero
        for (Eigen::Index i = stack[b].start; i < end; ++i) {
            out[idx[i]] = v[idx[i]] < 0.0 ? -value : value;
        }
    }
    return out;
}

double gram_spectral_estimate(const ProblemInstance& instance, int iterations, std::uint64_t seed)
{
    const auto p = instance.p();
    std::mt19937_64 gen(seed);
    Vector v(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        v[i] = static_cast<double>(gen() >> 11) * 0x1.0p-53 + 0.5;
    }
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < std::max(iterations, 1); ++it) {
        Vector w = instance.X.transpose() * (instance.X * v);
        w += instance.ridge * v;
        estimate = v.dot(w);
        const double norm = w.norm();
        if (norm == 0.0) break;
        v = w / norm;
    }
    return std::max(estimate, 0.0);
}

namespace {

double smooth_loss(const ProblemInstance& instance, const Vector& beta)
{
    return 0.5 * (instance.y - instance.X * beta).squaredNorm()
           + 0.5 * instance.ridge * beta.squaredNorm();
}

// Re-solve the equality-constrained problem on the group structure read off
// an iterate with exact ties (prox outputs have them). Returns an empty vector
// when the reduced solution is not a valid ordered point.
Vector polish_on_structure(const ProblemInstance& instance, const Vector& weights, const Vector& beta)
{
    const double tol = 1e-12 * (1.0 + beta.cwiseAbs().maxCoeff());
    const Partition part = partition_by_magnitude(beta, tol);
    const int groups = part.nonzeroGroups();
    if (groups == 0) return Vector::Zero(beta.size());

    const auto n = instance.n();
    Matrix columns = Matrix::Zero(n, groups);
    Vector sizes(groups);
    Vector lambdaG(groups);
    Eigen::Index position = static_cast<Eigen::Index>(part.groups[0].size());
    for (int g = 1; g <= groups; ++g) {
        double lam = 0.0;
        for (int i : part.groups[g]) {
            columns.col(g - 1) += (beta[i] > 0.0 ? 1.0 : -1.0) * instance.X.col(i);
            lam += weights[position++];
        }
        sizes[g - 1] = static_cast<double>(part.groups[g].size());
        lambdaG[g - 1] = lam;
    }
    Matrix gram = columns.transpose() * columns;
    gram.diagonal() += instance.ridge * sizes;
    const Vector rhs = columns.transpose() * instance.y - lambdaG;
    const Vector levels = gram.ldlt().solve(rhs);
    if (!levels.allFinite()) return {};
    for (int g = 0; g < groups; ++g) {
        if (levels[g] <= 0.0 || (g > 0 && levels[g] <= levels[g - 1])) return {};
    }
    Vector out = Vector::Zero(beta.size());
    for (int g = 1; g <= groups; ++g) {
        for (int i : part.groups[g]) out[i] = beta[i] > 0.0 ? levels[g - 1] : -levels[g - 1];
    }
    return out;
}

} // namespace

SolveResult solve_slope(const ProblemInstance& instance, const Vector& weights, const SolverOptions& options)
{
    const auto p = instance.p();
    if (weights.size() != p) {
        throw Error(ErrorCode::DimensionMismatch, "weights must have length p");
    }
    require_ascending_nonnegative(weights, "weights");
    if (!(options.stopTolerance > 0.0)) {
        throw Error(ErrorCode::InvalidLevel, "stopTolerance must be positive");
    }

    const double lambdaScale = 1.0 + (p ? weights.maxCoeff() : 0.0);
    const double target = options.stopTolerance * lambdaScale;
    CheckOptions check;
    check.tolEq = target;
    check.tolIneq = target;

    // Both rules keep the sufficient-decrease test; a 20-step power estimate can undershoot.
    double lipschitz = 1.0;
    if (options.stepRule == StepRule::Fixed) {
        lipschitz = 1.05 * gram_spectral_estimate(instance, options.powerIterations, options.powerSeed);
        if (!(lipschitz > 0.0)) lipschitz = 1.0;
    }

    SolveResult result;
    Vector x = Vector::Zero(p);
    Vector z = x;
    double t = 1.0;
    double objective = slope_objective(instance, x, weights);
    result.restartObjectives.push_back(objective);

    auto accept_if_optimal = [&](const Vector& candidate) {
        const Vector grad = quadratic_gradient(instance, candidate);
        OptimalityReport report = check_optimality(candidate, grad, weights, check);
        if (report.worstViolation.magnitude <= target) {
            result.beta = candidate;
            result.report = std::move(report);
            result.converged = true;
            result.objective = slope_objective(instance, candidate, weights);
            return true;
        }
        return false;
    };

    long it = 0;
    for (; it < options.maxIterations; ++it) {
        const Vector gradZ = quadratic_gradient(instance, z);
        const double lossZ = smooth_loss(instance, z);
        Vector next;
        for (;;) {
            next = sorted_l1_prox(z - gradZ / lipschitz, weights / lipschitz);
            const Vector diff = next - z;
            const double bound = lossZ + gradZ.dot(diff) + 0.5 * lipschitz * diff.squaredNorm();
            if (smooth_loss(instance, next) <= bound + 1e-12 * (1.0 + std::abs(bound))) break;
            lipschitz *= 2.0;
        }
        const double nextObjective = slope_objective(instance, next, weights);

        if (options.adaptiveRestart && nextObjective > objective && t > 1.0) {
            // momentum overshoot: drop the step and restart from the last accepted iterate
            z = x;
            t = 1.0;
            result.restartObjectives.push_back(objective);
            // near the optimum rounding alone can alternate restarts with
            // accepted steps, so the periodic check must not skip restarts
            if (accept_if_optimal(x)) break;
            continue;
        }

        const double tNext = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        z = next + ((t - 1.0) / tNext) * (next - x);
        x = std::move(next);
        t = tNext;
        objective = nextObjective;

        if ((it + 1) % std::max(options.checkEvery, 1) == 0) {
            if (accept_if_optimal(x)) break;
            if (options.polish) {
                Vector polished = polish_on_structure(instance, weights, x);
                if (polished.size() && accept_if_optimal(polished)) {
                    result.polished = true;
                    break;
                }
            }
        }
    }
    result.iterations = it;
    if (!result.converged) {
        result.beta = x;
        result.report = check_optimality(x, quadratic_gradient(instance, x), weights, check);
        result.objective = objective;
    }
    return result;
}

} // namespace slopepath
