#include <slopepath/error.hpp>
#include <slopepath/optimality.hpp>
#include <slopepath/weights.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace slopepath {

Partition partition_by_magnitude(const Vector& beta, double tol)
{
    const int p = static_cast<int>(beta.size());
    std::vector<int> idx(p);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return std::abs(beta[a]) < std::abs(beta[b]); });

    Partition out;
    out.groups.emplace_back();
    out.levels.push_back(0.0);
    int i = 0;
    while (i < p && std::abs(beta[idx[i]]) <= tol) out.groups[0].push_back(idx[i++]);
    while (i < p) {
        std::vector<int> members{idx[i]};
        double sum = std::abs(beta[idx[i]]);
        ++i;
        while (i < p && std::abs(beta[idx[i]]) - std::abs(beta[idx[i - 1]]) <= tol) {
            sum += std::abs(beta[idx[i]]);
            members.push_back(idx[i++]);
        }
        out.levels.push_back(sum / static_cast<double>(members.size()));
        out.groups.push_back(std::move(members));
    }
    return out;
}

SignsAndOrder signs_and_order(const Vector& beta, const Vector& gradient,
                              const Partition& partition, double tol)
{
    const int p = static_cast<int>(beta.size());
    if (gradient.size() != p) {
        throw Error(ErrorCode::DimensionMismatch, "beta and gradient differ in length");
    }
    SignsAndOrder out;
    out.signs.assign(p, 1);
    out.order.reserve(p);

    for (std::size_t g = 0; g < partition.groups.size(); ++g) {
        const double level = g == 0 ? 0.0 : partition.levels[g];
        for (int i : partition.groups[g]) {
            if (std::abs(std::abs(beta[i]) - level) > tol) {
                throw Error(ErrorCode::InconsistentGroups,
                            "|beta_" + std::to_string(i + 1) + "| is not at its group level");
            }
            if (g == 0) {
                out.signs[i] = gradient[i] < 0.0 ? -1 : 1;
            } else {
                out.signs[i] = beta[i] > 0.0 ? -1 : 1;
            }
        }
    }
    for (const auto& members : partition.groups) {
        out.groupStart.push_back(static_cast<int>(out.order.size()));
        std::vector<int> sorted = members;
        std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
            const double da = out.signs[a] * gradient[a];
            const double db = out.signs[b] * gradient[b];
            return da < db || (da == db && a < b);
        });
        out.order.insert(out.order.end(), sorted.begin(), sorted.end());
    }
    out.groupStart.push_back(p);
    if (static_cast<int>(out.order.size()) != p) {
        throw Error(ErrorCode::InconsistentGroups, "partition does not cover all coordinates");
    }
    return out;
}

OptimalityReport check_optimality(const Vector& beta, const Vector& gradient,
                                  const Vector& weights, const CheckOptions& options)
{
    const auto p = beta.size();
    if (gradient.size() != p || weights.size() != p) {
        throw Error(ErrorCode::DimensionMismatch, "beta, gradient and weights must have equal length");
    }
    require_ascending_nonnegative(weights, "weights");

    const double lambdaScale = 1.0 + (p ? weights.cwiseAbs().maxCoeff() : 0.0);
    const double betaScale = 1.0 + (p ? beta.cwiseAbs().maxCoeff() : 0.0);
    OptimalityReport report;
    report.tolEq = options.tolEq >= 0.0 ? options.tolEq : 1e-8 * lambdaScale;
    report.tolIneq = options.tolIneq >= 0.0 ? options.tolIneq : 1e-8 * lambdaScale;
    const double groupTol = options.groupTol >= 0.0 ? options.groupTol : 1e-9 * betaScale;

    const Partition partition = partition_by_magnitude(beta, groupTol);
    const SignsAndOrder so = signs_and_order(beta, gradient, partition, groupTol);

    bool optimal = true;
    auto consider = [&](int condition, int g, int k, double magnitude) {
        if (magnitude > report.worstViolation.magnitude) {
            report.worstViolation = Violation{condition, g, k, magnitude};
        }
    };

    const int groupCount = static_cast<int>(partition.groups.size());
    for (int g = 0; g < groupCount; ++g) {
        const int begin = so.groupStart[g];
        const int end = so.groupStart[g + 1];
        // suffix sums from the group's last position downwards
        double lambdaSuffix = 0.0;
        double gradSuffix = 0.0;
        std::vector<double> margins(end - begin);
        for (int pos = end - 1; pos >= begin; --pos) {
            const int i = so.order[pos];
            lambdaSuffix += weights[pos];
            gradSuffix += so.signs[i] * gradient[i];
            margins[pos - begin] = lambdaSuffix - gradSuffix;
        }
        for (int k = 1; k <= end - begin; ++k) {
            const double m = margins[k - 1];
            if (g >= 1 && k == 1) {
                report.cond1Residuals.push_back(m);
                consider(1, g, k, std::abs(m));
                if (std::abs(m) > report.tolEq) optimal = false;
            } else {
                report.slackMargins.push_back(SlackMargin{g, k, m});
                consider(g == 0 ? 2 : 3, g, k, std::max(0.0, -m));
                if (m < -report.tolIneq) optimal = false;
            }
        }
    }
    report.optimal = optimal;
    return report;
}

Vector quadratic_gradient(const ProblemInstance& instance, const Vector& beta)
{
    const Vector residual = instance.X * beta - instance.y;
    Vector grad = instance.X.transpose() * residual;
    if (instance.ridge != 0.0) grad += instance.ridge * beta;
    return grad;
}

double slope_objective(const ProblemInstance& instance, const Vector& beta, const Vector& weights)
{
    const double loss = 0.5 * (instance.y - instance.X * beta).squaredNorm()
                        + 0.5 * instance.ridge * beta.squaredNorm();
    return loss + sorted_l1_norm(beta, weights);
}

} // namespace slopepath
