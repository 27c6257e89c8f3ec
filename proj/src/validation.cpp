#include <slopepath/error.hpp>
#include <slopepath/types.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <sstream>

namespace slopepath {

const char* to_string(EventKind kind) noexcept
{
    switch (kind) {
    case EventKind::Fuse: return "fuse";
    case EventKind::Split: return "split";
    case EventKind::SwitchOrder: return "switch_order";
    case EventKind::SwitchSign: return "switch_sign";
    case EventKind::Terminate: return "terminate";
    }
    return "terminate";
}

EventKind event_kind_from_string(const std::string& name)
{
    for (auto kind : {EventKind::Fuse, EventKind::Split, EventKind::SwitchOrder,
                      EventKind::SwitchSign, EventKind::Terminate}) {
        if (name == to_string(kind)) return kind;
    }
    throw Error(ErrorCode::ParseError, "unknown event kind '" + name + "'");
}

InstanceReport validate_instance(const ProblemInstance& instance)
{
    const auto n = instance.X.rows();
    const auto p = instance.X.cols();
    if (n < 1 || p < 1) {
        throw Error(ErrorCode::InvalidDimension, "design must have n >= 1 and p >= 1");
    }
    if (instance.y.size() != n) {
        throw Error(ErrorCode::DimensionMismatch,
                    "y has " + std::to_string(instance.y.size()) + " entries, X has "
                        + std::to_string(n) + " rows");
    }
    if (!instance.X.allFinite() || !instance.y.allFinite() || !std::isfinite(instance.ridge)) {
        throw Error(ErrorCode::NonFinite, "instance contains NaN or Inf");
    }
    if (instance.ridge < 0.0) {
        throw Error(ErrorCode::NonFinite, "ridge weight must be nonnegative");
    }

    Matrix gram = instance.X.transpose() * instance.X;
    gram.diagonal().array() += instance.ridge;
    const double maxDiag = gram.diagonal().maxCoeff();
    const double tol = 1e-10 * std::max(maxDiag, std::numeric_limits<double>::min());

    // Pivoted LDLᵀ: the pivots of a PSD matrix bound its small eigenvalues.
    Eigen::LDLT<Matrix> ldlt(gram);
    const Vector pivots = ldlt.vectorD();
    InstanceReport report;
    report.smallestPivot = pivots.size() ? pivots.minCoeff() : 0.0;
    report.effectiveRank = (pivots.array() > tol).count();
    if (report.effectiveRank < p) {
        throw Error(ErrorCode::SingularGram,
                    "Gram matrix has effective rank " + std::to_string(report.effectiveRank)
                        + " < p = " + std::to_string(p) + "; set ridge > 0");
    }
    return report;
}

WeightRay validate_ray(const Vector& lambda0, const Vector& lambdaBar)
{
    const auto p = lambda0.size();
    if (p < 1 || lambdaBar.size() != p) {
        throw Error(ErrorCode::DimensionMismatch, "lambda0 and lambdaBar must have equal length >= 1");
    }
    if (!lambda0.allFinite() || !lambdaBar.allFinite()) {
        throw Error(ErrorCode::NonFinite, "weight ray contains NaN or Inf");
    }
    if ((lambdaBar.array() == 0.0).all()) {
        throw Error(ErrorCode::ZeroDirection, "lambdaBar must be nonzero");
    }

    double etaMax = kInfinity;
    // Each constraint is affine in η: c0 + η·c1 >= 0.
    auto constrain = [&](double c0, double c1, const char* what, Eigen::Index i) {
        if (c0 < 0.0) {
            throw Error(ErrorCode::InvalidAtZero,
                        std::string(what) + " violated at eta = 0 (index " + std::to_string(i + 1) + ")");
        }
        if (c1 < 0.0) etaMax = std::min(etaMax, c0 / -c1);
    };
    constrain(lambda0[0], lambdaBar[0], "nonnegativity", 0);
    for (Eigen::Index i = 0; i + 1 < p; ++i) {
        constrain(lambda0[i + 1] - lambda0[i], lambdaBar[i + 1] - lambdaBar[i], "ordering", i + 1);
    }
    if (etaMax <= 0.0) {
        throw Error(ErrorCode::InvalidAtZero, "weight ray leaves the ordered cone immediately");
    }
    return WeightRay{lambda0, lambdaBar, etaMax};
}

namespace {

void fnv_mix(std::uint64_t& h, const void* data, std::size_t bytes)
{
    const auto* ptr = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= ptr[i];
        h *= 0x100000001b3ULL;
    }
}

} // namespace

std::string instance_hash(const ProblemInstance& instance)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const std::int64_t dims[2] = {instance.X.rows(), instance.X.cols()};
    fnv_mix(h, dims, sizeof(dims));
    fnv_mix(h, instance.y.data(), sizeof(double) * instance.y.size());
    fnv_mix(h, instance.X.data(), sizeof(double) * instance.X.size());
    fnv_mix(h, &instance.ridge, sizeof(double));
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

} // namespace slopepath
