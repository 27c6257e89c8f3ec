#include <slopepath/error.hpp>
#include <slopepath/weights.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace slopepath {

namespace {

// Acklam's rational approximation of the lower half of Φ⁻¹ (relative error
// about 1e−9), used as the starting point for the Halley refinement.
double quantile_initial_guess(double u)
{
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double low = 0.02425;

    if (u < low) {
        const double t = std::sqrt(-2.0 * std::log(u));
        return (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5])
               / ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
    }
    const double t = u - 0.5;
    const double r = t * t;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * t
           / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

} // namespace

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double u)
{
    if (!(u > 0.0 && u < 1.0)) {
        throw Error(ErrorCode::InvalidLevel, "normal quantile requires u in (0, 1)");
    }
    if (u > 0.5) return -normal_quantile(1.0 - u);  // 1 − u is exact here
    if (u == 0.5) return 0.0;

    double x = quantile_initial_guess(u);
    // Halley step on Φ(x) − u.
    const double e = normal_cdf(x) - u;
    const double w = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= w / (1.0 + 0.5 * x * w);
    return x;
}

const char* to_string(DesignKind kind) noexcept
{
    switch (kind) {
    case DesignKind::BH: return "bh";
    case DesignKind::Gaussian: return "gauss";
    case DesignKind::Oscar: return "oscar";
    case DesignKind::QS: return "qs";
    }
    return "qs";
}

DesignKind design_from_string(const std::string& name)
{
    if (name == "bh") return DesignKind::BH;
    if (name == "gauss" || name == "gaussian") return DesignKind::Gaussian;
    if (name == "oscar") return DesignKind::Oscar;
    if (name == "qs") return DesignKind::QS;
    throw Error(ErrorCode::ParseError, "unknown design '" + name + "' (expected bh|gauss|oscar|qs)");
}

void require_ascending_nonnegative(const Vector& weights, const char* what)
{
    if (!weights.allFinite()) {
        throw Error(ErrorCode::NonFinite, std::string(what) + " contains NaN or Inf");
    }
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (weights[i] < 0.0 || (i > 0 && weights[i] < weights[i - 1])) {
            throw Error(ErrorCode::InvalidAtZero,
                        std::string(what) + " must be nonnegative and ascending (index "
                            + std::to_string(i + 1) + ")");
        }
    }
}

namespace {

void require_dimension(long p)
{
    if (p < 1) throw Error(ErrorCode::InvalidDimension, "p must be >= 1");
}

} // namespace

Vector bh_sequence(long p, double q)
{
    require_dimension(p);
    if (!(q > 0.0 && q <= 1.0)) {
        throw Error(ErrorCode::InvalidLevel, "q must lie in (0, 1]");
    }
    Vector lambda(p);
    for (long i = 1; i <= p; ++i) {
        // Φ⁻¹(1 − a) = −Φ⁻¹(a) keeps full precision in the upper tail.
        const double tail = q * static_cast<double>(p - i + 1) / (2.0 * static_cast<double>(p));
        lambda[i - 1] = 0.0 - normal_quantile(tail);
    }
    require_ascending_nonnegative(lambda, "BH sequence");
    return lambda;
}

Vector gaussian_sequence(long p, long n, double q)
{
    const Vector bh = bh_sequence(p, q);
    if (p >= 2 && n - p - 2 < 1) {
        throw Error(ErrorCode::DenominatorUnderflow,
                    "Gaussian sequence needs n - p + i - 3 >= 1 for all i; minimal n is "
                        + std::to_string(p + 3));
    }
    Vector lambda(p);
    lambda[p - 1] = bh[p - 1];
    double tailSquares = lambda[p - 1] * lambda[p - 1];
    for (long i = p - 1; i >= 1; --i) {
        const double denom = static_cast<double>(n - p + i - 3);
        const double corrected = bh[i - 1] * std::sqrt(1.0 + tailSquares / denom);
        lambda[i - 1] = std::min(lambda[i], corrected);
        tailSquares += lambda[i - 1] * lambda[i - 1];
    }
    require_ascending_nonnegative(lambda, "Gaussian sequence");
    return lambda;
}

Vector oscar_sequence(long p, double q)
{
    require_dimension(p);
    if (!(q >= 0.0) || !std::isfinite(q)) {
        throw Error(ErrorCode::NegativeOffset, "OSCAR offset q must be a finite value >= 0");
    }
    Vector lambda(p);
    for (long i = 0; i < p; ++i) lambda[i] = q + static_cast<double>(i);
    return lambda;
}

Vector qs_sequence(long p)
{
    require_dimension(p);
    Vector lambda(p);
    for (long i = 1; i <= p; ++i) {
        const double hi = static_cast<double>(p - i + 1);
        const double lo = static_cast<double>(p - i);
        // √a − √b = (a − b)/(√a + √b) without cancellation
        lambda[i - 1] = 1.0 / (std::sqrt(hi) + std::sqrt(lo));
    }
    require_ascending_nonnegative(lambda, "QS sequence");
    return lambda;
}

Vector design_sequence(const WeightDesign& design, long p)
{
    switch (design.kind) {
    case DesignKind::BH: return bh_sequence(p, design.q);
    case DesignKind::Gaussian: return gaussian_sequence(p, design.n, design.q);
    case DesignKind::Oscar: return oscar_sequence(p, design.q);
    case DesignKind::QS: return qs_sequence(p);
    }
    return qs_sequence(p);
}

double sphericity_ratio(long p)
{
    require_dimension(p);
    double sum = 0.0;
    for (long i = 1; i <= p; ++i) {
        const double term = 1.0 / (std::sqrt(static_cast<double>(i)) + std::sqrt(static_cast<double>(i - 1)));
        sum += term * term;
    }
    return std::sqrt(sum);
}

ContourExtremes contour_extremes(const Vector& weights, double r)
{
    require_ascending_nonnegative(weights, "weights");
    if (!(weights.array() > 0.0).any()) {
        throw Error(ErrorCode::ZeroWeights, "weights must not be all zero");
    }
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidDimension, "radius must be positive");

    const auto p = weights.size();
    ContourExtremes out;
    out.maxPenalty = r * weights.norm();
    double topSum = 0.0;
    double best = kInfinity;
    for (Eigen::Index i = 1; i <= p; ++i) {
        topSum += weights[p - i];
        best = std::min(best, topSum / std::sqrt(static_cast<double>(i)));
    }
    out.minPenalty = r * best;
    return out;
}

double sorted_l1_norm(const Vector& beta, const Vector& weights)
{
    if (beta.size() != weights.size()) {
        throw Error(ErrorCode::DimensionMismatch, "beta and weights differ in length");
    }
    Vector mags = beta.cwiseAbs();
    std::sort(mags.data(), mags.data() + mags.size());
    return mags.dot(weights);
}

} // namespace slopepath
