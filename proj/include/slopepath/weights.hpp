#pragma once

#include <slopepath/types.hpp>

#include <string>
#include <utility>

namespace slopepath {

/// Standard normal quantile Φ⁻¹(u) for u in (0, 1). Rational initial guess
/// refined by one Halley step against std::erfc; absolute error well below 1e−12
/// on (1e−300, 1 − 1e−16).
double normal_quantile(double u);

/// Standard normal CDF.
double normal_cdf(double x);

enum class DesignKind { BH, Gaussian, Oscar, QS };

const char* to_string(DesignKind kind) noexcept;
DesignKind design_from_string(const std::string& name);

/// A weight design. Every generator emits the ascending sequence at unit
/// scale; the caller applies η through the weight ray.
struct WeightDesign {
    DesignKind kind = DesignKind::QS;
    double q = 0.1;  // FDR level for BH/Gaussian, offset for OSCAR
    long n = 0;      // sample count, Gaussian only
};

// λᵢ = Φ⁻¹(1 − q(p−i+1)/(2p)), 0 < q <= 1.
Vector bh_sequence(long p, double q);

// Descending recursion λ_p = λ^BH_p,
// λᵢ = min(λᵢ₊₁, λ^BHᵢ·√(1 + Σ_{j>i} λⱼ² / (n−p+i−3))).
Vector gaussian_sequence(long p, long n, double q);

// λᵢ = q + (i − 1).
Vector oscar_sequence(long p, double q);

// λᵢ = √(p−i+1) − √(p−i): ascending, with λₚ = 1 and Σ of the top i weights = √i.
Vector qs_sequence(long p);

Vector design_sequence(const WeightDesign& design, long p);

/// ρ_p = √(Σ_{i=1..p} (√i − √(i−1))²), the minimal circumradius/inradius ratio
/// of the contour Σ λᵢ|β|₍ᵢ₎ = const over all weight vectors.
double sphericity_ratio(long p);

struct ContourExtremes {
    double maxPenalty = 0.0;
    double minPenalty = 0.0;
    double ratio() const { return maxPenalty / minPenalty; }
};

/// max and min of Σ λᵢ|β|₍ᵢ₎ over the sphere ‖β‖ = r. The max is r‖λ‖; the min
/// is attained at one of the flat directions b_i carrying 1/√i on the i largest
/// weights.
ContourExtremes contour_extremes(const Vector& weights, double r = 1.0);

/// Σ λᵢ|β|₍ᵢ₎ with λ ascending.
double sorted_l1_norm(const Vector& beta, const Vector& weights);

/// Throws unless weights are finite, nonnegative and ascending.
void require_ascending_nonnegative(const Vector& weights, const char* what);

} // namespace slopepath
