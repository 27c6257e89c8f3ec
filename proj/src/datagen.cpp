#include <slopepath/datagen.hpp>
#include <slopepath/error.hpp>
#include <slopepath/philox.hpp>
#include <slopepath/weights.hpp>

#include <cmath>

namespace slopepath {

double CounterStream::normal(std::uint64_t index) const
{
    return normal_quantile(uniform(index));
}

namespace {

CounterStream stream_for(const ScenarioSpec& spec, Substream which)
{
    return CounterStream(spec.seed, static_cast<std::uint32_t>(which), spec.replicate);
}

} // namespace

GeneratedData generate(const ScenarioSpec& spec)
{
    if (spec.p < 1 || spec.n < 1) {
        throw Error(ErrorCode::InvalidDimension, "scenario needs p >= 1 and n >= 1");
    }
    const int n = spec.n;
    const int p = spec.p;
    GeneratedData out;
    out.instance.X.resize(n, p);
    out.trueBeta.resize(p);
    const CounterStream noise = stream_for(spec, Substream::Noise);

    if (spec.scenario == 1) {
        if (p % 2 != 0) throw Error(ErrorCode::OddP, "scenario 1 needs an even p, got " + std::to_string(p));
        const int half = p / 2;
        const CounterStream theta = stream_for(spec, Substream::Theta);
        for (int i = 0; i < half; ++i) {
            out.trueBeta[i] = theta.normal(i);
            out.trueBeta[i + half] = -out.trueBeta[i];
        }
        // symmetric square root of [[1, .8], [.8, 1]] scaled by n^{-1/4}
        const double scale = std::pow(static_cast<double>(n), -0.25);
        const double a = 0.5 * (std::sqrt(1.8) + std::sqrt(0.2)) * scale;
        const double b = 0.5 * (std::sqrt(1.8) - std::sqrt(0.2)) * scale;
        const CounterStream design = stream_for(spec, Substream::Design);
        for (int r = 0; r < n; ++r) {
            const std::uint64_t row = static_cast<std::uint64_t>(r) * p;
            for (int j = 0; j < half; ++j) {
                const double z1 = design.normal(row + j);
                const double z2 = design.normal(row + j + half);
                out.instance.X(r, j) = a * z1 + b * z2;
                out.instance.X(r, j + half) = b * z1 + a * z2;
            }
        }
    } else if (spec.scenario == 2) {
        const CounterStream beta = stream_for(spec, Substream::Beta);
        for (int i = 0; i < p; ++i) out.trueBeta[i] = beta.below(i, 5) - 2;
        const CounterStream design = stream_for(spec, Substream::Design);
        for (int r = 0; r < n; ++r) {
            const std::uint64_t row = static_cast<std::uint64_t>(r) * p;
            for (int j = 0; j < p; ++j) out.instance.X(r, j) = design.below(row + j, 3) - 1;
        }
    } else {
        throw Error(ErrorCode::OutOfRange, "scenario must be 1 or 2");
    }

    out.instance.y = out.instance.X * out.trueBeta;
    for (int r = 0; r < n; ++r) out.instance.y[r] += noise.normal(r);
    return out;
}

} // namespace slopepath
