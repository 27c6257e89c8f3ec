#include <slopepath/error.hpp>
#include <slopepath/experiment.hpp>
#include <slopepath/kernels.hpp>

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace slopepath {

PathMetrics path_metrics(const SolutionPath& path, bool includeStart)
{
    if (path.events.empty()) throw Error(ErrorCode::EmptyPath, "path has no events");
    PathMetrics m;
    double nonzero = 0.0;
    double groups = 0.0;
    if (includeStart) {
        nonzero = path.diagnostics.initialNonzero;
        groups = path.diagnostics.initialGroups;
        ++m.breakpoints;
    }
    for (const PathEvent& e : path.events) {
        const bool kink = e.kind == EventKind::Fuse || e.kind == EventKind::Split;
        if (kink) ++m.fuseSplitEvents;
        // switches leave dβ/dη unchanged, so they are not breakpoints of β(η)
        if (!kink && !(e.kind == EventKind::Terminate && std::isfinite(e.eta))) continue;
        nonzero += e.nonzeroCoefficients;
        groups += e.nonzeroGroups;
        ++m.breakpoints;
    }
    if (m.breakpoints == 0) {
        const PathEvent& last = path.events.back();
        nonzero = last.nonzeroCoefficients;
        groups = last.nonzeroGroups;
        m.breakpoints = 1;
    }
    m.meanNonzero = nonzero / static_cast<double>(m.breakpoints);
    m.meanNonzeroGroups = groups / static_cast<double>(m.breakpoints);
    return m;
}

std::vector<WeightDesign> default_designs()
{
    return {WeightDesign{DesignKind::BH, 0.1, 0}, WeightDesign{DesignKind::Gaussian, 0.1, 0},
            WeightDesign{DesignKind::Oscar, 1.0, 0}, WeightDesign{DesignKind::QS, 0.1, 0}};
}

namespace {

struct ReplicateResult {
    bool ok = false;
    PathMetrics metrics;
    double seconds = 0.0;
    std::string failure;
};

struct Moments {
    double sum = 0.0;
    double sumSq = 0.0;
    void add(double x)
    {
        sum += x;
        sumSq += x * x;
    }
    double mean(int count) const { return count ? sum / count : 0.0; }
    double half_width(int count) const
    {
        if (count < 2) return 0.0;
        const double m = sum / count;
        const double var = std::max(0.0, (sumSq - count * m * m) / (count - 1));
        return 1.96 * std::sqrt(var / count);
    }
};

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& config)
{
    if (config.replicates < 1) throw Error(ErrorCode::InvalidDimension, "replicates must be >= 1");
    ExperimentReport report;
    report.config = config;
    const auto designs = config.designs.empty() ? default_designs() : config.designs;
    report.config.designs = designs;
    const std::size_t nd = designs.size();

    for (const auto& [p, n] : config.sizes) {
        std::vector<ReplicateResult> results(static_cast<std::size_t>(config.replicates) * nd);
        EngineOptions engine = config.engine;
        engine.recordSegments = false;
        engine.kernelThreads = 1;

        kernels::for_each_index(config.replicates, config.threads, [&](std::int64_t r) {
            GeneratedData data;
            std::string setupFailure;
            try {
                data = generate(ScenarioSpec{config.scenario, p, n, config.seedBase, static_cast<std::uint32_t>(r)});
            } catch (const std::exception& e) {
                setupFailure = e.what();
            }
            for (std::size_t d = 0; d < nd; ++d) {
                ReplicateResult& out = results[static_cast<std::size_t>(r) * nd + d];
                if (!setupFailure.empty()) {
                    out.failure = setupFailure;
                    continue;
                }
                try {
                    WeightDesign design = designs[d];
                    design.n = n;
                    WeightRay ray;
                    ray.lambdaBar = design_sequence(design, p);
                    ray.lambda0 = Vector::Zero(p);
                    const auto start = std::chrono::steady_clock::now();
                    const SolutionPath path = run_path(data.instance, ray, engine);
                    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                    out.metrics = path_metrics(path, config.includeStart);
                    out.ok = true;
                } catch (const std::exception& e) {
                    out.failure = e.what();
                }
            }
        });

        for (std::size_t d = 0; d < nd; ++d) {
            ExperimentCell cell;
            cell.design = designs[d];
            if (cell.design.kind == DesignKind::Gaussian) cell.design.n = n;
            cell.p = p;
            cell.n = n;
            Moments nz, gr, ev;
            double seconds = 0.0;
            for (int r = 0; r < config.replicates; ++r) {
                const ReplicateResult& res = results[static_cast<std::size_t>(r) * nd + d];
                if (!res.ok) {
                    cell.failures.push_back("replicate " + std::to_string(r) + ": " + res.failure);
                    continue;
                }
                ++cell.replicates;
                nz.add(res.metrics.meanNonzero);
                gr.add(res.metrics.meanNonzeroGroups);
                ev.add(static_cast<double>(res.metrics.fuseSplitEvents));
                seconds += res.seconds;
            }
            const int c = cell.replicates;
            cell.meanNonzero = nz.mean(c);
            cell.meanNonzeroGroups = gr.mean(c);
            cell.meanFuseSplitEvents = ev.mean(c);
            cell.ciNonzero = nz.half_width(c);
            cell.ciNonzeroGroups = gr.half_width(c);
            cell.ciFuseSplitEvents = ev.half_width(c);
            cell.meanSeconds = c ? seconds / c : 0.0;
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

std::string report_json(const ExperimentReport& report, bool includeTimings)
{
    using nlohmann::json;
    const auto& cfg = report.config;
    json sizes = json::array();
    for (const auto& [p, n] : cfg.sizes) sizes.push_back({{"p", p}, {"n", n}});
    json cells = json::array();
    for (const auto& c : report.cells) {
        json cell{{"design", to_string(c.design.kind)},
                  {"p", c.p},
                  {"n", c.n},
                  {"replicates", c.replicates},
                  {"mean_nonzero_coefficients", c.meanNonzero},
                  {"mean_nonzero_groups", c.meanNonzeroGroups},
                  {"mean_fuse_split_events", c.meanFuseSplitEvents},
                  {"ci95_nonzero_coefficients", c.ciNonzero},
                  {"ci95_nonzero_groups", c.ciNonzeroGroups},
                  {"ci95_fuse_split_events", c.ciFuseSplitEvents},
                  {"failures", c.failures}};
        if (c.design.kind != DesignKind::QS) cell["q"] = c.design.q;
        if (includeTimings) cell["mean_seconds"] = c.meanSeconds;
        cells.push_back(std::move(cell));
    }
    json out{{"scenario", cfg.scenario},
             {"replicates", cfg.replicates},
             {"seed_base", cfg.seedBase},
             {"include_start", cfg.includeStart},
             {"seeds", "replicate r uses substream r under seed_base"},
             {"sizes", sizes},
             {"averaging", std::string("states after each fuse/split event and at a finite eta_max; initial state ")
                               + (cfg.includeStart ? "included" : "excluded")},
             {"cells", cells}};
    return out.dump(2) + "\n";
}

std::string report_table(const ExperimentReport& report)
{
    std::ostringstream out;
    out << "# scenario " << report.config.scenario << ", " << report.config.replicates
        << " replicates, seed base " << report.config.seedBase << "\n"
        << "# averages over the states after each fuse/split event (initial state "
        << (report.config.includeStart ? "included" : "excluded") << ")\n";
    out << std::left << std::setw(8) << "design" << std::right << std::setw(6) << "p" << std::setw(7) << "n"
        << std::setw(18) << "nonzero coef" << std::setw(18) << "nonzero groups" << std::setw(20)
        << "fuse/split events" << std::setw(6) << "ok" << '\n';
    out << std::fixed;
    for (const auto& c : report.cells) {
        auto cellText = [](double mean, double ci) {
            std::ostringstream s;
            s << std::fixed << std::setprecision(1) << mean << " ±" << std::setprecision(1) << ci;
            return s.str();
        };
        out << std::left << std::setw(8) << to_string(c.design.kind) << std::right << std::setw(6) << c.p
            << std::setw(7) << c.n << std::setw(18) << cellText(c.meanNonzero, c.ciNonzero) << std::setw(18)
            << cellText(c.meanNonzeroGroups, c.ciNonzeroGroups) << std::setw(20)
            << cellText(c.meanFuseSplitEvents, c.ciFuseSplitEvents) << std::setw(6) << c.replicates << '\n';
        for (const auto& f : c.failures) out << "#   failed " << f << '\n';
    }
    return out.str();
}

Matrix emit_contour(const Vector& weights, int angles)
{
    require_ascending_nonnegative(weights, "weights");
    if (weights.size() < 2) throw Error(ErrorCode::InvalidDimension, "contour needs p >= 2");
    if (!(weights.array() > 0.0).any()) throw Error(ErrorCode::ZeroWeights, "weights must not be all zero");
    if (angles < 1) throw Error(ErrorCode::InvalidDimension, "need at least one angle");
    // only the two largest weights act in the plane
    const double top = weights[weights.size() - 1];
    const double second = weights[weights.size() - 2];
    if (!(top > 0.0)) throw Error(ErrorCode::ZeroWeights, "largest weight is zero");
    Matrix out(angles, 2);
    for (int a = 0; a < angles; ++a) {
        const double theta = 2.0 * std::numbers::pi * a / angles;
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        const double hi = std::max(std::abs(c), std::abs(s));
        const double lo = std::min(std::abs(c), std::abs(s));
        // the penalty is 1-homogeneous, so the level-1 radius is 1/penalty(u)
        const double radius = 1.0 / (top * hi + second * lo);
        out(a, 0) = radius * c;
        out(a, 1) = radius * s;
    }
    return out;
}

std::vector<std::pair<long, double>> emit_sphericity_curve(long pMax)
{
    if (pMax < 1) throw Error(ErrorCode::InvalidDimension, "pMax must be >= 1");
    std::vector<std::pair<long, double>> rows;
    double sum = 0.0;
    double next = 1000.0;
    for (long p = 1; p <= pMax; ++p) {
        const double term = 1.0 / (std::sqrt(static_cast<double>(p)) + std::sqrt(static_cast<double>(p - 1)));
        sum += term * term;
        if (p <= 1000 || p == pMax || static_cast<double>(p) >= next) {
            rows.emplace_back(p, std::sqrt(sum));
            if (p > 1000) next = static_cast<double>(p) * 1.02;
        }
    }
    return rows;
}

} // namespace slopepath
