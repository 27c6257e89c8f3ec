#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include <slopepath/datagen.hpp>
#include <slopepath/error.hpp>
#include <slopepath/optimality.hpp>
#include <slopepath/path_engine.hpp>
#include <slopepath/prox.hpp>
#include <slopepath/weights.hpp>

using namespace slopepath;

namespace {

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

ProblemInstance t2_instance()
{
    ProblemInstance inst;
    inst.X = Matrix::Identity(2, 2);
    inst.y = vec({3, 1});
    return inst;
}

WeightRay ray_of(const Vector& l0, const Vector& bar, double etaMax = kInfinity)
{
    WeightRay r;
    r.lambda0 = l0;
    r.lambdaBar = bar;
    r.etaMax = etaMax;
    return r;
}

ProblemInstance random_instance(std::mt19937_64& gen, int n, int p, double ridge = 0.0)
{
    std::normal_distribution<double> z;
    ProblemInstance inst;
    inst.X.resize(n, p);
    inst.y.resize(n);
    inst.ridge = ridge;
    for (int i = 0; i < n; ++i) {
        inst.y[i] = 3.0 * z(gen);
        for (int j = 0; j < p; ++j) inst.X(i, j) = z(gen) + (j > 0 ? 0.6 * inst.X(i, j - 1) : 0.0);
    }
    return inst;
}

// Steps an engine to the end, calling `visit` before each event is applied.
template <class Visit>
void walk(PathEngine& engine, double etaMax, Visit visit)
{
    for (int guard = 0; guard < 100000; ++guard) {
        const PathEvent e = engine.next_event();
        if (e.kind == EventKind::Terminate || e.eta >= etaMax) return;
        visit(e);
        engine.apply_event(e);
    }
    FAIL("walk did not terminate");
}

} // namespace

TEST_CASE("grouped design columns")
{
    const ProblemInstance inst = t2_instance();
    PathEngine engine(inst, ray_of(Vector::Zero(2), vec({0, 1})));
    // groups in ascending level: {x₂}, {x₁}; both signs positive
    CHECK(engine.grouped_design() == (Matrix(2, 2) << 0, 1, 1, 0).finished());
    CHECK(engine.zeroGroupSize() == 0);
    engine.apply_event(engine.next_event());
    CHECK(engine.grouped_design() == (Matrix(2, 1) << 1, 1).finished());

    ProblemInstance neg = t2_instance();
    neg.y = vec({3, -1});
    PathEngine negEngine(neg, ray_of(Vector::Zero(2), vec({0, 1})));
    CHECK(negEngine.grouped_design().col(0) == vec({0, -1}));
}

TEST_CASE("segment solution before and after the first fuse")
{
    const ProblemInstance inst = t2_instance();
    PathEngine engine(inst, ray_of(Vector::Zero(2), vec({0, 1})));
    SegmentSolution s = engine.segment_solution();
    CHECK(s.levels == vec({1, 3}));
    CHECK(s.slope == vec({0, -1}));
    CHECK(s.slope[0] == 0.0);  // λ̄ of the lower group is zero

    engine.apply_event(engine.next_event());
    s = engine.segment_solution();
    CHECK(engine.eta() == 2.0);
    CHECK(s.levels.size() == 1);
    CHECK(s.levels[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.slope[0] == -0.5);
    CHECK(engine.gram_inverse()(0, 0) == doctest::Approx(0.5));
    CHECK((engine.gram_inverse() - engine.scratch_gram_inverse()).norm() <= 1e-15);
}

TEST_CASE("fuse timings")
{
    const ProblemInstance inst = t2_instance();
    PathEngine engine(inst, ray_of(Vector::Zero(2), vec({0, 1})));
    std::vector<double> fuse = engine.next_fuse_times();
    REQUIRE(fuse.size() == 2);
    CHECK(fuse[0] == kInfinity);  // lower group has zero slope
    CHECK(fuse[1] == 2.0);
    engine.apply_event(engine.next_event());
    fuse = engine.next_fuse_times();
    REQUIRE(fuse.size() == 1);
    CHECK(fuse[0] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("no splits or switches on the two-coordinate path")
{
    const ProblemInstance inst = t2_instance();
    PathEngine engine(inst, ray_of(Vector::Zero(2), vec({0, 1})));
    for (int step = 0; step < 2; ++step) {
        for (const SplitTiming& s : engine.next_split_times()) CHECK(s.delta == kInfinity);
        for (const SwitchTiming& s : engine.next_switch_times()) CHECK(s.delta == kInfinity);
        CHECK(engine.next_sign_switch_time() == kInfinity);
        engine.apply_event(engine.next_event());
    }
    // both coordinates now sit in the zero group with a constant gradient
    for (const SwitchTiming& s : engine.next_switch_times()) CHECK(s.delta == kInfinity);
}

TEST_CASE("singleton groups with empty zero group have no switch candidates")
{
    const ProblemInstance inst = t2_instance();
    PathEngine engine(inst, ray_of(Vector::Zero(2), vec({0, 1})));
    CHECK(engine.next_switch_times().empty());
    CHECK(engine.next_sign_switch_time() == kInfinity);
}

TEST_CASE("fuse into zero leaves no nonzero group")
{
    const ProblemInstance inst = t2_instance();
    PathEngine engine(inst, ray_of(Vector::Zero(2), vec({0, 1})));
    engine.apply_event(engine.next_event());
    const PathEvent death = engine.next_event();
    CHECK(death.kind == EventKind::Fuse);
    CHECK(death.group == 0);
    CHECK(death.eta == doctest::Approx(4.0).epsilon(1e-15));
    engine.apply_event(death);
    CHECK(engine.nonzeroGroups() == 0);
    CHECK(engine.slope() == Vector::Zero(2));
    CHECK(engine.next_fuse_times().empty());
    CHECK(engine.next_split_times().size() == 2);  // only zero-group splits remain
    CHECK(engine.next_event().kind == EventKind::Terminate);
}

TEST_CASE("split fires immediately at an exact boundary")
{
    // prox((3, 1), (1, 1)) = (2, 0) and |∇f₂| = 1 equals λ₁, so any decrease
    // of the weights releases the second coordinate at once.
    const ProblemInstance inst = t2_instance();
    const WeightRay ray = ray_of(vec({1, 1}), vec({-0.5, -0.5}));
    PathEngine engine(inst, ray);
    CHECK(engine.zeroGroupSize() == 1);
    const PathEvent e = engine.next_event();
    CHECK(e.kind == EventKind::Split);
    CHECK(e.group == 0);
    CHECK(e.eta == 0.0);
    const SolutionPath path = run_path(inst, ray);
    CHECK((eval_path(path, 1.0) - vec({2.5, 0.5})).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("decreasing direction splits a fused pair where the solver says so")
{
    // λ = (0, 2 − η): the pair fused at 1.75 separates at η = 1.5
    ProblemInstance inst = t2_instance();
    inst.y = vec({3, 2.5});
    const WeightRay ray = ray_of(vec({0, 2}), vec({0, -1}));
    const SolutionPath path = run_path(inst, ray);
    REQUIRE(path.events.size() >= 2);
    CHECK(path.events[0].kind == EventKind::Split);
    CHECK(path.events[0].eta == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(path.horizon() == 2.0);
    SolverOptions opts;
    opts.stopTolerance = 1e-12;
    for (double eta : {1.5 - 1e-4, 1.5 + 1e-4}) {
        const Vector ref = solve_slope(inst, ray.at(eta), opts).beta;
        CHECK((eval_path(path, eta) - ref).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("sign switch time is the root of the zero-coordinate gradient")
{
    std::mt19937_64 gen(12);
    int verified = 0;
    for (int t = 0; t < 60 && verified < 5; ++t) {
        const int p = 4;
        const ProblemInstance inst = random_instance(gen, 10, p);
        const Vector seq = bh_sequence(p, 0.2);
        const double scale = (inst.X.transpose() * inst.y).cwiseAbs().maxCoeff();
        const WeightRay ray = ray_of(seq * scale * 0.6, -seq * scale * 0.1);
        PathEngine engine(inst, ray);
        walk(engine, 6.0, [&](const PathEvent& e) {
            if (e.kind != EventKind::SwitchSign || e.eta <= engine.eta()) return;
            const int j = engine.structure().order[0];
            const Vector b0 = engine.beta();
            const Vector slope = engine.slope();
            const double eta0 = engine.eta();
            auto grad = [&](double eta) {
                const Vector b = b0 + (eta - eta0) * slope;
                return inst.X.col(j).dot(inst.X * b - inst.y);
            };
            double lo = eta0, hi = e.eta + (e.eta - eta0);
            const bool rising = grad(hi) > grad(lo);
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((grad(mid) < 0.0) == rising) lo = mid; else hi = mid;
            }
            CHECK(e.eta == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-9));
            ++verified;
        });
    }
    CHECK(verified >= 1);
}

TEST_CASE("identical columns never switch order")
{
    ProblemInstance inst;
    inst.X.resize(4, 3);
    inst.X << 1, 1, 0.2, 0.5, 0.5, -1, -0.3, -0.3, 0.4, 2, 2, 1;
    inst.y = vec({2, 1, -1, 3});
    inst.ridge = 1e-3;
    PathEngine engine(inst, ray_of(Vector::Zero(3), qs_sequence(3)));
    // equal columns start with equal values and fuse at once; afterwards the
    // pair must never be separated by an order switch
    int checked = 0;
    for (PathEvent ev = engine.next_event(); ev.kind != EventKind::Terminate; ev = engine.next_event()) {
        engine.apply_event(ev);
        const GroupStructure s = engine.structure();
        for (const SwitchTiming& sw : engine.next_switch_times()) {
            const int a = s.order[sw.k - 1];
            const int b = s.order[sw.k];
            if ((a == 0 && b == 1) || (a == 1 && b == 0)) {
                CHECK(sw.delta == kInfinity);
                ++checked;
            }
        }
        CHECK(engine.beta()[0] == engine.beta()[1]);
    }
    CHECK(checked >= 3);
}

TEST_CASE("two-coordinate path")
{
    const SolutionPath path = run_path(t2_instance(), ray_of(Vector::Zero(2), vec({0, 1})));
    REQUIRE(path.events.size() == 3);
    CHECK(path.events[0].kind == EventKind::Fuse);
    CHECK(path.events[0].eta == 2.0);
    CHECK(path.events[1].kind == EventKind::Fuse);
    CHECK(path.events[1].eta == 4.0);
    CHECK(path.events[2].kind == EventKind::Terminate);
    REQUIRE(path.segments.size() == 3);
    for (double eta = 0.0; eta < 6.0; eta += 0.125) {
        CHECK((eval_path(path, eta) - oracle::t2_beta(eta)).cwiseAbs().maxCoeff() <= 1e-14);
    }
    CHECK(path.segments[2].etaEnd == kInfinity);
    CHECK(path.events[0].nonzeroCoefficients == 2);
    CHECK(path.events[0].nonzeroGroups == 1);
    CHECK(path.events[1].nonzeroCoefficients == 0);
}

TEST_CASE("orthonormal design: first event from sorting |z|")
{
    std::mt19937_64 gen(8);
    std::normal_distribution<double> z;
    for (int t = 0; t < 20; ++t) {
        const int p = 6;
        const Matrix Q = Eigen::HouseholderQR<Matrix>(random_instance(gen, p, p).X).householderQ();
        ProblemInstance inst;
        inst.X = Q;
        inst.y.resize(p);
        for (int i = 0; i < p; ++i) inst.y[i] = 3 * z(gen);
        const Vector lam = qs_sequence(p);
        std::vector<double> mags(p);
        const Vector zc = Q.transpose() * inst.y;
        for (int i = 0; i < p; ++i) mags[i] = std::abs(zc[i]);
        std::sort(mags.begin(), mags.end());
        double expected = mags[0] / lam[0];
        for (int i = 0; i + 1 < p; ++i) {
            if (lam[i + 1] > lam[i]) expected = std::min(expected, (mags[i + 1] - mags[i]) / (lam[i + 1] - lam[i]));
        }
        PathEngine engine(inst, ray_of(Vector::Zero(p), lam));
        const PathEvent e = engine.next_event();
        CHECK(e.kind == EventKind::Fuse);
        CHECK(e.eta == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("finite horizon with no event yields one segment")
{
    const WeightRay ray = ray_of(vec({0, 1.5}), vec({0, -1}));
    const SolutionPath path = run_path(t2_instance(), ray);
    REQUIRE(path.segments.size() == 1);
    CHECK(path.segments[0].etaEnd == 1.5);
    CHECK(path.events.size() == 1);
    CHECK(path.events[0].kind == EventKind::Terminate);
    CHECK(path.events[0].eta == 1.5);
}

TEST_CASE("eval_path")
{
    const SolutionPath path = run_path(t2_instance(), ray_of(Vector::Zero(2), vec({0, 1})));
    CHECK(eval_path(path, 1.0) == vec({2, 1}));
    CHECK(eval_path(path, 0.0) == vec({3, 1}));
    CHECK(eval_path(path, 2.0) == vec({1, 1}));
    CHECK(eval_path(path, 1e6) == Vector::Zero(2));
    try {
        eval_path(path, -1.0);
        FAIL("expected OutOfRange");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OutOfRange);
    }
    const SolutionPath clipped = run_path(t2_instance(), ray_of(vec({0, 1.5}), vec({0, -1})));
    CHECK_THROWS_AS(eval_path(clipped, 1.5), Error);
    try {
        eval_path(SolutionPath{}, 0.0);
        FAIL("expected EmptyPath");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyPath);
    }
}

TEST_CASE("paths on random instances: KKT, affinity, continuity and agreement with the solver")
{
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    long events = 0;
    for (int t = 0; t < 24; ++t) {
        const int p = 3 + t % 6;
        const bool wide = t % 4 == 3;
        const ProblemInstance inst = random_instance(gen, wide ? p - 1 : p + 6, p, wide ? 0.2 : 0.0);
        const Vector seq = design_sequence(WeightDesign{DesignKind(t % 4), t % 4 == 2 ? 1.0 : 0.1, p + 10}, p);
        const double scale = (inst.X.transpose() * inst.y).cwiseAbs().sum() / seq.sum();
        const WeightRay ray = t % 2 ? ray_of(Vector::Zero(p), seq) : ray_of(seq * scale, -seq * scale / 3.0);
        const SolutionPath path = run_path(inst, ray);
        events += static_cast<long>(path.events.size());
        for (std::size_t s = 0; s < path.segments.size(); ++s) {
            const PathSegment& seg = path.segments[s];
            const double end = std::isfinite(seg.etaEnd) ? seg.etaEnd : seg.etaStart + 1.0 + seg.etaStart;
            const double mid = 0.5 * (seg.etaStart + end);
            const Vector beta = seg.at(mid);
            const Vector lam = ray.at(mid);
            CheckOptions opts;
            opts.tolEq = opts.tolIneq = 1e-7 * (1 + lam.cwiseAbs().maxCoeff());
            CHECK(check_optimality(beta, quadratic_gradient(inst, beta), lam, opts).optimal);
            const double e1 = seg.etaStart + 0.25 * (end - seg.etaStart);
            const double e3 = seg.etaStart + 0.75 * (end - seg.etaStart);
            const Vector affine = seg.at(e1) + seg.at(e3) - 2.0 * seg.at(0.5 * (e1 + e3));
            CHECK(affine.cwiseAbs().maxCoeff() <= 1e-12 * (1 + beta.cwiseAbs().maxCoeff()));
            if (s + 1 < path.segments.size()) {
                const Vector left = seg.at(seg.etaEnd);
                const Vector right = path.segments[s + 1].betaStart;
                CHECK((left - right).cwiseAbs().maxCoeff() <= 1e-9 * (1 + right.cwiseAbs().maxCoeff()));
            }
        }
        SolverOptions sopts;
        sopts.stopTolerance = 1e-11;
        const double horizon = std::isfinite(path.horizon()) ? path.horizon()
                                                              : 1.2 * path.events[path.events.size() - 2].eta + 1.0;
        for (int k = 0; k < 10; ++k) {
            const double eta = u(gen) * horizon;
            const Vector b = eval_path(path, eta);
            const Vector ref = solve_slope(inst, ray.at(eta), sopts).beta;
            CHECK((b - ref).cwiseAbs().maxCoeff() <= 1e-6 * (1 + b.cwiseAbs().maxCoeff()));
        }
    }
    CHECK(events > 100);
}

TEST_CASE("order switches leave the slope untouched and fuses land on equal values")
{
    std::mt19937_64 gen(33);
    long switches = 0, fuses = 0;
    for (int t = 0; t < 10; ++t) {
        const int p = 8;
        const ProblemInstance inst = random_instance(gen, 20, p);
        PathEngine engine(inst, ray_of(Vector::Zero(p), oscar_sequence(p, 1.0)));
        for (PathEvent e = engine.next_event(); e.kind != EventKind::Terminate; e = engine.next_event()) {
            const Vector before = engine.slope();
            if (e.kind == EventKind::Fuse && e.group >= 1) {
                const SegmentSolution s = engine.segment_solution();
                const double dt = e.eta - engine.eta();
                const double a = s.levels[e.group - 1] + dt * s.slope[e.group - 1];
                const double b = s.levels[e.group] + dt * s.slope[e.group];
                CHECK(std::abs(a - b) <= 1e-9 * (1 + std::abs(b)));
                ++fuses;
            }
            engine.apply_event(e);
            if (e.kind == EventKind::SwitchOrder) {
                CHECK(engine.slope() == before);
                ++switches;
            }
        }
    }
    CHECK(fuses > 0);
    CHECK(switches > 0);
}

TEST_CASE("split blocks satisfy their suffix conditions strictly right after the split")
{
    std::mt19937_64 gen(44);
    long splits = 0;
    for (int t = 0; t < 20; ++t) {
        const int p = 6;
        const ProblemInstance inst = random_instance(gen, 15, p);
        const Vector seq = bh_sequence(p, 0.2);
        const double scale = (inst.X.transpose() * inst.y).cwiseAbs().sum() / seq.sum();
        const WeightRay ray = ray_of(seq * scale, -seq * scale / 2.0);
        PathEngine engine(inst, ray);
        for (PathEvent e = engine.next_event(); e.kind != EventKind::Terminate && e.eta < 2.0;
             e = engine.next_event()) {
            engine.apply_event(e);
            if (e.kind != EventKind::Split) continue;
            // just past the event the two new blocks are separate and optimal
            const double eta = e.eta + 1e-7;
            if (eta >= 2.0) continue;
            const Vector beta = engine.beta() + 1e-7 * engine.slope();
            const Vector lam = ray.at(eta);
            const OptimalityReport rep = check_optimality(beta, quadratic_gradient(inst, beta), lam);
            CHECK(rep.optimal);
            ++splits;
        }
    }
    CHECK(splits > 0);
}

TEST_CASE("incremental inverse matches a scratch inverse")
{
    const GeneratedData data = generate(ScenarioSpec{2, 40, 400, 3, 0});
    EngineOptions opts;
    opts.validateEvery = 1;
    const SolutionPath path = run_path(data.instance, ray_of(Vector::Zero(40), qs_sequence(40)), opts);
    CHECK(path.diagnostics.inverseChecks > 50);
    CHECK(path.diagnostics.maxInverseError <= 1e-8);
    CHECK(path.diagnostics.fallbackRefactorizations == 0);
}

TEST_CASE("iteration cap stops a run")
{
    const GeneratedData data = generate(ScenarioSpec{1, 10, 100, 3, 0});
    EngineOptions opts;
    opts.iterationCap = 3;
    try {
        run_path(data.instance, ray_of(Vector::Zero(10), qs_sequence(10)), opts);
        FAIL("expected IterationCap");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IterationCap);
        CHECK(e.kind() == ErrorKind::Numerical);
    }
}

TEST_CASE("engine rejects bad inputs and events")
{
    ProblemInstance dup;
    dup.X = (Matrix(3, 2) << 1, 1, 2, 2, 3, 3).finished();
    dup.y = vec({1, 2, 3});
    CHECK_THROWS_AS(PathEngine(dup, ray_of(Vector::Zero(2), vec({0, 1}))), Error);
    CHECK_THROWS_AS(PathEngine(t2_instance(), ray_of(Vector::Zero(3), vec({0, 1, 2}))), Error);
    PathEngine engine(t2_instance(), ray_of(Vector::Zero(2), vec({0, 1})));
    PathEvent bogus;
    bogus.kind = EventKind::Fuse;
    bogus.group = 5;
    bogus.eta = 1.0;
    CHECK_THROWS_AS(engine.apply_event(bogus), Error);
}

TEST_CASE("switch cost does not grow with p")
{
    // per-event time for order/sign switches at fixed n
    std::vector<double> perEvent;
    for (int p : {40, 80, 160}) {
        double seconds = 0.0;
        long count = 0;
        for (std::uint32_t r = 0; r < 3; ++r) {
            const GeneratedData data = generate(ScenarioSpec{2, p, 320, 9, r});
            EngineOptions opts;
            opts.profile = true;
            opts.recordSegments = false;
            const SolutionPath path = run_path(data.instance, ray_of(Vector::Zero(p), qs_sequence(p)), opts);
            seconds += path.diagnostics.switchSeconds;
            count += path.diagnostics.orderSwitchEvents + path.diagnostics.signSwitchEvents;
        }
        REQUIRE(count > 0);
        perEvent.push_back(seconds / static_cast<double>(count));
    }
    MESSAGE("switch seconds per event at p = 40, 80, 160: " << perEvent[0] << ", " << perEvent[1] << ", "
                                                            << perEvent[2]);
    CHECK(perEvent[2] <= 4.0 * perEvent[0] + 2e-6);
}
