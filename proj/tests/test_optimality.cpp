#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include <slopepath/error.hpp>
#include <slopepath/optimality.hpp>

using namespace slopepath;

namespace {

ProblemInstance t2_instance()
{
    ProblemInstance inst;
    inst.X = Matrix::Identity(2, 2);
    inst.y = (Vector(2) << 3, 1).finished();
    return inst;
}

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

} // namespace

TEST_CASE("signs and order for the two-coordinate problem at eta = 1")
{
    const Vector beta = vec({2, 1});
    const Vector grad = quadratic_gradient(t2_instance(), beta);
    CHECK(grad == vec({-1, 0}));
    const Partition part = partition_by_magnitude(beta, 1e-12);
    const SignsAndOrder so = signs_and_order(beta, grad, part, 1e-12);
    CHECK(so.signs == std::vector<int>{-1, -1});
    CHECK(so.order == std::vector<int>{1, 0});
    CHECK(so.groupStart == std::vector<int>{0, 0, 1, 2});
}

TEST_CASE("zero group takes the gradient sign and sorts by magnitude")
{
    const Vector grad = vec({0.5, -2.0, 1.0, -0.1});
    const Vector beta = Vector::Zero(4);
    const SignsAndOrder so = signs_and_order(beta, grad, partition_by_magnitude(beta, 0.0), 0.0);
    CHECK(so.signs == std::vector<int>{1, -1, 1, -1});
    CHECK(so.order == std::vector<int>{3, 0, 2, 1});
}

TEST_CASE("ties in the grouped gradient keep index order")
{
    const Vector beta = vec({1, -1});
    const SignsAndOrder so = signs_and_order(beta, Vector::Zero(2), partition_by_magnitude(beta, 1e-12), 1e-12);
    CHECK(so.signs == std::vector<int>{-1, 1});
    CHECK(so.order == std::vector<int>{0, 1});
}

TEST_CASE("inconsistent grouping is reported")
{
    Partition part;
    part.groups = {{}, {0, 1}};
    part.levels = {0.0, 1.0};
    try {
        signs_and_order(vec({1.0, 1.5}), Vector::Zero(2), part, 1e-9);
        FAIL("expected InconsistentGroups");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InconsistentGroups);
    }
}

TEST_CASE("scalar soft-threshold condition")
{
    const OptimalityReport ok = check_optimality(Vector::Zero(1), vec({0.7}), vec({1.0}));
    CHECK(ok.optimal);
    REQUIRE(ok.slackMargins.size() == 1);
    CHECK(ok.slackMargins[0].margin == doctest::Approx(0.3));
    const OptimalityReport bad = check_optimality(Vector::Zero(1), vec({-1.2}), vec({1.0}));
    CHECK_FALSE(bad.optimal);
    CHECK(bad.worstViolation.condition == 2);
}

TEST_CASE("two-coordinate problem: path point is optimal, least squares is not")
{
    const ProblemInstance inst = t2_instance();
    const Vector lambda = vec({0, 1});
    const Vector good = vec({2, 1});
    const OptimalityReport rep = check_optimality(good, quadratic_gradient(inst, good), lambda);
    CHECK(rep.optimal);
    REQUIRE(rep.cond1Residuals.size() == 2);
    CHECK(rep.cond1Residuals[0] == 0.0);
    CHECK(rep.cond1Residuals[1] == 0.0);

    // the grid oracle lands on the same point
    const Vector grid = oracle::grid_minimize(inst.X, inst.y, 0.0, lambda, Vector::Zero(2), 1.0, 1e-6);
    CHECK((grid - good).cwiseAbs().maxCoeff() <= 1e-5);

    const Vector lse = vec({3, 1});
    const OptimalityReport bad = check_optimality(lse, quadratic_gradient(inst, lse), lambda);
    CHECK_FALSE(bad.optimal);
    CHECK(bad.worstViolation.condition == 1);
    CHECK(bad.worstViolation.group == 2);
    CHECK(bad.worstViolation.magnitude == doctest::Approx(1.0));
}

TEST_CASE("grid minimizers pass and perturbed points fail")
{
    std::mt19937_64 gen(5);
    std::normal_distribution<double> z;
    int passed = 0, rejected = 0, cases = 0;
    for (int t = 0; t < 200; ++t) {
        const int p = 1 + t % 4;
        const int n = p + 4;
        Matrix X(n, p);
        Vector y(n);
        for (int i = 0; i < n; ++i) {
            y[i] = 2.0 * z(gen);
            for (int j = 0; j < p; ++j) X(i, j) = z(gen) / std::sqrt(static_cast<double>(n));
        }
        const Vector lambda = oracle::random_ascending(gen, p, 1.5);
        const Vector beta = oracle::grid_minimize(X, y, 0.0, lambda, Vector::Zero(p), 1.0, 1e-5);
        ProblemInstance inst{y, X, 0.0};
        CheckOptions opts;
        opts.tolEq = opts.tolIneq = 1e-4;
        opts.groupTol = 1e-4;
        ++cases;
        if (check_optimality(beta, quadratic_gradient(inst, beta), lambda, opts).optimal) ++passed;
        Vector moved = beta;
        moved[t % p] += (t % 2 ? 1e-2 : -1e-2);
        if (!check_optimality(moved, quadratic_gradient(inst, moved), lambda, opts).optimal) ++rejected;
    }
    CHECK(passed == cases);
    CHECK(rejected == cases);
}

TEST_CASE("verdict is invariant under coordinate permutation")
{
    std::mt19937_64 gen(17);
    std::normal_distribution<double> z;
    for (int t = 0; t < 50; ++t) {
        const int p = 6;
        Vector beta(p), grad(p);
        for (int i = 0; i < p; ++i) {
            beta[i] = (i % 3 == 0) ? 0.0 : std::round(z(gen) * 2) / 2;
            grad[i] = z(gen);
        }
        const Vector lambda = oracle::random_ascending(gen, p, 2.0);
        std::vector<int> perm(p);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), gen);
        Vector pb(p), pg(p);
        for (int i = 0; i < p; ++i) {
            pb[i] = beta[perm[i]];
            pg[i] = grad[perm[i]];
        }
        const OptimalityReport a = check_optimality(beta, grad, lambda);
        const OptimalityReport b = check_optimality(pb, pg, lambda);
        CHECK(a.optimal == b.optimal);
        CHECK(a.worstViolation.magnitude == doctest::Approx(b.worstViolation.magnitude).epsilon(1e-12));
    }
}

TEST_CASE("scaling weights and gradient scales every residual")
{
    const Vector beta = vec({0, 1.5, -1.5, 0.5});
    const Vector grad = vec({0.2, -0.9, 1.4, 0.3});
    const Vector lambda = vec({0.1, 0.4, 0.8, 1.3});
    const double c = 4.0;  // a power of two keeps the products exact
    const OptimalityReport a = check_optimality(beta, grad, lambda);
    const OptimalityReport b = check_optimality(beta, c * grad, c * lambda);
    REQUIRE(a.cond1Residuals.size() == b.cond1Residuals.size());
    for (std::size_t i = 0; i < a.cond1Residuals.size(); ++i) CHECK(b.cond1Residuals[i] == c * a.cond1Residuals[i]);
    REQUIRE(a.slackMargins.size() == b.slackMargins.size());
    for (std::size_t i = 0; i < a.slackMargins.size(); ++i) {
        CHECK(b.slackMargins[i].margin == c * a.slackMargins[i].margin);
    }
}

TEST_CASE("objective and gradient of the quadratic loss")
{
    ProblemInstance inst = t2_instance();
    inst.ridge = 0.5;
    const Vector beta = vec({1, -2});
    CHECK(quadratic_gradient(inst, beta) == vec({-2 + 0.5, -3 - 1.0}));
    const double expected = 0.5 * (4 + 9) + 0.25 * 5 + (1 * 2 + 0.5 * 1);
    CHECK(slope_objective(inst, beta, vec({0.5, 1})) == doctest::Approx(expected));
}
