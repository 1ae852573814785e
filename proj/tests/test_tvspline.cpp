#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <regpath/check.hpp>
#include <regpath/error.hpp>
#include <regpath/synth.hpp>
#include <regpath/tvspline.hpp>

namespace regpath {
namespace {

struct Sample {
    Eigen::VectorXd x;
    Eigen::VectorXd y;
};

Sample sine_sample(std::uint64_t seed, int n)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (double& v : xs) v = unif(rng);
    std::sort(xs.begin(), xs.end());
    Sample s{Eigen::VectorXd(n), Eigen::VectorXd(n)};
    for (int i = 0; i < n; ++i) {
        s.x(i) = xs[static_cast<std::size_t>(i)];
        s.y(i) = std::sin(6 * s.x(i)) + 0.2 * normal(rng);
    }
    return s;
}

// spline42 sample, sorted and mapped onto [0, 1] the way the path does it.
Sample unit_spline42()
{
    const Dataset d = synth(SynthKind::spline42, 42);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d.n()));
    for (Eigen::Index i = 0; i < d.n(); ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return d.x(a, 0) < d.x(b, 0); });
    const double lo = d.x.col(0).minCoeff();
    const double hi = d.x.col(0).maxCoeff();
    Sample s{Eigen::VectorXd(d.n()), Eigen::VectorXd(d.n())};
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        s.x(i) = (d.x(order[static_cast<std::size_t>(i)], 0) - lo) / (hi - lo);
        s.y(i) = d.y(order[static_cast<std::size_t>(i)]);
    }
    return s;
}

SplineModel truth_model()
{
    SplineModel g;
    g.order = 3;
    g.knots = {0.25, 0.5, 0.75};
    g.poly_coef = Eigen::Vector3d(0.125, 0.125, -1);
    g.knot_coef = Eigen::Vector3d(2, -2, 2);
    return g;
}

TEST(TvSpline, PlusPower)
{
    EXPECT_DOUBLE_EQ(plus_power(0.75, 0.5, 3), 0.0625);
    EXPECT_EQ(plus_power(0.5, 0.5, 1), 0);
    EXPECT_EQ(plus_power(0.5000001, 0.5, 1), 1);
    EXPECT_EQ(plus_power(0.3, 0.5, 2), 0);
}

TEST(TvSpline, BasisRow)
{
    const std::vector<double> one{0.5};
    const Eigen::VectorXd a = basis_row(one, 3, 0.75);
    ASSERT_EQ(a.size(), 4);
    EXPECT_DOUBLE_EQ(a(0), 1);
    EXPECT_DOUBLE_EQ(a(1), 0.75);
    EXPECT_DOUBLE_EQ(a(2), 0.5625);
    EXPECT_DOUBLE_EQ(a(3), 0.0625);

    const std::vector<double> two{0.2, 0.8};
    EXPECT_EQ(basis_row(two, 1, 0.5), Eigen::Vector3d(1, 1, 0));
    EXPECT_EQ(basis_row({}, 2, 0.4), Eigen::Vector2d(1, 0.4));
}

TEST(TvSpline, EvaluationAndTotalVariation)
{
    const SplineModel g = truth_model();
    EXPECT_NEAR(spline_eval(g, 0.5), 0.0625, 1e-15);
    EXPECT_NEAR(spline_eval(g, 0.0), 0.125, 1e-15);
    EXPECT_NEAR(spline_eval(g, 0.2), 0.125 + 0.025 - 0.04, 1e-15);
    EXPECT_DOUBLE_EQ(total_variation(g), 12);
    for (double x = 0; x <= 1; x += 0.01) EXPECT_NEAR(spline_eval(g, x), spline42_truth(x), 1e-14);

    SplineModel step;
    step.order = 1;
    step.knots = {0.3};
    step.poly_coef = Eigen::VectorXd::Zero(1);
    step.knot_coef = Eigen::VectorXd::Constant(1, 0.5);
    EXPECT_DOUBLE_EQ(total_variation(step), 0.5);
    step.knots.clear();
    step.knot_coef.resize(0);
    EXPECT_EQ(total_variation(step), 0);
}

TEST(TvSpline, PolynomialDataEndsAtInit)
{
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(20, 0, 1);
    Eigen::VectorXd y = (1.0 + 2.0 * x.array() - 0.5 * x.array().square()).matrix();
    const SplinePath path = solve_tv_path(x, y, 3);
    ASSERT_EQ(path.breakpoints.size(), 1u);
    EXPECT_EQ(path.status, TvStatus::interpolated);
    EXPECT_LE(path.breakpoints[0].lambda, 1e-12);
    EXPECT_LE(path.breakpoints[0].model.knot_coef.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(path.breakpoints[0].model.poly_coef(2), -0.5, 1e-12);
}

TEST(TvSpline, FirstKnotMaximizesTheCorrelation)
{
    const Sample s = unit_spline42();
    const TvPathState state = init_tv_path(s.x, s.y, 3);
    ASSERT_EQ(state.knots.size(), 1u);
    const double u = state.knots[0];
    EXPECT_GT(u, 0.2);
    EXPECT_LT(u, 0.8);

    // Independent grid search over |sum_i (x_i - t)_+^2 r_i| with the
    // least-squares quadratic residual.
    Eigen::MatrixXd poly(s.x.size(), 3);
    poly << Eigen::VectorXd::Ones(s.x.size()), s.x, s.x.array().square().matrix();
    const Eigen::VectorXd r = s.y - poly * poly.colPivHouseholderQr().solve(s.y);
    double best = 0, arg = 0;
    for (double t = 0; t < 1; t += 1e-5) {
        double c = 0;
        for (Eigen::Index i = 0; i < s.x.size(); ++i) c += plus_power(s.x(i), t, 3) * r(i);
        if (std::abs(c) > best) {
            best = std::abs(c);
            arg = t;
        }
    }
    EXPECT_NEAR(u, arg, 1e-4);
    EXPECT_NEAR(state.lambda, best / 2, 1e-6 * best);
}

// For k = 3 lambda(t) has an unattained supremum where t approaches an
// active knot, so data intervals holding a knot are left out of the grid.
TEST(TvSpline, NextKnotMatchesDenseGrid)
{
    const Sample s = unit_spline42();
    TvPathState state = init_tv_path(s.x, s.y, 3);
    auto beside_knot = [&](double t) {
        const double* hi = std::upper_bound(s.x.data(), s.x.data() + s.x.size(), t);
        const double a = hi == s.x.data() ? 0.0 : *(hi - 1);
        const double b = hi == s.x.data() + s.x.size() ? 1.0 : *hi;
        return std::any_of(state.knots.begin(), state.knots.end(), [&](double k) { return k >= a && k <= b; });
    };
    for (int step = 0; step < 3; ++step) {
        const KnotEvent next = find_next_knot(state);
        ASSERT_TRUE(next.found());
        double best = -1, arg = 0;
        for (double t = 1e-5; t < 1; t += 1e-5) {
            if (beside_knot(t)) continue;
            const LambdaCandidates c = lambda_candidates(state, t);
            if (c.admissible() && c.value > best) {
                best = c.value;
                arg = t;
            }
        }
        EXPECT_NEAR(next.t, arg, 1e-4) << "step " << step;
        EXPECT_GE(next.lambda, best - 1e-9) << "step " << step;
        tv_step(state);
    }
}

TEST(TvSpline, FirstStepAddsASecondKnot)
{
    const Sample s = unit_spline42();
    TvPathState state = init_tv_path(s.x, s.y, 3);
    const TvStepResult r = tv_step(state);
    EXPECT_EQ(r.event.kind, TvEventKind::add_knot);
    EXPECT_EQ(state.knots.size(), 2u);
}

// The correlation at t is recomputed directly from beta(lambda) =
// beta + (lambda0 - lambda) gamma and must sit on the band at each level.
TEST(TvSpline, CandidatesAreBandCrossings)
{
    const Sample s = sine_sample(3, 30);
    for (int k : {1, 2, 3}) {
        TvPathState state = init_tv_path(s.x, s.y, k);
        tv_step(state);
        const double c = factorial(k - 1);
        auto corr = [&](double t, double lambda) {
            const Eigen::VectorXd beta = state.beta + (state.lambda - lambda) * state.gamma;
            const Eigen::VectorXd r = s.y - state.basis * beta;
            double out = 0;
            for (Eigen::Index i = 0; i < s.x.size(); ++i) out += plus_power(state.x(i), t, k) * r(i);
            return out;
        };
        for (double t : {0.13, 0.41, 0.77}) {
            const LambdaCandidates cand = lambda_candidates(state, t);
            EXPECT_NEAR(corr(t, cand.plus), c * cand.plus, 1e-10) << "k=" << k << " t=" << t;
            EXPECT_NEAR(corr(t, cand.minus), -c * cand.minus, 1e-10) << "k=" << k << " t=" << t;
            if (cand.admissible()) {
                EXPECT_LT(cand.value, state.lambda);
                EXPECT_LE(std::abs(corr(t, state.lambda)), c * state.lambda + 1e-10);
            }
        }
    }
}

TEST(TvSpline, RemoveStep)
{
    TvPathState state;
    state.k = 1;
    state.lambda = 10;
    state.knots = {0.5};
    state.beta = Eigen::Vector2d(0.7, 0.3);
    state.gamma = Eigen::Vector2d(0.2, -0.1);
    const KnotEvent rem = lambda_remove(state);
    ASSERT_TRUE(rem.found());
    EXPECT_DOUBLE_EQ(rem.t, 0.5);
    EXPECT_NEAR(rem.lambda, 7, 1e-12);

    state.gamma = Eigen::Vector2d(0.2, 0.1);
    EXPECT_FALSE(lambda_remove(state).found());
}

class LowOrder : public ::testing::TestWithParam<int> {};

TEST_P(LowOrder, KnotsSitOnDataPoints)
{
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const Sample s = sine_sample(seed, 50);
        const SplinePath path = solve_tv_path(s.x, s.y, GetParam());
        for (const SplineBreakpoint& bp : path.breakpoints) {
            EXPECT_LE(bp.model.knots.size(), static_cast<std::size_t>(50 - GetParam()));
            for (double t : bp.model.knots) {
                const double raw = path.domain.from_unit(t);
                double gap = INFINITY;
                for (Eigen::Index i = 0; i < s.x.size(); ++i) gap = std::min(gap, std::abs(raw - s.x(i)));
                EXPECT_LE(gap, 1e-9);
            }
        }
    }
}

TEST_P(LowOrder, MonotoneFitAndVariation)
{
    const Sample s = sine_sample(11, 40);
    const SplinePath path = solve_tv_path(s.x, s.y, GetParam());
    double rss = INFINITY, tv = 0;
    for (const SplineBreakpoint& bp : path.breakpoints) {
        double next = 0;
        for (Eigen::Index i = 0; i < s.x.size(); ++i) {
            const double e = s.y(i) - path.predict(static_cast<std::size_t>(&bp - path.breakpoints.data()), s.x(i));
            next += e * e;
        }
        EXPECT_LE(next, rss + 1e-10);
        EXPECT_GE(total_variation(bp.model), tv - 1e-10);
        rss = next;
        tv = total_variation(bp.model);
    }
}

INSTANTIATE_TEST_SUITE_P(Orders, LowOrder, ::testing::Values(1, 2));

TEST(TvSpline, OptimalityAndFrozenKnotOracle)
{
    for (int k : {1, 2, 3}) {
        const Sample s = sine_sample(5, 40);
        TvOptions opt;
        opt.max_steps = 12;
        const SplinePath path = solve_tv_path(s.x, s.y, k, opt);
        Eigen::VectorXd u(s.x.size());
        for (Eigen::Index i = 0; i < s.x.size(); ++i) u(i) = path.domain.to_unit(s.x(i));
        for (const SplineBreakpoint& bp : path.breakpoints) {
            const TvKktReport rep = verify_tv_kkt(bp.model, u, s.y, bp.lambda);
            const double slack = 1e-8 * std::max(bp.lambda, 1.0);
            EXPECT_LE(rep.max_active_gap, slack) << "k=" << k;
            EXPECT_LE(rep.max_poly_gradient, slack) << "k=" << k;
            EXPECT_LE(k <= 2 ? rep.max_inactive_excess : rep.max_inactive_excess_away, 1e-6) << "k=" << k;
            const Eigen::VectorXd ref = fixed_knot_oracle(bp.model, u, s.y, bp.lambda);
            EXPECT_LE((ref - bp.model.coefficients()).cwiseAbs().maxCoeff(), 1e-6) << "k=" << k;
        }
    }
}

TEST(TvSpline, EventTagsRoundTrip)
{
    for (const TvEvent& e : {TvEvent{TvEventKind::init}, TvEvent{TvEventKind::add_knot, 0.125},
                             TvEvent{TvEventKind::remove_knot, 0.1 + 0.2}, TvEvent{TvEventKind::terminate}}) {
        const TvEvent back = parse_tv_event(format_tv_event(e));
        EXPECT_EQ(back.kind, e.kind);
        if (!std::isnan(e.knot)) EXPECT_EQ(back.knot, e.knot);
    }
    EXPECT_THROW(parse_tv_event("add-knot(zero)"), Error);
}

TEST(TvSpline, RejectsTooFewPoints)
{
    Eigen::VectorXd x(2), y(2);
    x << 0, 1;
    y << 1, 2;
    EXPECT_THROW(solve_tv_path(x, y, 3), Error);
}

} // namespace
} // namespace regpath
