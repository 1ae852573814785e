#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <regpath/error.hpp>
#include <regpath/losses.hpp>

namespace regpath {
namespace {

std::vector<LossModel> builtin_losses()
{
    return {make_loss(LossKind::squared_error), make_loss(LossKind::huber, 1.0), make_loss(LossKind::huber, 0.3),
            make_loss(LossKind::squared_hinge), make_loss(LossKind::huberized_squared_hinge, 0.5),
            make_loss(LossKind::huberized_squared_hinge, -1.0)};
}

bool near_knot(const LossModel& loss, double r, double h)
{
    for (double k : loss.knots()) {
        if (std::abs(r - k) <= 2 * h) return true;
    }
    return false;
}

// Minimizer of a unimodal function on [lo, hi] by golden-section search.
template <class F>
double golden_min(F f, double lo, double hi)
{
    const double g = 0.5 * (std::sqrt(5.0) - 1);
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    while (b - a > 1e-10) {
        if (f(c) < f(d)) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    return 0.5 * (a + b);
}

TEST(Losses, HuberPieces)
{
    const LossModel loss = make_loss(LossKind::huber, 1.0);
    ASSERT_EQ(loss.knots().size(), 2u);
    EXPECT_EQ(loss.knots()[0], -1.0);
    EXPECT_EQ(loss.knots()[1], 1.0);
    const Piece& left = loss.piece(0);
    const Piece& mid = loss.piece(1);
    const Piece& right = loss.piece(2);
    EXPECT_DOUBLE_EQ(left.a, 0);
    EXPECT_DOUBLE_EQ(left.b, -2);
    EXPECT_DOUBLE_EQ(left.c, -1);
    EXPECT_DOUBLE_EQ(mid.a, 1);
    EXPECT_DOUBLE_EQ(mid.b, 0);
    EXPECT_DOUBLE_EQ(mid.c, 0);
    EXPECT_DOUBLE_EQ(right.a, 0);
    EXPECT_DOUBLE_EQ(right.b, 2);
    EXPECT_DOUBLE_EQ(right.c, -1);
}

TEST(Losses, SquaredErrorHasOnePiece)
{
    const LossModel loss = make_loss(LossKind::squared_error);
    EXPECT_TRUE(loss.knots().empty());
    ASSERT_EQ(loss.num_pieces(), 1u);
    EXPECT_DOUBLE_EQ(loss.piece(0).a, 1);
    EXPECT_DOUBLE_EQ(loss.piece(0).b, 0);
    EXPECT_DOUBLE_EQ(loss.piece(0).c, 0);
}

TEST(Losses, HuberizedSquaredHinge)
{
    const LossModel loss = make_loss(LossKind::huberized_squared_hinge, 0.5);
    ASSERT_EQ(loss.knots().size(), 2u);
    EXPECT_EQ(loss.knots()[0], 0.5);
    EXPECT_EQ(loss.knots()[1], 1.0);
    EXPECT_NEAR(loss.value(0.0), 0.75, 1e-15);
    EXPECT_NEAR(loss.value(0.75), 0.0625, 1e-15);
    EXPECT_EQ(loss.value(2.0), 0.0);
    EXPECT_EQ(loss.residual_kind(), ResidualKind::classification);
}

TEST(Losses, PointValues)
{
    const LossModel huber = make_loss(LossKind::huber, 1.0);
    const LossModel hinge = make_loss(LossKind::squared_hinge);
    const LossModel squared = make_loss(LossKind::squared_error);
    EXPECT_DOUBLE_EQ(huber.value(2), 3);
    EXPECT_DOUBLE_EQ(huber.value(0.5), 0.25);
    EXPECT_DOUBLE_EQ(hinge.value(-1), 4);
    EXPECT_DOUBLE_EQ(huber.derivative(2), 2);
    EXPECT_DOUBLE_EQ(huber.piece(1).slope(1), 2);
    EXPECT_DOUBLE_EQ(huber.piece(2).slope(1), 2);
    EXPECT_DOUBLE_EQ(hinge.derivative(2), 0);
    EXPECT_DOUBLE_EQ(huber.curvature(0.5), 1);
    EXPECT_DOUBLE_EQ(huber.curvature(2), 0);
    EXPECT_DOUBLE_EQ(squared.curvature(-7), 1);
}

TEST(Losses, PieceLookupIsClosedOnTheLeft)
{
    const LossModel huber = make_loss(LossKind::huber, 1.0);
    EXPECT_EQ(huber.piece_index(-1.0), 1u);
    EXPECT_EQ(huber.piece_index(std::nextafter(-1.0, -2.0)), 0u);
    EXPECT_EQ(huber.piece_index(1.0), 2u);
    EXPECT_EQ(huber.piece_index(std::nextafter(1.0, 0.0)), 1u);
}

TEST(Losses, GeneralizedResidual)
{
    EXPECT_EQ(generalized_residual(ResidualKind::regression, 3, 1), 2);
    EXPECT_EQ(generalized_residual(ResidualKind::classification, -1, 2), -2);
    EXPECT_EQ(generalized_residual(ResidualKind::classification, 1, 0), 0);
}

TEST(Losses, TotalGradient)
{
    const LossModel squared = make_loss(LossKind::squared_error);
    Eigen::MatrixXd x(2, 1);
    x << 1, 1;
    Eigen::VectorXd y(2);
    y << 1, 1;
    const Dataset data = make_dataset(x, y, Task::regression);
    EXPECT_DOUBLE_EQ(total_gradient(squared, data, Eigen::VectorXd::Zero(1), 0).coef(0), -4);
    EXPECT_DOUBLE_EQ(total_gradient(squared, data, Eigen::VectorXd::Ones(1), 0).coef(0), 0);

    Eigen::MatrixXd x1(1, 1);
    x1 << 1;
    Eigen::VectorXd y1(1);
    y1 << 2;
    const Dataset one = make_dataset(x1, y1, Task::regression);
    EXPECT_DOUBLE_EQ(total_gradient(make_loss(LossKind::huber, 1.0), one, Eigen::VectorXd::Zero(1), 0).coef(0), -2);
}

TEST(Losses, DerivativeMatchesFiniteDifferences)
{
    const double h = 1e-5;
    for (const LossModel& loss : builtin_losses()) {
        for (double r = -4; r <= 4; r += 0.01) {
            if (near_knot(loss, r, h)) continue;
            const double fd = (loss.value(r + h) - loss.value(r - h)) / (2 * h);
            EXPECT_NEAR(loss.derivative(r), fd, 1e-6) << to_string(loss.kind()) << " r=" << r;
        }
    }
}

TEST(Losses, ContinuousAndSmoothAtKnots)
{
    for (const LossModel& loss : builtin_losses()) {
        for (std::size_t j = 0; j < loss.knots().size(); ++j) {
            const double k = loss.knots()[j];
            const Piece& lo = loss.piece(j);
            const Piece& hi = loss.piece(j + 1);
            EXPECT_NEAR(lo.value(k), hi.value(k), 1e-12);
            EXPECT_NEAR(lo.slope(k), hi.slope(k), 1e-12);
        }
    }
}

TEST(Losses, ConvexAndNonnegative)
{
    for (const LossModel& loss : builtin_losses()) {
        double previous = -INFINITY;
        for (double r = -6; r <= 6; r += 0.003) {
            EXPECT_GE(loss.derivative(r), previous - 1e-12);
            EXPECT_GE(loss.value(r), -1e-12);
            previous = loss.derivative(r);
        }
    }
}

TEST(Losses, LargeHuberKnotReducesToSquaredError)
{
    const LossModel huber = make_loss(LossKind::huber, 1e6);
    const LossModel squared = make_loss(LossKind::squared_error);
    for (double r = -1e5; r <= 1e5; r += 997.3) {
        const double ref = squared.value(r);
        EXPECT_LE(std::abs(huber.value(r) - ref), 1e-9 * std::max(1.0, ref));
        EXPECT_LE(std::abs(huber.derivative(r) - squared.derivative(r)), 1e-9 * std::max(1.0, std::abs(r)));
    }
}

TEST(Losses, HuberizedHingePopulationMinimizer)
{
    for (double t : {-1.0, -2.0}) {
        const LossModel loss = make_loss(LossKind::huberized_squared_hinge, t);
        for (int j = 1; j <= 9; ++j) {
            const double p = 0.1 * j;
            auto risk = [&](double f) { return p * loss.value(f) + (1 - p) * loss.value(-f); };
            EXPECT_NEAR(golden_min(risk, -3, 3), 2 * p - 1, 1e-3) << "t=" << t << " p=" << p;
        }
    }
}

TEST(Losses, CustomValidation)
{
    const std::vector<double> knots{0.0};
    // Valid: zero for r < 0, r^2 afterwards.
    EXPECT_NO_THROW(LossModel::custom(knots, {{0, 0, 0}, {1, 0, 0}}, ResidualKind::regression));
    // Jump at the knot.
    EXPECT_THROW(LossModel::custom(knots, {{0, 0, 1}, {1, 0, 0}}, ResidualKind::regression), Error);
    // Kink at the knot.
    EXPECT_THROW(LossModel::custom(knots, {{0, -1, 0}, {1, 0, 0}}, ResidualKind::regression), Error);
    // Concave piece.
    EXPECT_THROW(LossModel::custom({}, {{-1, 0, 0}}, ResidualKind::regression), Error);
    // Negative minimum.
    EXPECT_THROW(LossModel::custom({}, {{1, 0, -1}}, ResidualKind::regression), Error);
    // Wrong number of pieces.
    EXPECT_THROW(LossModel::custom(knots, {{1, 0, 0}}, ResidualKind::regression), Error);
}

TEST(Losses, ParameterChecks)
{
    EXPECT_THROW(make_loss(LossKind::huber), Error);
    EXPECT_THROW(make_loss(LossKind::huber, -1.0), Error);
    EXPECT_THROW(make_loss(LossKind::huberized_squared_hinge, 1.0), Error);
    EXPECT_THROW(loss_kind_from_string("hinge"), Error);
    EXPECT_EQ(loss_kind_from_string(to_string(LossKind::huber)), LossKind::huber);
}

} // namespace
} // namespace regpath
