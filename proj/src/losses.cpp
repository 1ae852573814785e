#include <regpath/losses.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <regpath/error.hpp>

namespace regpath {
namespace {

constexpr double join_tol = 1e-12;

bool close(double u, double v)
{
    return std::abs(u - v) <= join_tol * std::max({1.0, std::abs(u), std::abs(v)});
}

// Smallest value of a quadratic piece on [lo, hi]; either bound may be infinite.
double piece_minimum(const Piece& q, double lo, double hi)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (q.a > 0) {
        const double v = std::clamp(-q.b / (2 * q.a), lo, hi);
        return q.value(v);
    }
    if ((std::isinf(lo) && q.b > 0) || (std::isinf(hi) && q.b < 0)) return -inf;
    double best = inf;
    if (!std::isinf(lo)) best = std::min(best, q.value(lo));
    if (!std::isinf(hi)) best = std::min(best, q.value(hi));
    return std::isinf(best) ? q.c : best;
}

} // namespace

const char* to_string(LossKind kind) noexcept
{
    switch (kind) {
        case LossKind::squared_error: return "squared";
        case LossKind::huber: return "huber";
        case LossKind::squared_hinge: return "sqhinge";
        case LossKind::huberized_squared_hinge: return "husqhinge";
        case LossKind::custom: return "custom";
    }
    return "custom";
}

LossKind loss_kind_from_string(const std::string& name)
{
    if (name == "squared") return LossKind::squared_error;
    if (name == "huber") return LossKind::huber;
    if (name == "sqhinge") return LossKind::squared_hinge;
    if (name == "husqhinge") return LossKind::huberized_squared_hinge;
    throw Error(ErrorKind::invalid_parameter, "unknown loss '" + name + "'");
}

LossModel::LossModel(LossKind kind, std::vector<double> knots, std::vector<Piece> pieces,
                     ResidualKind residual_kind, std::optional<double> huber_t)
    : kind_(kind), knots_(std::move(knots)), pieces_(std::move(pieces)),
      residual_kind_(residual_kind), huber_t_(huber_t)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (pieces_.size() != knots_.size() + 1) {
        throw Error(ErrorKind::invalid_parameter, "a spline with m knots needs m+1 pieces");
    }
    for (std::size_t j = 0; j < knots_.size(); ++j) {
        if (!std::isfinite(knots_[j]) || (j > 0 && !(knots_[j - 1] < knots_[j]))) {
            throw Error(ErrorKind::invalid_parameter, "knots must be finite and strictly increasing");
        }
    }
    for (std::size_t j = 0; j < pieces_.size(); ++j) {
        const auto& q = pieces_[j];
        if (!std::isfinite(q.a) || !std::isfinite(q.b) || !std::isfinite(q.c)) {
            throw Error(ErrorKind::invalid_parameter, "piece coefficients must be finite");
        }
        if (q.a < 0) {
            throw Error(ErrorKind::invalid_parameter,
                        "piece " + std::to_string(j) + " has negative curvature");
        }
        const double lo = j == 0 ? -inf : knots_[j - 1];
        const double hi = j == knots_.size() ? inf : knots_[j];
        if (piece_minimum(q, lo, hi) < -join_tol) {
            throw Error(ErrorKind::invalid_parameter,
                        "loss is negative on piece " + std::to_string(j));
        }
    }
    for (std::size_t j = 0; j < knots_.size(); ++j) {
        const double k = knots_[j];
        const auto& left = pieces_[j];
        const auto& right = pieces_[j + 1];
        if (!close(left.value(k), right.value(k))) {
            throw Error(ErrorKind::invalid_parameter,
                        "loss is discontinuous at knot " + std::to_string(k));
        }
        if (!close(left.slope(k), right.slope(k))) {
            throw Error(ErrorKind::invalid_parameter,
                        "loss derivative is discontinuous at knot " + std::to_string(k));
        }
    }
}

LossModel LossModel::custom(std::vector<double> knots, std::vector<Piece> pieces,
                            ResidualKind residual_kind)
{
    return LossModel(LossKind::custom, std::move(knots), std::move(pieces), residual_kind,
                     std::nullopt);
}

std::size_t LossModel::piece_index(double r) const
{
    return static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), r) -
                                    knots_.begin());
}

LossModel make_loss(LossKind kind, std::optional<double> t)
{
    switch (kind) {
        case LossKind::squared_error:
            return LossModel(kind, {}, {{1, 0, 0}}, ResidualKind::regression, std::nullopt);
        case LossKind::huber: {
            if (!t || !(*t > 0) || !std::isfinite(*t)) {
                throw Error(ErrorKind::invalid_parameter, "huber loss needs a knot t > 0");
            }
            const double h = *t;
            return LossModel(kind, {-h, h},
                             {{0, -2 * h, -h * h}, {1, 0, 0}, {0, 2 * h, -h * h}},
                             ResidualKind::regression, h);
        }
        case LossKind::squared_hinge:
            return LossModel(kind, {1.0}, {{1, -2, 1}, {0, 0, 0}}, ResidualKind::classification,
                             std::nullopt);
        case LossKind::huberized_squared_hinge: {
            if (!t || !(*t < 1) || !std::isfinite(*t)) {
                throw Error(ErrorKind::invalid_parameter,
                            "huberized squared hinge needs a knot t < 1");
            }
            const double h = *t;
            // (1-t)^2 + 2(1-t)(t-m) below t, (1-m)^2 up to 1, zero beyond.
            return LossModel(kind, {h, 1.0},
                             {{0, -2 * (1 - h), (1 - h) * (1 + h)}, {1, -2, 1}, {0, 0, 0}},
                             ResidualKind::classification, h);
        }
        case LossKind::custom:
            break;
    }
    throw Error(ErrorKind::invalid_parameter, "custom losses are built with LossModel::custom");
}

ResidualKind residual_kind_for(Task task) noexcept
{
    return task == Task::regression ? ResidualKind::regression : ResidualKind::classification;
}

double generalized_residual(ResidualKind kind, double y, double eta)
{
    if (kind == ResidualKind::regression) return y - eta;
    if (y != 1.0 && y != -1.0) {
        throw Error(ErrorKind::invalid_label, "classification label must be -1 or +1");
    }
    return y * eta;
}

Gradient total_gradient(const LossModel& loss, const Dataset& data,
                        const Eigen::VectorXd& beta, double intercept)
{
    if (beta.size() != data.p() || data.y.size() != data.n()) {
        throw Error(ErrorKind::dimension_mismatch, "coefficient length does not match design");
    }
    const Eigen::VectorXd eta = predict(data.x, beta, intercept);
    Eigen::VectorXd weight(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const double y = data.y(i);
        const double r = generalized_residual(loss.residual_kind(), y, eta(i));
        weight(i) = loss.derivative(r) * residual_sign(loss.residual_kind(), y);
    }
    Gradient g;
    g.coef = data.x.transpose() * weight;
    g.intercept = weight.sum();
    return g;
}

double total_loss(const LossModel& loss, const Dataset& data, const Eigen::VectorXd& beta,
                  double intercept)
{
    const Eigen::VectorXd eta = predict(data.x, beta, intercept);
    double sum = 0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        sum += loss.value(generalized_residual(loss.residual_kind(), data.y(i), eta(i)));
    }
    return sum;
}

} // namespace regpath
