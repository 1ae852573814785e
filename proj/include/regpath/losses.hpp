#pragma once
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include <regpath/dataset.hpp>

namespace regpath {

enum class LossKind { squared_error, huber, squared_hinge, huberized_squared_hinge, custom };

/// Regression uses the residual r = y - eta; classification uses the
/// margin r = y * eta.
enum class ResidualKind { regression, classification };

const char* to_string(LossKind kind) noexcept;
LossKind loss_kind_from_string(const std::string& name);

/// One quadratic piece l(r) = a r^2 + b r + c.
struct Piece {
    double a = 0;
    double b = 0;
    double c = 0;

    double value(double r) const { return (a * r + b) * r + c; }
    double slope(double r) const { return 2 * a * r + b; }
};

/// A differentiable, convex, nonnegative quadratic spline in the generalized
/// residual. Pieces are indexed 0..m over the half-open intervals
/// (-inf, k0), [k0, k1), ..., [k_{m-1}, inf).
class LossModel {
public:
    /// Validating constructor for arbitrary splines: rejects inputs that are
    /// discontinuous, not C1, nonconvex or negative anywhere.
    static LossModel custom(std::vector<double> knots, std::vector<Piece> pieces,
                            ResidualKind residual_kind);

    LossKind kind() const { return kind_; }
    ResidualKind residual_kind() const { return residual_kind_; }
    std::optional<double> huber_t() const { return huber_t_; }
    std::span<const double> knots() const { return knots_; }
    std::span<const Piece> pieces() const { return pieces_; }
    std::size_t num_pieces() const { return pieces_.size(); }

    std::size_t piece_index(double r) const;
    const Piece& piece(std::size_t index) const { return pieces_[index]; }

    double value(double r) const { return pieces_[piece_index(r)].value(r); }
    double derivative(double r) const { return pieces_[piece_index(r)].slope(r); }
    double curvature(double r) const { return pieces_[piece_index(r)].a; }

private:
    friend LossModel make_loss(LossKind, std::optional<double>);

    LossModel(LossKind kind, std::vector<double> knots, std::vector<Piece> pieces,
              ResidualKind residual_kind, std::optional<double> huber_t);

    LossKind kind_;
    std::vector<double> knots_;
    std::vector<Piece> pieces_;
    ResidualKind residual_kind_;
    std::optional<double> huber_t_;
};

/// Builds one of the named members of the family. `t` is required for huber
/// (t > 0) and huberized-squared-hinge (t < 1).
LossModel make_loss(LossKind kind, std::optional<double> t = std::nullopt);

ResidualKind residual_kind_for(Task task) noexcept;

double generalized_residual(ResidualKind kind, double y, double eta);

/// d r_i / d eta_i: -1 for regression, y_i for classification.
inline double residual_sign(ResidualKind kind, double y) {
    return kind == ResidualKind::regression ? -1.0 : y;
}

struct Gradient {
    Eigen::VectorXd coef;
    double intercept = 0;
};

/// Gradient of sum_i l(r_i) with respect to the coefficients and the intercept.
Gradient total_gradient(const LossModel& loss, const Dataset& data,
                        const Eigen::VectorXd& beta, double intercept);

double total_loss(const LossModel& loss, const Dataset& data,
                  const Eigen::VectorXd& beta, double intercept);

} // namespace regpath
