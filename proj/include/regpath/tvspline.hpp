#pragma once
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace regpath {

/// (x - t)_+^(k-1); for k = 1 the step 1{x > t}.
double plus_power(double x, double t, int k);

/// (1, x, ..., x^(k-1), (x - t_1)_+^(k-1), ...).
Eigen::VectorXd basis_row(std::span<const double> knots, int k, double x);

/// Basis matrix with one basis_row per entry of x.
Eigen::MatrixXd basis_matrix(std::span<const double> knots, int k, const Eigen::VectorXd& x);

/// Spline of order k in truncated-power form on the unit interval.
struct SplineModel {
    int order = 1;
    std::vector<double> knots;
    Eigen::VectorXd poly_coef;
    Eigen::VectorXd knot_coef;

    /// Poly coefficients followed by knot coefficients.
    Eigen::VectorXd coefficients() const;
};

double spline_eval(const SplineModel& model, double x);

/// (k-1)! * sum |knot_coef|.
double total_variation(const SplineModel& model);

double factorial(int m);

struct TvOptions {
    std::size_t max_steps = 1000;
    /// Defaults to 1e-10 * sum (y - mean(y))^2.
    std::optional<double> rss_tol;
    double cond_limit = 1e12;
    double event_tol = 1e-10;
    /// Candidate knots closer than this to an existing knot are ignored.
    double min_knot_gap = 1e-12;
};

/// Path state on the unit interval. The penalized objective is
/// 0.5 * RSS + lambda * TV, so an active knot t satisfies
/// |x_t' r| = (k-1)! * lambda.
struct TvPathState {
    int k = 1;
    double lambda = 0;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    std::vector<double> knots;
    Eigen::VectorXd beta;
    Eigen::VectorXd signs;
    Eigen::MatrixXd basis;
    Eigen::VectorXd gamma;
    Eigen::VectorXd beta_ls;
    Eigen::HouseholderQR<Eigen::MatrixXd> gram_factor;
    double condition = 1;
    /// Knot added or removed by the last event, excluded from the opposite
    /// event for one step.
    std::optional<double> last_added;
    std::optional<double> last_removed;

    SplineModel model() const;
    Eigen::VectorXd residual() const;
    double rss() const;
};

struct LambdaCandidates {
    double plus = 0;
    double minus = 0;
    /// Largest admissible value in (0, lambda0), or -inf.
    double value = -std::numeric_limits<double>::infinity();
    bool admissible() const { return value > 0; }
};

struct KnotEvent {
    double t = 0;
    double lambda = -std::numeric_limits<double>::infinity();
    bool found() const { return lambda > -std::numeric_limits<double>::infinity(); }
};

/// Least-squares polynomial, first knot and lambda0. x must be sorted and
/// lie in [0, 1].
TvPathState init_tv_path(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int k,
                         const TvOptions& options = {});

/// Crossing levels of the correlation at t with +-(k-1)! lambda while
/// lambda decreases from the current value.
LambdaCandidates lambda_candidates(const TvPathState& state, double t);

/// Admissible maximizer of lambda(t) over [0, 1) minus the current knots.
KnotEvent find_next_knot(const TvPathState& state, const TvOptions& options = {});

/// First knot whose coefficient reaches zero.
KnotEvent lambda_remove(const TvPathState& state, double event_tol = 1e-10);

enum class TvEventKind { init, add_knot, remove_knot, terminate };

const char* to_string(TvEventKind kind) noexcept;

struct TvEvent {
    TvEventKind kind = TvEventKind::init;
    double knot = std::numeric_limits<double>::quiet_NaN();
};

std::string format_tv_event(const TvEvent& event);
TvEvent parse_tv_event(const std::string& text);

enum class TvStatus { running, interpolated, exhausted, max_steps, ill_conditioned, knot_limit };

const char* to_string(TvStatus status) noexcept;

struct TvStepResult {
    TvEvent event;
    TvStatus status = TvStatus::running;
};

/// One event of the path; on a terminal status the state sits at the last
/// reachable lambda.
TvStepResult tv_step(TvPathState& state, const TvOptions& options = {});

struct SplineBreakpoint {
    double lambda = 0;
    SplineModel model;
    TvEvent event;
};

/// u = (x - offset) / scale maps the data range onto [0, 1].
struct DomainMap {
    double offset = 0;
    double scale = 1;
    double to_unit(double x) const { return (x - offset) / scale; }
    double from_unit(double u) const { return offset + scale * u; }
};

struct SplinePath {
    int order = 1;
    DomainMap domain;
    std::vector<SplineBreakpoint> breakpoints;
    Eigen::Index n = 0;
    std::size_t steps = 0;
    TvStatus status = TvStatus::running;
    std::string x_column = "x";
    std::string y_column = "y";

    /// Fitted value at a raw-scale x for a breakpoint.
    double predict(std::size_t breakpoint, double x) const;
};

/// Maps x onto [0, 1], sorts and follows the path to termination.
SplinePath solve_tv_path(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int k,
                         const TvOptions& options = {});

struct TvKktReport {
    double max_active_gap = 0;
    /// Largest |x_t' r| / (k-1)! - lambda over the grid.
    double max_inactive_excess = 0;
    /// Same, skipping grid points strictly inside a gap between an active
    /// knot and its neighbouring data point or knot.
    double max_inactive_excess_away = 0;
    double max_poly_gradient = 0;
};

/// Optimality of a breakpoint on unit-scale data: active knot correlations
/// against (k-1)! lambda, a grid of inactive locations, and the unpenalized
/// polynomial part.
TvKktReport verify_tv_kkt(const SplineModel& model, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y, double lambda, double grid_step = 1e-4);

} // namespace regpath
