#pragma once
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <regpath/dataset.hpp>
#include <regpath/error.hpp>
#include <regpath/losses.hpp>

namespace regpath {

struct PathOptions {
    bool intercept = true;
    double lambda_min = 0;
    std::size_t max_steps = 100000;
    /// Largest admissible active set; defaults to min(n, p).
    std::optional<std::size_t> max_active;
    /// Events whose step lengths lie within this distance of the shortest
    /// one are applied together.
    double event_tol = 1e-10;
    /// KKT tolerance, relative to max(lambda, 1).
    double kkt_tol = 1e-8;
    /// A breakpoint whose KKT violation exceeds this (relative) level aborts
    /// the run as an internal consistency failure.
    double kkt_abort_tol = 1e-6;
    /// The curvature matrix is rebuilt from scratch after this many
    /// incremental updates.
    std::size_t refresh_every = 25;
};

enum class EventKind { init, add, drop, knot_cross, terminate };

const char* to_string(EventKind kind) noexcept;

struct PathEvent {
    EventKind kind = EventKind::init;
    /// Variable index for add/drop, observation index for knot-cross.
    Eigen::Index index = -1;
    /// Knot crossed, as an index into LossModel::knots().
    Eigen::Index knot = -1;
    /// +1 when the residual moves into the next piece up, -1 when down.
    int side = 0;
    double delta_lambda = 0;
};

std::string format_events(const std::vector<PathEvent>& events);
std::vector<PathEvent> parse_events(const std::string& text);

struct Breakpoint {
    double lambda = 0;
    Eigen::VectorXd beta;
    double intercept = 0;
    std::vector<PathEvent> events;
};

enum class PathStatus { complete, optimum, max_active, budget_exceeded, unbounded };

const char* to_string(PathStatus status) noexcept;

struct PathMeta {
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    Task task = Task::regression;
    bool intercept = true;
    bool standardized = false;
    Eigen::VectorXd center;
    Eigen::VectorXd scale;
    std::vector<std::string> column_names;
    std::string response;
    std::size_t steps = 0;
    PathStatus status = PathStatus::complete;
    std::vector<std::string> warnings;
};

/// Ordered breakpoints of an exact piecewise-linear path. Lambda is
/// nonincreasing; two consecutive breakpoints share a lambda only across a
/// zero-curvature jump.
struct RegularizationPath {
    std::vector<Breakpoint> breakpoints;
    LossModel loss = make_loss(LossKind::squared_error);
    PathMeta meta;

    double lambda_max() const { return breakpoints.empty() ? 0.0 : breakpoints.front().lambda; }
};

/// Run state between events.
///
/// Coordinates of the "active system" are the intercept (when enabled)
/// followed by the active variables in order of entry; `curvature` is
/// C = sum_i 2 a(r_i) x~_i x~_i' over those coordinates.
struct PathState {
    double lambda = 0;
    Eigen::VectorXd beta;
    double intercept = 0;
    bool use_intercept = true;

    std::vector<Eigen::Index> active;
    std::vector<double> signs;

    /// Advance per unit decrease of lambda: beta(lambda - d) = beta + d * direction.
    Eigen::VectorXd direction;
    double intercept_direction = 0;
    bool direction_singular = false;

    std::vector<std::size_t> residual_piece;
    Eigen::VectorXd residual;
    Eigen::VectorXd gradient;
    double intercept_gradient = 0;

    Eigen::MatrixXd curvature;
    Eigen::LDLT<Eigen::MatrixXd> curvature_factor;
    std::size_t updates_since_refresh = 0;

    std::vector<Eigen::Index> excluded;
    std::vector<Eigen::Index> just_dropped;
    std::vector<std::string> warnings;
    bool trivial = false;

    std::size_t system_size() const { return active.size() + (use_intercept ? 1 : 0); }
};

/// Null model (zero coefficients, exact intercept-only fit), lambda_max and
/// the initial active set with its direction.
PathState initialize(const Dataset& data, const LossModel& loss, const PathOptions& options = {});

/// Solves C gamma = s over the active system and stores the result in
/// `state`. Returns false (and flags `direction_singular`) when C is
/// numerically singular.
bool compute_direction(PathState& state);

struct EventBatch {
    double delta_lambda = 0;
    std::vector<PathEvent> events;
    /// True when the lambda floor (or the active-set cap) comes first.
    bool terminal = false;
};

/// Shortest step to the next add, drop or knot-crossing event, together
/// with every other event that ties with it.
EventBatch next_event(const PathState& state, const Dataset& data, const LossModel& loss,
                      const PathOptions& options = {});

/// Advances to the batch's lambda and updates the active set, the residual
/// pieces, the curvature matrix and the direction.
void apply_event(PathState& state, const EventBatch& batch, const Dataset& data,
                 const LossModel& loss, const PathOptions& options = {});

class BudgetExceeded;

/// Full path from lambda_max down to options.lambda_min. Throws
/// BudgetExceeded (carrying the partial path) when max_steps runs out.
RegularizationPath solve_path(const Dataset& data, const LossModel& loss,
                              const PathOptions& options = {});

/// Linear interpolation between the bracketing breakpoints.
std::pair<Eigen::VectorXd, double> coefficients_at(const RegularizationPath& path, double lambda);

struct KktReport {
    double max_active_violation = 0;
    double max_inactive_violation = 0;
    double intercept_violation = 0;
    std::size_t sign_violations = 0;
    bool passed = true;
};

KktReport verify_kkt(const Dataset& data, const LossModel& loss, const Eigen::VectorXd& beta,
                     double intercept, bool use_intercept, double lambda, double tol);

class BudgetExceeded : public Error {
public:
    explicit BudgetExceeded(RegularizationPath partial)
        : Error(ErrorKind::budget_exceeded, "step budget exhausted before the path finished"),
          partial_(std::move(partial)) {}

    const RegularizationPath& partial() const { return partial_; }

private:
    RegularizationPath partial_;
};

} // namespace regpath
