#include <regpath/check.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <regpath/error.hpp>

namespace regpath {
namespace {

std::string fmt(const char* pattern, double a, double b = 0)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

double relative_gap(double a, double b)
{
    return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

double relative_gap(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double out = 0;
    for (Eigen::Index j = 0; j < a.size(); ++j) out = std::max(out, relative_gap(a(j), b(j)));
    return out;
}

} // namespace

void CheckReport::record(bool ok, const std::string& line)
{
    passed = passed && ok;
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + line);
}

CheckReport check_path(const RegularizationPath& path, const Dataset& raw, const CheckOptions& options)
{
    if (path.breakpoints.empty()) throw Error(ErrorKind::empty_path, "path has no breakpoints");
    validate(raw);
    if (raw.p() != path.meta.p || raw.n() != path.meta.n) {
        throw Error(ErrorKind::dimension_mismatch, "data shape differs from the path's training data");
    }
    CheckReport report;
    Dataset data = raw;
    if (path.meta.standardized) {
        data = standardize(raw);
        const double gap = std::max(relative_gap(data.center, path.meta.center),
                                    relative_gap(data.scale, path.meta.scale));
        report.record(gap <= 1e-12, fmt("standardization matches the stored transform (gap %.3g)", gap));
    }

    PathOptions popt;
    popt.intercept = path.meta.intercept;
    const Breakpoint& last = path.breakpoints.back();
    if (path.meta.status == PathStatus::complete) popt.lambda_min = last.lambda;
    if (path.meta.status == PathStatus::budget_exceeded) popt.max_steps = path.meta.steps;
    RegularizationPath fresh;
    try {
        fresh = solve_path(data, path.loss, popt);
    } catch (const BudgetExceeded& e) {
        fresh = e.partial();
    }
    double refit_gap = fresh.breakpoints.size() == path.breakpoints.size() ? 0.0
                                                                            : std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; std::isfinite(refit_gap) && b < path.breakpoints.size(); ++b) {
        const Breakpoint& u = path.breakpoints[b];
        const Breakpoint& v = fresh.breakpoints[b];
        refit_gap = std::max({refit_gap, relative_gap(u.lambda, v.lambda), relative_gap(u.beta, v.beta),
                              relative_gap(u.intercept, v.intercept)});
    }
    report.record(refit_gap <= options.refit_tol,
                  fmt("refit reproduces %g breakpoints (max relative gap %.3g)",
                      static_cast<double>(path.breakpoints.size()), refit_gap));

    double worst = 0;
    double worst_lambda = 0;
    std::size_t failures = 0;
    auto kkt_at = [&](double lambda, const Eigen::VectorXd& beta, double icpt) {
        const KktReport k = verify_kkt(data, path.loss, beta, icpt, path.meta.intercept, lambda, options.kkt_tol);
        const double v = std::max({k.max_active_violation, k.max_inactive_violation, k.intercept_violation}) /
                         std::max(lambda, 1.0);
        if (!k.passed) ++failures;
        if (v >= worst) {
            worst = v;
            worst_lambda = lambda;
        }
    };
    for (std::size_t b = 0; b < path.breakpoints.size(); ++b) {
        const Breakpoint& bp = path.breakpoints[b];
        kkt_at(bp.lambda, bp.beta, bp.intercept);
        if (b + 1 < path.breakpoints.size()) {
            const Breakpoint& nx = path.breakpoints[b + 1];
            if (nx.lambda < bp.lambda) {
                kkt_at(0.5 * (bp.lambda + nx.lambda), 0.5 * (bp.beta + nx.beta), 0.5 * (bp.intercept + nx.intercept));
            }
        }
    }
    report.record(failures == 0, fmt("KKT at breakpoints and midpoints (worst relative %.3g at lambda %.6g)", worst,
                                     worst_lambda) +
                                     (failures ? ", " + std::to_string(failures) + " failing" : ""));

    const double top = path.lambda_max();
    const double bottom = last.lambda;
    if (options.grid > 0 && top > bottom) {
        std::vector<double> grid;
        for (std::size_t j = 0; j < options.grid; ++j) {
            grid.push_back(bottom + (top - bottom) * (static_cast<double>(j) + 0.5) / static_cast<double>(options.grid));
        }
        const GridCheck g = grid_check(path, data, grid, options.oracle);
        report.record(g.max_discrepancy <= options.oracle_tol,
                      fmt("oracle agreement on the lambda grid (max %.3g at lambda %.6g)", g.max_discrepancy,
                          g.worst_lambda));
    }
    return report;
}

Eigen::VectorXd fixed_knot_oracle(const SplineModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                  double lambda, const OracleOptions& options)
{
    const int k = model.order;
    const Eigen::MatrixXd z = basis_matrix(model.knots, k, x);
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(z.cols());
    weights.tail(z.cols() - k).setConstant(2.0 * factorial(k - 1));
    return solve_weighted_l1(z, y, make_loss(LossKind::squared_error), lambda, weights, options).beta;
}

CheckReport check_tv_path(const SplinePath& path, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const CheckOptions& options)
{
    if (path.breakpoints.empty()) throw Error(ErrorKind::empty_path, "path has no breakpoints");
    if (x.size() != y.size() || x.size() != path.n) {
        throw Error(ErrorKind::dimension_mismatch, "data shape differs from the path's training data");
    }
    CheckReport report;

    TvOptions topt;
    if (path.status == TvStatus::max_steps) topt.max_steps = path.steps;
    const SplinePath fresh = solve_tv_path(x, y, path.order, topt);
    double refit_gap = fresh.breakpoints.size() == path.breakpoints.size() ? 0.0
                                                                            : std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; std::isfinite(refit_gap) && b < path.breakpoints.size(); ++b) {
        const SplineModel& u = path.breakpoints[b].model;
        const SplineModel& v = fresh.breakpoints[b].model;
        if (u.knots != v.knots) {
            refit_gap = std::numeric_limits<double>::infinity();
            break;
        }
        refit_gap = std::max({refit_gap, relative_gap(path.breakpoints[b].lambda, fresh.breakpoints[b].lambda),
                              relative_gap(u.coefficients(), v.coefficients())});
    }
    report.record(refit_gap <= options.refit_tol,
                  fmt("refit reproduces %g breakpoints (max relative gap %.3g)",
                      static_cast<double>(path.breakpoints.size()), refit_gap));

    Eigen::VectorXd u(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) u(i) = path.domain.to_unit(x(i));
    double active = 0, inactive = 0, near = 0, poly = 0;
    bool ok = true;
    for (const SplineBreakpoint& bp : path.breakpoints) {
        const TvKktReport k = verify_tv_kkt(bp.model, u, y, bp.lambda);
        const double slack = options.kkt_tol * std::max(bp.lambda, 1.0);
        const double excess = path.order <= 2 ? k.max_inactive_excess : k.max_inactive_excess_away;
        ok = ok && k.max_active_gap <= slack && k.max_poly_gradient <= slack && excess <= options.tv_grid_tol;
        active = std::max(active, k.max_active_gap);
        inactive = std::max(inactive, excess);
        near = std::max(near, k.max_inactive_excess);
        poly = std::max(poly, k.max_poly_gradient);
    }
    std::string line = fmt("breakpoint optimality (active gap %.3g, grid excess %.3g", active, inactive) +
                       fmt(", polynomial gradient %.3g)", poly);
    if (path.order > 2) line += fmt("; grid excess next to knots, not gated: %.3g", near);
    report.record(ok, line);

    const std::size_t count = path.breakpoints.size();
    const std::size_t picks = std::min(options.tv_oracle_breakpoints, count);
    double oracle_gap = 0;
    for (std::size_t j = 0; j < picks; ++j) {
        const std::size_t b = picks == 1 ? count - 1 : j * (count - 1) / (picks - 1);
        const SplineBreakpoint& bp = path.breakpoints[b];
        const Eigen::VectorXd ref = fixed_knot_oracle(bp.model, u, y, bp.lambda, options.oracle);
        oracle_gap = std::max(oracle_gap, (ref - bp.model.coefficients()).cwiseAbs().maxCoeff());
    }
    report.record(oracle_gap <= options.tv_oracle_tol,
                  fmt("fixed-knot oracle agreement at %g breakpoints (max %.3g)", static_cast<double>(picks),
                      oracle_gap));
    return report;
}

} // namespace regpath
