#pragma once
#include <string>
#include <vector>

#include <regpath/dataset.hpp>
#include <regpath/l1path.hpp>
#include <regpath/oracle.hpp>
#include <regpath/tvspline.hpp>

namespace regpath {

struct CheckOptions {
    /// Number of interior lambda values (or breakpoints, for spline paths)
    /// compared against the oracle.
    std::size_t grid = 20;
    double kkt_tol = 1e-8;
    double oracle_tol = 1e-5;
    double refit_tol = 1e-9;
    /// Allowed excess of an inactive spline correlation, in lambda units.
    double tv_grid_tol = 1e-6;
    double tv_oracle_tol = 1e-6;
    /// Spline breakpoints solved by the oracle, spread evenly over the path.
    std::size_t tv_oracle_breakpoints = 5;
    OracleOptions oracle;
};

struct CheckReport {
    bool passed = true;
    std::vector<std::string> lines;

    void record(bool ok, const std::string& line);
};

/// Refits from `data` and compares, verifies KKT at every breakpoint and
/// segment midpoint, and compares a lambda grid against the oracle. `data`
/// holds raw (unstandardized) columns in the path's column order.
CheckReport check_path(const RegularizationPath& path, const Dataset& data,
                       const CheckOptions& options = {});

/// Refit comparison, breakpoint optimality and fixed-knot oracle solves for
/// a spline path on raw-scale data.
CheckReport check_tv_path(const SplinePath& path, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const CheckOptions& options = {});

/// Oracle solution over the breakpoint's knot basis at its lambda, in
/// poly-then-knot order. x is on the unit scale.
Eigen::VectorXd fixed_knot_oracle(const SplineModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                  double lambda, const OracleOptions& options = {});

} // namespace regpath
