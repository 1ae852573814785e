#pragma once
#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include <regpath/dataset.hpp>
#include <regpath/l1path.hpp>
#include <regpath/losses.hpp>

namespace regpath {

struct OracleOptions {
    /// Relative tolerance on the proximal step length and on the objective
    /// decrease.
    double tol = 1e-12;
    std::size_t max_iter = 1'000'000;
    /// Backtracking: the curvature estimate grows by this factor until the
    /// quadratic upper bound holds.
    double backtrack_growth = 2.0;
    double initial_curvature = 1.0;
};

struct OracleSolution {
    Eigen::VectorXd beta;
    double intercept = 0;
    double objective = 0;
    std::size_t iterations = 0;
};

/// argmin_beta sum_i l(r_i) + lambda * sum_j weight_j |beta_j| over an
/// explicit design; zero weights leave a coefficient unpenalized. Monotone
/// accelerated proximal gradient with backtracking. For the squared-error
/// loss the unpenalized block is profiled out exactly first.
OracleSolution solve_weighted_l1(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                 const LossModel& loss, double lambda,
                                 const Eigen::VectorXd& weights, const OracleOptions& options = {});

/// The l1-penalized problem on a dataset with an optional unpenalized
/// intercept.
OracleSolution solve_penalized(const Dataset& data, const LossModel& loss, double lambda,
                               bool intercept, const OracleOptions& options = {});

struct GridCheck {
    double max_discrepancy = 0;
    double worst_lambda = 0;
};

/// Largest sup-norm gap (coefficients and intercept) between the path and
/// independent solves at each grid lambda.
GridCheck grid_check(const RegularizationPath& path, const Dataset& data,
                     std::span<const double> lambdas, const OracleOptions& options = {});

/// Central differences of the total loss.
Gradient numeric_gradient(const LossModel& loss, const Dataset& data, const Eigen::VectorXd& beta,
                          double intercept, double h);

} // namespace regpath
