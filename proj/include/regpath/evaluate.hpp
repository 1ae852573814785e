#pragma once
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <regpath/dataset.hpp>
#include <regpath/l1path.hpp>
#include <regpath/tvspline.hpp>

namespace regpath {

enum class Metric { mse, misclassification };

const char* to_string(Metric metric) noexcept;
Metric metric_from_string(const std::string& name);

struct HoldoutRow {
    double lambda = 0;
    double value = 0;
};

struct HoldoutResult {
    Metric metric = Metric::mse;
    std::vector<HoldoutRow> table;
    std::size_t best_index = 0;
    double best_lambda = 0;
    double best_value = 0;
};

/// Test-set metric at every breakpoint. Misclassification counts
/// sign(eta) != y with sign(0) as an error. Ties for the best value go to
/// the larger lambda.
HoldoutResult evaluate_holdout(const RegularizationPath& path, const Dataset& test, Metric metric);
HoldoutResult evaluate_holdout(const SplinePath& path, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& y);

double metric_value(Metric metric, const Eigen::VectorXd& y, const Eigen::VectorXd& eta);

/// Trapezoid rule for the integral of (f - g)^2 over [lo, hi].
double reducible_error(const SplinePath& path, std::size_t breakpoint,
                       const std::function<double(double)>& truth, double lo = 0, double hi = 1,
                       double step = 1e-3);

} // namespace regpath
