#pragma once
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace regpath {

enum class Task { regression, classification };

const char* to_string(Task task) noexcept;

/// Design matrix plus response.
///
/// When `standardized` is set, the columns of `x` have been centered by
/// `center` and divided by `scale`; predictions on raw rows must apply the
/// same transform first (see `standardize_rows`).
struct Dataset {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    Task task = Task::regression;
    std::vector<std::string> column_names;
    bool standardized = false;
    Eigen::VectorXd center;
    Eigen::VectorXd scale;

    Eigen::Index n() const { return x.rows(); }
    Eigen::Index p() const { return x.cols(); }
};

/// Throws unless n, p >= 1, sizes agree, entries are finite and (for
/// classification) every label is -1 or +1.
void validate(const Dataset& data);

Dataset make_dataset(Eigen::MatrixXd x, Eigen::VectorXd y, Task task,
                     std::vector<std::string> column_names = {});

/// Per-column mean/standard-deviation standardization. Constant columns keep
/// scale 1.
Dataset standardize(Dataset data);

/// Applies a stored standardization to raw rows.
Eigen::MatrixXd standardize_rows(const Dataset& reference, const Eigen::MatrixXd& rows);

/// eta = X beta + intercept.
Eigen::VectorXd predict(const Eigen::MatrixXd& rows, const Eigen::VectorXd& beta,
                        double intercept);

} // namespace regpath
