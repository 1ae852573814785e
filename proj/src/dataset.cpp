#include <regpath/dataset.hpp>

#include <cmath>
#include <string>

#include <regpath/error.hpp>

namespace regpath {

const char* to_string(Task task) noexcept
{
    return task == Task::regression ? "regression" : "classification";
}

void validate(const Dataset& data)
{
    if (data.n() < 1 || data.p() < 1) {
        throw Error(ErrorKind::empty_dataset, "dataset needs at least one row and one column");
    }
    if (data.y.size() != data.n()) {
        throw Error(ErrorKind::dimension_mismatch,
                    "response has " + std::to_string(data.y.size()) + " entries, design has " +
                        std::to_string(data.n()) + " rows");
    }
    if (!data.x.allFinite() || !data.y.allFinite()) {
        throw Error(ErrorKind::non_finite_value, "dataset contains non-finite values");
    }
    if (data.task == Task::classification) {
        for (Eigen::Index i = 0; i < data.n(); ++i) {
            if (data.y(i) != 1.0 && data.y(i) != -1.0) {
                throw Error(ErrorKind::invalid_label,
                            "classification label at row " + std::to_string(i) + " is not +-1");
            }
        }
    }
    if (!data.column_names.empty() &&
        static_cast<Eigen::Index>(data.column_names.size()) != data.p()) {
        throw Error(ErrorKind::dimension_mismatch, "column_names does not match column count");
    }
}

Dataset make_dataset(Eigen::MatrixXd x, Eigen::VectorXd y, Task task,
                     std::vector<std::string> column_names)
{
    Dataset data;
    data.x = std::move(x);
    data.y = std::move(y);
    data.task = task;
    data.column_names = std::move(column_names);
    validate(data);
    return data;
}

Dataset standardize(Dataset data)
{
    const auto n = data.n();
    const auto p = data.p();
    data.center = data.x.colwise().mean().transpose();
    data.scale = Eigen::VectorXd::Ones(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        data.x.col(j).array() -= data.center(j);
        const double sd = std::sqrt(data.x.col(j).squaredNorm() / static_cast<double>(n));
        if (sd > 0) {
            data.scale(j) = sd;
            data.x.col(j) /= sd;
        }
    }
    data.standardized = true;
    return data;
}

Eigen::MatrixXd standardize_rows(const Dataset& reference, const Eigen::MatrixXd& rows)
{
    if (!reference.standardized) return rows;
    if (rows.cols() != reference.center.size()) {
        throw Error(ErrorKind::dimension_mismatch, "row width does not match standardization");
    }
    Eigen::MatrixXd out = rows.rowwise() - reference.center.transpose();
    out.array().rowwise() /= reference.scale.transpose().array();
    return out;
}

Eigen::VectorXd predict(const Eigen::MatrixXd& rows, const Eigen::VectorXd& beta,
                        double intercept)
{
    if (rows.cols() != beta.size()) {
        throw Error(ErrorKind::dimension_mismatch,
                    "rows have " + std::to_string(rows.cols()) + " columns, beta has " +
                        std::to_string(beta.size()) + " entries");
    }
    return (rows * beta).array() + intercept;
}

} // namespace regpath
