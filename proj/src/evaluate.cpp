#include <regpath/evaluate.hpp>

#include <cmath>

#include <regpath/error.hpp>

namespace regpath {

const char* to_string(Metric metric) noexcept
{
    return metric == Metric::mse ? "mse" : "misclass";
}

Metric metric_from_string(const std::string& name)
{
    if (name == "mse") return Metric::mse;
    if (name == "misclass" || name == "misclassification") return Metric::misclassification;
    throw Error(ErrorKind::invalid_parameter, "unknown metric '" + name + "'");
}

double metric_value(Metric metric, const Eigen::VectorXd& y, const Eigen::VectorXd& eta)
{
    if (y.size() != eta.size()) throw Error(ErrorKind::dimension_mismatch, "prediction length differs from y");
    if (y.size() == 0) throw Error(ErrorKind::empty_dataset, "no test observations");
    if (metric == Metric::mse) return (y - eta).squaredNorm() / static_cast<double>(y.size());
    double errors = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double sign = eta(i) > 0 ? 1.0 : (eta(i) < 0 ? -1.0 : 0.0);
        errors += sign != y(i);
    }
    return errors / static_cast<double>(y.size());
}

namespace {

void pick_best(HoldoutResult& out)
{
    for (std::size_t j = 0; j < out.table.size(); ++j) {
        if (j == 0 || out.table[j].value < out.best_value) {
            out.best_index = j;
            out.best_value = out.table[j].value;
            out.best_lambda = out.table[j].lambda;
        }
    }
}

} // namespace

HoldoutResult evaluate_holdout(const RegularizationPath& path, const Dataset& test, Metric metric)
{
    validate(test);
    if (test.p() != path.meta.p) {
        throw Error(ErrorKind::dimension_mismatch, "test data has " + std::to_string(test.p()) +
                                                       " features, the path has " + std::to_string(path.meta.p));
    }
    if (metric == Metric::misclassification && test.task != Task::classification) {
        throw Error(ErrorKind::task_mismatch, "misclassification needs +-1 labels");
    }
    if (path.breakpoints.empty()) throw Error(ErrorKind::empty_path, "path has no breakpoints");
    Eigen::MatrixXd rows = test.x;
    if (path.meta.standardized) {
        rows = (rows.rowwise() - path.meta.center.transpose()).array().rowwise() / path.meta.scale.transpose().array();
    }
    HoldoutResult out;
    out.metric = metric;
    for (const Breakpoint& bp : path.breakpoints) {
        out.table.push_back({bp.lambda, metric_value(metric, test.y, predict(rows, bp.beta, bp.intercept))});
    }
    pick_best(out);
    return out;
}

HoldoutResult evaluate_holdout(const SplinePath& path, const Eigen::VectorXd& x, const Eigen::VectorXd& y)
{
    if (x.size() != y.size()) throw Error(ErrorKind::dimension_mismatch, "x and y differ in length");
    if (path.breakpoints.empty()) throw Error(ErrorKind::empty_path, "path has no breakpoints");
    HoldoutResult out;
    out.metric = Metric::mse;
    Eigen::VectorXd eta(x.size());
    for (std::size_t b = 0; b < path.breakpoints.size(); ++b) {
        for (Eigen::Index i = 0; i < x.size(); ++i) eta(i) = path.predict(b, x(i));
        out.table.push_back({path.breakpoints[b].lambda, metric_value(Metric::mse, y, eta)});
    }
    pick_best(out);
    return out;
}

double reducible_error(const SplinePath& path, std::size_t breakpoint,
                       const std::function<double(double)>& truth, double lo, double hi, double step)
{
    if (!(step > 0) || !(hi > lo)) throw Error(ErrorKind::invalid_parameter, "bad integration grid");
    const auto m = static_cast<long>(std::llround((hi - lo) / step));
    const double h = (hi - lo) / static_cast<double>(m);
    double sum = 0;
    for (long j = 0; j <= m; ++j) {
        const double x = lo + h * static_cast<double>(j);
        const double d = path.predict(breakpoint, x) - truth(x);
        sum += (j == 0 || j == m ? 0.5 : 1.0) * d * d;
    }
    return sum * h;
}

} // namespace regpath
