#include <regpath/synth.hpp>

#include <random>

#include <regpath/error.hpp>

namespace regpath {

SynthKind synth_kind_from_string(const std::string& name)
{
    if (name == "spline42") return SynthKind::spline42;
    if (name == "gauss-outlier") return SynthKind::gauss_outlier;
    throw Error(ErrorKind::invalid_parameter, "unknown synthetic data set '" + name + "'");
}

double spline42_truth(double x)
{
    auto sq = [](double v) { return v > 0 ? v * v : 0.0; };
    return 0.125 + 0.125 * x - x * x + 2 * sq(x - 0.25) - 2 * sq(x - 0.5) + 2 * sq(x - 0.75);
}

Dataset synth(SynthKind kind, std::uint64_t seed, int per_class)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    if (kind == SynthKind::spline42) {
        constexpr int n = 100;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Eigen::MatrixXd x(n, 1);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            x(i, 0) = unif(rng);
            y(i) = spline42_truth(x(i, 0)) + 0.03 * normal(rng);
        }
        return make_dataset(std::move(x), std::move(y), Task::regression, {"x"});
    }
    if (per_class < 1) throw Error(ErrorKind::invalid_parameter, "need at least one point per class");
    const int n = 2 * per_class + 1;
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < 2 * per_class; ++i) {
        const double center = i < per_class ? -1.0 : 1.0;
        x(i, 0) = center + normal(rng);
        x(i, 1) = center + normal(rng);
        y(i) = center;
    }
    x(n - 1, 0) = 30;
    x(n - 1, 1) = 100;
    y(n - 1) = -1;
    return make_dataset(std::move(x), std::move(y), Task::classification, {"x1", "x2"});
}

} // namespace regpath
