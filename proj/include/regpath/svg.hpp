#pragma once
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include <regpath/evaluate.hpp>
#include <regpath/l1path.hpp>
#include <regpath/tvspline.hpp>

namespace regpath {

enum class PlotKind { coef_profile, error_curve, fit_curve };

struct PlotOptions {
    int width = 640;
    int height = 440;
    /// Coefficient profiles use ||beta||_1 on the horizontal axis unless set.
    bool lambda_axis = false;
    std::string title;
};

/// Every polyline carries its data coordinates in a data-points attribute.
std::string coef_profile_svg(const RegularizationPath& path, const PlotOptions& options = {});
std::string error_curve_svg(const HoldoutResult& result, const PlotOptions& options = {});
std::string fit_curve_svg(const SplinePath& path, std::size_t breakpoint, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y, const PlotOptions& options = {});

} // namespace regpath
