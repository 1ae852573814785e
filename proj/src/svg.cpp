#include <regpath/svg.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include <regpath/error.hpp>

namespace regpath {
namespace {

const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                               "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char ch : s) {
        switch (ch) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch;
        }
    }
    return out;
}

struct Range {
    double lo = 0;
    double hi = 1;

    void widen()
    {
        if (!(hi > lo)) {
            const double pad = std::max(1.0, std::abs(lo)) * 0.5;
            lo -= pad;
            hi += pad;
        }
    }
};

Range range_of(const std::vector<double>& v)
{
    Range r;
    if (v.empty()) return r;
    r.lo = *std::min_element(v.begin(), v.end());
    r.hi = *std::max_element(v.begin(), v.end());
    r.widen();
    return r;
}

class Canvas {
public:
    Canvas(const PlotOptions& options, Range xr, Range yr, std::string xlabel, std::string ylabel)
        : opt_(options), xr_(xr), yr_(yr)
    {
        out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
             << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << opt_.width
             << "\" height=\"" << opt_.height << "\" viewBox=\"0 0 " << opt_.width << " " << opt_.height << "\">\n"
             << "<rect x=\"0\" y=\"0\" width=\"" << opt_.width << "\" height=\"" << opt_.height
             << "\" fill=\"white\"/>\n";
        if (!opt_.title.empty()) {
            out_ << "<text x=\"" << opt_.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                 << "font-size=\"14\">" << escape(opt_.title) << "</text>\n";
        }
        const double x0 = left, x1 = opt_.width - right, y0 = opt_.height - bottom, y1 = top;
        out_ << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n"
             << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0 << "\"/>\n"
             << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1 << "\"/>\n"
             << "</g>\n";
        label(x0, y0 + 16, fmt(xr_.lo), "middle");
        label(x1, y0 + 16, fmt(xr_.hi), "middle");
        label(x0 - 6, y0 + 4, fmt(yr_.lo), "end");
        label(x0 - 6, y1 + 4, fmt(yr_.hi), "end");
        label((x0 + x1) / 2, opt_.height - 10.0, xlabel, "middle");
        out_ << "<text x=\"14\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             << "font-size=\"12\" transform=\"rotate(-90 14 " << (y0 + y1) / 2 << ")\">" << escape(ylabel)
             << "</text>\n";
    }

    double px(double x) const { return left + (x - xr_.lo) / (xr_.hi - xr_.lo) * (opt_.width - left - right); }
    double py(double y) const
    {
        return opt_.height - bottom - (y - yr_.lo) / (yr_.hi - yr_.lo) * (opt_.height - top - bottom);
    }

    void vertical(double x, const char* color)
    {
        out_ << "<line class=\"step\" x1=\"" << fmt(px(x)) << "\" y1=\"" << fmt(py(yr_.lo)) << "\" x2=\"" << fmt(px(x))
             << "\" y2=\"" << fmt(py(yr_.hi)) << "\" stroke=\"" << color << "\" stroke-width=\"0.5\"/>\n";
    }

    void polyline(const std::vector<double>& xs, const std::vector<double>& ys, const char* color,
                  const std::string& name)
    {
        std::ostringstream pts, data;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            pts << (j ? " " : "") << fmt(px(xs[j])) << "," << fmt(py(ys[j]));
            data << (j ? " " : "") << fmt(xs[j]) << "," << fmt(ys[j]);
        }
        out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" data-name=\"" << escape(name)
             << "\" data-points=\"" << data.str() << "\" points=\"" << pts.str() << "\"/>\n";
    }

    void point(double x, double y, const char* color, double radius = 2.5)
    {
        out_ << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"" << radius << "\" fill=\""
             << color << "\"/>\n";
    }

    void label(double x, double y, const std::string& text, const char* anchor)
    {
        out_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" text-anchor=\"" << anchor
             << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(text) << "</text>\n";
    }

    std::string finish()
    {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    static constexpr double left = 60, right = 20, top = 30, bottom = 40;
    PlotOptions opt_;
    Range xr_, yr_;
    std::ostringstream out_;
};

} // namespace

std::string coef_profile_svg(const RegularizationPath& path, const PlotOptions& options)
{
    if (path.breakpoints.empty()) throw Error(ErrorKind::empty_path, "nothing to plot");
    std::vector<double> xs;
    std::vector<double> all{0.0};
    for (const Breakpoint& bp : path.breakpoints) {
        xs.push_back(options.lambda_axis ? bp.lambda : bp.beta.lpNorm<1>());
        for (Eigen::Index j = 0; j < bp.beta.size(); ++j) all.push_back(bp.beta(j));
    }
    Range xr = range_of(xs);
    Canvas canvas(options, xr, range_of(all), options.lambda_axis ? "lambda" : "||beta||_1", "coefficient");
    for (double x : xs) canvas.vertical(x, "#c0c0c0");
    const Eigen::Index p = path.breakpoints.front().beta.size();
    for (Eigen::Index j = 0; j < p; ++j) {
        std::vector<double> ys;
        bool nonzero = false;
        for (const Breakpoint& bp : path.breakpoints) {
            ys.push_back(bp.beta(j));
            nonzero = nonzero || bp.beta(j) != 0;
        }
        if (!nonzero) continue;
        const std::string name = static_cast<std::size_t>(j) < path.meta.column_names.size()
                                     ? path.meta.column_names[static_cast<std::size_t>(j)]
                                     : "x" + std::to_string(j);
        canvas.polyline(xs, ys, palette[j % 10], name);
    }
    return canvas.finish();
}

std::string error_curve_svg(const HoldoutResult& result, const PlotOptions& options)
{
    if (result.table.empty()) throw Error(ErrorKind::empty_path, "nothing to plot");
    std::vector<double> xs, ys;
    for (const HoldoutRow& row : result.table) {
        xs.push_back(row.lambda);
        ys.push_back(row.value);
    }
    Canvas canvas(options, range_of(xs), range_of(ys), "lambda", to_string(result.metric));
    canvas.polyline(xs, ys, palette[0], to_string(result.metric));
    canvas.point(result.best_lambda, result.best_value, palette[1], 4);
    return canvas.finish();
}

std::string fit_curve_svg(const SplinePath& path, std::size_t breakpoint, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y, const PlotOptions& options)
{
    if (path.breakpoints.empty()) throw Error(ErrorKind::empty_path, "nothing to plot");
    if (x.size() != y.size()) throw Error(ErrorKind::dimension_mismatch, "x and y differ in length");
    constexpr int samples = 400;
    const double lo = path.domain.from_unit(0), hi = path.domain.from_unit(1);
    std::vector<double> cx, cy;
    for (int j = 0; j <= samples; ++j) {
        const double v = lo + (hi - lo) * j / samples;
        cx.push_back(v);
        cy.push_back(path.predict(breakpoint, v));
    }
    std::vector<double> all_x = cx, all_y = cy;
    all_x.insert(all_x.end(), x.data(), x.data() + x.size());
    all_y.insert(all_y.end(), y.data(), y.data() + y.size());
    Canvas canvas(options, range_of(all_x), range_of(all_y), path.x_column, path.y_column);
    for (double t : path.breakpoints[breakpoint].model.knots) canvas.vertical(path.domain.from_unit(t), "#c0c0c0");
    for (Eigen::Index i = 0; i < x.size(); ++i) canvas.point(x(i), y(i), "#404040");
    canvas.polyline(cx, cy, palette[1], "fit");
    return canvas.finish();
}

} // namespace regpath
