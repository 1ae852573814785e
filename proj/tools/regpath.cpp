#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <regpath/check.hpp>
#include <regpath/csv.hpp>
#include <regpath/error.hpp>
#include <regpath/evaluate.hpp>
#include <regpath/l1path.hpp>
#include <regpath/serialize.hpp>
#include <regpath/svg.hpp>
#include <regpath/synth.hpp>
#include <regpath/tvspline.hpp>

namespace {

using namespace regpath;

enum Exit { ok = 0, usage = 1, data_error = 2, solver_error = 3, check_failed = 4 };

int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::invalid_parameter:
    case ErrorKind::task_mismatch:
        return usage;
    case ErrorKind::invalid_label:
    case ErrorKind::dimension_mismatch:
    case ErrorKind::empty_dataset:
    case ErrorKind::parse_error:
    case ErrorKind::missing_column:
    case ErrorKind::non_finite_value:
    case ErrorKind::label_domain:
    case ErrorKind::io_error:
    case ErrorKind::empty_path:
        return data_error;
    case ErrorKind::degenerate_design:
    case ErrorKind::singular_curvature:
    case ErrorKind::kkt_violation:
    case ErrorKind::non_convergence:
    case ErrorKind::budget_exceeded:
        return solver_error;
    }
    return solver_error;
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

struct FitArgs {
    std::string input, response, features, loss = "squared", out, plot;
    std::optional<double> t;
    bool no_intercept = false, standardize = false, lambda_axis = false;
    double lambda_min = 0;
    std::size_t max_steps = 100000;
};

struct TvArgs {
    std::string input, x = "x", y = "y", out, plot;
    int order = 3;
    std::size_t max_steps = 1000;
    std::optional<double> rss_tol;
    double cond_limit = 1e12;
    std::optional<std::size_t> breakpoint;
};

struct EvalArgs {
    std::string path, test, metric, out, plot;
};

struct CheckArgs {
    std::string path, input;
    std::size_t grid = 20;
};

struct SynthArgs {
    std::string kind, out;
    std::uint64_t seed = 0;
};

Dataset dataset_for_path(const RegularizationPath& path, const std::string& input)
{
    return load_csv(input, path.meta.response, path.meta.column_names, path.meta.task);
}

int run_fit(const FitArgs& a)
{
    const LossKind kind = loss_kind_from_string(a.loss);
    const LossModel loss = make_loss(kind, a.t);
    const Task task = loss.residual_kind() == ResidualKind::classification ? Task::classification : Task::regression;
    Dataset data = load_csv(a.input, a.response, split_list(a.features), task);
    if (a.standardize) data = standardize(data);
    PathOptions opt;
    opt.intercept = !a.no_intercept;
    opt.lambda_min = a.lambda_min;
    opt.max_steps = a.max_steps;
    RegularizationPath path;
    int code = ok;
    try {
        path = solve_path(data, loss, opt);
    } catch (const BudgetExceeded& e) {
        std::cerr << "warning: " << e.what() << "; writing the partial path\n";
        path = e.partial();
        code = solver_error;
    }
    path.meta.response = a.response;
    write_text_file(a.out, export_path(path));
    if (!a.plot.empty()) {
        PlotOptions po;
        po.lambda_axis = a.lambda_axis;
        po.title = std::string(to_string(kind)) + " path";
        write_text_file(a.plot, coef_profile_svg(path, po));
    }
    for (const std::string& w : path.meta.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << path.breakpoints.size() << " breakpoints, lambda_max " << path.lambda_max() << ", status "
              << to_string(path.meta.status) << "\n";
    return code;
}

int run_tv(const TvArgs& a)
{
    const CsvTable table = read_csv(a.input);
    const Eigen::VectorXd x = table.values.col(table.column(a.x));
    const Eigen::VectorXd y = table.values.col(table.column(a.y));
    TvOptions opt;
    opt.max_steps = a.max_steps;
    opt.rss_tol = a.rss_tol;
    opt.cond_limit = a.cond_limit;
    SplinePath path = solve_tv_path(x, y, a.order, opt);
    path.x_column = a.x;
    path.y_column = a.y;
    write_text_file(a.out, export_tv_path(path));
    if (!a.plot.empty()) {
        const std::size_t b = a.breakpoint.value_or(path.breakpoints.size() - 1);
        if (b >= path.breakpoints.size()) throw Error(ErrorKind::invalid_parameter, "breakpoint index out of range");
        PlotOptions po;
        po.title = "order " + std::to_string(a.order) + " spline, step " + std::to_string(b);
        write_text_file(a.plot, fit_curve_svg(path, b, x, y, po));
    }
    const SplineBreakpoint& last = path.breakpoints.back();
    std::cout << path.breakpoints.size() << " breakpoints, " << last.model.knots.size() << " knots at the end, status "
              << to_string(path.status) << "\n";
    return ok;
}

void print_table(const HoldoutResult& r, const std::string& out)
{
    Eigen::MatrixXd values(static_cast<Eigen::Index>(r.table.size()), 3);
    for (std::size_t j = 0; j < r.table.size(); ++j) {
        values.row(static_cast<Eigen::Index>(j)) << static_cast<double>(j), r.table[j].lambda, r.table[j].value;
    }
    const std::string text = format_csv({"breakpoint", "lambda", to_string(r.metric)}, values);
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text_file(out, text);
    }
    std::printf("best %s %.10g at lambda %.10g (breakpoint %zu)\n", to_string(r.metric), r.best_value,
                r.best_lambda, r.best_index);
}

int run_eval(const EvalArgs& a)
{
    const std::string text = read_text_file(a.path);
    HoldoutResult result;
    if (document_schema(text) == "regpath-tv/1") {
        const SplinePath path = import_tv_path(text);
        if (!a.metric.empty() && metric_from_string(a.metric) != Metric::mse) {
            throw Error(ErrorKind::invalid_parameter, "spline paths support the mse metric only");
        }
        const CsvTable table = read_csv(a.test);
        result = evaluate_holdout(path, table.values.col(table.column(path.x_column)),
                                  table.values.col(table.column(path.y_column)));
    } else {
        const RegularizationPath path = import_path(text);
        const Metric metric = a.metric.empty()
                                  ? (path.meta.task == Task::classification ? Metric::misclassification : Metric::mse)
                                  : metric_from_string(a.metric);
        result = evaluate_holdout(path, dataset_for_path(path, a.test), metric);
    }
    print_table(result, a.out);
    if (!a.plot.empty()) write_text_file(a.plot, error_curve_svg(result));
    return ok;
}

int run_check(const CheckArgs& a)
{
    const std::string text = read_text_file(a.path);
    CheckOptions opt;
    opt.grid = a.grid;
    CheckReport report;
    if (document_schema(text) == "regpath-tv/1") {
        const SplinePath path = import_tv_path(text);
        const CsvTable table = read_csv(a.input);
        report = check_tv_path(path, table.values.col(table.column(path.x_column)),
                               table.values.col(table.column(path.y_column)), opt);
    } else {
        const RegularizationPath path = import_path(text);
        report = check_path(path, dataset_for_path(path, a.input), opt);
    }
    for (const std::string& line : report.lines) std::cout << line << "\n";
    std::cout << (report.passed ? "check passed" : "check FAILED") << "\n";
    return report.passed ? ok : check_failed;
}

int run_synth(const SynthArgs& a)
{
    const Dataset d = synth(synth_kind_from_string(a.kind), a.seed);
    std::vector<std::string> header = d.column_names;
    header.push_back("y");
    Eigen::MatrixXd values(d.n(), d.p() + 1);
    values << d.x, d.y;
    write_text_file(a.out, format_csv(header, values));
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact regularization paths for almost-quadratic losses and total-variation splines"};
    app.require_subcommand(1);

    FitArgs fit;
    CLI::App* fit_cmd = app.add_subcommand("fit", "L1-penalized coefficient path");
    fit_cmd->add_option("--input", fit.input, "CSV file with a header row")->required();
    fit_cmd->add_option("--response", fit.response, "Response column")->required();
    fit_cmd->add_option("--features", fit.features, "Comma-separated feature columns (default: all others)");
    fit_cmd->add_option("--loss", fit.loss, "Loss")->check(CLI::IsMember({"squared", "huber", "sqhinge", "husqhinge"}));
    fit_cmd->add_option("--t", fit.t, "Knot parameter for huber / husqhinge");
    fit_cmd->add_flag("--no-intercept", fit.no_intercept, "Fit without an intercept");
    fit_cmd->add_flag("--standardize", fit.standardize, "Center and scale the features");
    fit_cmd->add_option("--lambda-min", fit.lambda_min, "Stop the path at this lambda");
    fit_cmd->add_option("--max-steps", fit.max_steps, "Event budget");
    fit_cmd->add_option("--out", fit.out, "Output JSON path")->required();
    fit_cmd->add_option("--plot", fit.plot, "Coefficient profile SVG");
    fit_cmd->add_flag("--lambda-axis", fit.lambda_axis, "Plot against lambda instead of ||beta||_1");

    TvArgs tv;
    CLI::App* tv_cmd = app.add_subcommand("tv", "Total-variation penalized spline path");
    tv_cmd->add_option("--input", tv.input, "CSV file with a header row")->required();
    tv_cmd->add_option("--x", tv.x, "Predictor column");
    tv_cmd->add_option("--y", tv.y, "Response column");
    tv_cmd->add_option("--order", tv.order, "Spline order k")->check(CLI::Range(1, 12));
    tv_cmd->add_option("--max-steps", tv.max_steps, "Maximum number of knot events");
    tv_cmd->add_option("--rss-tol", tv.rss_tol, "Stop once the residual sum of squares reaches this level");
    tv_cmd->add_option("--cond-limit", tv.cond_limit, "Largest admissible condition number of Z'Z");
    tv_cmd->add_option("--out", tv.out, "Output JSON path")->required();
    tv_cmd->add_option("--plot", tv.plot, "Fitted curve SVG");
    tv_cmd->add_option("--breakpoint", tv.breakpoint, "Breakpoint drawn by --plot (default: last)");

    EvalArgs ev;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Holdout metric along a path");
    eval_cmd->add_option("--path", ev.path, "Path JSON")->required();
    eval_cmd->add_option("--test", ev.test, "Test CSV")->required();
    eval_cmd->add_option("--metric", ev.metric, "mse or misclass")->check(CLI::IsMember({"mse", "misclass"}));
    eval_cmd->add_option("--out", ev.out, "Write the table to this CSV instead of stdout");
    eval_cmd->add_option("--plot", ev.plot, "Error curve SVG");

    CheckArgs ck;
    CLI::App* check_cmd = app.add_subcommand("check", "Verify a path against its training data");
    check_cmd->add_option("--path", ck.path, "Path JSON")->required();
    check_cmd->add_option("--input", ck.input, "Training CSV")->required();
    check_cmd->add_option("--grid", ck.grid, "Number of oracle lambda values");

    SynthArgs sy;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Write a built-in synthetic data set");
    synth_cmd->add_option("--kind", sy.kind, "spline42 or gauss-outlier")
        ->required()
        ->check(CLI::IsMember({"spline42", "gauss-outlier"}));
    synth_cmd->add_option("--seed", sy.seed, "Random seed")->required();
    synth_cmd->add_option("--out", sy.out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*fit_cmd) return run_fit(fit);
        if (*tv_cmd) return run_tv(tv);
        if (*eval_cmd) return run_eval(ev);
        if (*check_cmd) return run_check(ck);
        if (*synth_cmd) return run_synth(sy);
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return solver_error;
    }
    return usage;
}
