#include <regpath/oracle.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <regpath/error.hpp>

namespace regpath {
namespace {

double soft_threshold(double v, double t)
{
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

struct Problem {
    const Eigen::MatrixXd& design;
    const Eigen::VectorXd& y;
    const LossModel& loss;
    Eigen::VectorXd penalty; // lambda * weight per coordinate

    double smooth(const Eigen::VectorXd& theta) const
    {
        const Eigen::VectorXd eta = design * theta;
        double sum = 0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            sum += loss.value(generalized_residual(loss.residual_kind(), y(i), eta(i)));
        }
        return sum;
    }

    Eigen::VectorXd smooth_gradient(const Eigen::VectorXd& theta) const
    {
        const Eigen::VectorXd eta = design * theta;
        Eigen::VectorXd w(y.size());
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double r = generalized_residual(loss.residual_kind(), y(i), eta(i));
            w(i) = loss.derivative(r) * residual_sign(loss.residual_kind(), y(i));
        }
        return design.transpose() * w;
    }

    double penalty_value(const Eigen::VectorXd& theta) const
    {
        return penalty.dot(theta.cwiseAbs());
    }

    Eigen::VectorXd prox(const Eigen::VectorXd& v, double step) const
    {
        Eigen::VectorXd out(v.size());
        for (Eigen::Index j = 0; j < v.size(); ++j) out(j) = soft_threshold(v(j), step * penalty(j));
        return out;
    }
};

// Monotone FISTA (Beck & Teboulle) with backtracking and gradient-based
// restarts. The accepted iterate sequence has nonincreasing objective.
OracleSolution run_proximal(const Problem& prob, const OracleOptions& options)
{
    const Eigen::Index q = prob.design.cols();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd y = x;
    double fx = prob.smooth(x) + prob.penalty_value(x);
    double t = 1.0;
    double curv = options.initial_curvature;

    for (std::size_t iter = 1; iter <= options.max_iter; ++iter) {
        const double fy = prob.smooth(y);
        const Eigen::VectorXd gy = prob.smooth_gradient(y);
        Eigen::VectorXd z;
        double fz_smooth = 0;
        while (true) {
            z = prob.prox(y - gy / curv, 1.0 / curv);
            fz_smooth = prob.smooth(z);
            const Eigen::VectorXd diff = z - y;
            const double bound = fy + gy.dot(diff) + 0.5 * curv * diff.squaredNorm();
            if (fz_smooth <= bound + 1e-15 * std::max(1.0, std::abs(bound))) break;
            curv *= options.backtrack_growth;
            if (!std::isfinite(curv)) {
                throw Error(ErrorKind::non_convergence, "backtracking diverged");
            }
        }
        const double fz = fz_smooth + prob.penalty_value(z);
        const Eigen::VectorXd x_prev = x;
        const double f_prev = fx;
        if (fz <= fx) {
            x = z;
            fx = fz;
        }
        const double movement = (z - y).cwiseAbs().maxCoeff();
        const double xscale = std::max(1.0, z.cwiseAbs().maxCoeff());
        const bool still = movement <= options.tol * xscale;
        const bool flat = std::abs(f_prev - fx) <= options.tol * std::max(1.0, std::abs(fx));
        if (still && flat) {
            return {x, 0.0, fx, iter};
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        if ((y - z).dot(z - x_prev) > 0) {
            // Momentum points uphill: restart from the accepted iterate.
            t = 1.0;
            y = x;
            continue;
        }
        y = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev);
        t = t_next;
    }
    throw Error(ErrorKind::non_convergence,
                "proximal gradient did not converge in " + std::to_string(options.max_iter) +
                    " iterations");
}

// Active-set Newton refinement of an approximate minimizer, carried out in
// extended precision. With the support, its signs and every observation's
// loss piece held fixed the problem is quadratic, so one linear solve
// (through QR of the weighted design, never the normal equations) gives its
// stationary point. Support and pieces are updated until the optimality
// conditions hold; nullopt if they do not settle.
std::optional<Eigen::VectorXd> refine(const Problem& prob, const Eigen::VectorXd& start)
{
    using Real = long double;
    using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
    const Eigen::Index q = prob.design.cols();
    const Eigen::Index n = prob.y.size();
    const auto kind = prob.loss.residual_kind();
    const Matrix design = prob.design.cast<Real>();
    const Vector y = prob.y.cast<Real>();
    const Vector penalty = prob.penalty.cast<Real>();
    Vector sigma(n);
    for (Eigen::Index i = 0; i < n; ++i) sigma(i) = residual_sign(kind, prob.y(i));

    // Residuals, their pieces and the smooth gradient at theta.
    std::vector<std::size_t> pieces(static_cast<std::size_t>(n));
    auto gradient = [&](const Vector& theta) {
        const Vector eta = design * theta;
        Vector w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Real r = kind == ResidualKind::regression ? y(i) - eta(i) : y(i) * eta(i);
            pieces[i] = prob.loss.piece_index(static_cast<double>(r));
            const Piece& pc = prob.loss.piece(pieces[i]);
            w(i) = (2 * static_cast<Real>(pc.a) * r + static_cast<Real>(pc.b)) * sigma(i);
        }
        return Vector(design.transpose() * w);
    };

    const Real scale = std::max(penalty.cwiseAbs().maxCoeff(), gradient(Vector::Zero(q)).cwiseAbs().maxCoeff());
    const Real tol = 1e-12L * std::max<Real>(1, scale);
    const Real entry_tol = 1e-16L * scale;
    Vector theta = start.cast<Real>();
    std::vector<bool> in(static_cast<std::size_t>(q));
    Vector sign(q);
    for (Eigen::Index j = 0; j < q; ++j) {
        in[j] = prob.penalty(j) == 0 || theta(j) != 0;
        sign(j) = theta(j) > 0 ? 1 : (theta(j) < 0 ? -1 : 0);
    }
    for (int round = 0; round < 200; ++round) {
        std::vector<Eigen::Index> support;
        for (Eigen::Index j = 0; j < q; ++j) {
            if (in[j]) support.push_back(j);
        }
        const Vector grad = gradient(theta);
        if (!support.empty()) {
            const auto m = static_cast<Eigen::Index>(support.size());
            if (n < m) return std::nullopt;
            Matrix a(n, m);
            Vector g(m);
            for (Eigen::Index k = 0; k < m; ++k) g(k) = grad(support[k]) + penalty(support[k]) * sign(support[k]);
            for (Eigen::Index i = 0; i < n; ++i) {
                const Real w = std::sqrt(2 * static_cast<Real>(prob.loss.piece(pieces[i]).a));
                for (Eigen::Index k = 0; k < m; ++k) a(i, k) = w * design(i, support[k]);
            }
            const Eigen::HouseholderQR<Matrix> qr(a);
            const Vector diag = qr.matrixQR().diagonal().head(m).cwiseAbs();
            if (!(diag.minCoeff() > 1e-17L * diag.maxCoeff())) return std::nullopt;
            const auto r = qr.matrixQR().topLeftCorner(m, m).template triangularView<Eigen::Upper>();
            const Vector delta = -r.solve(r.transpose().solve(g));
            if (!delta.allFinite()) return std::nullopt;
            // Stop at the first penalized coordinate that would change sign.
            Real frac = 1;
            Eigen::Index leaving = -1;
            for (Eigen::Index k = 0; k < m; ++k) {
                const Eigen::Index j = support[k];
                const Real next = theta(j) + delta(k);
                if (prob.penalty(j) == 0 || sign(j) * next > 0) continue;
                const Real f = theta(j) / (theta(j) - next);
                if (f < frac) {
                    frac = f;
                    leaving = j;
                }
            }
            for (Eigen::Index k = 0; k < m; ++k) theta(support[k]) += frac * delta(k);
            if (leaving >= 0) {
                theta(leaving) = 0;
                in[leaving] = false;
                sign(leaving) = 0;
                continue;
            }
        }
        const Vector g = gradient(theta);
        Real stationarity = 0;
        Real worst_excess = entry_tol;
        Eigen::Index entering = -1;
        for (Eigen::Index j = 0; j < q; ++j) {
            if (in[j]) {
                stationarity = std::max(stationarity, std::abs(g(j) + penalty(j) * sign(j)));
            } else if (std::abs(g(j)) - penalty(j) > worst_excess) {
                worst_excess = std::abs(g(j)) - penalty(j);
                entering = j;
            }
        }
        if (entering >= 0) {
            in[entering] = true;
            sign(entering) = g(entering) > 0 ? -1 : 1;
            continue;
        }
        if (stationarity <= tol) return Eigen::VectorXd(theta.cast<double>());
    }
    return std::nullopt;
}

} // namespace

OracleSolution solve_weighted_l1(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                 const LossModel& loss, double lambda,
                                 const Eigen::VectorXd& weights, const OracleOptions& options)
{
    if (design.rows() != y.size() || design.cols() != weights.size()) {
        throw Error(ErrorKind::dimension_mismatch, "oracle inputs disagree in size");
    }
    if (!(lambda >= 0)) throw Error(ErrorKind::invalid_parameter, "lambda must be nonnegative");
    if (!(options.tol > 0)) throw Error(ErrorKind::invalid_parameter, "oracle tol must be positive");

    const Eigen::Index q = design.cols();
    // Unit-norm columns; the penalty scales with them.
    Eigen::VectorXd norms(q);
    for (Eigen::Index j = 0; j < q; ++j) {
        const double nj = design.col(j).norm();
        norms(j) = nj > 0 ? nj : 1.0;
    }
    const Eigen::MatrixXd scaled = design * norms.cwiseInverse().asDiagonal();
    const Eigen::VectorXd penalty = lambda * weights.cwiseQuotient(norms);

    std::vector<Eigen::Index> free_cols, pen_cols;
    for (Eigen::Index j = 0; j < q; ++j) (weights(j) == 0 ? free_cols : pen_cols).push_back(j);

    OracleSolution sol;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(q);
    if (loss.kind() == LossKind::squared_error && !free_cols.empty()) {
        // Profile out the unpenalized block: for fixed penalized
        // coefficients it is an ordinary least-squares fit.
        Eigen::MatrixXd free_design(design.rows(), static_cast<Eigen::Index>(free_cols.size()));
        for (std::size_t k = 0; k < free_cols.size(); ++k) free_design.col(k) = scaled.col(free_cols[k]);
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(free_design);
        const Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(design.rows(), qr.rank());
        auto project = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
            return v - basis * (basis.transpose() * v);
        };
        Eigen::MatrixXd pen_design(design.rows(), static_cast<Eigen::Index>(pen_cols.size()));
        Eigen::VectorXd pen_penalty(static_cast<Eigen::Index>(pen_cols.size()));
        for (std::size_t k = 0; k < pen_cols.size(); ++k) {
            pen_design.col(k) = project(scaled.col(pen_cols[k]));
            pen_penalty(k) = penalty(pen_cols[k]);
        }
        const Eigen::VectorXd y_proj = project(y);
        Eigen::VectorXd pen_theta(0);
        if (!pen_cols.empty()) {
            const Problem prob{pen_design, y_proj, loss, pen_penalty};
            const OracleSolution inner = run_proximal(prob, options);
            pen_theta = inner.beta;
            sol.iterations = inner.iterations;
        }
        Eigen::VectorXd rest = y;
        for (std::size_t k = 0; k < pen_cols.size(); ++k) rest -= pen_theta(k) * scaled.col(pen_cols[k]);
        const Eigen::VectorXd free_theta = qr.solve(rest);
        for (std::size_t k = 0; k < pen_cols.size(); ++k) theta(pen_cols[k]) = pen_theta(k);
        for (std::size_t k = 0; k < free_cols.size(); ++k) theta(free_cols[k]) = free_theta(k);
    } else {
        const Problem prob{scaled, y, loss, penalty};
        const OracleSolution inner = run_proximal(prob, options);
        theta = inner.beta;
        sol.iterations = inner.iterations;
    }
    const Problem full{scaled, y, loss, penalty};
    sol.objective = full.smooth(theta) + full.penalty_value(theta);
    if (const auto better = refine(full, theta)) {
        const double objective = full.smooth(*better) + full.penalty_value(*better);
        if (objective <= sol.objective + 1e-12 * std::max(1.0, std::abs(sol.objective))) {
            theta = *better;
            sol.objective = objective;
        }
    }
    sol.beta = theta.cwiseQuotient(norms);
    return sol;
}

OracleSolution solve_penalized(const Dataset& data, const LossModel& loss, double lambda,
                               bool intercept, const OracleOptions& options)
{
    validate(data);
    if (loss.residual_kind() != residual_kind_for(data.task)) {
        throw Error(ErrorKind::task_mismatch, "loss does not match the dataset task");
    }
    const Eigen::Index p = data.p();
    const Eigen::Index off = intercept ? 1 : 0;
    Eigen::MatrixXd design(data.n(), p + off);
    if (intercept) design.col(0).setOnes();
    design.rightCols(p) = data.x;
    Eigen::VectorXd weights = Eigen::VectorXd::Ones(p + off);
    if (intercept) weights(0) = 0.0;
    OracleSolution raw = solve_weighted_l1(design, data.y, loss, lambda, weights, options);
    OracleSolution sol;
    sol.beta = raw.beta.tail(p);
    sol.intercept = intercept ? raw.beta(0) : 0.0;
    sol.objective = raw.objective;
    sol.iterations = raw.iterations;
    return sol;
}

GridCheck grid_check(const RegularizationPath& path, const Dataset& data,
                     std::span<const double> lambdas, const OracleOptions& options)
{
    GridCheck out;
    for (double lambda : lambdas) {
        const auto [beta, icpt] = coefficients_at(path, lambda);
        const OracleSolution ref = solve_penalized(data, path.loss, lambda, path.meta.intercept, options);
        double gap = (beta - ref.beta).cwiseAbs().maxCoeff();
        gap = std::max(gap, std::abs(icpt - ref.intercept));
        if (gap >= out.max_discrepancy) {
            out.max_discrepancy = gap;
            out.worst_lambda = lambda;
        }
    }
    return out;
}

Gradient numeric_gradient(const LossModel& loss, const Dataset& data, const Eigen::VectorXd& beta,
                          double intercept, double h)
{
    if (!(h > 0)) throw Error(ErrorKind::invalid_parameter, "step h must be positive");
    Gradient g;
    g.coef.resize(beta.size());
    Eigen::VectorXd probe = beta;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        probe(j) = beta(j) + h;
        const double up = total_loss(loss, data, probe, intercept);
        probe(j) = beta(j) - h;
        const double down = total_loss(loss, data, probe, intercept);
        probe(j) = beta(j);
        g.coef(j) = (up - down) / (2 * h);
    }
    g.intercept = (total_loss(loss, data, beta, intercept + h) -
                   total_loss(loss, data, beta, intercept - h)) / (2 * h);
    return g;
}

} // namespace regpath
