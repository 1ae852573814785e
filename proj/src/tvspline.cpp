#include <regpath/tvspline.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <regpath/error.hpp>

namespace regpath {

double plus_power(double x, double t, int k)
{
    if (k < 1) throw Error(ErrorKind::invalid_parameter, "spline order must be at least 1");
    const double d = x - t;
    if (!(d > 0)) return 0.0;
    if (k == 1) return 1.0;
    return std::pow(d, k - 1);
}

Eigen::VectorXd basis_row(std::span<const double> knots, int k, double x)
{
    if (k < 1) throw Error(ErrorKind::invalid_parameter, "spline order must be at least 1");
    Eigen::VectorXd row(k + static_cast<Eigen::Index>(knots.size()));
    double power = 1.0;
    for (int j = 0; j < k; ++j) {
        row(j) = power;
        power *= x;
    }
    for (std::size_t j = 0; j < knots.size(); ++j) row(k + static_cast<Eigen::Index>(j)) = plus_power(x, knots[j], k);
    return row;
}

Eigen::MatrixXd basis_matrix(std::span<const double> knots, int k, const Eigen::VectorXd& x)
{
    Eigen::MatrixXd z(x.size(), k + static_cast<Eigen::Index>(knots.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) z.row(i) = basis_row(knots, k, x(i)).transpose();
    return z;
}

Eigen::VectorXd SplineModel::coefficients() const
{
    Eigen::VectorXd out(poly_coef.size() + knot_coef.size());
    out << poly_coef, knot_coef;
    return out;
}

double spline_eval(const SplineModel& model, double x)
{
    if (model.poly_coef.size() != model.order ||
        model.knot_coef.size() != static_cast<Eigen::Index>(model.knots.size())) {
        throw Error(ErrorKind::dimension_mismatch, "spline coefficients do not match its basis");
    }
    return basis_row(model.knots, model.order, x).dot(model.coefficients());
}

double factorial(int m)
{
    double out = 1;
    for (int j = 2; j <= m; ++j) out *= j;
    return out;
}

double total_variation(const SplineModel& model)
{
    return factorial(model.order - 1) * model.knot_coef.lpNorm<1>();
}

SplineModel TvPathState::model() const
{
    SplineModel m;
    m.order = k;
    m.knots = knots;
    m.poly_coef = beta.head(k);
    m.knot_coef = beta.tail(beta.size() - k);
    return m;
}

Eigen::VectorXd TvPathState::residual() const
{
    return y - basis * beta;
}

double TvPathState::rss() const
{
    return residual().squaredNorm();
}

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

bool near_any(const std::vector<double>& knots, double t, double gap)
{
    const auto it = std::lower_bound(knots.begin(), knots.end(), t);
    if (it != knots.end() && *it - t <= gap) return true;
    if (it != knots.begin() && t - *std::prev(it) <= gap) return true;
    return false;
}

// Crossing levels from the correlation pieces: corr(lambda) = num + lambda * slope.
// A level only counts when the correlation enters the band +-c lambda from
// inside as lambda decreases (c - slope > 0 for +, c + slope > 0 for -).
LambdaCandidates crossings(double num, double slope, double c, double lambda0)
{
    LambdaCandidates out;
    const double dp = c - slope;
    const double dm = -c - slope;
    out.plus = dp != 0 ? num / dp : 0.0;
    out.minus = dm != 0 ? num / dm : 0.0;
    auto take = [&](double cand, bool entering) {
        if (entering && cand > 0 && cand < lambda0 && std::isfinite(cand)) out.value = std::max(out.value, cand);
    };
    take(out.plus, dp > 0);
    take(out.minus, dm < 0);
    return out;
}

struct SearchInput {
    const Eigen::VectorXd& x;
    Eigen::VectorXd anchor; // residual at lambda0 minus lambda0 * Z gamma
    Eigen::VectorXd rate;   // Z gamma
    double lambda0;
    double c;
    int k;
    const std::vector<double>& knots;
    /// Sign of the correlation at each knot.
    std::vector<double> knot_sign;
};

LambdaCandidates evaluate(const SearchInput& in, double t)
{
    double num = 0;
    double slope = 0;
    for (Eigen::Index i = in.x.size() - 1; i >= 0 && in.x(i) > t; --i) {
        const double b = plus_power(in.x(i), t, in.k);
        num += b * in.anchor(i);
        slope += b * in.rate(i);
    }
    return crossings(num, slope, in.c, in.lambda0);
}

// Real roots of qa s^2 + qb s + qc.
std::vector<double> quadratic_roots(double qa, double qb, double qc)
{
    const double scale = std::max({std::abs(qa), std::abs(qb), std::abs(qc)});
    if (scale == 0) return {};
    if (std::abs(qa) <= 1e-14 * scale) {
        if (qb == 0) return {};
        return {-qc / qb};
    }
    const double disc = qb * qb - 4 * qa * qc;
    if (disc < 0) return {};
    const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
    std::vector<double> out{q / qa};
    if (q != 0) out.push_back(qc / q);
    return out;
}

// Polynomial coefficients in s = t - a of sum_{i >= first} (x_i - t)^(k-1) w_i.
std::vector<double> segment_poly(const SearchInput& in, const Eigen::VectorXd& w, Eigen::Index first,
                                 double a)
{
    const int m = in.k - 1;
    std::vector<double> moments(m + 1, 0.0);
    for (Eigen::Index i = first; i < in.x.size(); ++i) {
        const double d = in.x(i) - a;
        double power = 1;
        for (int e = 0; e <= m; ++e) {
            moments[e] += power * w(i);
            power *= d;
        }
    }
    std::vector<double> coef(m + 1, 0.0);
    double binom = 1;
    for (int j = 0; j <= m; ++j) {
        coef[j] = binom * ((j % 2) ? -1.0 : 1.0) * moments[m - j];
        binom = binom * (m - j) / (j + 1);
    }
    return coef;
}

double poly_value(const std::vector<double>& coef, double s)
{
    double v = 0;
    for (auto it = coef.rbegin(); it != coef.rend(); ++it) v = v * s + *it;
    return v;
}

std::optional<std::size_t> exact_knot(const std::vector<double>& knots, double t)
{
    const auto it = std::lower_bound(knots.begin(), knots.end(), t);
    if (it == knots.end() || *it != t) return std::nullopt;
    return static_cast<std::size_t>(it - knots.begin());
}

// Interior stationary points of lambda_+(t) and lambda_-(t) on (a, b).
//
// Both branches are written as lambda(t) = lambda0 + E(t) / D(t) with
// E = N - lambda0 D. When an endpoint is an active knot, E and D both
// vanish there on the branch matching the knot's sign. The polynomials are
// expanded about that endpoint and the zeros imposed exactly; otherwise
// rounding splits the double root of the stationarity equation into
// spurious candidates next to the knot.
std::vector<double> interior_candidates(const SearchInput& in, Eigen::Index first, double a, double b)
{
    std::vector<double> out;
    if (in.k < 3) return out;
    std::optional<std::size_t> pinned = exact_knot(in.knots, a);
    double origin = a;
    if (!pinned) {
        pinned = exact_knot(in.knots, b);
        if (pinned) origin = b;
    }
    const std::vector<double> n_poly = segment_poly(in, in.anchor, first, origin);
    const std::vector<double> b_poly = segment_poly(in, in.rate, first, origin);
    const double lo = a - origin;
    const double hi = b - origin;
    const bool finite = std::isfinite(in.lambda0);

    for (double sign : {1.0, -1.0}) {
        std::vector<double> d = b_poly;
        for (double& v : d) v = -v;
        d[0] += sign * in.c;
        std::vector<double> e = n_poly;
        if (finite) {
            for (std::size_t j = 0; j < e.size(); ++j) e[j] -= in.lambda0 * d[j];
        }
        if (pinned && in.knot_sign[*pinned] == sign) {
            e[0] = 0;
            d[0] = 0;
        }

        if (in.k == 3) {
            const double qa = e[2] * d[1] - e[1] * d[2];
            const double qb = 2 * (e[2] * d[0] - e[0] * d[2]);
            const double qc = e[1] * d[0] - e[0] * d[1];
            for (double s : quadratic_roots(qa, qb, qc)) {
                if (s > lo && s < hi) out.push_back(origin + s);
            }
            continue;
        }

        // Golden-section search on local maxima found by a coarse scan.
        auto ratio = [&](double s) {
            const double den = poly_value(d, s);
            if (!(sign * den > 0)) return -1.0;
            const double lam = (finite ? in.lambda0 : 0.0) + poly_value(e, s) / den;
            return (std::isfinite(lam) && lam > 0 && lam < in.lambda0) ? lam : -1.0;
        };
        constexpr int scan = 16;
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        const double width = hi - lo;
        std::vector<double> vals(scan + 1);
        for (int j = 0; j <= scan; ++j) vals[j] = ratio(lo + width * j / scan);
        for (int j = 1; j < scan; ++j) {
            if (!(vals[j] >= vals[j - 1] && vals[j] >= vals[j + 1]) || vals[j] <= 0) continue;
            double l = lo + width * (j - 1) / scan;
            double h = lo + width * (j + 1) / scan;
            double m1 = h - phi * (h - l);
            double m2 = l + phi * (h - l);
            double f1 = ratio(m1);
            double f2 = ratio(m2);
            while (h - l > 1e-10) {
                if (f1 < f2) {
                    l = m1;
                    m1 = m2;
                    f1 = f2;
                    m2 = l + phi * (h - l);
                    f2 = ratio(m2);
                } else {
                    h = m2;
                    m2 = m1;
                    f2 = f1;
                    m1 = h - phi * (h - l);
                    f1 = ratio(m1);
                }
            }
            const double s = 0.5 * (l + h);
            if (s > lo + 1e-6 * width && s < hi - 1e-6 * width) out.push_back(origin + s);
        }
    }
    return out;
}

KnotEvent search(const SearchInput& in, const TvOptions& options,
                 const std::optional<double>& excluded)
{
    std::vector<double> points(in.x.data(), in.x.data() + in.x.size());
    points.insert(points.end(), in.knots.begin(), in.knots.end());
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    const double x_min = in.x(0);
    const double gap = options.min_knot_gap;
    KnotEvent best;
    auto consider = [&](double t) {
        if (t < 0 || t >= 1) return;
        if (in.k >= 2 && t <= x_min) return;
        if (near_any(in.knots, t, gap)) return;
        if (excluded && std::abs(t - *excluded) <= std::max(gap, 1e-9)) return;
        const LambdaCandidates lc = evaluate(in, t);
        if (!lc.admissible()) return;
        if (!best.found() || lc.value > best.lambda * (1 + 1e-12)) {
            best.t = t;
            best.lambda = lc.value;
        }
    };

    for (std::size_t m = 0; m + 1 < points.size(); ++m) {
        const double a = points[m];
        const double b = points[m + 1];
        consider(a);
        const Eigen::Index first =
            std::lower_bound(in.x.data(), in.x.data() + in.x.size(), b) - in.x.data();
        std::vector<double> interior = interior_candidates(in, first, a, b);
        std::sort(interior.begin(), interior.end());
        for (double t : interior) consider(t);
    }
    return best;
}

SearchInput search_input(const TvPathState& state)
{
    const double c = factorial(state.k - 1);
    const Eigen::VectorXd rate = state.basis * state.gamma;
    std::vector<double> knot_sign;
    for (std::size_t j = 0; j < state.knots.size(); ++j) {
        knot_sign.push_back(-state.signs(state.k + static_cast<Eigen::Index>(j)));
    }
    return {state.x, state.residual() - state.lambda * rate, rate, state.lambda, c, state.k, state.knots,
            std::move(knot_sign)};
}

// Refactors Z for the current knot set and recomputes the direction and the
// least-squares coefficients.
void refactor(TvPathState& state)
{
    state.basis = basis_matrix(state.knots, state.k, state.x);
    state.gram_factor.compute(state.basis);
    const Eigen::Index q = state.basis.cols();
    const Eigen::MatrixXd r = state.gram_factor.matrixQR().topLeftCorner(q, q).triangularView<Eigen::Upper>();
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues();
    const double smin = sv(q - 1);
    state.condition = smin > 0 ? std::pow(sv(0) / smin, 2) : std::numeric_limits<double>::infinity();
    const double c = factorial(state.k - 1);
    const auto upper = state.gram_factor.matrixQR().topLeftCorner(q, q).triangularView<Eigen::Upper>();
    // (Z'Z)^{-1} s = R^{-1} R^{-T} s
    Eigen::VectorXd tmp = upper.transpose().solve(state.signs);
    state.gamma = -c * upper.solve(tmp);
    state.beta_ls = state.gram_factor.solve(state.y);
}

// Coefficients at the current lambda from Z'Z beta = Z'y + (k-1)! lambda s,
// polished by iterative refinement against the stationarity residual.
void settle(TvPathState& state)
{
    state.beta = state.beta_ls - state.lambda * state.gamma;
    const double c = factorial(state.k - 1);
    const Eigen::Index q = state.basis.cols();
    const auto upper = state.gram_factor.matrixQR().topLeftCorner(q, q).triangularView<Eigen::Upper>();
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd rho = state.basis.transpose() * state.residual() + c * state.lambda * state.signs;
        state.beta += upper.solve(upper.transpose().solve(rho));
    }
}

std::optional<std::size_t> knot_position(const std::vector<double>& knots, double t)
{
    const auto it = std::find(knots.begin(), knots.end(), t);
    if (it == knots.end()) return std::nullopt;
    return static_cast<std::size_t>(it - knots.begin());
}

} // namespace

const char* to_string(TvEventKind kind) noexcept
{
    switch (kind) {
    case TvEventKind::init: return "init";
    case TvEventKind::add_knot: return "add-knot";
    case TvEventKind::remove_knot: return "remove-knot";
    case TvEventKind::terminate: return "terminate";
    }
    return "unknown";
}

const char* to_string(TvStatus status) noexcept
{
    switch (status) {
    case TvStatus::running: return "running";
    case TvStatus::interpolated: return "interpolated";
    case TvStatus::exhausted: return "exhausted";
    case TvStatus::max_steps: return "max-steps";
    case TvStatus::ill_conditioned: return "ill-conditioned";
    case TvStatus::knot_limit: return "knot-limit";
    }
    return "unknown";
}

std::string format_tv_event(const TvEvent& event)
{
    if (event.kind == TvEventKind::add_knot || event.kind == TvEventKind::remove_knot) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s(%.17g)", to_string(event.kind), event.knot);
        return buf;
    }
    return to_string(event.kind);
}

TvEvent parse_tv_event(const std::string& text)
{
    for (TvEventKind kind : {TvEventKind::init, TvEventKind::terminate}) {
        if (text == to_string(kind)) return {kind, std::numeric_limits<double>::quiet_NaN()};
    }
    for (TvEventKind kind : {TvEventKind::add_knot, TvEventKind::remove_knot}) {
        const std::string head = std::string(to_string(kind)) + "(";
        if (text.size() > head.size() + 1 && text.compare(0, head.size(), head) == 0 && text.back() == ')') {
            const std::string body = text.substr(head.size(), text.size() - head.size() - 1);
            std::size_t used = 0;
            double t = 0;
            try {
                t = std::stod(body, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == body.size() && used > 0) return {kind, t};
        }
    }
    throw Error(ErrorKind::parse_error, "unrecognized spline event \"" + text + "\"");
}

TvPathState init_tv_path(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int k,
                         const TvOptions& options)
{
    if (k < 1) throw Error(ErrorKind::invalid_parameter, "spline order must be at least 1");
    if (x.size() != y.size()) throw Error(ErrorKind::dimension_mismatch, "x and y differ in length");
    const Eigen::Index n = x.size();
    if (n <= k) throw Error(ErrorKind::invalid_parameter, "need more observations than the spline order");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(x(i)) || !std::isfinite(y(i))) {
            throw Error(ErrorKind::non_finite_value, "non-finite spline data");
        }
        if (x(i) < 0 || x(i) > 1) throw Error(ErrorKind::invalid_parameter, "x must lie in [0, 1]");
        if (i > 0 && x(i) < x(i - 1)) throw Error(ErrorKind::invalid_parameter, "x must be sorted");
    }
    Eigen::Index distinct = 1;
    for (Eigen::Index i = 1; i < n; ++i) distinct += x(i) != x(i - 1);
    if (distinct < k) {
        throw Error(ErrorKind::degenerate_design, "fewer distinct x values than the spline order");
    }

    TvPathState state;
    state.k = k;
    state.x = x;
    state.y = y;
    state.signs = Eigen::VectorXd::Zero(k);
    refactor(state);
    state.beta = state.beta_ls;
    state.gamma = Eigen::VectorXd::Zero(k);

    const double c = factorial(k - 1);
    const SearchInput in{state.x, state.residual(), Eigen::VectorXd::Zero(n),
                         std::numeric_limits<double>::infinity(), c, k, state.knots, {}};
    const KnotEvent first = search(in, options, std::nullopt);
    if (!first.found()) {
        state.lambda = 0;
        return state;
    }
    const LambdaCandidates lc = evaluate(in, first.t);
    state.lambda = lc.value;
    state.knots = {first.t};
    state.signs = Eigen::VectorXd::Zero(k + 1);
    state.signs(k) = lc.plus > 0 ? -1.0 : 1.0;
    const Eigen::VectorXd poly = state.beta;
    refactor(state);
    state.beta = Eigen::VectorXd::Zero(k + 1);
    state.beta.head(k) = poly;
    state.last_added = first.t;
    return state;
}

LambdaCandidates lambda_candidates(const TvPathState& state, double t)
{
    return evaluate(search_input(state), t);
}

KnotEvent find_next_knot(const TvPathState& state, const TvOptions& options)
{
    return search(search_input(state), options, state.last_removed);
}

KnotEvent lambda_remove(const TvPathState& state, double event_tol)
{
    KnotEvent out;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < state.knots.size(); ++j) {
        const Eigen::Index idx = state.k + static_cast<Eigen::Index>(j);
        const double b = state.beta(idx);
        const double g = state.gamma(idx);
        if (b == 0 || g == 0 || (b > 0) == (g > 0)) continue;
        const double d = -b / g;
        if (state.last_added && *state.last_added == state.knots[j] &&
            d <= event_tol * std::max(1.0, state.lambda)) {
            continue;
        }
        if (d < best) {
            best = d;
            out.t = state.knots[j];
        }
    }
    if (std::isfinite(best) && state.lambda - best > 0) out.lambda = state.lambda - best;
    return out;
}

TvStepResult tv_step(TvPathState& state, const TvOptions& options)
{
    TvStepResult result;
    result.event.kind = TvEventKind::terminate;
    const Eigen::Index n = state.x.size();
    const double tss = (state.y.array() - state.y.mean()).square().sum();
    const double rss_tol = options.rss_tol.value_or(1e-10 * tss);
    if (state.lambda <= 0) {
        result.status = TvStatus::exhausted;
        return result;
    }
    if (state.rss() <= rss_tol) {
        result.status = TvStatus::interpolated;
        return result;
    }

    const KnotEvent rem = lambda_remove(state, options.event_tol);
    const bool at_limit = static_cast<Eigen::Index>(state.knots.size()) >= n - state.k;
    const KnotEvent add = at_limit ? KnotEvent{} : find_next_knot(state, options);
    if (!rem.found() && !add.found()) {
        if (at_limit) {
            result.status = TvStatus::knot_limit;
            return result;
        }
        state.lambda = 0;
        state.beta = state.beta_ls;
        result.status = TvStatus::exhausted;
        return result;
    }
    const bool remove =
        rem.found() && (!add.found() ||
                        rem.lambda >= add.lambda - options.event_tol * std::max(1.0, state.lambda));
    const double target = remove ? rem.lambda : add.lambda;
    state.beta += (state.lambda - target) * state.gamma;
    state.lambda = target;

    if (remove) {
        const std::size_t j = *knot_position(state.knots, rem.t);
        const Eigen::Index idx = state.k + static_cast<Eigen::Index>(j);
        state.knots.erase(state.knots.begin() + static_cast<std::ptrdiff_t>(j));
        Eigen::VectorXd beta(state.beta.size() - 1), signs(state.signs.size() - 1);
        beta << state.beta.head(idx), state.beta.tail(state.beta.size() - idx - 1);
        signs << state.signs.head(idx), state.signs.tail(state.signs.size() - idx - 1);
        state.beta = beta;
        state.signs = signs;
        refactor(state);
        settle(state);
        state.last_removed = rem.t;
        state.last_added.reset();
        result.event = {TvEventKind::remove_knot, rem.t};
        return result;
    }

    TvPathState trial = state;
    const auto pos = std::lower_bound(trial.knots.begin(), trial.knots.end(), add.t);
    const Eigen::Index idx = state.k + (pos - trial.knots.begin());
    trial.knots.insert(pos, add.t);
    Eigen::VectorXd xt(n);
    for (Eigen::Index i = 0; i < n; ++i) xt(i) = plus_power(state.x(i), add.t, state.k);
    const double corr = xt.dot(state.residual());
    Eigen::VectorXd beta(state.beta.size() + 1), signs(state.signs.size() + 1);
    beta << state.beta.head(idx), 0.0, state.beta.tail(state.beta.size() - idx);
    signs << state.signs.head(idx), (corr > 0 ? -1.0 : 1.0), state.signs.tail(state.signs.size() - idx);
    trial.beta = beta;
    trial.signs = signs;
    refactor(trial);
    if (!(trial.condition <= options.cond_limit)) {
        result.status = TvStatus::ill_conditioned;
        return result;
    }
    settle(trial);
    trial.last_added = add.t;
    trial.last_removed.reset();
    state = std::move(trial);
    result.event = {TvEventKind::add_knot, add.t};
    return result;
}

double SplinePath::predict(std::size_t breakpoint, double x) const
{
    if (breakpoint >= breakpoints.size()) {
        throw Error(ErrorKind::invalid_parameter, "breakpoint index out of range");
    }
    return spline_eval(breakpoints[breakpoint].model, domain.to_unit(x));
}

SplinePath solve_tv_path(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int k,
                         const TvOptions& options)
{
    if (x.size() != y.size()) throw Error(ErrorKind::dimension_mismatch, "x and y differ in length");
    if (x.size() == 0) throw Error(ErrorKind::empty_dataset, "no observations");
    if (!x.allFinite() || !y.allFinite()) throw Error(ErrorKind::non_finite_value, "non-finite spline data");
    const Eigen::Index n = x.size();
    SplinePath path;
    path.order = k;
    path.n = n;
    const double lo = x.minCoeff();
    const double hi = x.maxCoeff();
    if (!(hi > lo)) throw Error(ErrorKind::degenerate_design, "x is constant");
    path.domain = {lo, hi - lo};

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x(a) < x(b); });
    Eigen::VectorXd u(n), ys(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        u(i) = std::clamp(path.domain.to_unit(x(order[static_cast<std::size_t>(i)])), 0.0, 1.0);
        ys(i) = y(order[static_cast<std::size_t>(i)]);
    }

    TvPathState state = init_tv_path(u, ys, k, options);
    path.breakpoints.push_back({state.lambda, state.model(), {TvEventKind::init, std::numeric_limits<double>::quiet_NaN()}});
    if (state.lambda <= 0) {
        path.breakpoints.back().event.kind = TvEventKind::terminate;
        path.status = TvStatus::interpolated;
        return path;
    }
    while (true) {
        if (path.steps >= options.max_steps) {
            path.status = TvStatus::max_steps;
            break;
        }
        const TvStepResult step = tv_step(state, options);
        if (step.status != TvStatus::running) {
            path.status = step.status;
            if (state.lambda < path.breakpoints.back().lambda) {
                path.breakpoints.push_back({state.lambda, state.model(), step.event});
            }
            break;
        }
        ++path.steps;
        path.breakpoints.push_back({state.lambda, state.model(), step.event});
    }
    return path;
}

TvKktReport verify_tv_kkt(const SplineModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          double lambda, double grid_step)
{
    if (x.size() != y.size()) throw Error(ErrorKind::dimension_mismatch, "x and y differ in length");
    const int k = model.order;
    const double c = factorial(k - 1);
    const Eigen::MatrixXd z = basis_matrix(model.knots, k, x);
    const Eigen::VectorXd r = y - z * model.coefficients();
    TvKktReport out;
    out.max_poly_gradient = (z.leftCols(k).transpose() * r).cwiseAbs().maxCoeff();
    for (std::size_t j = 0; j < model.knots.size(); ++j) {
        const double level = std::abs(z.col(k + static_cast<Eigen::Index>(j)).dot(r)) / c;
        out.max_active_gap = std::max(out.max_active_gap, std::abs(level - lambda));
    }
    if (grid_step > 0) {
        std::vector<double> points(x.data(), x.data() + x.size());
        points.insert(points.end(), model.knots.begin(), model.knots.end());
        std::sort(points.begin(), points.end());
        points.erase(std::unique(points.begin(), points.end()), points.end());
        auto next_to_knot = [&](double t) {
            const auto hi = std::upper_bound(points.begin(), points.end(), t);
            if (hi == points.begin() || hi == points.end() || *std::prev(hi) == t) return false;
            return exact_knot(model.knots, *std::prev(hi)).has_value() || exact_knot(model.knots, *hi).has_value();
        };
        const auto steps = static_cast<long>(std::floor(1.0 / grid_step));
        for (long g = 0; g <= steps; ++g) {
            const double t = std::min(1.0, static_cast<double>(g) * grid_step);
            double corr = 0;
            for (Eigen::Index i = 0; i < x.size(); ++i) corr += plus_power(x(i), t, k) * r(i);
            const double excess = std::abs(corr) / c - lambda;
            out.max_inactive_excess = std::max(out.max_inactive_excess, excess);
            if (!next_to_knot(t)) out.max_inactive_excess_away = std::max(out.max_inactive_excess_away, excess);
        }
    }
    return out;
}

} // namespace regpath
