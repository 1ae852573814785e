#include <regpath/l1path.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace regpath {
namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double rate_tol = 1e-12;
constexpr double pivot_tol = 1e-12;

double sign_of(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

bool contains(const std::vector<Eigen::Index>& v, Eigen::Index j)
{
    return std::find(v.begin(), v.end(), j) != v.end();
}

std::size_t offset(const PathState& state) { return state.use_intercept ? 1 : 0; }

// Row i of the design restricted to the active system.
Eigen::VectorXd system_row(const PathState& state, const Dataset& data, Eigen::Index i)
{
    Eigen::VectorXd row(state.system_size());
    const auto off = offset(state);
    if (state.use_intercept) row(0) = 1.0;
    for (std::size_t k = 0; k < state.active.size(); ++k) row(off + k) = data.x(i, state.active[k]);
    return row;
}

Eigen::MatrixXd system_design(const PathState& state, const Dataset& data)
{
    Eigen::MatrixXd design(data.n(), state.system_size());
    const auto off = offset(state);
    if (state.use_intercept) design.col(0).setOnes();
    for (std::size_t k = 0; k < state.active.size(); ++k) {
        design.col(off + k) = data.x.col(state.active[k]);
    }
    return design;
}

Eigen::VectorXd curvature_weights(const PathState& state, const LossModel& loss)
{
    Eigen::VectorXd w(static_cast<Eigen::Index>(state.residual_piece.size()));
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = 2 * loss.piece(state.residual_piece[i]).a;
    return w;
}

void rebuild_curvature(PathState& state, const Dataset& data, const LossModel& loss)
{
    const Eigen::MatrixXd design = system_design(state, data);
    const Eigen::VectorXd w = curvature_weights(state, loss);
    state.curvature = design.transpose() * w.asDiagonal() * design;
    state.updates_since_refresh = 0;
}

Eigen::VectorXd system_signs(const PathState& state)
{
    Eigen::VectorXd s = Eigen::VectorXd::Zero(state.system_size());
    const auto off = offset(state);
    for (std::size_t k = 0; k < state.signs.size(); ++k) s(off + k) = state.signs[k];
    return s;
}

// Residuals and gradient from scratch, using the tracked pieces.
void refresh_residuals(PathState& state, const Dataset& data, const LossModel& loss)
{
    const auto kind = loss.residual_kind();
    const Eigen::VectorXd eta = predict(data.x, state.beta, state.intercept);
    Eigen::VectorXd weight(data.n());
    state.residual.resize(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const double r = generalized_residual(kind, data.y(i), eta(i));
        state.residual(i) = r;
        weight(i) = loss.piece(state.residual_piece[i]).slope(r) * residual_sign(kind, data.y(i));
    }
    state.gradient = data.x.transpose() * weight;
    state.intercept_gradient = weight.sum();
}

bool factor_is_singular(const Eigen::LDLT<Eigen::MatrixXd>& ldlt, const Eigen::MatrixXd& m)
{
    if (m.size() == 0) return false;
    const double trace = m.trace();
    if (!(trace > 0) || ldlt.info() != Eigen::Success) return true;
    return ldlt.vectorD().minCoeff() <= pivot_tol * trace;
}

// Newton correction within the current pieces: the active gradient is
// affine in the active coefficients, so one solve restores the equalities
// g_j = -lambda s_j (and a zero intercept gradient) up to rounding.
void polish(PathState& state, const Dataset& data, const LossModel& loss)
{
    if (state.direction_singular || state.system_size() == 0) return;
    const auto off = offset(state);
    Eigen::VectorXd excess(state.system_size());
    if (state.use_intercept) excess(0) = state.intercept_gradient;
    for (std::size_t k = 0; k < state.active.size(); ++k) {
        excess(off + k) = state.gradient(state.active[k]) + state.lambda * state.signs[k];
    }
    const Eigen::VectorXd step = -state.curvature_factor.solve(excess);
    double scale = 1.0 + std::abs(state.intercept);
    if (state.beta.size() > 0) scale = std::max(scale, 1.0 + state.beta.cwiseAbs().maxCoeff());
    if (!step.allFinite() || step.cwiseAbs().maxCoeff() > 1e-6 * scale) return;
    if (state.use_intercept) state.intercept += step(0);
    for (std::size_t k = 0; k < state.active.size(); ++k) state.beta(state.active[k]) += step(off + k);
    refresh_residuals(state, data, loss);
}

void remove_active(PathState& state, Eigen::Index j)
{
    const auto it = std::find(state.active.begin(), state.active.end(), j);
    const auto k = static_cast<Eigen::Index>(it - state.active.begin());
    const Eigen::Index pos = k + static_cast<Eigen::Index>(offset(state));
    const Eigen::Index q = state.curvature.rows();
    Eigen::MatrixXd reduced(q - 1, q - 1);
    for (Eigen::Index r = 0, rr = 0; r < q; ++r) {
        if (r == pos) continue;
        for (Eigen::Index c = 0, cc = 0; c < q; ++c) {
            if (c == pos) continue;
            reduced(rr, cc++) = state.curvature(r, c);
        }
        ++rr;
    }
    state.curvature = std::move(reduced);
    state.signs.erase(state.signs.begin() + k);
    state.active.erase(it);
    state.beta(j) = 0.0;
    state.direction(j) = 0.0;
}

void add_active(PathState& state, const Dataset& data, const LossModel& loss, Eigen::Index j,
                double sign)
{
    const Eigen::MatrixXd design = system_design(state, data);
    const Eigen::VectorXd w = curvature_weights(state, loss);
    const Eigen::VectorXd wx = w.cwiseProduct(data.x.col(j));
    const Eigen::Index q = state.curvature.rows();
    Eigen::MatrixXd grown(q + 1, q + 1);
    grown.topLeftCorner(q, q) = state.curvature;
    const Eigen::VectorXd border = design.transpose() * wx;
    grown.col(q).head(q) = border;
    grown.row(q).head(q) = border.transpose();
    grown(q, q) = data.x.col(j).dot(wx);
    state.curvature = std::move(grown);
    state.active.push_back(j);
    state.signs.push_back(sign);
}

// Moves observation i one piece over and applies the rank-one change of C.
void cross_knot(PathState& state, const Dataset& data, const LossModel& loss, Eigen::Index i,
                int side)
{
    auto& piece = state.residual_piece[static_cast<std::size_t>(i)];
    const double a_old = loss.piece(piece).a;
    piece = side > 0 ? piece + 1 : piece - 1;
    const double a_new = loss.piece(piece).a;
    if (a_new != a_old && state.system_size() > 0) {
        const Eigen::VectorXd row = system_row(state, data, i);
        state.curvature.noalias() += 2 * (a_new - a_old) * row * row.transpose();
    }
}

// Exact minimizer of sum_i l(r_i) over the intercept alone. The derivative
// is continuous, nondecreasing and piecewise linear in the intercept with
// kinks where some residual meets a loss knot; the minimizer set is the
// interval where it vanishes, and its midpoint is returned.
double fit_intercept(const Dataset& data, const LossModel& loss)
{
    const auto kind = loss.residual_kind();
    const auto n = data.n();
    // r_i(b) = base_i + sigma_i * b
    Eigen::VectorXd base(n), sigma(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        sigma(i) = residual_sign(kind, data.y(i));
        base(i) = kind == ResidualKind::regression ? data.y(i) : 0.0;
    }
    auto slope_at = [&](double b) {
        double s = 0;
        for (Eigen::Index i = 0; i < n; ++i) s += loss.derivative(base(i) + sigma(i) * b) * sigma(i);
        return s;
    };
    auto curvature_at = [&](double b) {
        double s = 0;
        for (Eigen::Index i = 0; i < n; ++i) s += 2 * loss.curvature(base(i) + sigma(i) * b);
        return s;
    };

    std::vector<double> kinks;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (double k : loss.knots()) kinks.push_back((k - base(i)) / sigma(i));
    }
    std::sort(kinks.begin(), kinks.end());
    kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());

    if (kinks.empty()) {
        const double c = curvature_at(0.0);
        if (!(c > 0)) return 0.0;
        return -slope_at(0.0) / c;
    }
    std::vector<double> phi(kinks.size());
    for (std::size_t k = 0; k < kinks.size(); ++k) phi[k] = slope_at(kinks[k]);
    const std::size_t m = kinks.size();

    // Left end: smallest b with phi(b) >= 0.
    double lo = -inf;
    {
        const auto it = std::find_if(phi.begin(), phi.end(), [](double v) { return v >= 0; });
        if (it == phi.end()) {
            const double c = curvature_at(kinks.back() + 1.0);
            if (!(c > 0)) throw Error(ErrorKind::degenerate_design, "intercept-only fit is unbounded");
            lo = kinks.back() - phi.back() / c;
        } else if (it == phi.begin()) {
            const double c = curvature_at(kinks.front() - 1.0);
            if (c > 0) lo = kinks.front() - phi.front() / c;
            else if (phi.front() > 0) throw Error(ErrorKind::degenerate_design, "intercept-only fit is unbounded");
        } else {
            const std::size_t k = static_cast<std::size_t>(it - phi.begin());
            lo = kinks[k - 1] - phi[k - 1] * (kinks[k] - kinks[k - 1]) / (phi[k] - phi[k - 1]);
        }
    }
    // Right end: largest b with phi(b) <= 0.
    double hi = inf;
    {
        std::size_t k = m;
        while (k > 0 && phi[k - 1] > 0) --k;
        if (k == 0) {
            const double c = curvature_at(kinks.front() - 1.0);
            if (!(c > 0)) throw Error(ErrorKind::degenerate_design, "intercept-only fit is unbounded");
            hi = kinks.front() - phi.front() / c;
        } else if (k == m) {
            const double c = curvature_at(kinks.back() + 1.0);
            if (c > 0) hi = kinks.back() - phi.back() / c;
            else if (phi.back() < 0) throw Error(ErrorKind::degenerate_design, "intercept-only fit is unbounded");
        } else {
            hi = kinks[k - 1] - phi[k - 1] * (kinks[k] - kinks[k - 1]) / (phi[k] - phi[k - 1]);
        }
    }
    if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
    if (std::isfinite(lo)) return lo;
    if (std::isfinite(hi)) return hi;
    return 0.0;
}

// Drops variables that make the active design itself rank deficient. Returns
// true if anything was removed.
bool drop_collinear(PathState& state, const Dataset& data, const LossModel& loss,
                    std::vector<Eigen::Index>& recent)
{
    bool removed = false;
    while (!state.active.empty()) {
        const Eigen::MatrixXd design = system_design(state, data);
        const Eigen::MatrixXd gram = design.transpose() * design;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        if (!factor_is_singular(ldlt, gram)) break;
        Eigen::Index victim = state.active.back();
        for (auto it = recent.rbegin(); it != recent.rend(); ++it) {
            if (contains(state.active, *it)) {
                victim = *it;
                break;
            }
        }
        remove_active(state, victim);
        state.excluded.push_back(victim);
        state.warnings.push_back("variable " + std::to_string(victim) +
                                 " skipped: collinear with the active set");
        removed = true;
    }
    if (removed) {
        rebuild_curvature(state, data, loss);
        compute_direction(state);
    }
    return removed;
}

} // namespace

const char* to_string(EventKind kind) noexcept
{
    switch (kind) {
        case EventKind::init: return "init";
        case EventKind::add: return "add";
        case EventKind::drop: return "drop";
        case EventKind::knot_cross: return "knot-cross";
        case EventKind::terminate: return "terminate";
    }
    return "init";
}

const char* to_string(PathStatus status) noexcept
{
    switch (status) {
        case PathStatus::complete: return "complete";
        case PathStatus::optimum: return "optimum";
        case PathStatus::max_active: return "max-active";
        case PathStatus::budget_exceeded: return "budget-exceeded";
        case PathStatus::unbounded: return "unbounded";
    }
    return "complete";
}

// add(j,+1) | drop(j) | knot-cross(i,k,+1) | init | terminate, ';'-separated.
std::string format_events(const std::vector<PathEvent>& events)
{
    std::ostringstream out;
    for (std::size_t e = 0; e < events.size(); ++e) {
        const auto& ev = events[e];
        if (e > 0) out << ';';
        out << to_string(ev.kind);
        switch (ev.kind) {
            case EventKind::add: out << '(' << ev.index << ',' << (ev.side > 0 ? "+1" : "-1") << ')'; break;
            case EventKind::drop: out << '(' << ev.index << ')'; break;
            case EventKind::knot_cross:
                out << '(' << ev.index << ',' << ev.knot << ',' << (ev.side > 0 ? "+1" : "-1") << ')';
                break;
            default: break;
        }
    }
    return out.str();
}

std::vector<PathEvent> parse_events(const std::string& text)
{
    std::vector<PathEvent> events;
    std::istringstream in(text);
    std::string token;
    auto fail = [&] { throw Error(ErrorKind::parse_error, "malformed event tag '" + text + "'"); };
    while (std::getline(in, token, ';')) {
        PathEvent ev;
        const auto open = token.find('(');
        const std::string name = token.substr(0, open);
        std::vector<long long> args;
        if (open != std::string::npos) {
            if (token.back() != ')') fail();
            std::istringstream list(token.substr(open + 1, token.size() - open - 2));
            std::string item;
            while (std::getline(list, item, ',')) {
                try {
                    args.push_back(std::stoll(item));
                } catch (const std::exception&) {
                    fail();
                }
            }
        }
        if (name == "init" && args.empty()) ev.kind = EventKind::init;
        else if (name == "terminate" && args.empty()) ev.kind = EventKind::terminate;
        else if (name == "add" && args.size() == 2) {
            ev.kind = EventKind::add;
            ev.index = args[0];
            ev.side = args[1] > 0 ? 1 : -1;
        } else if (name == "drop" && args.size() == 1) {
            ev.kind = EventKind::drop;
            ev.index = args[0];
        } else if (name == "knot-cross" && args.size() == 3) {
            ev.kind = EventKind::knot_cross;
            ev.index = args[0];
            ev.knot = args[1];
            ev.side = args[2] > 0 ? 1 : -1;
        } else {
            fail();
        }
        events.push_back(ev);
    }
    return events;
}

PathState initialize(const Dataset& data, const LossModel& loss, const PathOptions& options)
{
    validate(data);
    if (loss.residual_kind() != residual_kind_for(data.task)) {
        throw Error(ErrorKind::task_mismatch, std::string("loss '") + to_string(loss.kind()) +
                                                  "' does not fit a " + to_string(data.task) +
                                                  " dataset");
    }
    PathState state;
    state.use_intercept = options.intercept;
    state.beta = Eigen::VectorXd::Zero(data.p());
    state.direction = Eigen::VectorXd::Zero(data.p());
    state.intercept = options.intercept ? fit_intercept(data, loss) : 0.0;

    const Eigen::VectorXd eta = predict(data.x, state.beta, state.intercept);
    state.residual_piece.resize(static_cast<std::size_t>(data.n()));
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        state.residual_piece[i] =
            loss.piece_index(generalized_residual(loss.residual_kind(), data.y(i), eta(i)));
    }
    refresh_residuals(state, data, loss);

    const double lambda_max = state.gradient.cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, data.x.cwiseAbs().maxCoeff() * static_cast<double>(data.n()));
    if (!(lambda_max > 1e-14 * scale)) {
        state.lambda = 0.0;
        state.trivial = true;
        rebuild_curvature(state, data, loss);
        return state;
    }
    state.lambda = lambda_max;
    const double tie = options.event_tol * std::max(1.0, lambda_max);
    for (Eigen::Index j = 0; j < data.p(); ++j) {
        const double g = state.gradient(j);
        if (std::abs(g) >= lambda_max - tie) {
            state.active.push_back(j);
            state.signs.push_back(-sign_of(g));
        }
    }
    state.just_dropped.clear();
    rebuild_curvature(state, data, loss);
    compute_direction(state);
    return state;
}

bool compute_direction(PathState& state)
{
    state.direction.setZero();
    state.intercept_direction = 0.0;
    state.direction_singular = false;
    const auto q = state.system_size();
    if (q == 0) return true;
    state.curvature_factor.compute(state.curvature);
    if (state.active.empty()) return true;
    if (factor_is_singular(state.curvature_factor, state.curvature)) {
        state.direction_singular = true;
        return false;
    }
    const Eigen::VectorXd gamma = state.curvature_factor.solve(system_signs(state));
    const auto off = offset(state);
    if (state.use_intercept) state.intercept_direction = gamma(0);
    for (std::size_t k = 0; k < state.active.size(); ++k) state.direction(state.active[k]) = gamma(off + k);
    return true;
}

EventBatch next_event(const PathState& state, const Dataset& data, const LossModel& loss,
                      const PathOptions& options)
{
    struct Candidate {
        PathEvent event;
        int order; // drops, then knot crossings, then adds
    };
    std::vector<Candidate> candidates;

    const auto kind = loss.residual_kind();
    const auto knots = loss.knots();
    const double lambda = state.lambda;
    const Eigen::VectorXd v = (data.x * state.direction).array() + state.intercept_direction;

    Eigen::VectorXd weighted(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        weighted(i) = 2 * loss.piece(state.residual_piece[i]).a * v(i);
    }
    const Eigen::VectorXd rate = data.x.transpose() * weighted;

    for (Eigen::Index j = 0; j < data.p(); ++j) {
        if (contains(state.active, j) || contains(state.excluded, j)) continue;
        const double g = state.gradient(j);
        const bool fresh_drop = contains(state.just_dropped, j);
        auto consider = [&](double num, double den, int entry_sign) {
            if (den <= rate_tol) return;
            const double d = std::max(num / den, 0.0);
            if (fresh_drop && d <= options.event_tol) return;
            PathEvent ev;
            ev.kind = EventKind::add;
            ev.index = j;
            ev.side = entry_sign;
            ev.delta_lambda = d;
            candidates.push_back({ev, 2});
        };
        consider(lambda - g, rate(j) + 1.0, -1); // g reaches +(lambda - d)
        consider(lambda + g, 1.0 - rate(j), +1); // g reaches -(lambda - d)
    }

    for (std::size_t k = 0; k < state.active.size(); ++k) {
        const Eigen::Index j = state.active[k];
        const double b = state.beta(j);
        const double gam = state.direction(j);
        if (state.signs[k] * gam < 0) {
            PathEvent ev;
            ev.kind = EventKind::drop;
            ev.index = j;
            ev.delta_lambda = std::max(-b / gam, 0.0);
            candidates.push_back({ev, 0});
        }
    }

    if (!knots.empty()) {
        const double vscale = v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0;
        for (Eigen::Index i = 0; i < data.n(); ++i) {
            const double u = residual_sign(kind, data.y(i)) * v(i);
            if (std::abs(u) <= 1e-13 * vscale || u == 0.0) continue;
            const std::size_t piece = state.residual_piece[i];
            PathEvent ev;
            ev.kind = EventKind::knot_cross;
            ev.index = i;
            if (u > 0 && piece < knots.size()) {
                ev.knot = static_cast<Eigen::Index>(piece);
                ev.side = 1;
            } else if (u < 0 && piece > 0) {
                ev.knot = static_cast<Eigen::Index>(piece - 1);
                ev.side = -1;
            } else {
                continue;
            }
            ev.delta_lambda = std::max((knots[ev.knot] - state.residual(i)) / u, 0.0);
            candidates.push_back({ev, 1});
        }
    }

    EventBatch batch;
    const double floor_step = std::max(lambda - options.lambda_min, 0.0);
    double best = inf;
    for (const auto& c : candidates) best = std::min(best, c.event.delta_lambda);
    if (floor_step <= best + options.event_tol) {
        batch.delta_lambda = floor_step;
        batch.terminal = true;
        return batch;
    }
    batch.delta_lambda = best;
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& l, const Candidate& r) { return l.order < r.order; });
    std::size_t adds = 0;
    for (const auto& c : candidates) {
        if (c.event.delta_lambda <= best + options.event_tol) {
            batch.events.push_back(c.event);
            if (c.event.kind == EventKind::add) ++adds;
        }
    }
    // Two sign conditions of the same variable can tie; keep the first.
    std::vector<Eigen::Index> seen;
    std::erase_if(batch.events, [&](const PathEvent& ev) {
        if (ev.kind != EventKind::add) return false;
        if (contains(seen, ev.index)) return true;
        seen.push_back(ev.index);
        return false;
    });
    if (adds > 0) {
        const std::size_t cap = options.max_active.value_or(
            static_cast<std::size_t>(std::min(data.n(), data.p())));
        std::size_t drops = 0;
        for (const auto& ev : batch.events) drops += ev.kind == EventKind::drop ? 1 : 0;
        if (state.active.size() - drops + seen.size() > cap) {
            batch.terminal = true;
            batch.events.clear();
        }
    }
    return batch;
}

void apply_event(PathState& state, const EventBatch& batch, const Dataset& data,
                 const LossModel& loss, const PathOptions& options)
{
    const double d = batch.delta_lambda;
    state.beta += d * state.direction;
    state.intercept += d * state.intercept_direction;
    state.lambda = batch.terminal && d >= state.lambda - options.lambda_min
                       ? std::max(options.lambda_min, 0.0)
                       : state.lambda - d;
    state.just_dropped.clear();

    if (!batch.terminal) {
        for (const auto& ev : batch.events) {
            if (ev.kind != EventKind::drop) continue;
            remove_active(state, ev.index);
            state.just_dropped.push_back(ev.index);
        }
        for (const auto& ev : batch.events) {
            if (ev.kind == EventKind::knot_cross) cross_knot(state, data, loss, ev.index, ev.side);
        }
        for (const auto& ev : batch.events) {
            if (ev.kind == EventKind::add) add_active(state, data, loss, ev.index, ev.side);
        }
        if (++state.updates_since_refresh >= options.refresh_every) rebuild_curvature(state, data, loss);
    }
    refresh_residuals(state, data, loss);
    if (!batch.terminal) {
        std::vector<Eigen::Index> recent;
        for (const auto& ev : batch.events) {
            if (ev.kind == EventKind::add) recent.push_back(ev.index);
        }
        if (!compute_direction(state)) drop_collinear(state, data, loss, recent);
        polish(state, data, loss);
    }
}

namespace {

// Zero-curvature configuration: C has a null direction, along which the
// active gradient and the objective are constant at fixed lambda. Slide
// along it (towards larger l1 norm) until an observation reaches a curved
// piece or a coefficient reaches zero. Returns the events applied; empty
// means the flat direction never ends.
std::vector<PathEvent> zero_curvature_jump(PathState& state, const Dataset& data,
                                           const LossModel& loss, const PathOptions& options)
{
    const auto kind = loss.residual_kind();
    const auto knots = loss.knots();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(state.curvature);
    Eigen::VectorXd null = eig.eigenvectors().col(0);
    const auto off = offset(state);

    auto expand = [&](const Eigen::VectorXd& dir, Eigen::VectorXd& beta_dir, double& icpt_dir) {
        beta_dir = Eigen::VectorXd::Zero(data.p());
        icpt_dir = state.use_intercept ? dir(0) : 0.0;
        for (std::size_t k = 0; k < state.active.size(); ++k) beta_dir(state.active[k]) = dir(off + k);
    };

    struct Plan {
        double step = inf;
        std::vector<PathEvent> events;
    };
    auto plan_for = [&](const Eigen::VectorXd& dir) {
        Plan plan;
        Eigen::VectorXd beta_dir;
        double icpt_dir = 0;
        expand(dir, beta_dir, icpt_dir);
        const Eigen::VectorXd v = (data.x * beta_dir).array() + icpt_dir;
        const double vscale = v.cwiseAbs().maxCoeff();
        std::vector<PathEvent> all;
        for (std::size_t k = 0; k < state.active.size(); ++k) {
            const Eigen::Index j = state.active[k];
            if (state.beta(j) != 0.0 && state.beta(j) * beta_dir(j) < 0) {
                PathEvent ev;
                ev.kind = EventKind::drop;
                ev.index = j;
                ev.delta_lambda = -state.beta(j) / beta_dir(j);
                all.push_back(ev);
            }
        }
        for (Eigen::Index i = 0; i < data.n(); ++i) {
            const double u = residual_sign(kind, data.y(i)) * v(i);
            if (std::abs(u) <= 1e-9 * vscale) continue;
            const std::size_t piece = state.residual_piece[i];
            PathEvent ev;
            ev.kind = EventKind::knot_cross;
            ev.index = i;
            if (u > 0 && piece < knots.size()) {
                ev.knot = static_cast<Eigen::Index>(piece);
                ev.side = 1;
            } else if (u < 0 && piece > 0) {
                ev.knot = static_cast<Eigen::Index>(piece - 1);
                ev.side = -1;
            } else {
                continue;
            }
            ev.delta_lambda = std::max((knots[ev.knot] - state.residual(i)) / u, 0.0);
            all.push_back(ev);
        }
        for (const auto& ev : all) plan.step = std::min(plan.step, ev.delta_lambda);
        const double tol = options.event_tol * std::max(1.0, plan.step);
        for (const auto& ev : all) {
            if (ev.delta_lambda <= plan.step + tol) plan.events.push_back(ev);
        }
        return plan;
    };

    const double along = system_signs(state).dot(null);
    Plan plan;
    if (std::abs(along) > 1e-12) {
        if (along < 0) null = -null;
        plan = plan_for(null);
    } else {
        Plan fwd = plan_for(null);
        Plan back = plan_for(-null);
        if (back.step < fwd.step) {
            null = -null;
            plan = std::move(back);
        } else {
            plan = std::move(fwd);
        }
    }
    if (!std::isfinite(plan.step)) return {};

    Eigen::VectorXd beta_dir;
    double icpt_dir = 0;
    expand(null, beta_dir, icpt_dir);
    state.beta += plan.step * beta_dir;
    state.intercept += plan.step * icpt_dir;
    state.just_dropped.clear();
    for (auto& ev : plan.events) {
        if (ev.kind != EventKind::drop) continue;
        remove_active(state, ev.index);
        state.just_dropped.push_back(ev.index);
    }
    for (auto& ev : plan.events) {
        if (ev.kind == EventKind::knot_cross) cross_knot(state, data, loss, ev.index, ev.side);
    }
    for (auto& ev : plan.events) ev.delta_lambda = 0.0;
    rebuild_curvature(state, data, loss);
    refresh_residuals(state, data, loss);
    if (compute_direction(state)) polish(state, data, loss);
    return plan.events;
}

Breakpoint snapshot(const PathState& state, std::vector<PathEvent> events)
{
    Breakpoint bp;
    bp.lambda = state.lambda;
    bp.beta = state.beta;
    bp.intercept = state.intercept;
    bp.events = std::move(events);
    return bp;
}

void check_breakpoint(const PathState& state, const Dataset& data, const LossModel& loss,
                      const PathOptions& options)
{
    const auto report = verify_kkt(data, loss, state.beta, state.intercept, state.use_intercept,
                                   state.lambda, options.kkt_abort_tol);
    if (!report.passed) {
        std::ostringstream msg;
        msg << "KKT conditions fail at lambda=" << state.lambda
            << " (active violation " << report.max_active_violation << ", inactive violation "
            << report.max_inactive_violation << ", intercept " << report.intercept_violation
            << ", sign violations " << report.sign_violations << ")";
        throw Error(ErrorKind::kkt_violation, msg.str());
    }
}

} // namespace

RegularizationPath solve_path(const Dataset& data, const LossModel& loss, const PathOptions& options)
{
    PathState state = initialize(data, loss, options);

    RegularizationPath path;
    path.loss = loss;
    path.meta.n = data.n();
    path.meta.p = data.p();
    path.meta.task = data.task;
    path.meta.intercept = options.intercept;
    path.meta.standardized = data.standardized;
    path.meta.center = data.center;
    path.meta.scale = data.scale;
    path.meta.column_names = data.column_names;

    path.breakpoints.push_back(snapshot(state, {PathEvent{}}));
    auto finish = [&](PathStatus status) {
        path.meta.status = status;
        path.meta.warnings = state.warnings;
        path.breakpoints.back().events.push_back(PathEvent{EventKind::terminate});
        return path;
    };
    if (state.trivial) return finish(PathStatus::optimum);
    if (options.lambda_min >= state.lambda) return finish(PathStatus::complete);

    std::vector<Eigen::Index> initial(state.active);
    if (state.direction_singular) drop_collinear(state, data, loss, initial);

    while (true) {
        if (path.meta.steps >= options.max_steps) {
            path.meta.status = PathStatus::budget_exceeded;
            path.meta.warnings = state.warnings;
            throw BudgetExceeded(std::move(path));
        }
        if (state.direction_singular) {
            auto events = zero_curvature_jump(state, data, loss, options);
            if (events.empty()) {
                state.warnings.push_back("flat direction without end at lambda=" +
                                         std::to_string(state.lambda));
                return finish(PathStatus::unbounded);
            }
            ++path.meta.steps;
            path.breakpoints.push_back(snapshot(state, std::move(events)));
            continue;
        }
        const EventBatch batch = next_event(state, data, loss, options);
        apply_event(state, batch, data, loss, options);
        ++path.meta.steps;
        check_breakpoint(state, data, loss, options);

        auto& last = path.breakpoints.back();
        if (batch.delta_lambda == 0.0 && !batch.terminal && last.lambda == state.lambda) {
            // Same point; fold the events into the previous breakpoint.
            last.beta = state.beta;
            last.intercept = state.intercept;
            last.events.insert(last.events.end(), batch.events.begin(), batch.events.end());
        } else {
            path.breakpoints.push_back(snapshot(state, batch.events));
        }
        if (batch.terminal) {
            const bool capped = state.lambda > std::max(options.lambda_min, 0.0);
            return finish(capped ? PathStatus::max_active : PathStatus::complete);
        }
    }
}

std::pair<Eigen::VectorXd, double> coefficients_at(const RegularizationPath& path, double lambda)
{
    const auto& bps = path.breakpoints;
    if (bps.empty()) throw Error(ErrorKind::empty_path, "path has no breakpoints");
    if (lambda >= bps.front().lambda) return {bps.front().beta, bps.front().intercept};
    for (std::size_t k = 0; k + 1 < bps.size(); ++k) {
        const auto& hi = bps[k];
        const auto& lo = bps[k + 1];
        if (lambda == hi.lambda) return {hi.beta, hi.intercept};
        if (lambda < hi.lambda && lambda >= lo.lambda) {
            if (lambda == lo.lambda) return {lo.beta, lo.intercept};
            const double w = (lambda - lo.lambda) / (hi.lambda - lo.lambda);
            return {lo.beta + w * (hi.beta - lo.beta), lo.intercept + w * (hi.intercept - lo.intercept)};
        }
    }
    if (lambda == bps.back().lambda) return {bps.back().beta, bps.back().intercept};
    throw Error(ErrorKind::invalid_parameter,
                "lambda " + std::to_string(lambda) + " lies below the end of the path");
}

KktReport verify_kkt(const Dataset& data, const LossModel& loss, const Eigen::VectorXd& beta,
                     double intercept, bool use_intercept, double lambda, double tol)
{
    const Gradient g = total_gradient(loss, data, beta, intercept);
    const double slack = tol * std::max(lambda, 1.0);
    KktReport report;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double gj = g.coef(j);
        if (std::abs(beta(j)) > tol) {
            report.max_active_violation =
                std::max(report.max_active_violation, std::abs(std::abs(gj) - lambda));
            if (gj * beta(j) > 0 && std::abs(gj) > slack) ++report.sign_violations;
        } else {
            report.max_inactive_violation =
                std::max(report.max_inactive_violation, std::abs(gj) - lambda);
        }
    }
    report.max_inactive_violation = std::max(report.max_inactive_violation, 0.0);
    if (use_intercept) report.intercept_violation = std::abs(g.intercept);
    report.passed = report.max_active_violation <= slack && report.max_inactive_violation <= slack &&
                    report.intercept_violation <= slack && report.sign_violations == 0;
    return report;
}

} // namespace regpath
