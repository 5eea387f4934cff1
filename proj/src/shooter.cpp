#include "fieldlab/shooter.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <sstream>
#include <stdexcept>

#include "fieldlab/envelope.hpp"
#include "fieldlab/errors.hpp"
#include "fieldlab/functionals.hpp"

namespace fieldlab {

namespace {

using State = std::array<double, 2>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Rhs {
    const Nonlinearity& f;
    double friction;  // N - 1
    State operator()(double r, const State& y) const { return {y[1], -friction / r * y[1] - f(y[0])}; }
};

State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms)
{
    State out = y;
    for (auto [c, k] : terms) {
        out[0] += h * c * (*k)[0];
        out[1] += h * c * (*k)[1];
    }
    return out;
}

bool finite(const State& y) { return std::isfinite(y[0]) && std::isfinite(y[1]); }

// Energy termination is switched off when a trajectory is re-integrated for
// profile extraction, since the undershoot side trips it long before the
// tail is resolved.
Trajectory integrate(const Nonlinearity& f, int N, double s, const IntegratorOptions& opts, bool stop_on_energy)
{
    if (N < 2)
        throw std::invalid_argument("integrate_ivp: dimension must be >= 2");
    if (!std::isfinite(s))
        throw std::invalid_argument("integrate_ivp: shoot height must be finite");
    if (s == 0.0)
        throw std::invalid_argument("integrate_ivp: s = 0 gives the trivial solution");
    if (!(opts.abs_tol > 0.0) || !(opts.rel_tol > 0.0) || !(opts.max_step > 0.0))
        throw std::invalid_argument("integrate_ivp: tolerances and max_step must be positive");

    const double kappa = f.decay_rate();
    if (!(kappa > 0.0) && !opts.max_radius)
        throw std::invalid_argument("integrate_ivp: omega = 0 needs an explicit max_radius");
    const double length = kappa > 0.0 ? 1.0 / kappa : 1.0;
    const double r_max = opts.max_radius.value_or(50.0 * length);
    const double bound = opts.blowup_bound.value_or(1e6 * (1.0 + std::abs(s)));
    const double h_max = opts.max_step * length;

    Trajectory t;
    t.dimension = N;
    t.shoot_height = s;
    auto record = [&](double r, const State& y) {
        t.radii.push_back(r);
        t.values.push_back(y[0]);
        t.derivs.push_back(y[1]);
    };
    auto finish = [&](TrajectoryKind kind, Termination why) {
        t.classification = {kind, int(t.crossing_radii.size())};
        t.termination = why;
        return t;
    };

    record(0.0, {s, 0.0});
    if (stop_on_energy && f.antideriv(s) < 0.0)
        return finish(TrajectoryKind::Trapped, Termination::EnergyNegative);

    // Series start off the singular point r = 0.
    const double r0 = 1e-6 * (1.0 + std::abs(s));
    const double a = f(s);
    const double eps = 1e-6 * (1.0 + std::abs(s));
    const double b = (f(s + eps) - f(s - eps)) / (2.0 * eps);
    const double dN = double(N);
    State y{s - a * r0 * r0 / (2.0 * dN) + a * b * std::pow(r0, 4) / (8.0 * dN * (dN + 2.0)),
            -a * r0 / dN + a * b * std::pow(r0, 3) / (2.0 * dN * (dN + 2.0))};
    double r = r0;
    if (!finite(y))
        return finish(TrajectoryKind::Crossing, Termination::Blowup);
    record(r, y);

    const Rhs rhs{f, dN - 1.0};
    State k1 = rhs(r, y);
    double h = std::min(h_max, 1e-3 * length);
    long steps = 0;
    double peak = std::abs(s);

    while (true) {
        if (++steps > opts.max_steps)
            throw NumericalFailure("integrate_ivp: step budget exhausted at r = " + std::to_string(r));
        h = std::min({h, h_max, r_max - r});
        const State k2 = rhs(r + c2 * h, axpy(y, h, {{a21, &k1}}));
        const State k3 = rhs(r + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
        const State k4 = rhs(r + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const State k5 = rhs(r + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const State k6 =
            rhs(r + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        const State yn = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        const State k7 = rhs(r + h, yn);

        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(yn[i]));
            err = std::max(err, std::abs(e) / sc);
        }
        if (!std::isfinite(err) || !finite(yn)) {
            h *= 0.2;
            if (h < 1e-15 * std::max(1.0, r))
                return finish(TrajectoryKind::Crossing, Termination::Blowup);
            continue;
        }
        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            if (h < 1e-15 * std::max(1.0, r))
                return finish(TrajectoryKind::Crossing, Termination::Blowup);
            continue;
        }

        const double r_new = r + h;
        if (yn[0] != 0.0 && y[0] != 0.0 && (yn[0] > 0.0) != (y[0] > 0.0))
            t.crossing_radii.push_back(r - y[0] * h / (yn[0] - y[0]));
        else if (yn[0] == 0.0)
            t.crossing_radii.push_back(r_new);
        y = yn;
        r = r_new;
        k1 = k7;
        record(r, y);
        peak = std::max(peak, std::abs(y[0]));

        if (std::abs(y[0]) > bound)
            return finish(TrajectoryKind::Crossing, Termination::Blowup);
        if (opts.max_crossings && int(t.crossing_radii.size()) > *opts.max_crossings)
            return finish(TrajectoryKind::Crossing, Termination::CrossingLimit);
        if (stop_on_energy && 0.5 * y[1] * y[1] + f.antideriv(y[0]) < 0.0)
            return finish(TrajectoryKind::Trapped, Termination::EnergyNegative);
        if (r >= r_max) {
            const bool decaying = std::abs(y[0]) <= 1e-6 * peak && y[0] * y[1] < 0.0;
            return finish(decaying ? TrajectoryKind::Decay : TrajectoryKind::Crossing, Termination::MaxRadius);
        }

        const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
    }
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

RadialProfile extract_profile(const NonlinearityPtr& f, int N, int nodes, double s, const ShootingOptions& opts)
{
    IntegratorOptions io = opts.integrator;
    io.max_crossings = nodes;
    const Trajectory tr = integrate(*f, N, s, io, false);
    const auto& rad = tr.radii;
    const auto& val = tr.values;
    const std::size_t n = rad.size();
    const double kappa = f->decay_rate();

    auto fail = [&](const std::string& what) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "find_bound_state: " << what << " (s = " << s << ", nodes = " << nodes << ")";
        throw NumericalFailure(msg.str());
    };
    if (int(tr.crossing_radii.size()) < nodes)
        fail("final trajectory has too few crossings");

    // Last extremum after the last node, then the radius where the unstable
    // mode takes over (|v| grows again or v crosses).
    std::size_t i = 0;
    if (nodes > 0) {
        const double last_node = tr.crossing_radii[std::size_t(nodes - 1)];
        while (i < n && rad[i] <= last_node)
            ++i;
    }
    while (i + 1 < n && std::abs(val[i + 1]) >= std::abs(val[i]) && (val[i + 1] > 0.0) == (val[i] > 0.0))
        ++i;
    const std::size_t extremum = i;
    while (i + 1 < n && std::abs(val[i + 1]) < std::abs(val[i]) && (val[i + 1] > 0.0) == (val[i] > 0.0))
        ++i;
    const double r_div = rad[i];

    const double r_target = r_div - std::log(1.0 / opts.tail_margin) / (2.0 * kappa);
    auto it = std::upper_bound(rad.begin(), rad.end(), r_target);
    if (it == rad.begin())
        fail("tail region not resolved");
    const std::size_t m = std::size_t(it - rad.begin()) - 1;
    if (m <= extremum)
        fail("tail region not resolved; the bracket is too wide or the tolerance too loose");

    double peak = 0.0;
    for (std::size_t j = 0; j <= m; ++j)
        peak = std::max(peak, std::abs(val[j]));
    if (std::abs(val[m]) > opts.tail_threshold * peak)
        fail("profile has not decayed below the tail threshold at the match radius");

    RadialProfile p;
    p.dimension = N;
    p.shoot_height = s;
    p.f = f;
    p.radii.assign(rad.begin(), rad.begin() + std::ptrdiff_t(m + 1));
    p.values.assign(val.begin(), val.begin() + std::ptrdiff_t(m + 1));
    p.derivs.assign(tr.derivs.begin(), tr.derivs.begin() + std::ptrdiff_t(m + 1));
    p.node_count = nodes;
    p.tail = fit_tail(N, p.radii.back(), p.values.back(), kappa);

    const double logd_int = p.derivs.back() / p.values.back();
    const double logd_tail = p.tail->log_derivative(N, p.radii.back());
    if (relative_gap(logd_int, logd_tail) > 1e-4)
        fail("tail log-derivative mismatch " + std::to_string(logd_int) + " vs " + std::to_string(logd_tail));

    check_profile_invariants(p);
    return attach_norms(std::move(p));
}

} // namespace

std::string to_string(const Classification& c)
{
    switch (c.kind) {
    case TrajectoryKind::Decay:
        return "Decay(" + std::to_string(c.crossings) + ")";
    case TrajectoryKind::Trapped:
        return "Trapped(" + std::to_string(c.crossings) + ")";
    case TrajectoryKind::Crossing:
        return "Crossing(" + std::to_string(c.crossings) + ")";
    }
    return "?";
}

std::string to_string(Termination t)
{
    switch (t) {
    case Termination::EnergyNegative:
        return "EnergyNegative";
    case Termination::MaxRadius:
        return "MaxRadius";
    case Termination::Blowup:
        return "Blowup";
    case Termination::CrossingLimit:
        return "CrossingLimit";
    }
    return "?";
}

Trajectory integrate_ivp(const Nonlinearity& f, int dimension, double s, const IntegratorOptions& opts)
{
    return integrate(f, dimension, s, opts, true);
}

RadialProfile find_bound_state(NonlinearityPtr f, int dimension, int nodes, std::pair<double, double> bracket,
                               const ShootingOptions& opts)
{
    if (!f)
        throw std::invalid_argument("find_bound_state: null nonlinearity");
    f->require_admissible();
    if (nodes < 0)
        throw std::invalid_argument("find_bound_state: nodes must be >= 0");
    if (!(opts.bisection_tol > 0.0))
        throw std::invalid_argument("find_bound_state: bisection tolerance must be positive");
    auto [a, b] = bracket;
    if (!std::isfinite(a) || !std::isfinite(b) || a == 0.0 || b == 0.0)
        throw std::invalid_argument("find_bound_state: bracket ends must be finite and nonzero");

    IntegratorOptions io = opts.integrator;
    io.max_crossings = nodes;
    auto classify = [&](double s) { return integrate(*f, dimension, s, io, true).classification; };

    const Classification ca = classify(a), cb = classify(b);
    const bool above_a = ca.crossings > nodes, above_b = cb.crossings > nodes;
    if (above_a == above_b || (above_a ? cb : ca).crossings != nodes) {
        std::ostringstream msg;
        msg << "find_bound_state: invalid bracket for " << nodes << " nodes: s = " << a << " gives "
            << to_string(ca) << ", s = " << b << " gives " << to_string(cb);
        throw std::invalid_argument(msg.str());
    }
    double lo = above_a ? b : a;
    double hi = above_a ? a : b;

    int iter = 0;
    while (std::abs(hi - lo) >= opts.bisection_tol) {
        if (++iter > opts.max_iterations) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "find_bound_state: bisection did not converge in " << opts.max_iterations
                << " iterations; bracket narrowed to [" << std::min(lo, hi) << ", " << std::max(lo, hi) << "]";
            throw NumericalFailure(msg.str());
        }
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        (classify(mid).crossings > nodes ? hi : lo) = mid;
    }
    return extract_profile(f, dimension, nodes, 0.5 * (lo + hi), opts);
}

SolutionFamily solution_family(NonlinearityPtr f, int dimension, int n_max, const ShootingOptions& opts)
{
    if (!f)
        throw std::invalid_argument("solution_family: null nonlinearity");
    f->require_admissible();
    if (n_max < 1 || n_max > opts.family_cap)
        throw std::invalid_argument("solution_family: n_max must lie in [1, " + std::to_string(opts.family_cap) +
                                    "]");
    if (!(opts.scan_factor > 1.0))
        throw std::invalid_argument("solution_family: scan_factor must exceed 1");

    IntegratorOptions io = opts.integrator;
    io.max_crossings = n_max - 1;
    auto count = [&](double s) { return integrate(*f, dimension, s, io, true).classification.crossings; };

    const double start = std::max(dead_zone(*f), 1e-8);
    const double s_max = opts.scan_max.value_or(1e4 * std::max(1.0, f->zeta()));
    std::vector<std::pair<double, int>> scan{{start, count(start)}};
    while (scan.back().second < n_max && scan.back().first < s_max) {
        const double s = scan.back().first * opts.scan_factor;
        scan.emplace_back(s, count(s));
    }

    SolutionFamily fam;
    std::vector<std::pair<double, double>> brackets;
    for (int n = 0; n < n_max; ++n) {
        std::size_t i = 0;
        while (i + 1 < scan.size() && !(scan[i].second <= n && scan[i + 1].second > n))
            ++i;
        if (i + 1 >= scan.size()) {
            fam.warnings.push_back("scan reached s = " + std::to_string(scan.back().first) +
                                   " without a bracket for " + std::to_string(n) + " nodes");
            break;
        }
        double lo = scan[i].first, hi = scan[i + 1].first;
        int k_lo = scan[i].second;
        for (int it = 0; k_lo != n && it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            const int k = count(mid);
            if (k <= n) {
                lo = mid;
                k_lo = k;
            } else {
                hi = mid;
            }
        }
        if (k_lo != n) {
            fam.warnings.push_back("no shoot height with exactly " + std::to_string(n) + " crossings found");
            break;
        }
        brackets.emplace_back(lo, hi);
    }

    std::vector<std::future<RadialProfile>> jobs;
    for (std::size_t n = 0; n < brackets.size(); ++n)
        jobs.push_back(std::async(std::launch::async, [&, n] {
            return find_bound_state(f, dimension, int(n), brackets[n], opts);
        }));
    for (std::size_t n = 0; n < jobs.size(); ++n) {
        try {
            fam.profiles.push_back(jobs[n].get());
        } catch (const NumericalFailure& e) {
            fam.warnings.push_back(e.what());
            for (std::size_t k = n + 1; k < jobs.size(); ++k)
                jobs[k].wait();
            break;
        }
    }

    for (std::size_t n = 1; n < fam.profiles.size(); ++n) {
        const double g0 = grad_norm_sq(fam.profiles[n - 1]);
        const double g1 = grad_norm_sq(fam.profiles[n]);
        if (!(g1 > g0)) {
            fam.gradient_order_strict = false;
            fam.warnings.push_back("gradient norms not strictly increasing between v_" + std::to_string(n) +
                                   " and v_" + std::to_string(n + 1));
        }
    }
    return fam;
}

} // namespace fieldlab
