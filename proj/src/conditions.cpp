#include "fieldlab/conditions.hpp"
#include "fieldlab/format.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fieldlab {

std::string_view to_string(ConditionId id)
{
    switch (id) {
    case ConditionId::f0: return "f0";
    case ConditionId::f1p: return "f1p";
    case ConditionId::f2: return "f2";
    case ConditionId::f3: return "f3";
    case ConditionId::M1: return "M1";
    case ConditionId::M2: return "M2";
    case ConditionId::M3: return "M3";
    case ConditionId::M2p: return "M2p";
    case ConditionId::h_sandwich: return "h_sandwich";
    case ConditionId::h_nonneg: return "h_nonneg";
    case ConditionId::h_dead_zone: return "h_dead_zone";
    case ConditionId::h_witness: return "h_witness";
    case ConditionId::hbar_ratio: return "hbar_ratio";
    case ConditionId::H_sandwich: return "H_sandwich";
    case ConditionId::H_nonneg: return "H_nonneg";
    case ConditionId::H_dead_zone: return "H_dead_zone";
    case ConditionId::Hbar_zeta_gap: return "Hbar_zeta_gap";
    case ConditionId::Hbar_growth: return "Hbar_growth";
    }
    return "?";
}

std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::Holds: return "Holds";
    case Verdict::Fails: return "Fails";
    case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

std::vector<double> SamplingGrid::points() const
{
    if (points_per_decade < 1 || hi_decade <= lo_decade)
        throw std::invalid_argument("sampling grid is empty");
    const int n = (hi_decade - lo_decade) * points_per_decade + 1;
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        t[std::size_t(i)] = std::pow(10.0, lo_decade + double(i) / points_per_decade);
    return t;
}

const ConditionReport& find_report(const std::vector<ConditionReport>& reports, ConditionId id)
{
    for (const auto& r : reports)
        if (r.condition_id == id)
            return r;
    throw std::out_of_range("no report for condition " + std::string(to_string(id)));
}

namespace {

constexpr int kTrendDecades = 3;

// Samples of one scalar quantity over a window of kTrendDecades decades,
// split per decade.
struct Window {
    std::vector<std::vector<std::pair<double, double>>> decades;
    bool valid = false;

    const std::vector<std::pair<double, double>>& last() const { return decades.back(); }

    std::vector<std::pair<double, double>> checkpoints() const
    {
        std::vector<std::pair<double, double>> out;
        for (const auto& d : decades)
            if (!d.empty())
                out.push_back(d.back());
        return out;
    }
};

// Upper window: the top kTrendDecades decades of the region where q is finite.
Window upper_window(const std::vector<double>& grid, const std::function<double(double)>& q)
{
    std::vector<std::pair<double, double>> finite;
    for (double t : grid) {
        const double v = q(t);
        if (std::isfinite(v))
            finite.emplace_back(t, v);
    }
    Window w;
    if (finite.size() < 2)
        return w;
    const double t_hi = finite.back().first;
    const double t_lo = t_hi * std::pow(10.0, -kTrendDecades);
    if (grid.front() > t_lo)
        return w;
    w.decades.resize(kTrendDecades);
    for (const auto& [t, v] : finite) {
        if (t < t_lo)
            continue;
        int k = int(std::floor(std::log10(t / t_lo)));
        k = std::clamp(k, 0, kTrendDecades - 1);
        w.decades[std::size_t(k)].emplace_back(t, v);
    }
    w.valid = std::all_of(w.decades.begin(), w.decades.end(), [](const auto& d) { return d.size() >= 2; });
    return w;
}

// Lower window: the first kTrendDecades decades of the grid; decade 0 is the smallest.
Window lower_window(const std::vector<double>& grid, const std::function<double(double)>& q)
{
    Window w;
    if (grid.empty())
        return w;
    const double t_lo = grid.front();
    const double t_hi = t_lo * std::pow(10.0, kTrendDecades);
    if (grid.back() < t_hi)
        return w;
    w.decades.resize(kTrendDecades);
    for (double t : grid) {
        if (t > t_hi)
            break;
        int k = int(std::floor(std::log10(t / t_lo)));
        k = std::clamp(k, 0, kTrendDecades - 1);
        w.decades[std::size_t(k)].emplace_back(t, q(t));
    }
    w.valid = std::all_of(w.decades.begin(), w.decades.end(), [](const auto& d) { return d.size() >= 2; });
    return w;
}

double max_abs(const std::vector<std::pair<double, double>>& d)
{
    double m = 0.0;
    for (const auto& s : d)
        m = std::max(m, std::abs(s.second));
    return m;
}

// Monotone in the sense sign * (v_{i+1} - v_i) >= -slack, sign = +1 for nondecreasing.
bool monotone(const std::vector<std::pair<double, double>>& d, int sign)
{
    for (std::size_t i = 1; i < d.size(); ++i) {
        const double slack = 1e-12 * std::max(std::abs(d[i].second), std::abs(d[i - 1].second));
        if (sign * (d[i].second - d[i - 1].second) < -slack)
            return false;
    }
    return true;
}

// Classifies lim q(t) = 0 as t → ∞ from the upper window.
ConditionReport classify_vanishing(ConditionId id, const Window& w, const std::string& what)
{
    ConditionReport r{id, Verdict::Inconclusive, {}, {}};
    if (!w.valid) {
        r.message = what + ": fewer than three finite decades sampled";
        return r;
    }
    r.evidence = w.checkpoints();
    std::vector<double> a;
    for (const auto& d : w.decades)
        a.push_back(max_abs(d));
    std::vector<std::pair<double, double>> abs_tail;
    for (const auto& [t, v] : w.last())
        abs_tail.emplace_back(t, std::abs(v));

    const bool decreasing = a[0] > a[1] && a[1] > a[2];
    const bool nondecreasing = a[1] >= a[0] * (1 - 1e-3) && a[2] >= a[1] * (1 - 1e-3);
    if (decreasing && monotone(abs_tail, -1)) {
        // A decreasing tail may still level off at a positive limit. Compare
        // log-slopes per decade; power decay keeps them roughly equal.
        const double s1 = std::log(a[1] / a[0]);
        const double s2 = std::log(a[2] / a[1]);
        const double drop = (a[1] - a[2]) / (a[0] - a[1]);
        const double limit = drop < 1.0 ? a[2] - (a[1] - a[2]) * drop / (1.0 - drop) : 0.0;
        if (s2 <= 0.5 * s1) {
            r.verdict = Verdict::Holds;
            r.message = what + ": magnitude decays like a power over the outer decades";
        } else if (limit > 0.5 * a[2]) {
            r.verdict = Verdict::Fails;
            r.message = what + ": magnitude levels off near " + fmt17(limit) + ", not zero";
        } else {
            r.message = what + ": decay is slowing, trend not certified";
        }
    } else if (nondecreasing && a[2] > 0.0 && monotone(abs_tail, +1)) {
        r.verdict = Verdict::Fails;
        r.message = what + ": magnitude does not decay (limit is nonzero or infinite)";
    } else {
        r.message = what + ": non-monotone tail, trend not certified";
    }
    return r;
}

ConditionReport check_oddness(const Nonlinearity& f, const std::vector<double>& grid)
{
    ConditionReport r{ConditionId::f0, Verdict::Holds, {}, {}};
    for (double t : grid) {
        const double fp = f(t), fm = f(-t);
        const double Fp = f.antideriv(t), Fm = f.antideriv(-t);
        const bool odd = std::abs(fp + fm) <= 1e-12 * std::max(1.0, std::abs(fp));
        const bool even = std::abs(Fp - Fm) <= 1e-12 * std::max(1.0, std::abs(Fp));
        if (!odd || !even)
            r.evidence.emplace_back(t, odd ? Fp - Fm : fp + fm);
    }
    const double F0 = f.antideriv(0.0), f0 = f(0.0);
    if (F0 != 0.0 || f0 != 0.0)
        r.evidence.emplace_back(0.0, f0 != 0.0 ? f0 : F0);
    if (!r.evidence.empty()) {
        r.verdict = Verdict::Fails;
        r.message = "f is not odd (or F not even, or F(0) != 0) at sampled points";
    } else {
        r.message = "f(-t) = -f(t) and F(-t) = F(t) at every sampled t";
    }
    return r;
}

ConditionReport check_negative_slope(const Nonlinearity& f, const std::vector<double>& grid)
{
    ConditionReport r{ConditionId::f1p, Verdict::Inconclusive, {}, {}};
    const Window w = lower_window(grid, [&](double t) { return f(t) / t; });
    if (!w.valid) {
        r.message = "f(t)/t: grid does not span three decades near 0";
        return r;
    }
    for (const auto& d : w.decades)
        for (const auto& s : d)
            if (!(s.second < 0.0))
                r.evidence.push_back(s);
    if (!r.evidence.empty()) {
        if (r.evidence.size() > 16)
            r.evidence.resize(16);
        r.verdict = Verdict::Fails;
        r.message = "f(t)/t is not negative near 0";
        return r;
    }
    std::vector<double> upper;
    for (const auto& d : w.decades) {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& s : d)
            m = std::max(m, s.second);
        upper.push_back(m);
    }
    r.evidence = w.checkpoints();
    if (std::abs(upper[0]) >= 0.5 * std::max(std::abs(upper[1]), std::abs(upper[2]))) {
        r.verdict = Verdict::Holds;
        r.message = "f(t)/t stays bounded away from 0 from below as t -> 0";
    } else {
        r.message = "f(t)/t is negative but trends toward 0 as t -> 0";
    }
    return r;
}

ConditionReport check_subcritical(const Nonlinearity& f, int dimension, const std::vector<double>& grid)
{
    if (dimension >= 3) {
        const double critical = double(dimension + 2) / double(dimension - 2);
        const Window w = upper_window(grid, [&](double t) { return f(t) / std::pow(t, critical); });
        return classify_vanishing(ConditionId::f2, w, "f(t)/|t|^((N+2)/(N-2))");
    }
    // N = 2: polynomial growth is below every exp(αt²); certify a bounded growth exponent.
    ConditionReport r{ConditionId::f2, Verdict::Inconclusive, {}, {}};
    const Window w = upper_window(grid, [&](double t) { return std::log(std::abs(f(t))); });
    if (!w.valid) {
        r.message = "log|f|: fewer than three finite decades sampled";
        return r;
    }
    r.evidence = w.checkpoints();
    std::vector<double> slope;
    for (std::size_t k = 1; k < r.evidence.size(); ++k)
        slope.push_back((r.evidence[k].second - r.evidence[k - 1].second) /
                        std::log(r.evidence[k].first / r.evidence[k - 1].first));
    const bool bounded = std::all_of(slope.begin(), slope.end(), [](double s) { return std::isfinite(s); }) &&
                         slope.back() <= slope.front() * 1.05 + 1e-9;
    if (bounded) {
        r.verdict = Verdict::Holds;
        r.message = "f grows polynomially, hence slower than exp(alpha t^2) for every alpha > 0";
    } else {
        r.message = "growth exponent of f increases over the outer decades";
    }
    return r;
}

ConditionReport check_positive_primitive(const Nonlinearity& f, const std::vector<double>& grid)
{
    ConditionReport r{ConditionId::f3, Verdict::Fails, {}, {}};
    const double Fz = f.antideriv(f.zeta());
    r.evidence.emplace_back(f.zeta(), Fz);
    if (Fz > 0.0) {
        r.verdict = Verdict::Holds;
        r.message = "F(zeta) > 0 at the stored witness";
        return r;
    }
    for (double t : grid) {
        const double Ft = f.antideriv(t);
        if (Ft > 0.0) {
            r.verdict = Verdict::Holds;
            r.evidence.emplace_back(t, Ft);
            r.message = "stored witness fails but F > 0 at a sampled point";
            return r;
        }
    }
    r.message = "F <= 0 at zeta and at every sampled point";
    return r;
}

} // namespace

std::vector<ConditionReport> check_f_conditions(const Nonlinearity& f, int dimension, const SamplingGrid& grid)
{
    if (dimension < 2)
        throw std::invalid_argument("check_f_conditions: dimension must be >= 2");
    const std::vector<double> t = grid.points();
    return {check_oddness(f, t), check_negative_slope(f, t), check_subcritical(f, dimension, t),
            check_positive_primitive(f, t)};
}

std::vector<ConditionReport> check_m_conditions(const KirchhoffFunction& M, int dimension, const SamplingGrid& grid)
{
    if (dimension < 2)
        throw std::invalid_argument("check_m_conditions: dimension must be >= 2");
    const std::vector<double> t = grid.points();
    std::vector<ConditionReport> out;

    ConditionReport m1{ConditionId::M1, Verdict::Holds, {}, {}};
    const double m0 = M.m0();
    auto below_floor = [&](double s) {
        const double v = M(s);
        return std::isnan(v) || v < m0 * (1.0 - 1e-14);
    };
    if (below_floor(0.0))
        m1.evidence.emplace_back(0.0, M(0.0));
    for (double s : t)
        if (below_floor(s))
            m1.evidence.emplace_back(s, M(s));
    if (!m1.evidence.empty()) {
        m1.verdict = Verdict::Fails;
        m1.message = "M(t) < m0 at sampled points";
    } else {
        std::ostringstream msg;
        msg << "M(t) >= m0 = " << m0 << " at every sampled t";
        m1.message = msg.str();
    }
    out.push_back(std::move(m1));
    if (dimension == 2)
        return out;

    const double shrink = 1.0 - 2.0 / double(dimension);
    auto G = [&](double s) { return M.antideriv(s) - shrink * M(s) * s; };
    const Window wg = upper_window(t, G);

    ConditionReport m2{ConditionId::M2, Verdict::Inconclusive, {}, {}};
    ConditionReport m2p_literal{ConditionId::M2p, Verdict::Inconclusive, {}, {}};
    if (wg.valid) {
        m2.evidence = wg.checkpoints();
        m2p_literal.evidence = m2.evidence;
        std::vector<double> lo, hi;
        for (const auto& d : wg.decades) {
            double mn = std::numeric_limits<double>::infinity(), mx = -mn;
            for (const auto& s : d) {
                mn = std::min(mn, s.second);
                mx = std::max(mx, s.second);
            }
            lo.push_back(mn);
            hi.push_back(mx);
        }
        const bool growing = lo[0] < lo[1] && lo[1] < lo[2] && lo[2] > 0.0 && monotone(wg.last(), +1);
        const bool nonpositive_tail = hi[2] <= 0.0 && monotone(wg.last(), -1);
        if (growing) {
            m2.verdict = Verdict::Holds;
            m2.message = "G(t) increases without sign change over the outer decades (liminf = +inf)";
            m2p_literal.verdict = Verdict::Fails;
        } else if (nonpositive_tail || (hi[0] >= hi[1] && hi[1] >= hi[2] && monotone(wg.last(), -1))) {
            m2.verdict = Verdict::Fails;
            m2.message = "G(t) does not grow over the outer decades";
            m2p_literal.verdict = nonpositive_tail ? Verdict::Holds : Verdict::Inconclusive;
        } else {
            m2.message = "G(t): non-monotone tail, trend not certified";
        }
    } else {
        m2.message = "G(t): fewer than three finite decades sampled";
    }

    ConditionReport m2p{ConditionId::M2p, Verdict::Inconclusive, m2p_literal.evidence, {}};
    if (m2p_literal.verdict == Verdict::Holds) {
        m2p.verdict = Verdict::Holds;
        m2p.message = "limsup G(t) <= 0: G is nonpositive and nonincreasing over the last decade";
    } else if (m2.verdict == Verdict::Holds) {
        m2p.verdict = Verdict::Holds;
        m2p.message = "alternative satisfied through (M2); limsup G(t) <= 0 itself fails";
    } else if (m2.verdict == Verdict::Fails && m2p_literal.verdict == Verdict::Fails) {
        m2p.verdict = Verdict::Fails;
        m2p.message = "neither (M2) nor limsup G(t) <= 0";
    } else {
        m2p.message = "G(t) trend not certified for either alternative";
    }

    const double growth = 2.0 / double(dimension - 2);
    ConditionReport m3 =
        classify_vanishing(ConditionId::M3, upper_window(t, [&](double s) { return M(s) / std::pow(s, growth); }),
                           "M(t)/t^(2/(N-2))");

    out.push_back(std::move(m2));
    out.push_back(std::move(m3));
    out.push_back(std::move(m2p));
    return out;
}

} // namespace fieldlab
