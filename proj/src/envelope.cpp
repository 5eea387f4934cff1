#include "fieldlab/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fieldlab {

double default_p0(int dimension)
{
    if (dimension < 2)
        throw std::invalid_argument("default_p0: dimension must be >= 2");
    if (dimension == 2)
        return 3.0;
    return 0.5 * (1.0 + double(dimension + 2) / double(dimension - 2));
}

double dead_zone(const Nonlinearity& f)
{
    const double omega = f.omega();
    const double t_max = 1e6 * std::max(1.0, f.zeta());
    const double delta = first_positive_root([&](double t) { return omega * t + f(t); }, t_max, 8192, 1e-12);
    if (!(delta > 0.0))
        throw std::invalid_argument("dead_zone: omega*t + f(t) never turns positive");
    return delta;
}

std::vector<double> uniform_grid(double t_max, std::size_t n)
{
    if (!(t_max > 0.0) || n < 2)
        throw std::invalid_argument("uniform_grid: need t_max > 0 and n >= 2");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = t_max * double(i) / double(n - 1);
    return g;
}

Envelope::Envelope(NonlinearityPtr f, double p0, double delta, std::vector<double> grid, std::vector<double> h,
                   std::vector<double> hbar)
    : f_(std::move(f)), p0_(p0), delta_(delta), grid_(std::move(grid)), h_(std::move(h)), hbar_(std::move(hbar))
{
    const std::size_t n = grid_.size();
    if (!f_)
        throw std::invalid_argument("envelope: missing nonlinearity");
    if (n < 3 || h_.size() != n || hbar_.size() != n)
        throw std::invalid_argument("envelope: grid and samples must have equal length >= 3");
    if (grid_[0] != 0.0)
        throw std::invalid_argument("envelope: grid must start at 0");
    for (std::size_t i = 1; i < n; ++i)
        if (!(grid_[i] > grid_[i - 1]))
            throw std::invalid_argument("envelope: grid must be strictly increasing");

    ratio_.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
        ratio_[i] = hbar_[i] / std::pow(grid_[i], p0_);

    H_.assign(n, 0.0);
    Hbar_.assign(n, 0.0);
    qerr_.assign(n, 0.0);
    auto curvature_error = [&](const std::vector<double>& y, std::size_t i) {
        // Δ³/12 · |y''| on [t_{i-1}, t_i], y'' from neighbouring slopes.
        const double d = grid_[i] - grid_[i - 1];
        const double s = (y[i] - y[i - 1]) / d;
        double s_prev = s, s_next = s, span = 2.0 * d;
        if (i >= 2) {
            s_prev = (y[i - 1] - y[i - 2]) / (grid_[i - 1] - grid_[i - 2]);
            span = grid_[i] - grid_[i - 2];
        }
        if (i + 1 < n) {
            s_next = (y[i + 1] - y[i]) / (grid_[i + 1] - grid_[i]);
            span = std::max(span, grid_[i + 1] - grid_[i - 1]);
        }
        const double ypp = 2.0 * std::max(std::abs(s - s_prev), std::abs(s_next - s)) / span;
        return d * d * d / 12.0 * ypp;
    };
    for (std::size_t i = 1; i < n; ++i) {
        const double d = grid_[i] - grid_[i - 1];
        H_[i] = H_[i - 1] + 0.5 * d * (h_[i] + h_[i - 1]);
        Hbar_[i] = Hbar_[i - 1] + 0.5 * d * (hbar_[i] + hbar_[i - 1]);
        const double local = std::max(curvature_error(h_, i), curvature_error(hbar_, i));
        qerr_[i] = qerr_[i - 1] + 2.0 * local + 4e-16 * std::max(std::abs(H_[i]), std::abs(Hbar_[i]));
    }
}

std::size_t Envelope::segment(double t) const
{
    auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    if (it == grid_.begin())
        return 0;
    return std::min(std::size_t(it - grid_.begin()) - 1, grid_.size() - 2);
}

double Envelope::interp(const std::vector<double>& y, double t) const
{
    const std::size_t i = segment(t);
    const double w = (t - grid_[i]) / (grid_[i + 1] - grid_[i]);
    return y[i] + w * (y[i + 1] - y[i]);
}

double Envelope::h(double t) const
{
    if (t < 0.0)
        return -h(-t);
    return std::max(f_->omega() * t + (*f_)(t), 0.0);
}

double Envelope::hbar(double t) const
{
    if (t < 0.0)
        return -hbar(-t);
    if (t == 0.0)
        return 0.0;
    const double tp = std::pow(t, p0_);
    if (t >= grid_.back())
        return ratio_.back() * tp;
    // Between samples follow h itself, clamped to the neighbouring running
    // maxima. Continuous, and equal to h wherever h/t^{p0} is increasing.
    const std::size_t i = segment(t);
    return tp * std::clamp(h(t) / tp, ratio_[i], ratio_[i + 1]);
}

double Envelope::H(double t) const
{
    t = std::abs(t);
    if (t > grid_.back())
        throw std::domain_error("envelope: H evaluated beyond the sampling grid");
    return interp(H_, t);
}

double Envelope::Hbar(double t) const
{
    t = std::abs(t);
    const double t_end = grid_.back();
    if (t > t_end) {
        const double q = p0_ + 1.0;
        return Hbar_.back() + ratio_.back() * (std::pow(t, q) - std::pow(t_end, q)) / q;
    }
    return interp(Hbar_, t);
}

void Envelope::write_csv(std::ostream& os) const
{
    os << "t,h,hbar,H,Hbar\n";
    char buf[160];
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", grid_[i], h_[i], hbar_[i], H_[i], Hbar_[i]);
        os << buf;
    }
}

Envelope build_envelope(NonlinearityPtr f, double p0, std::span<const double> grid, int dimension)
{
    if (!f)
        throw std::invalid_argument("build_envelope: missing nonlinearity");
    if (dimension < 2)
        throw std::invalid_argument("build_envelope: dimension must be >= 2");
    const double upper = dimension == 2 ? std::numeric_limits<double>::infinity()
                                        : double(dimension + 2) / double(dimension - 2);
    if (!(p0 > 1.0 && p0 < upper)) {
        std::ostringstream msg;
        msg << "build_envelope: p0 = " << p0 << " outside (1, " << upper << ")";
        throw std::invalid_argument(msg.str());
    }
    if (grid.size() < 3 || grid[0] != 0.0)
        throw std::invalid_argument("build_envelope: grid must start at 0 and have >= 3 points");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("build_envelope: grid must be strictly increasing");

    const double omega = f->omega();
    const std::size_t n = grid.size();
    std::vector<double> h(n, 0.0), hbar(n, 0.0);
    double running = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double t = grid[i];
        h[i] = std::max(omega * t + (*f)(t), 0.0);
        const double tp = std::pow(t, p0);
        running = std::max(running, h[i] / tp);
        hbar[i] = std::max(tp * running, h[i]);
    }
    const double delta = dead_zone(*f);
    return Envelope(std::move(f), p0, delta, std::vector<double>(grid.begin(), grid.end()), std::move(h),
                    std::move(hbar));
}

namespace {

ConditionReport make_report(ConditionId id, std::vector<std::pair<double, double>> bad, const std::string& ok,
                            const std::string& fail)
{
    ConditionReport r{id, bad.empty() ? Verdict::Holds : Verdict::Fails, std::move(bad), {}};
    if (r.evidence.size() > 16)
        r.evidence.resize(16);
    r.message = r.verdict == Verdict::Holds ? ok : fail;
    return r;
}

} // namespace

std::vector<ConditionReport> verify_envelope_lemmas(const Envelope& e, const Nonlinearity& f)
{
    const auto t = e.grid();
    const auto h = e.h_samples();
    const auto hb = e.hbar_samples();
    const auto H = e.H_samples();
    const auto Hb = e.Hbar_samples();
    const auto qe = e.quadrature_error();
    const double omega = e.omega();
    const double p0 = e.p0();
    const double delta = e.delta();
    const std::size_t n = t.size();
    auto rtol = [](double a) { return 1e-12 * std::max(1.0, std::abs(a)); };

    std::vector<ConditionReport> out;
    std::vector<std::pair<double, double>> bad;

    for (std::size_t i = 0; i < n; ++i) {
        const double lin = omega * t[i] + f(t[i]);
        if (lin > h[i] + rtol(lin))
            bad.emplace_back(t[i], lin - h[i]);
        else if (h[i] > hb[i] + rtol(h[i]))
            bad.emplace_back(t[i], h[i] - hb[i]);
    }
    out.push_back(make_report(ConditionId::h_sandwich, std::move(bad), "omega t + f(t) <= h(t) <= hbar(t) at every grid point",
                              "sandwich omega t + f <= h <= hbar violated"));

    bad.clear();
    for (std::size_t i = 0; i < n; ++i)
        if (h[i] < 0.0 || hb[i] < 0.0)
            bad.emplace_back(t[i], std::min(h[i], hb[i]));
    out.push_back(make_report(ConditionId::h_nonneg, std::move(bad), "h, hbar >= 0", "negative envelope sample"));

    bad.clear();
    if (!(delta > 0.0))
        bad.emplace_back(0.0, delta);
    for (std::size_t i = 0; i < n && t[i] <= delta; ++i)
        if (h[i] != 0.0 || hb[i] != 0.0)
            bad.emplace_back(t[i], std::max(std::abs(h[i]), std::abs(hb[i])));
    {
        std::ostringstream ok;
        ok.precision(17);
        ok << "h = hbar = 0 on [0, delta], delta = " << delta;
        out.push_back(make_report(ConditionId::h_dead_zone, std::move(bad), ok.str(), "envelope nonzero inside dead zone"));
    }

    {
        ConditionReport r{ConditionId::h_witness, Verdict::Inconclusive, {}, "no witness xi with 0 < h(xi) <= hbar(xi) on grid"};
        for (std::size_t i = 0; i < n; ++i)
            if (h[i] > 0.0 && h[i] <= hb[i] + rtol(h[i])) {
                r.verdict = Verdict::Holds;
                r.evidence.emplace_back(t[i], h[i]);
                r.message = "witness xi found on grid";
                break;
            }
        out.push_back(std::move(r));
    }

    bad.clear();
    double prev = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double ratio = hb[i] / std::pow(t[i], p0);
        if (ratio < prev - 1e-12)
            bad.emplace_back(t[i], ratio - prev);
        prev = std::max(prev, ratio);
    }
    out.push_back(make_report(ConditionId::hbar_ratio, std::move(bad), "hbar(t)/t^p0 nondecreasing on grid",
                              "hbar(t)/t^p0 decreases"));

    bad.clear();
    for (std::size_t i = 0; i < n; ++i) {
        const double lower = 0.5 * omega * t[i] * t[i] + f.antideriv(t[i]);
        if (lower > H[i] + qe[i] + rtol(lower))
            bad.emplace_back(t[i], lower - H[i]);
        else if (H[i] > Hb[i] + qe[i] + rtol(H[i]))
            bad.emplace_back(t[i], H[i] - Hb[i]);
    }
    out.push_back(make_report(ConditionId::H_sandwich, std::move(bad), "omega t^2/2 + F(t) <= H(t) <= Hbar(t) on grid",
                              "sandwich omega t^2/2 + F <= H <= Hbar violated"));

    bad.clear();
    for (std::size_t i = 0; i < n; ++i)
        if (H[i] < -qe[i] || Hb[i] < -qe[i])
            bad.emplace_back(t[i], std::min(H[i], Hb[i]));
    out.push_back(make_report(ConditionId::H_nonneg, std::move(bad), "H, Hbar >= 0", "negative primitive"));

    bad.clear();
    for (std::size_t i = 0; i < n && t[i] <= delta; ++i)
        if (H[i] != 0.0 || Hb[i] != 0.0)
            bad.emplace_back(t[i], std::max(std::abs(H[i]), std::abs(Hb[i])));
    out.push_back(make_report(ConditionId::H_dead_zone, std::move(bad), "H = Hbar = 0 on [0, delta]",
                              "primitive nonzero inside dead zone"));

    {
        const double zeta = f.zeta();
        const double gap = e.Hbar(zeta) - 0.5 * omega * zeta * zeta;
        ConditionReport r{ConditionId::Hbar_zeta_gap, gap > 0.0 ? Verdict::Holds : Verdict::Fails, {{zeta, gap}}, {}};
        r.message = gap > 0.0 ? "Hbar(zeta) - omega zeta^2/2 > 0" : "Hbar(zeta) - omega zeta^2/2 <= 0";
        out.push_back(std::move(r));
    }

    bad.clear();
    for (std::size_t i = 0; i < n; ++i) {
        const double lhs = (p0 + 1.0) * Hb[i];
        const double rhs = t[i] * hb[i];
        const double tol = (p0 + 1.0) * qe[i] + rtol(rhs);
        if (lhs < -tol || lhs > rhs + tol)
            bad.emplace_back(t[i], lhs - rhs);
    }
    out.push_back(make_report(ConditionId::Hbar_growth, std::move(bad), "0 <= (p0+1) Hbar(t) <= t hbar(t) on grid",
                              "(p0+1) Hbar(t) <= t hbar(t) violated"));
    return out;
}

NonlinearityPtr aux_problem_nonlinearity(const Envelope& e, double m0)
{
    if (!(m0 > 0.0))
        throw std::invalid_argument("aux_problem_nonlinearity: m0 must be positive");
    auto env = std::make_shared<const Envelope>(e);
    const double omega = e.omega();
    auto fa = [env, omega, m0](double t) { return (env->hbar(t) - omega * t) / m0; };
    auto Fa = [env, omega, m0](double t) { return (env->Hbar(t) - 0.5 * omega * t * t) / m0; };
    const auto g = e.grid();
    nlohmann::json desc = {{"family", "aux"},         {"source", e.source().descriptor()}, {"m0", m0},
                           {"p0", e.p0()},            {"grid_max", g.back()},              {"grid_points", g.size()}};
    return std::make_shared<const Nonlinearity>(fa, Fa, omega / (2.0 * m0), e.source().zeta(),
                                                e.source().growth_exponent(), AuxDerivedFamily{m0, e.p0()},
                                                std::move(desc));
}

} // namespace fieldlab
