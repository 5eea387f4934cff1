#include "fieldlab/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fieldlab/format.hpp"
#include "fieldlab/functionals.hpp"

namespace fieldlab {

namespace {

double m_checked(const KirchhoffFunction& M, double arg)
{
    const double m = M(arg);
    if (!(M.m0() > 0.0) || !std::isfinite(m) || m < M.m0()) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "solve_transfer: (M1) violated, M(" << arg << ") = " << m << " with m0 = " << M.m0();
        throw std::invalid_argument(msg.str());
    }
    return m;
}

double bisect_root(const std::function<double(double)>& phi, double lo, double hi)
{
    double plo = phi(lo);
    for (int i = 0; i < 400; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        const double pm = phi(mid);
        if (pm == 0.0)
            return mid;
        if ((pm > 0.0) == (plo > 0.0)) {
            lo = mid;
            plo = pm;
        } else {
            hi = mid;
        }
    }
    // Pick whichever end has the smaller residual.
    return std::abs(phi(lo)) <= std::abs(phi(hi)) ? lo : hi;
}

} // namespace

double transfer_map(const RadialProfile& v, const KirchhoffFunction& M, double t)
{
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument("transfer_map: t must be positive and finite");
    const double g = grad_norm_sq(v);
    return M(std::pow(t, 2 - v.dimension) * g) * t * t;
}

RadialProfile build_kt_solution(const RadialProfile& v, double t)
{
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument("build_kt_solution: t must be positive and finite");
    const int N = v.dimension;
    RadialProfile u = v;
    for (double& r : u.radii)
        r /= t;
    for (double& d : u.derivs)
        d *= t;
    if (u.tail) {
        u.tail->match_radius /= t;
        u.tail->decay_rate *= t;
        u.tail->amplitude *= std::pow(t, -0.5 * double(N - 2));
    }
    const double tN = std::pow(t, -N);
    if (u.grad_norm_sq)
        *u.grad_norm_sq *= std::pow(t, 2 - N);
    if (u.l2_norm_sq)
        *u.l2_norm_sq *= tN;
    if (u.integral_F)
        *u.integral_F *= tN;
    return u;
}

TransferResult solve_transfer(std::shared_ptr<const RadialProfile> v, const KirchhoffFunction& M,
                              const TransferOptions& opts)
{
    if (!v)
        throw std::invalid_argument("solve_transfer: null profile");
    if (!(opts.t_min > 0.0) || !(opts.t_max > opts.t_min) || opts.panels < 1)
        throw std::invalid_argument("solve_transfer: need 0 < t_min < t_max and panels >= 1");
    const int N = v->dimension;
    TransferResult res;
    res.source = v;
    res.grad_norm_sq_v = grad_norm_sq(*v);
    const double g = res.grad_norm_sq_v;

    auto h = [&](double t) { return m_checked(M, std::pow(t, 2 - N) * g) * t * t; };
    std::vector<double> candidates;
    if (N == 2) {
        candidates.push_back(1.0 / std::sqrt(m_checked(M, g)));
    } else {
        auto phi = [&](double t) { return h(t) - 1.0; };
        double t_lo = opts.t_min;
        while (phi(t_lo) > 0.0 && t_lo * 1e-3 >= opts.t_floor)
            t_lo *= 1e-3;
        const double ratio = std::log(opts.t_max / t_lo);
        const int panels =
            int(std::ceil(opts.panels * ratio / std::log(opts.t_max / opts.t_min) - 1e-9));
        double t0 = t_lo, p0 = phi(t0);
        if (p0 == 0.0)
            candidates.push_back(t0);
        for (int k = 1; k <= panels; ++k) {
            const double t1 = k == panels ? opts.t_max : t_lo * std::exp(ratio * k / panels);
            const double p1 = phi(t1);
            if (p1 == 0.0)
                candidates.push_back(t1);
            else if (p0 != 0.0 && (p0 > 0.0) != (p1 > 0.0))
                candidates.push_back(bisect_root(phi, t0, t1));
            t0 = t1;
            p0 = p1;
        }
    }

    const Nonlinearity* f = v->f.get();
    for (double t : candidates) {
        const double hres = std::abs(h(t) - 1.0);
        if (!(hres < opts.root_tol)) {
            res.rejected.push_back("t = " + fmt17(t) + " fails the root certificate, |h-1| = " + fmt17(hres));
            continue;
        }
        RadialProfile u = build_kt_solution(*v, t);
        RootDiagnostics d;
        d.h_residual = hres;
        if (f && u.radii.size() >= 7) {
            d.strong_residual = strong_residual(u, M, *f);
            d.nehari_residual = nehari_residual(u, M);
        }
        res.roots.push_back(t);
        res.kirchhoff_grad_norms.push_back(std::pow(t, 2 - N) * g);
        res.diagnostics.push_back(d);
        res.profiles.push_back(std::move(u));
    }
    return res;
}

TransferResult solve_transfer(const RadialProfile& v, const KirchhoffFunction& M, const TransferOptions& opts)
{
    return solve_transfer(std::make_shared<const RadialProfile>(v), M, opts);
}

double q_threshold(const KirchhoffFunction& M, std::span<const RadialProfile> profiles, int n)
{
    const auto& dec = M.decomposition();
    if (!dec)
        throw std::invalid_argument("q_threshold: M carries no decomposition m0 + q·lambda");
    if (n < 1 || std::size_t(n) > profiles.size())
        throw std::invalid_argument("q_threshold: need 1 <= n <= number of profiles");
    const int N = profiles[0].dimension;
    if (N < 3)
        throw std::invalid_argument("q_threshold: defined for N >= 3");
    const double m0 = M.m0();
    const double scale = std::pow(2.0 * m0, 0.5 * (N - 2));
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        worst = std::max(worst, dec->lambda(scale * grad_norm_sq(profiles[std::size_t(i)])));
    return m0 / (1.0 + worst);
}

nlohmann::json threshold_report(const KirchhoffFunction& M, std::span<const RadialProfile> profiles, int n)
{
    const double qn = q_threshold(M, profiles, n);
    const int N = profiles[0].dimension;
    const double scale = std::pow(2.0 * M.m0(), 0.5 * (N - 2));
    nlohmann::json g = nlohmann::json::array(), args = nlohmann::json::array(), lam = nlohmann::json::array();
    for (int i = 0; i < n; ++i) {
        const double gi = grad_norm_sq(profiles[std::size_t(i)]);
        g.push_back(gi);
        args.push_back(scale * gi);
        lam.push_back(M.decomposition()->lambda(scale * gi));
    }
    return {{"n", n},
            {"q_n", qn},
            {"g_values", g},
            {"formula_inputs",
             {{"m0", M.m0()}, {"dimension", N}, {"lambda_arguments", args}, {"lambda_values", lam},
              {"M", M.descriptor()}}}};
}

int count_distinct(std::vector<double> values)
{
    if (values.empty())
        return 0;
    std::sort(values.begin(), values.end());
    int count = 1;
    double anchor = values[0];
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (std::abs(values[i] - anchor) > kDistinctRelSep * std::max(std::abs(values[i]), std::abs(anchor))) {
            ++count;
            anchor = values[i];
        }
    }
    return count;
}

MultiplicityTable multiplicity_sweep(const KirchhoffFamily& family, std::span<const RadialProfile> profiles,
                                     std::span<const double> q_grid, const TransferOptions& opts)
{
    MultiplicityTable table;
    table.family = family.descriptor;
    table.rows.resize(q_grid.size());

    std::vector<std::shared_ptr<const RadialProfile>> shared;
    for (const auto& p : profiles)
        shared.push_back(std::make_shared<const RadialProfile>(p));

    auto run_row = [&](std::size_t k) {
        MultiplicityRow& row = table.rows[k];
        row.q = q_grid[k];
        try {
            const KirchhoffFunction M = family.at(row.q);
            std::vector<std::string> notes;
            for (std::size_t i = 0; i < shared.size(); ++i) {
                const TransferResult r = solve_transfer(shared[i], M, opts);
                for (std::size_t j = 0; j < r.roots.size(); ++j) {
                    row.source_index.push_back(int(i));
                    row.t.push_back(r.roots[j]);
                    row.kt_grad.push_back(r.kirchhoff_grad_norms[j]);
                    row.J.push_back(energy_kt(r.profiles[j], M));
                }
                for (const auto& s : r.rejected)
                    notes.push_back("v" + std::to_string(i + 1) + ": " + s);
            }
            row.n_found = count_distinct(row.kt_grad);
            for (std::size_t i = 0; i < notes.size(); ++i)
                row.diagnostics += (i ? "; " : "") + notes[i];
        } catch (const std::exception& e) {
            row.n_found = 0;
            row.source_index.clear();
            row.t.clear();
            row.kt_grad.clear();
            row.J.clear();
            row.diagnostics = e.what();
        }
    };

    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t block = (q_grid.size() + workers - 1) / workers;
    std::vector<std::future<void>> jobs;
    for (std::size_t start = 0; start < q_grid.size(); start += block)
        jobs.push_back(std::async(std::launch::async, [&, start] {
            for (std::size_t k = start; k < std::min(q_grid.size(), start + block); ++k)
                run_row(k);
        }));
    for (auto& j : jobs)
        j.get();

    if (!q_grid.empty() && !profiles.empty() && profiles[0].dimension >= 3) {
        try {
            const KirchhoffFunction M = family.at(q_grid[0]);
            if (M.decomposition())
                for (int n = 1; n <= int(profiles.size()); ++n)
                    table.q_thresholds.push_back(q_threshold(M, profiles, n));
        } catch (const std::invalid_argument&) {
            table.q_thresholds.clear();
        }
    }
    return table;
}

void write_sweep_csv(std::ostream& os, const MultiplicityTable& table)
{
    std::size_t k = 0;
    for (const auto& r : table.rows)
        k = std::max(k, r.t.size());
    os << "q,n_found";
    for (const char* col : {"t_", "kt_grad_", "J_"})
        for (std::size_t i = 1; i <= k; ++i)
            os << ',' << col << i;
    os << ",diagnostics\n";
    auto cells = [&](const std::vector<double>& v) {
        for (std::size_t i = 0; i < k; ++i) {
            os << ',';
            if (i < v.size())
                os << fmt17(v[i]);
        }
    };
    for (const auto& r : table.rows) {
        os << fmt17(r.q) << ',' << r.n_found;
        cells(r.t);
        cells(r.kt_grad);
        cells(r.J);
        std::string diag = r.diagnostics;
        std::replace(diag.begin(), diag.end(), ',', ';');
        std::replace(diag.begin(), diag.end(), '\n', ' ');
        os << ',' << diag << '\n';
    }
}

} // namespace fieldlab
