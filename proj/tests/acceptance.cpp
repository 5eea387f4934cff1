// Acceptance suite. One PASS/FAIL line per criterion; exit status is the
// number of failures, capped at 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fieldlab/envelope.hpp"
#include "fieldlab/functionals.hpp"
#include "fieldlab/runner.hpp"
#include "fieldlab/shooter.hpp"
#include "fieldlab/transfer.hpp"
#include "oracle/shooting_oracle.hpp"

using namespace fieldlab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            if (detail.size() < 400)
                detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body)
{
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass)
        ++failures;
    std::printf("%s  %2d  %s%s%s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.empty() ? "" : "  | ",
                o.detail.c_str());
    std::fflush(stdout);
}

std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p)
{
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');)
            cells.push_back(c);
        rows.push_back(std::move(cells));
    }
    return rows;
}

const NonlinearityPtr cubic3 = make_power_nonlinearity(1.0, 3.0, 3);
const NonlinearityPtr cubic2 = make_power_nonlinearity(1.0, 3.0, 2);
const KirchhoffFunction one = make_constant_m(1.0);

std::vector<RadialProfile> family3;

} // namespace

int main()
{
    const fs::path work = fs::temp_directory_path() / "fieldlab_acceptance";
    fs::remove_all(work);

    report(1, "N=3 cubic family v1..v5 via solve", [&] {
        Outcome o;
        const json doc = {{"dimension", 3},
                          {"f", {{"family", "power"}, {"mu", 1.0}, {"p", 3.0}}},
                          {"options", {{"n_max", 5}}},
                          {"cache_dir", (work / "cache").string()},
                          {"out_dir", (work / "out").string()}};
        const RunConfig cfg = parse_config(doc, Task::Solve);
        std::ostringstream log;
        const auto t0 = std::chrono::steady_clock::now();
        const int rc = run(cfg, log);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.require(rc == kExitOk, "exit code " + std::to_string(rc));
        o.require(secs < 60.0, "runtime " + num(secs) + " s");
        const auto rows = read_csv(work / "out" / "solve.csv");
        o.require(rows.size() == 5, "rows " + std::to_string(rows.size()));
        double prev_g = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            if (r.size() != 12) {
                o.require(false, "malformed row");
                break;
            }
            o.require(std::stoi(r[1]) == int(i), "nodes " + r[1] + " in row " + std::to_string(i));
            const double g = std::stod(r[3]);
            o.require(g > prev_g, "gradient norm not increasing at row " + std::to_string(i));
            prev_g = g;
            o.require(std::abs(std::stod(r[9])) < 1e-5, "pohozaev " + r[9]);
            o.require(std::abs(std::stod(r[10])) < 1e-5, "nehari " + r[10]);
        }
        // The rest of the suite reuses this family through the cache.
        std::ostringstream log2;
        family3 = cached_family(cfg, log2).profiles;
        o.require(family3.size() == 5, "cached family size");
        o.detail += (o.detail.empty() ? "" : "; ") + std::string("runtime ") + num(secs) + " s";
        return o;
    });

    report(2, "N=2 ground state: |int F| < 1e-5 |grad v|^2", [&] {
        Outcome o;
        const SolutionFamily fam = solution_family(cubic2, 2, 1);
        o.require(fam.profiles.size() == 1, "no ground state");
        if (!o.pass)
            return o;
        const RadialProfile& v = fam.profiles[0];
        const double ratio = std::abs(integral_F(v)) / grad_norm_sq(v);
        o.require(ratio < 1e-5, "ratio " + num(ratio));
        o.detail += (o.detail.empty() ? "" : "; ") + std::string("ratio ") + num(ratio);
        return o;
    });

    report(3, "energy identity I = |grad v|^2/3 on the N=3 family", [&] {
        Outcome o;
        o.require(family3.size() == 5, "family missing");
        double worst = 0.0;
        for (const auto& v : family3) {
            const double g = grad_norm_sq(v);
            worst = std::max(worst, std::abs(energy_sf(v) - g / 3.0) / g);
        }
        o.require(worst < 1e-5, "worst " + num(worst));
        o.detail += (o.detail.empty() ? "" : "; ") + std::string("worst relative ") + num(worst);
        return o;
    });

    report(4, "ground-state heights agree with the RK4 oracle to 6 digits", [&] {
        Outcome o;
        struct Case {
            NonlinearityPtr f;
            int N;
            double lo, hi;
        };
        for (const Case& c : {Case{cubic2, 2, 1.5, 3.0}, Case{cubic3, 3, 1.5, 10.0}}) {
            const double s = find_bound_state(c.f, c.N, 0, {c.lo, c.hi}).shoot_height;
            const double ref = oracle::ground_state_height([&](double t) { return (*c.f)(t); }, c.N, c.lo, c.hi);
            const double rel = std::abs(s - ref) / std::abs(ref);
            o.require(rel < 5e-7, "N=" + std::to_string(c.N) + " rel " + num(rel));
            char buf[96];
            std::snprintf(buf, sizeof buf, "N=%d s=%.10f oracle=%.10f", c.N, s, ref);
            o.detail += (o.detail.empty() ? "" : "; ") + std::string(buf);
        }
        return o;
    });

    report(5, "M = 1 + t: roots exact and rescaled profiles solve the equation", [&] {
        Outcome o;
        const KirchhoffFunction M = make_affine_m(1.0, 1.0);
        for (const auto& v : family3) {
            const double g = grad_norm_sq(v);
            const TransferResult r = solve_transfer(v, M);
            o.require(r.roots.size() == 1, "root count " + std::to_string(r.roots.size()));
            for (std::size_t i = 0; i < r.roots.size(); ++i) {
                const double t = r.roots[i];
                // t² + g t - 1 = 0.
                const double exact = (-g + std::sqrt(g * g + 4.0)) / 2.0;
                o.require(std::abs(transfer_map(v, M, t) - 1.0) < 1e-10, "h residual");
                o.require(std::abs(t - exact) < 1e-10, "t " + num(t) + " vs " + num(exact));
                const double sr = strong_residual(r.profiles[i], M, *cubic3);
                o.require(sr < 1e-4, "strong residual " + num(sr));
            }
        }
        return o;
    });

    report(6, "M = 1 + q t^2: root iff q g^2 < 1, t = sqrt(1 - q g^2)", [&] {
        Outcome o;
        int checked = 0;
        for (const auto& v : family3) {
            const double g = grad_norm_sq(v);
            const double q_star = 1.0 / (g * g);
            for (int k = 0; k < 50; ++k) {
                // Offsets ±0.5%..±24.5% around the threshold, never on it.
                const double q = q_star * (1.0 + (double(k) - 24.5) * 0.01);
                const TransferResult r = solve_transfer(v, make_power_m(1.0, q, 2.0));
                const double c = q * g * g;
                if (c >= 1.0) {
                    o.require(r.roots.empty(), "root above threshold at c=" + num(c));
                } else {
                    o.require(r.roots.size() == 1, "missing root at c=" + num(c));
                    if (r.roots.size() == 1)
                        o.require(std::abs(r.roots[0] - std::sqrt(1.0 - c)) < 1e-10, "t off at c=" + num(c));
                }
                ++checked;
            }
        }
        o.require(checked == 250, "cases " + std::to_string(checked));
        return o;
    });

    report(7, "lambda(t) = t: three distinct solutions below q3", [&] {
        Outcome o;
        const std::span<const RadialProfile> fam(family3);
        const double q3 = q_threshold(make_affine_m(1.0, 1.0), fam, 3);
        KirchhoffFamily family{[](double q) { return make_affine_m(1.0, q); }, {{"family", "affine"}}};
        const std::vector<double> qs{1e-3 * q3, 0.1 * q3, 0.5 * q3, 0.9 * q3, 0.999 * q3};
        const MultiplicityTable table = multiplicity_sweep(family, fam, qs);
        for (const auto& row : table.rows) {
            o.require(row.n_found >= 3, "n_found " + std::to_string(row.n_found) + " at q=" + num(row.q));
            // Independent distinctness count over the reported norms.
            std::vector<double> k = row.kt_grad;
            std::sort(k.begin(), k.end());
            int distinct = k.empty() ? 0 : 1;
            for (std::size_t i = 1; i < k.size(); ++i)
                if ((k[i] - k[i - 1]) > 1e-6 * k[i])
                    ++distinct;
            o.require(distinct >= 3, "distinct " + std::to_string(distinct) + " at q=" + num(row.q));
            const KirchhoffFunction M = make_affine_m(1.0, row.q);
            for (std::size_t i = 0; i < 3; ++i) {
                const double h = transfer_map(family3[i], M, 1.0 / std::sqrt(2.0));
                o.require(h < 1.0, "h(v_" + std::to_string(i + 1) + ") = " + num(h));
            }
        }
        o.detail += (o.detail.empty() ? "" : "; ") + std::string("q3 = ") + num(q3);
        return o;
    });

    report(8, "M = 1 + b t: N=3 always solvable, N=4 crossover at b g = 1", [&] {
        Outcome o;
        for (double b = 1e-3; b <= 1e3 * (1.0 + 1e-12); b *= 10.0)
            for (const auto& v : family3)
                o.require(!solve_transfer(v, make_affine_m(1.0, b)).roots.empty(), "N=3 no root at b=" + num(b));

        // The cubic is critical in four dimensions; p = 2.5 stays subcritical.
        const auto f4 = make_power_nonlinearity(1.0, 2.5, 4);
        const SolutionFamily fam4 = solution_family(f4, 4, 5);
        o.require(fam4.profiles.size() == 5, "N=4 family size " + std::to_string(fam4.profiles.size()));
        std::vector<double> g4;
        for (const auto& v : fam4.profiles)
            g4.push_back(grad_norm_sq(v));
        const double g_min = *std::min_element(g4.begin(), g4.end());
        const double g_max = *std::max_element(g4.begin(), g4.end());
        std::vector<double> bs;
        const int n_grid = 121;
        const double lo = 0.1 / g_max, hi = 10.0 / g_min;
        for (int i = 0; i < n_grid; ++i)
            bs.push_back(lo * std::pow(hi / lo, double(i) / (n_grid - 1)));

        for (std::size_t j = 0; j < fam4.profiles.size(); ++j) {
            const double g = g4[j];
            int first_empty = -1, predicted = -1;
            for (int i = 0; i < n_grid; ++i) {
                const bool empty = solve_transfer(fam4.profiles[j], make_affine_m(1.0, bs[std::size_t(i)])).roots.empty();
                if (empty && first_empty < 0)
                    first_empty = i;
                if (!empty && first_empty >= 0)
                    o.require(false, "root reappears for profile " + std::to_string(j));
                if (predicted < 0 && bs[std::size_t(i)] * g >= 1.0)
                    predicted = i;
            }
            o.require(first_empty >= 0 && std::abs(first_empty - predicted) <= 1,
                      "profile " + std::to_string(j) + " crossover index " + std::to_string(first_empty) +
                          " vs " + std::to_string(predicted));
        }

        KirchhoffFamily family{[](double b) { return make_affine_m(1.0, b); }, {{"family", "affine"}}};
        const MultiplicityTable table = multiplicity_sweep(family, fam4.profiles, bs);
        for (const auto& row : table.rows) {
            int expected = 0;
            for (double g : g4)
                expected += row.q * g < 1.0;
            if (row.q * g_min >= 1.0)
                o.require(row.n_found == 0, "count " + std::to_string(row.n_found) + " at b=" + num(row.q));
            else if (std::abs(row.n_found - expected) > 0) {
                // Only tolerated on the grid step that straddles a threshold.
                bool near = false;
                for (double g : g4)
                    near = near || std::abs(std::log(row.q * g)) < std::log(hi / lo) / (n_grid - 1);
                o.require(near, "count " + std::to_string(row.n_found) + " vs " + std::to_string(expected) +
                                    " at b=" + num(row.q));
            }
        }
        return o;
    });

    report(9, "envelope lemmas on a 10^4-point grid and the corrupted fixture", [&] {
        Outcome o;
        for (double p0 : {default_p0(3), 1.5, 2.0, 4.5}) {
            const Envelope e = build_envelope(cubic3, p0, uniform_grid(100.0, 10000), 3);
            for (const auto& r : verify_envelope_lemmas(e, *cubic3))
                o.require(r.verdict != Verdict::Fails, "p0=" + num(p0) + " " + std::string(to_string(r.condition_id)));
        }
        const Envelope good = build_envelope(cubic3, 3.0, uniform_grid(100.0, 10000), 3);
        std::vector<double> grid(good.grid().begin(), good.grid().end());
        std::vector<double> h(good.h_samples().begin(), good.h_samples().end());
        std::vector<double> hb(good.hbar_samples().begin(), good.hbar_samples().end());
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (grid[i] > 1.0)
                hb[i] *= 0.5;
        const Envelope bad(cubic3, 3.0, good.delta(), grid, h, hb);
        bool caught = false;
        for (const auto& r : verify_envelope_lemmas(bad, *cubic3))
            caught = caught || r.verdict == Verdict::Fails;
        o.require(caught, "corrupted hbar not flagged");
        return o;
    });

    report(10, "scaling identity and its theta derivative", [&] {
        Outcome o;
        const std::vector<KirchhoffFunction> Ms{make_affine_m(1.0, 0.5), make_power_m(1.0, 1e-3, 2.0)};
        for (std::size_t i = 0; i < 3 && i < family3.size(); ++i) {
            const RadialProfile& v = family3[i];
            for (const auto& M : Ms) {
                for (double theta : {-1.0, 0.0, 1.0}) {
                    RadialProfile u = build_kt_solution(v, std::exp(-theta));
                    u.grad_norm_sq.reset();
                    u.l2_norm_sq.reset();
                    u.integral_F.reset();
                    const double tol = 10.0 * quadrature_error(u);
                    const double diff = std::abs(scaled_energy(theta, v, M) - energy_kt(u, M));
                    o.require(diff < tol, "theta=" + num(theta) + " diff " + num(diff) + " tol " + num(tol));
                }
                const double exact = scaled_energy_derivative(0.0, v, M);
                double prev = 0.0;
                for (double h : {0.1, 0.05, 0.025}) {
                    const double fd = (scaled_energy(h, v, M) - scaled_energy(-h, v, M)) / (2.0 * h);
                    const double err = std::abs(fd - exact);
                    if (prev > 0.0) {
                        const double ratio = prev / err;
                        o.require(ratio > 3.5 && ratio < 4.5, "fd ratio " + num(ratio));
                    }
                    prev = err;
                }
            }
        }
        return o;
    });

    report(11, "auxiliary problem ground state: K bounded below by the norm", [&] {
        Outcome o;
        const double p0 = default_p0(3);
        const double m0 = 1.0;
        const Envelope e = build_envelope(cubic3, p0, uniform_grid(100.0, 200001), 3);
        const NonlinearityPtr fa = aux_problem_nonlinearity(e, m0);
        const SolutionFamily fam = solution_family(fa, 3, 1);
        o.require(fam.profiles.size() == 1, "no aux ground state");
        if (!o.pass)
            return o;
        const RadialProfile& u = fam.profiles[0];
        const double norm = m0 * grad_norm_sq(u) + e.omega() * l2_norm_sq(u);
        const double K = energy_aux(u, e, m0);
        const double bound = (0.5 - 1.0 / (p0 + 1.0)) * norm - 1e-6;
        o.require(K >= bound, "K " + num(K) + " < " + num(bound));
        o.require(K > 0.0, "K " + num(K));
        o.detail += (o.detail.empty() ? "" : "; ") + std::string("s=") + num(u.shoot_height) + " K=" + num(K) +
                    " bound=" + num(bound);
        return o;
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
