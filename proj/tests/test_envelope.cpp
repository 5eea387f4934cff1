#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "fieldlab/envelope.hpp"

using namespace fieldlab;

namespace {

const NonlinearityPtr cubic = make_power_nonlinearity(1.0, 3.0, 3);

std::vector<ConditionReport> lemmas_for(const Envelope& e) { return verify_envelope_lemmas(e, e.source()); }

} // namespace

TEST_CASE("dead zone of the cubic")
{
    CHECK(dead_zone(*cubic) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(dead_zone(*make_power_nonlinearity(1.0, 1.0 + 1e-9, 3)), std::invalid_argument);
}

TEST_CASE("default p0")
{
    CHECK(default_p0(3) == 3.0);
    CHECK(default_p0(4) == 2.0);
    CHECK(default_p0(2) == 3.0);
}

TEST_CASE("cubic envelope with p0 = 3")
{
    const Envelope e = build_envelope(cubic, 3.0, uniform_grid(10.0, 10001), 3);
    CHECK(e.delta() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    const auto g = e.grid();
    const auto h = e.h_samples();
    const auto hb = e.hbar_samples();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double t = g[i];
        const double exact = t <= e.delta() ? 0.0 : t * t * t - 0.5 * t;
        CHECK(h[i] == doctest::Approx(exact).epsilon(1e-12));
        // h(τ)/τ³ is nondecreasing, so the running maximum sits at τ = t.
        CHECK(hb[i] == doctest::Approx(h[i]).epsilon(1e-12));
    }
    CHECK(e.h(0.5) == 0.0);
    CHECK(e.hbar(-2.0) == doctest::Approx(-e.hbar(2.0)));
    CHECK(e.Hbar(-2.0) == doctest::Approx(e.Hbar(2.0)));
    // Dead zone: F(ζ) dominates the quadratic part at ζ = 2.
    CHECK(e.Hbar(2.0) - 0.5 * e.omega() * 4.0 > 0.0);
}

TEST_CASE("H and Hbar against closed forms")
{
    const Envelope e = build_envelope(cubic, 3.0, uniform_grid(4.0, 40001), 3);
    const double d = 1.0 / std::sqrt(2.0);
    auto H_exact = [&](double t) {
        if (t <= d)
            return 0.0;
        return (std::pow(t, 4) - std::pow(d, 4)) / 4.0 - (t * t - d * d) / 4.0;
    };
    for (double t : {0.5, 1.0, 2.0, 3.5}) {
        CHECK(e.H(t) == doctest::Approx(H_exact(t)).epsilon(1e-6));
        CHECK(e.Hbar(t) == doctest::Approx(H_exact(t)).epsilon(1e-6));
    }
    CHECK_THROWS_AS(e.H(5.0), std::domain_error);
    CHECK(std::isfinite(e.Hbar(5.0)));
}

TEST_CASE("trapezoid order under grid refinement")
{
    const Envelope coarse = build_envelope(cubic, 2.0, uniform_grid(4.0, 401), 3);
    const Envelope fine = build_envelope(cubic, 2.0, uniform_grid(4.0, 801), 3);
    const Envelope finest = build_envelope(cubic, 2.0, uniform_grid(4.0, 1601), 3);
    const double e1 = std::abs(coarse.H(3.0) - finest.H(3.0));
    const double e2 = std::abs(fine.H(3.0) - finest.H(3.0));
    CHECK(e1 / e2 > 2.5);
}

TEST_CASE("envelope lemmas hold on a 10^4-point grid")
{
    for (double p0 : {1.5, 2.0, 3.0, 4.5}) {
        const Envelope e = build_envelope(cubic, p0, uniform_grid(10.0, 10000), 3);
        for (const auto& r : lemmas_for(e))
            CHECK_MESSAGE(r.verdict != Verdict::Fails, "p0 = ", p0, " ", to_string(r.condition_id), ": ", r.message);
    }
}

TEST_CASE("hbar over t^p0 is nondecreasing")
{
    const auto f = make_power_nonlinearity(2.0, 2.5, 3);
    const Envelope e = build_envelope(f, 2.2, uniform_grid(20.0, 5000), 3);
    const auto g = e.grid();
    const auto hb = e.hbar_samples();
    double prev = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) {
        const double r = hb[i] / std::pow(g[i], 2.2);
        CHECK(r >= prev - 1e-12);
        prev = r;
    }
}

TEST_CASE("corrupted hbar is caught")
{
    const Envelope good = build_envelope(cubic, 3.0, uniform_grid(10.0, 10000), 3);
    std::vector<double> grid(good.grid().begin(), good.grid().end());
    std::vector<double> h(good.h_samples().begin(), good.h_samples().end());
    std::vector<double> hb(good.hbar_samples().begin(), good.hbar_samples().end());
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] > 1.0)
            hb[i] *= 0.5;
    const Envelope bad(cubic, 3.0, good.delta(), grid, h, hb);
    const auto rs = lemmas_for(bad);
    const auto& r = find_report(rs, ConditionId::h_sandwich);
    CHECK(r.verdict == Verdict::Fails);
    CHECK_FALSE(r.evidence.empty());
}

TEST_CASE("hbar is continuous and matches h off the grid")
{
    const Envelope e = build_envelope(cubic, 3.0, uniform_grid(10.0, 1001), 3);
    for (double t : {0.8, 1.2345, 3.3333, 9.99}) {
        CHECK(e.hbar(t) == doctest::Approx(t * t * t - 0.5 * t).epsilon(1e-13));
        CHECK(std::abs(e.hbar(t + 1e-9) - e.hbar(t)) < 1e-6);
    }
    const auto g = e.grid();
    const auto hb = e.hbar_samples();
    for (std::size_t i = 1; i < g.size(); i += 97)
        CHECK(e.hbar(g[i]) == doctest::Approx(hb[i]).epsilon(1e-13));
    // With p0 below the cubic growth the running maximum freezes in places;
    // hbar/t^{p0} must still never decrease between samples.
    const Envelope low = build_envelope(make_power_nonlinearity(1.0, 1.5, 3), 2.0, uniform_grid(5.0, 501), 3);
    double prev = 0.0;
    for (double t = 0.01; t < 5.0; t += 0.0037) {
        const double r = low.hbar(t) / (t * t);
        CHECK(r >= prev - 1e-12);
        prev = r;
    }
}

TEST_CASE("build_envelope rejects bad input")
{
    CHECK_THROWS_AS(build_envelope(cubic, 5.0, uniform_grid(10.0, 100), 3), std::invalid_argument);
    CHECK_THROWS_AS(build_envelope(cubic, 1.0, uniform_grid(10.0, 100), 3), std::invalid_argument);
    const std::vector<double> unsorted{0.0, 1.0, 0.5, 2.0};
    CHECK_THROWS_AS(build_envelope(cubic, 2.0, unsorted, 3), std::invalid_argument);
}

TEST_CASE("auxiliary nonlinearity")
{
    const Envelope e = build_envelope(cubic, 3.0, uniform_grid(50.0, 20001), 3);
    const auto a1 = aux_problem_nonlinearity(e, 1.0);
    const auto a2 = aux_problem_nonlinearity(e, 2.0);
    CHECK(a1->omega() == doctest::Approx(0.25));
    CHECK(a2->omega() == doctest::Approx(0.125));
    CHECK((*a1)(0.3) / 0.3 == doctest::Approx(-0.5));
    CHECK((*a1)(2.0) == doctest::Approx(e.hbar(2.0) - 1.0));
    CHECK((*a1)(-1.7) == doctest::Approx(-(*a1)(1.7)));
    CHECK(a1->antideriv(a1->zeta()) > 0.0);
    CHECK(a1->descriptor()["family"] == "aux");
    CHECK_THROWS_AS(aux_problem_nonlinearity(e, 0.0), std::invalid_argument);
}

TEST_CASE("envelope CSV")
{
    const Envelope e = build_envelope(cubic, 3.0, uniform_grid(2.0, 5), 3);
    std::ostringstream os;
    e.write_csv(os);
    const std::string s = os.str();
    CHECK(s.rfind("t,h,hbar,H,Hbar\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 6);
}
