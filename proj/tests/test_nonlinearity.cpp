#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "fieldlab/conditions.hpp"
#include "fieldlab/kirchhoff.hpp"
#include "fieldlab/nonlinearity.hpp"

using namespace fieldlab;

namespace {

// Adaptive Simpson, the oracle for antiderivatives.
double adaptive_simpson(const std::function<double(double)>& g, double a, double b, double tol, int depth = 50)
{
    auto simpson = [&](double l, double r) { return (r - l) / 6.0 * (g(l) + 4.0 * g(0.5 * (l + r)) + g(r)); };
    std::function<double(double, double, double, double, int)> rec = [&](double l, double r, double whole,
                                                                           double eps, int d) {
        const double m = 0.5 * (l + r);
        const double left = simpson(l, m), right = simpson(m, r);
        if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
            return left + right + (left + right - whole) / 15.0;
        return rec(l, m, left, eps / 2, d - 1) + rec(m, r, right, eps / 2, d - 1);
    };
    return rec(a, b, simpson(a, b), tol, depth);
}

Verdict verdict(const std::vector<ConditionReport>& rs, ConditionId id) { return find_report(rs, id).verdict; }

} // namespace

TEST_CASE("power nonlinearity values")
{
    const auto f = make_power_nonlinearity(1.0, 3.0, 3);
    CHECK((*f)(2.0) == doctest::Approx(6.0));
    CHECK(f->antideriv(2.0) == doctest::Approx(2.0));
    CHECK(f->omega() == 0.5);
    CHECK(f->zeta() == doctest::Approx(2.0));
    CHECK(f->antideriv(f->zeta()) > 0.0);
    CHECK(f->decay_rate() == doctest::Approx(1.0));
    CHECK(f->descriptor()["family"] == "power");
}

TEST_CASE("power nonlinearity rejects critical and supercritical exponents")
{
    CHECK_THROWS_AS(make_power_nonlinearity(1.0, 5.0, 3), std::invalid_argument);
    CHECK_THROWS_WITH(make_power_nonlinearity(1.0, 6.0, 3), doctest::Contains("(f2)"));
    CHECK_THROWS_AS(make_power_nonlinearity(1.0, 3.0, 4), std::invalid_argument);
    CHECK_NOTHROW(make_power_nonlinearity(1.0, 7.0, 2));
    CHECK_THROWS_AS(make_power_nonlinearity(-1.0, 3.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(make_power_nonlinearity(1.0, 1.0, 3), std::invalid_argument);
}

TEST_CASE("oddness of f and evenness of F")
{
    for (double p : {1.5, 2.0, 3.0, 4.5}) {
        const auto f = make_power_nonlinearity(0.7, p, 3);
        for (double t = 1e-4; t < 1e3; t *= 1.37) {
            CHECK((*f)(-t) == -(*f)(t));
            CHECK(f->antideriv(-t) == f->antideriv(t));
        }
        CHECK(f->antideriv(0.0) == 0.0);
    }
}

TEST_CASE("antiderivative agrees with adaptive quadrature on [0,10]")
{
    for (double p : {1.5, 3.0, 4.0}) {
        const auto f = make_power_nonlinearity(1.3, p, 3);
        for (double t : {0.3, 1.0, 2.5, 7.0, 10.0}) {
            const double ref = adaptive_simpson([&](double x) { return (*f)(x); }, 0.0, t, 1e-14);
            CHECK(std::abs(f->antideriv(t) - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
        }
    }
    for (const auto& M : {make_constant_m(2.0), make_affine_m(1.0, 0.5), make_power_m(1.0, 0.3, 2.0), make_exp_m(0.4)})
        for (double t : {0.5, 3.0, 10.0}) {
            const double ref = adaptive_simpson([&](double x) { return M(x); }, 0.0, t, 1e-14);
            CHECK(std::abs(M.antideriv(t) - ref) <= 1e-10 * std::max(1.0, ref));
        }
}

TEST_CASE("tabulated nonlinearity")
{
    // The first sampling decade [0.1, 1] is linear with slope -1/2.
    const std::vector<double> t{0.0, 0.1, 0.5, 1.0, 2.0, 3.0};
    const std::vector<double> v{0.0, -0.05, -0.25, -0.5, 1.0, 6.0};
    const auto f = make_tabulated_nonlinearity("table", t, v);
    CHECK((*f)(1.5) == doctest::Approx(0.25));
    CHECK((*f)(-1.5) == doctest::Approx(-0.25));
    // ∫_0^2 of the piecewise-linear table = -0.25 + 0.25.
    CHECK(f->antideriv(2.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(f->antideriv(3.0) == doctest::Approx(3.5));
    CHECK(f->omega() == doctest::Approx(0.25));
    CHECK(f->antideriv(f->zeta()) > 0.0);
    CHECK_THROWS_AS(make_tabulated_nonlinearity("bad", std::vector<double>{0.0, 2.0, 1.0},
                                                std::vector<double>{0.0, 1.0, 2.0}),
                    std::invalid_argument);
}

TEST_CASE("first positive root")
{
    const double r = first_positive_root([](double x) { return x * x - 2.0; }, 10.0);
    CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("f conditions on the cubic")
{
    const auto f = make_power_nonlinearity(1.0, 3.0, 3);
    const auto rs = check_f_conditions(*f, 3);
    CHECK(rs.size() == 4);
    for (auto id : {ConditionId::f0, ConditionId::f1p, ConditionId::f2, ConditionId::f3})
        CHECK_MESSAGE(verdict(rs, id) == Verdict::Holds, to_string(id));
}

TEST_CASE("f'1 fails for the pure cubic with evidence")
{
    const auto f = make_power_nonlinearity(0.0, 3.0, 3);
    const auto rs = check_f_conditions(*f, 3);
    const auto& r = find_report(rs, ConditionId::f1p);
    CHECK(r.verdict == Verdict::Fails);
    REQUIRE_FALSE(r.evidence.empty());
    for (auto [t, ratio] : r.evidence)
        CHECK(ratio >= 0.0);
}

TEST_CASE("f conditions reject an empty grid")
{
    const auto f = make_power_nonlinearity(1.0, 3.0, 3);
    CHECK_THROWS_AS(check_f_conditions(*f, 3, SamplingGrid{0, 0, 512}), std::invalid_argument);
}

TEST_CASE("every Fails verdict carries a counterexample")
{
    const auto f = make_power_nonlinearity(0.0, 3.0, 3);
    for (const auto& rs : {check_f_conditions(*f, 3), check_m_conditions(make_affine_m(1.0, 2.0), 4)})
        for (const auto& r : rs)
            if (r.verdict == Verdict::Fails)
                CHECK_FALSE(r.evidence.empty());
}

TEST_CASE("M conditions for the affine family")
{
    const auto rs3 = check_m_conditions(make_affine_m(1.0, 2.0), 3);
    CHECK(verdict(rs3, ConditionId::M1) == Verdict::Holds);
    CHECK(verdict(rs3, ConditionId::M2) == Verdict::Holds);
    CHECK(verdict(rs3, ConditionId::M3) == Verdict::Holds);
    const auto rs4 = check_m_conditions(make_affine_m(1.0, 2.0), 4);
    CHECK(verdict(rs4, ConditionId::M3) == Verdict::Fails);
}

TEST_CASE("M2p holds for the exponential family")
{
    const auto rs = check_m_conditions(make_exp_m(0.5), 3);
    CHECK(verdict(rs, ConditionId::M2p) == Verdict::Holds);
}

TEST_CASE("constant M satisfies every condition in every dimension")
{
    for (int N : {2, 3, 4, 5}) {
        const auto rs = check_m_conditions(make_constant_m(1.0), N);
        CHECK(rs.size() == (N == 2 ? 1u : 4u));
        for (const auto& r : rs)
            CHECK_MESSAGE(r.verdict == Verdict::Holds, N, " ", to_string(r.condition_id));
    }
}

TEST_CASE("decomposition reproduces M")
{
    for (const auto& M : {make_constant_m(1.5), make_affine_m(0.5, 2.0), make_power_m(1.0, 0.25, 2.0)}) {
        REQUIRE(M.decomposition());
        const auto& d = *M.decomposition();
        for (double t = 0.0; t < 100.0; t += 3.7) {
            CHECK(M(t) == doctest::Approx(M.m0() + d.q * d.lambda(t)).epsilon(1e-14));
            CHECK(M(t) >= M.m0());
        }
        CHECK(M.antideriv(0.0) == 0.0);
    }
}

TEST_CASE("Kirchhoff factories reject invalid parameters")
{
    CHECK_THROWS_AS(make_affine_m(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_power_m(1.0, -1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(make_exp_m(0.0), std::invalid_argument);
}

TEST_CASE("vanishing limits are told apart from positive ones")
{
    // f/t^5 ~ t^{-0.1}: slow, but a genuine power decay.
    const auto slow = check_f_conditions(*make_power_nonlinearity(1.0, 4.9, 3), 3);
    CHECK(verdict(slow, ConditionId::f2) == Verdict::Holds);
    // (1 + t)/t decreases towards 1, which is not 0.
    const auto rs = check_m_conditions(make_affine_m(1.0, 1.0), 4);
    CHECK(verdict(rs, ConditionId::M3) == Verdict::Fails);
    CHECK_FALSE(find_report(rs, ConditionId::M3).evidence.empty());
}
